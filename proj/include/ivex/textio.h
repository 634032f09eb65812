// include/ivex/textio.h

// Copyright 2026  ivex authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef IVEX_TEXTIO_H_
#define IVEX_TEXTIO_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ivex/pilot.h"
#include "ivex/simkit.h"

namespace ivex {

// Shortest round-trip decimal for a double.
std::string FormatG17(double v);

double ParseDoubleStrict(const std::string& s);
long long ParseIntStrict(const std::string& s);

// Ordered key=value text files. Lines starting with '#' and blank lines are
// skipped on read; order is preserved so writes are deterministic.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

void WriteKeyValues(const std::string& path, const KeyValues& kv);
KeyValues ReadKeyValuesFile(const std::string& path);

// First value for key, or nullptr.
const std::string* FindKey(const KeyValues& kv, const std::string& key);

// Scenario round-trip. Reading ignores keys it does not know (manifests
// carry realized values and file lists on top of the scenario), so a written
// manifest replays to the same scene.
KeyValues ScenarioToKeyValues(const Scenario& scenario);
Scenario ScenarioFromKeyValues(const KeyValues& kv);

std::string MixingKindName(MixingKind kind);
MixingKind MixingKindFromName(const std::string& name);

// Per-frame speaker scores as CSV: header "frame,<id>,...", then one row per
// frame with a consecutive zero-based frame index. Activity floors travel in
// the separate theta-min side file below.
void WriteScoreTable(const std::string& path, const ScoreTable& table);
ScoreTable ReadScoreTable(const std::string& path);

// Side file of per-speaker activity floors, rows "speaker_id,theta_min".
void WriteThetaMinFile(const std::string& path,
                       const std::map<std::string, double>& floors);
std::map<std::string, double> ReadThetaMinFile(const std::string& path);

// Utterance-level scores, rows "signal_name,speaker_id,score".
struct UtteranceScore {
  std::string signal_name;
  std::string speaker_id;
  double score = 0.0;
};
void WriteUtteranceScores(const std::string& path,
                          const std::vector<UtteranceScore>& rows);
std::vector<UtteranceScore> ReadUtteranceScores(const std::string& path);

void WriteLines(const std::string& path,
                const std::vector<std::string>& lines);
std::vector<std::string> ReadAllLines(const std::string& path);

}  // namespace ivex

#endif  // IVEX_TEXTIO_H_
