// include/ivex/assess.h

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

#ifndef IVEX_ASSESS_H_
#define IVEX_ASSESS_H_

#include <map>
#include <string>

#include "ivex/common.h"

namespace ivex {

enum class Choice { kA, kB };

enum class OutcomeCategory { kUnwantedSource, kNoSource, kSoiExtracted };

const char* ToString(OutcomeCategory category);

// Similarity of a candidate to a clean reference: the maximum normalized
// cross-correlation magnitude over lags up to +-max_lag_ms, passed through a
// log. Higher is better; a silent candidate scores the log of the numeric
// floor. Used as the oracle utterance score when clean references exist.
double NormalizedXcorrScore(const Signal& candidate, const Signal& reference,
                            int sample_rate, double max_lag_ms = 10.0);

// Utterance scoring for target-presence decisions. The oracle backend
// scores any candidate against a stored clean reference; the table backend
// looks scores up by candidate name (scores are resolved for one designated
// speaker when the table is built) and throws
// DataError("unscored signal ...") for names it does not know.
struct AssessmentBackend {
  enum class Kind { kOracleReference, kUtteranceScores };

  Kind kind = Kind::kOracleReference;
  Signal reference;
  int sample_rate = 0;
  double max_lag_ms = 10.0;
  std::map<std::string, double> scores;

  static AssessmentBackend Oracle(Signal reference, int sample_rate);
  static AssessmentBackend Table(std::map<std::string, double> scores);

  double Score(const std::string& name, const Signal& candidate) const;
};

// Picks the candidate whose utterance score is strictly higher; ties go to
// candidate B, the incumbent. Candidates must have equal length.
Choice Assess(const Signal& candidate_a, const Signal& candidate_b,
              const std::string& name_a, const std::string& name_b,
              const AssessmentBackend& backend);

// Maps an SDR improvement (dB) to the extraction outcome: below -2 the
// output tracks an unwanted source, above +2 the target, and the closed
// band [-2, +2] is counted as no extraction.
OutcomeCategory Categorize(double isdr_db);

}  // namespace ivex

#endif  // IVEX_ASSESS_H_
