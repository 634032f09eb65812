// include/ivex/pilot.h

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

#ifndef IVEX_PILOT_H_
#define IVEX_PILOT_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ivex/model.h"

namespace ivex {

// Per-frame speaker activity scores, one column per enrolled speaker.
// theta_min holds optional per-speaker activity floors; speakers without an
// entry have no floor.
struct ScoreTable {
  std::vector<std::string> roster;
  std::vector<std::vector<double>> frame_scores;  // [frame][speaker]
  std::map<std::string, double> theta_min;

  int Frames() const { return static_cast<int>(frame_scores.size()); }
  int Speakers() const { return static_cast<int>(roster.size()); }
  double ThetaMin(const std::string& speaker_id) const;
  int SpeakerIndex(const std::string& speaker_id) const;  // -1 when absent
};

// Guide energies for the solver. values[l] is the first-channel frame energy
// where mask[l] is set and zero elsewhere, so silent frames and undominated
// frames contribute nothing.
struct PilotTrack {
  enum class Provenance { kOracle, kScoreTable, kCustom };
  std::vector<double> values;
  std::vector<bool> mask;
  Provenance provenance = Provenance::kCustom;
};

// Ground-truth dominance: frame l is marked when the target reference's
// frame energy strictly exceeds `dominance_threshold` times the summed frame
// energy of all remaining references (background channels plus noise).
// Requires the target reference and at least one competing reference;
// otherwise throws DataError("oracle pilot requires reference stems").
std::vector<bool> OracleMask(const SourceRoles& roles, const FrameSpec& spec,
                             double dominance_threshold = 2.0);

// Score-driven dominance: frame l is marked when the target's score strictly
// exceeds every other enrolled speaker's score and its activity floor.
// Throws DataError("SOI not in enrollment set") for an unknown speaker.
std::vector<bool> ScoreMask(const ScoreTable& table,
                            const std::string& soi_id);

// Assembles the pilot from a dominance mask: masked frames carry the
// first-channel frame energy of x, other frames zero.
PilotTrack BuildPilot(const ComplexSpectrogram& x,
                      const std::vector<bool>& mask,
                      PilotTrack::Provenance provenance);

// Degrades a dominance mask for robustness studies: a fraction of the
// target-dominant frames is dropped and replaced by frames dominated by the
// competition. Frames with comparable target/background energy are swapped
// first; strongly dominant frames go last. soi_energy and
// background_energy supply the per-frame energies that rank the swap order.
// Deterministic for a fixed seed (the seed only breaks exact ranking ties).
std::vector<bool> CorruptMask(const std::vector<bool>& soi_dominant,
                              double swap_fraction,
                              const std::vector<bool>& interferer_dominant,
                              const std::vector<double>& soi_energy,
                              const std::vector<double>& background_energy,
                              uint64_t seed);

// Nearest-frame alignment between an externally produced mask and the
// mixture's frame count; differences of at most one frame are absorbed,
// anything larger is an error.
std::vector<bool> AlignMask(const std::vector<bool>& mask, int frames);

}  // namespace ivex

#endif  // IVEX_PILOT_H_
