// src/pilot.cc

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

#include "ivex/pilot.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ivex/rng.h"
#include "ivex/stft.h"

namespace ivex {

double ScoreTable::ThetaMin(const std::string& speaker_id) const {
  auto it = theta_min.find(speaker_id);
  if (it == theta_min.end())
    return -std::numeric_limits<double>::infinity();
  return it->second;
}

int ScoreTable::SpeakerIndex(const std::string& speaker_id) const {
  for (size_t i = 0; i < roster.size(); ++i) {
    if (roster[i] == speaker_id) return static_cast<int>(i);
  }
  return -1;
}

std::vector<bool> OracleMask(const SourceRoles& roles, const FrameSpec& spec,
                             double dominance_threshold) {
  if (roles.soi.empty() || (roles.background.empty() && roles.noise.empty()))
    throw DataError("oracle pilot requires reference stems");
  if (!(dominance_threshold > 0.0))
    throw DataError("invalid input: dominance threshold must be positive");
  const size_t len = roles.soi.size();
  for (const Signal& bg : roles.background) {
    if (bg.size() != len)
      throw DataError("invalid input: reference length mismatch");
  }
  if (!roles.noise.empty() && roles.noise.size() != len)
    throw DataError("invalid input: reference length mismatch");

  const ComplexSpectrogram soi_sg =
      Analyze({roles.soi}, spec, roles.sample_rate);
  std::vector<double> soi_energy = FrameEnergies(soi_sg, 0);
  std::vector<double> competition(soi_energy.size(), 0.0);
  auto add_energy = [&](const Signal& sig) {
    const ComplexSpectrogram sg = Analyze({sig}, spec, roles.sample_rate);
    const std::vector<double> e = FrameEnergies(sg, 0);
    for (size_t l = 0; l < competition.size(); ++l) competition[l] += e[l];
  };
  for (const Signal& bg : roles.background) add_energy(bg);
  if (!roles.noise.empty()) add_energy(roles.noise);

  std::vector<bool> mask(soi_energy.size(), false);
  for (size_t l = 0; l < mask.size(); ++l)
    mask[l] = soi_energy[l] > dominance_threshold * competition[l];
  return mask;
}

std::vector<bool> ScoreMask(const ScoreTable& table,
                            const std::string& soi_id) {
  const int soi = table.SpeakerIndex(soi_id);
  if (soi < 0) throw DataError("SOI not in enrollment set: " + soi_id);
  const double floor = table.ThetaMin(soi_id);
  std::vector<bool> mask(table.Frames(), false);
  for (int l = 0; l < table.Frames(); ++l) {
    const std::vector<double>& row = table.frame_scores[l];
    if (static_cast<int>(row.size()) != table.Speakers())
      throw DataError("invalid input: score row does not cover the roster");
    const double own = row[soi];
    bool dominant = own > floor;
    for (int j = 0; dominant && j < table.Speakers(); ++j) {
      if (j == soi) continue;
      if (!(own > row[j])) dominant = false;
    }
    mask[l] = dominant;
  }
  return mask;
}

PilotTrack BuildPilot(const ComplexSpectrogram& x,
                      const std::vector<bool>& mask,
                      PilotTrack::Provenance provenance) {
  if (static_cast<int>(mask.size()) != x.Frames())
    throw DataError("invalid input: mask length does not match spectrogram");
  PilotTrack track;
  track.mask = mask;
  track.provenance = provenance;
  const std::vector<double> energy = FrameEnergies(x, 0);
  track.values.assign(mask.size(), 0.0);
  for (size_t l = 0; l < mask.size(); ++l) {
    if (!mask[l]) continue;
    if (energy[l] > 0.0) {
      track.values[l] = energy[l];
    } else {
      // A dominant but silent frame carries no usable energy; unmark it so
      // values[l] > 0 exactly where mask[l] is set.
      track.mask[l] = false;
    }
  }
  return track;
}

std::vector<bool> CorruptMask(const std::vector<bool>& soi_dominant,
                              double swap_fraction,
                              const std::vector<bool>& interferer_dominant,
                              const std::vector<double>& soi_energy,
                              const std::vector<double>& background_energy,
                              uint64_t seed) {
  const size_t n = soi_dominant.size();
  if (interferer_dominant.size() != n || soi_energy.size() != n ||
      background_energy.size() != n)
    throw DataError("invalid input: corrupt_mask length mismatch");
  if (!(swap_fraction >= 0.0 && swap_fraction <= 1.0))
    throw DataError("invalid input: swap fraction must be in [0, 1]");

  // Rank each pool by how close the energies are; ties are permuted by the
  // seed so the selection stays deterministic.
  Rng rng(seed);
  std::vector<uint64_t> jitter(n);
  for (size_t l = 0; l < n; ++l) jitter[l] = rng.Raw();

  struct Ranked {
    double margin;
    uint64_t tie;
    size_t index;
  };
  auto ranked_pool = [&](const std::vector<bool>& pool, bool soi_side) {
    std::vector<Ranked> out;
    for (size_t l = 0; l < n; ++l) {
      if (!pool[l]) continue;
      const double num = soi_side ? soi_energy[l] : background_energy[l];
      const double den = soi_side ? background_energy[l] : soi_energy[l];
      out.push_back({num / (den + 1e-300), jitter[l], l});
    }
    std::sort(out.begin(), out.end(), [](const Ranked& a, const Ranked& b) {
      if (a.margin != b.margin) return a.margin < b.margin;
      if (a.tie != b.tie) return a.tie < b.tie;
      return a.index < b.index;
    });
    return out;
  };

  const std::vector<Ranked> soi_pool = ranked_pool(soi_dominant, true);
  const std::vector<Ranked> interferer_pool =
      ranked_pool(interferer_dominant, false);
  const size_t swaps = static_cast<size_t>(
      std::llround(swap_fraction * static_cast<double>(soi_pool.size())));

  std::vector<bool> out = soi_dominant;
  for (size_t i = 0; i < swaps && i < soi_pool.size(); ++i)
    out[soi_pool[i].index] = false;
  for (size_t i = 0; i < swaps && i < interferer_pool.size(); ++i)
    out[interferer_pool[i].index] = true;
  return out;
}

std::vector<bool> AlignMask(const std::vector<bool>& mask, int frames) {
  const int have = static_cast<int>(mask.size());
  if (have == frames) return mask;
  if (std::abs(have - frames) > 1) {
    throw DataError("invalid input: score table covers " +
                    std::to_string(have) + " frames but the mixture has " +
                    std::to_string(frames));
  }
  std::vector<bool> out = mask;
  if (have > frames) {
    out.resize(frames);
  } else {
    out.push_back(have > 0 ? mask.back() : false);
  }
  return out;
}

}  // namespace ivex
