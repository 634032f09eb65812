// include/ivex/simkit.h

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

#ifndef IVEX_SIMKIT_H_
#define IVEX_SIMKIT_H_

#include <cstdint>
#include <vector>

#include "ivex/model.h"

namespace ivex {

enum class MixingKind { kInstantaneous, kFir, kBlockVarying };

// Synthetic scene description. Sources are num_speakers speech-like signals
// plus an optional Gaussian noise source; microphones see them through the
// selected mixing. sir_db fixes the first-microphone energy ratio between
// speaker 1 and the remaining speakers, snr_db the ratio of all speech to
// noise. Everything is a pure function of the seed.
struct Scenario {
  int num_channels = 4;
  int num_speakers = 2;
  bool noise = true;
  double duration_s = 8.0;
  int sample_rate = 16000;
  MixingKind mixing = MixingKind::kInstantaneous;
  int fir_taps = 16;           // kFir
  int num_mixing_blocks = 8;   // kBlockVarying: trajectory length
  double movement = 0.5;       // kBlockVarying: how far matrices drift
  double sir_db = 0.0;
  double snr_db = 10.0;
  double pause_density = 0.3;  // fraction of time each speaker is silent
  double peak = 0.9;           // final mixture peak magnitude
  uint64_t seed = 0;
};

// Speech-like sources (Laplacian excitation through a slowly wandering
// resonance, syllabic envelope, on/off activity) followed by the noise
// source when enabled. Active-region RMS is 1 for every speaker.
MultiSignal GenSources(const Scenario& scenario);

struct MixOutput {
  MultiSignal mixture;             // channels x samples
  std::vector<MultiSignal> stems;  // per source: its image at every mic
  double realized_sir_db = 0.0;
  double realized_snr_db = 0.0;
  // Effective per-block mixing (gains and peak normalization folded in);
  // a single entry for static mixing. Empty for kFir, which is described by
  // taps rather than matrices.
  std::vector<Eigen::MatrixXd> block_matrices;
  int block_len_samples = 0;
};

// Mixes sources into microphone images, solves the source gains so the
// realized SIR/SNR hit the scenario targets exactly, and peak-normalizes.
// The mixture equals the sum of the returned stems to the last bit.
// Generated mixing matrices are regenerated until their condition number is
// at most 100. Throws DataError("cannot set SIR against silent source")
// when a gain has no energy to work against.
MixOutput Mix(const MultiSignal& sources, const Scenario& scenario);

// Same, with caller-provided per-block matrices (hold interpolation).
// Static mixing is the single-block case of this routine, so a trajectory
// of identical matrices reproduces it bit for bit.
MixOutput MixWithMatrices(const MultiSignal& sources,
                          const std::vector<Eigen::MatrixXd>& block_matrices,
                          const Scenario& scenario);

// Reference bundle for a designated target speaker: first-mic images of the
// target, the other speakers, and noise.
SourceRoles RolesFromStems(const MixOutput& mix, const Scenario& scenario,
                           int soi_index = 0);

}  // namespace ivex

#endif  // IVEX_SIMKIT_H_
