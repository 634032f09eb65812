// include/ivex/model.h

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

#ifndef IVEX_MODEL_H_
#define IVEX_MODEL_H_

#include <vector>

#include "ivex/stft.h"

namespace ivex {

// Division of the frame axis into contiguous blocks of `block_len` frames.
// The final block keeps the remainder, so it may be shorter; every frame
// belongs to exactly one block.
struct BlockPartition {
  int total_frames = 0;
  int block_len = 0;
  int block_count = 0;

  int BlockOf(int frame) const { return frame / block_len; }
  int BlockBegin(int t) const { return t * block_len; }
  int BlockEnd(int t) const {
    int end = (t + 1) * block_len;
    return end < total_frames ? end : total_frames;
  }
  int BlockSize(int t) const { return BlockEnd(t) - BlockBegin(t); }
};

BlockPartition Partition(int total_frames, int block_len);

// Separator state for one extraction run. The separating vector w is shared
// by all blocks of a frequency; the mixing vector a, the block covariance
// cov, its nonlinearity-weighted counterpart wcov, and the per-block scale
// sigma are maintained per (frequency, block).
//
// Consistency kept by the solver after every iteration:
//   w[k]^H a[k][t] == 1          (gain-constrained mixing estimate)
//   sum_t w[k]^H wcov[k][t] w[k] == 1   (post-update normalization)
//   cov, wcov Hermitian; sigma[k][t]^2 == w[k]^H cov[k][t] w[k] >= 0
struct DemixingState {
  std::vector<CVec> w;                    // [k], each d
  std::vector<std::vector<CVec>> a;       // [k][t], each d
  std::vector<std::vector<CMat>> cov;     // [k][t], d x d
  std::vector<std::vector<CMat>> wcov;    // [k][t], d x d
  std::vector<std::vector<double>> sigma;  // [k][t]
};

// Outcome of one solver run.
struct ExtractionResult {
  // Raw separator output u[k][l] = w[k]^H x[k][l], one channel.
  ComplexSpectrogram soi_estimate;
  // u rescaled per (k, block) by the first mixing coefficient a[k][t](0);
  // this estimates the source image at the first microphone and is the
  // signal written out and assessed downstream.
  ComplexSpectrogram soi_image;
  DemixingState state;
  BlockPartition partition;
  int iterations_run = 0;
  bool converged = false;
  std::vector<double> delta_w_trace;  // max_k ||w change|| per iteration
};

// Time-domain reference signals for one designated target: the target's
// image at the first microphone, one background channel per remaining
// speaker, and optionally a noise image. All share length and sample rate.
struct SourceRoles {
  int sample_rate = 0;
  Signal soi;
  MultiSignal background;
  Signal noise;  // empty when the scene has no noise source
};

// Per-frequency, per-block sample covariances (1/n_t) sum_l x x^H of a
// multichannel spectrogram. Exactly Hermitian by construction.
std::vector<std::vector<CMat>> BlockCovariances(const ComplexSpectrogram& x,
                                                const BlockPartition& part);

}  // namespace ivex

#endif  // IVEX_MODEL_H_
