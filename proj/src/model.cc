// src/model.cc

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

#include "ivex/model.h"

namespace ivex {

BlockPartition Partition(int total_frames, int block_len) {
  if (total_frames <= 0)
    throw DataError("invalid input: partition needs at least one frame");
  if (block_len <= 0)
    throw DataError("invalid input: block length must be positive");
  BlockPartition part;
  part.total_frames = total_frames;
  part.block_len = block_len;
  part.block_count = (total_frames + block_len - 1) / block_len;
  return part;
}

std::vector<std::vector<CMat>> BlockCovariances(const ComplexSpectrogram& x,
                                                const BlockPartition& part) {
  if (x.Frames() != part.total_frames)
    throw DataError("invalid input: partition does not match spectrogram");
  const int bins = x.Bins();
  const int d = x.Channels();
  std::vector<std::vector<CMat>> cov(bins);
  for (int k = 0; k < bins; ++k) {
    cov[k].reserve(part.block_count);
    for (int t = 0; t < part.block_count; ++t) {
      const int begin = part.BlockBegin(t);
      const int n = part.BlockSize(t);
      CMat acc = CMat::Zero(d, d);
      acc.selfadjointView<Eigen::Lower>().rankUpdate(
          x.data[k].middleCols(begin, n), 1.0 / n);
      // Mirror the computed lower triangle so the stored matrix is exactly
      // Hermitian.
      CMat full = acc.selfadjointView<Eigen::Lower>();
      cov[k].push_back(std::move(full));
    }
  }
  return cov;
}

}  // namespace ivex
