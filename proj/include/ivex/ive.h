// include/ivex/ive.h

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

#ifndef IVEX_IVE_H_
#define IVEX_IVE_H_

#include <functional>
#include <vector>

#include "ivex/model.h"

namespace ivex {

// kFs solves the whole recording as one block. kCsv keeps one separating
// vector per frequency but block-wise mixing statistics, which lets the
// model follow sources that move between blocks. kBs re-solves each sliding
// block independently, warm-started from the previous block, with
// recursively smoothed statistics; its output is stitched frame-wise from
// the most recent block that covered each frame.
enum class SolverMode { kFs, kCsv, kBs };

enum class InitKind { kOnes, kUnitVector, kCustom };

struct SolverConfig {
  SolverMode mode = SolverMode::kCsv;
  int iterations = 50;   // per block in kBs mode (5 is the usual choice there)
  int block_len = 200;   // frames per block (kCsv, kBs)
  int block_shift = 0;   // kBs sliding step; 0 means block_len / 4
  double forgetting = 0.3;  // kBs weight on the newest block statistics
  InitKind init = InitKind::kOnes;
  int init_channel = 0;            // for kUnitVector
  std::vector<CVec> init_custom;   // for kCustom, one vector per bin
  // Optional per-frame guide energies added under the square root of the
  // frame norm; empty means unguided. Values must be nonnegative.
  std::vector<double> pilot;
  // Strength of the guide relative to the separator's own output energy.
  // The per-iteration normalization fixes the output scale, so raw guide
  // energies are rescaled to a comparable level before being applied; this
  // factor multiplies that level. Zero disables the guide.
  double pilot_gain = 30.0;
  double convergence_tol = 1e-6;
};

// Called after every completed iteration with the running iteration count
// (1-based, cumulative across blocks in kBs mode) and the solver state;
// intended for tracing and invariant checks.
using IterationObserver = std::function<void(
    int iteration, const DemixingState& state, const BlockPartition& part)>;

// Frame norm r = sqrt(sum_k |u_k|^2 + pilot_value): the across-frequency
// magnitude of the current source estimate at one frame, optionally biased
// by a pilot energy. pilot_value must be >= 0.
double AuxiliaryR(const CVec& u, double pilot_value);

// Nonlinearity-weighted block covariance (1/n) sum_l x_l x_l^H / r_l for the
// super-Gaussian contrast (weight 1/r). r values must be positive; the
// solver clamps them before calling. Exactly Hermitian by construction.
CMat WeightedCovariance(const Eigen::Ref<const CMat>& x_block,
                        const Eigen::Ref<const Eigen::VectorXd>& r);

// Gain-constrained mixing vector a = cov w / (w^H cov w). Satisfies
// w^H a == 1. Throws NumericalError("degenerate SOI variance on block")
// when the quadratic form vanishes.
CVec OgcMixingVector(const CMat& cov, const CVec& w);

// Block scale sigma = sqrt(w^H cov w). Throws
// NumericalError("covariance not PSD") if the form is negative beyond
// rounding tolerance.
double SoiScale(const CMat& cov, const CVec& w);

// One separating-vector update at a single frequency:
//   w_new = (sum_t wcov_t / sigma_t^2)^{-1} sum_t (w^H wcov_t w / sigma_t^2) a_t
// solved as a linear system. On a singular accumulated matrix a Tikhonov
// ridge 1e-9 * trace / d is added once; if that also fails, throws
// NumericalError("rank-deficient block statistics").
CVec UpdateW(const std::vector<CMat>& wcov, const std::vector<CVec>& a,
             const std::vector<double>& sigma, const CVec& w);

// Rescales every w[k] so that sum_t w^H wcov w == 1. Throws
// NumericalError("null separating vector") if the accumulated form is not
// positive.
void NormalizeW(std::vector<CVec>* w,
                const std::vector<std::vector<CMat>>& wcov);

// Full extraction run in the configured mode. Requires at least two
// channels. The returned state satisfies the consistency listed on
// DemixingState; for kBs it describes the final block and the stitched
// outputs cover all frames.
ExtractionResult Run(const ComplexSpectrogram& x, const SolverConfig& cfg,
                     const IterationObserver& observer = {});

}  // namespace ivex

#endif  // IVEX_IVE_H_
