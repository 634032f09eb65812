// include/ivex/metrics.h

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

#ifndef IVEX_METRICS_H_
#define IVEX_METRICS_H_

#include <vector>

#include "ivex/model.h"
#include "ivex/stft.h"

namespace ivex {

// Least-squares split of an estimate into the part explained by short
// filters applied to each reference and what is left over. target is the
// projection onto the delay span of the chosen reference alone,
// interference the rest of the joint projection, artifact the residual.
// Components have length estimate + filter_len - 1 (the filtered span) and
// sum back to the zero-padded estimate; the three parts are mutually
// orthogonal. regularized flags a rank-deficient reference Gram matrix that
// needed a ridge to solve.
struct Decomposition {
  Signal target;
  Signal interference;
  Signal artifact;
  bool regularized = false;
};

Decomposition Decompose(const Signal& estimate,
                        const std::vector<Signal>& references, int soi_index,
                        int filter_len = 512);

// Energy ratios of a decomposition in dB, clamped to [-100, 100]. A zero
// numerator pins the ratio at -100, a zero denominator at +100.
struct RatioPair {
  double sir_db = 0.0;
  double sdr_db = 0.0;
};

RatioPair SirSdr(const Decomposition& parts);

double ClampedRatioDb(double numerator, double denominator);

// Spread of the per-frame energy ratio between an estimate and the matching
// reference, over frames where the reference is within 40 dB of its loudest
// frame. A time-varying extraction gain shows up here as a large spread.
double AttenuationStd(const Signal& estimate, const Signal& reference,
                      const FrameSpec& spec);

struct IntervalScore {
  double begin_s = 0.0;
  double end_s = 0.0;
  double sir_db = 0.0;
  double sdr_db = 0.0;
  double isir_db = 0.0;
  double isdr_db = 0.0;
};

struct EvalOptions {
  int filter_len = 512;
  bool windowed = false;     // score fixed windows instead of the whole take
  double window_s = 1.0;
  double silence_rel = 1e-8; // windows below this fraction of the loudest
                             // reference window are skipped
};

struct EvalReport {
  double sir_db = 0.0;
  double sdr_db = 0.0;
  double input_sir_db = 0.0;
  double input_sdr_db = 0.0;
  double isir_db = 0.0;   // improvement over the scored input channel
  double isdr_db = 0.0;
  double attenuation_std = 0.0;
  bool regularized = false;
  std::vector<IntervalScore> intervals;  // windowed mode only
};

// Scores an extraction against the reference stems. The mixture channel the
// estimate was extracted from provides the input scores that improvements
// are measured against. In windowed mode the headline numbers are means over
// the scored windows.
EvalReport Evaluate(const Signal& estimate, const Signal& mixture_channel,
                    const SourceRoles& roles, const FrameSpec& spec,
                    const EvalOptions& opts = EvalOptions());

}  // namespace ivex

#endif  // IVEX_METRICS_H_
