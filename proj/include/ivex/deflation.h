// include/ivex/deflation.h

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

#ifndef IVEX_DEFLATION_H_
#define IVEX_DEFLATION_H_

#include <string>
#include <vector>

#include "ivex/assess.h"
#include "ivex/ive.h"

namespace ivex {

// How to shed one channel after removing an extracted source.
// kDropWeakestChannel removes the channel the separator relied on least
// (smallest mean |w[k](c)| across bins); kDropChannel removes a fixed index;
// kPca keeps the dominant d-1 principal directions of the residual.
enum class ReductionKind { kDropWeakestChannel, kDropChannel, kPca };

struct DeflationConfig {
  int max_steps = 3;
  ReductionKind reduction = ReductionKind::kDropWeakestChannel;
  int drop_index = 0;  // used by kDropChannel
  SolverConfig solver;
};

// One assessment decision in the deflation loop, serializable as a single
// text line.
struct DeflationAuditEntry {
  int step = 0;
  int channels = 0;
  std::string comparison;   // "estimate_vs_mixture" or "mixture_vs_reduced"
  std::string candidate_a;  // e.g. "u0"
  std::string candidate_b;  // e.g. "x0"
  double score_a = 0.0;
  double score_b = 0.0;
  std::string decision;     // "return_estimate", "deflate", "return_mixture",
                            // "continue", "budget_exhausted"
};

std::string ToLine(const DeflationAuditEntry& entry);
DeflationAuditEntry AuditEntryFromLine(const std::string& line);

struct DeflationResult {
  ComplexSpectrogram estimate;  // single channel
  std::vector<DeflationAuditEntry> audit;
  int solver_runs = 0;
  // "estimate": an extraction pass was accepted. "mixture": deflation made
  // the mixture worse, the pre-step mixture channel is returned.
  // "reduced_mixture": the step budget ran out. "aborted": a solver error
  // stopped the loop (see `error`).
  std::string returned;
  std::string error;
};

// Removes the extracted source from the mixture and drops one channel:
// x_next[k][l] = D (x[k][l] - a[k][t] w[k]^H x[k][l]). The separator is
// exactly orthogonal to the subtracted residual (w^H a == 1), so repeated
// extraction of the same source is blocked. Throws
// DataError("invalid reduction matrix") for an out-of-range drop index.
ComplexSpectrogram Subtract(const ComplexSpectrogram& x,
                            const DemixingState& state,
                            const BlockPartition& part,
                            ReductionKind reduction, int drop_index = 0);

// Guided extraction with up to cfg.max_steps restart passes. Each pass runs
// the solver (rebuilding the pilot from the current mixture's first channel
// against the step-invariant dominance mask), keeps the estimate if the
// backend scores it above the current mixture channel, and otherwise deflates
// and tries again while deflation does not hurt the mixture score.
// Candidates are scored under the names "u<step>" and "x<step>".
// max_steps must lie in [1, channels - 1].
DeflationResult ExtractWithDeflation(const ComplexSpectrogram& x,
                                     const DeflationConfig& cfg,
                                     const std::vector<bool>& dominance_mask,
                                     const AssessmentBackend& backend);

}  // namespace ivex

#endif  // IVEX_DEFLATION_H_
