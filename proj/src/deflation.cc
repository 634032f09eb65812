// src/deflation.cc

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

#include "ivex/deflation.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ivex/pilot.h"
#include "ivex/stft.h"

namespace ivex {

namespace {

// Dominant-direction basis of the residual, one reduction matrix per bin.
CMat PcaReduction(const CMat& residual_cov, int keep) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(residual_cov);
  if (eig.info() != Eigen::Success)
    throw NumericalError("invalid reduction matrix");
  const int d = static_cast<int>(residual_cov.rows());
  CMat rows(keep, d);
  for (int i = 0; i < keep; ++i) {
    CVec v = eig.eigenvectors().col(d - 1 - i);  // eigenvalues ascend
    // Deterministic sign: largest-magnitude entry real positive.
    int peak = 0;
    v.cwiseAbs().maxCoeff(&peak);
    const double mag = std::abs(v(peak));
    if (mag > 0.0) v *= std::conj(v(peak)) / mag;
    rows.row(i) = v.adjoint();
  }
  return rows;
}

}  // namespace

ComplexSpectrogram Subtract(const ComplexSpectrogram& x,
                            const DemixingState& state,
                            const BlockPartition& part,
                            ReductionKind reduction, int drop_index) {
  const int bins = x.Bins();
  const int d = x.Channels();
  const int frames = x.Frames();
  if (d < 2)
    throw DataError("invalid input: nothing left to deflate");
  if (static_cast<int>(state.w.size()) != bins ||
      part.total_frames != frames)
    throw DataError("invalid input: state does not match spectrogram");

  int drop = drop_index;
  if (reduction == ReductionKind::kDropWeakestChannel) {
    // The channel the separator uses least, averaged over bins.
    Eigen::VectorXd reliance = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < bins; ++k) reliance += state.w[k].cwiseAbs();
    drop = 0;
    reliance.minCoeff(&drop);
  } else if (reduction == ReductionKind::kDropChannel) {
    if (drop < 0 || drop >= d) throw DataError("invalid reduction matrix");
  }

  ComplexSpectrogram out;
  out.sample_rate = x.sample_rate;
  out.spec = x.spec;
  out.data.assign(bins, CMat::Zero(d - 1, frames));
  for (int k = 0; k < bins; ++k) {
    CMat residual(d, frames);
    for (int l = 0; l < frames; ++l) {
      const auto col = x.data[k].col(l);
      const Cplx u = (state.w[k].adjoint() * col)(0);
      residual.col(l) = col - state.a[k][part.BlockOf(l)] * u;
    }
    if (reduction == ReductionKind::kPca) {
      CMat cov = CMat::Zero(d, d);
      cov.selfadjointView<Eigen::Lower>().rankUpdate(residual, 1.0 / frames);
      CMat full = cov.selfadjointView<Eigen::Lower>();
      out.data[k] = PcaReduction(full, d - 1) * residual;
    } else {
      int row = 0;
      for (int c = 0; c < d; ++c) {
        if (c == drop) continue;
        out.data[k].row(row++) = residual.row(c);
      }
    }
  }
  return out;
}

std::string ToLine(const DeflationAuditEntry& entry) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "step=%d channels=%d comparison=%s a=%s b=%s score_a=%.17g "
                "score_b=%.17g decision=%s",
                entry.step, entry.channels, entry.comparison.c_str(),
                entry.candidate_a.c_str(), entry.candidate_b.c_str(),
                entry.score_a, entry.score_b, entry.decision.c_str());
  return buf;
}

DeflationAuditEntry AuditEntryFromLine(const std::string& line) {
  DeflationAuditEntry entry;
  std::istringstream in(line);
  std::string token;
  while (in >> token) {
    const size_t eq = token.find('=');
    if (eq == std::string::npos)
      throw DataError("malformed audit line: " + line);
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "step") {
      entry.step = std::stoi(value);
    } else if (key == "channels") {
      entry.channels = std::stoi(value);
    } else if (key == "comparison") {
      entry.comparison = value;
    } else if (key == "a") {
      entry.candidate_a = value;
    } else if (key == "b") {
      entry.candidate_b = value;
    } else if (key == "score_a") {
      entry.score_a = std::stod(value);
    } else if (key == "score_b") {
      entry.score_b = std::stod(value);
    } else if (key == "decision") {
      entry.decision = value;
    } else {
      throw DataError("malformed audit line: " + line);
    }
  }
  return entry;
}

DeflationResult ExtractWithDeflation(const ComplexSpectrogram& x,
                                     const DeflationConfig& cfg,
                                     const std::vector<bool>& dominance_mask,
                                     const AssessmentBackend& backend) {
  const int d = x.Channels();
  if (cfg.max_steps < 1 || cfg.max_steps > d - 1)
    throw DataError("invalid input: deflation budget must be in [1, d-1]");
  if (!dominance_mask.empty() &&
      static_cast<int>(dominance_mask.size()) != x.Frames())
    throw DataError("invalid input: mask length does not match spectrogram");

  DeflationResult result;
  ComplexSpectrogram current = x;
  for (int step = 0; step < cfg.max_steps; ++step) {
    SolverConfig solver = cfg.solver;
    if (!dominance_mask.empty()) {
      solver.pilot =
          BuildPilot(current, dominance_mask, PilotTrack::Provenance::kCustom)
              .values;
    }
    ExtractionResult pass;
    try {
      pass = Run(current, solver);
    } catch (const std::exception& e) {
      result.error = e.what();
      result.returned = "aborted";
      return result;
    }
    ++result.solver_runs;

    const std::string name_u = "u" + std::to_string(step);
    const std::string name_x = "x" + std::to_string(step);
    const Signal estimate_sig = Synthesize(pass.soi_image)[0];
    const Signal mixture_sig = Synthesize(current.Channel(0))[0];
    const double score_u = backend.Score(name_u, estimate_sig);
    const double score_x = backend.Score(name_x, mixture_sig);

    DeflationAuditEntry head;
    head.step = step;
    head.channels = current.Channels();
    head.comparison = "estimate_vs_mixture";
    head.candidate_a = name_u;
    head.candidate_b = name_x;
    head.score_a = score_u;
    head.score_b = score_x;
    head.decision = score_u > score_x ? "return_estimate" : "deflate";
    result.audit.push_back(head);
    if (score_u > score_x) {
      result.estimate = pass.soi_image;
      result.returned = "estimate";
      return result;
    }

    ComplexSpectrogram reduced = Subtract(current, pass.state, pass.partition,
                                          cfg.reduction, cfg.drop_index);
    const std::string name_next = "x" + std::to_string(step + 1);
    const Signal reduced_sig = Synthesize(reduced.Channel(0))[0];
    const double score_next = backend.Score(name_next, reduced_sig);

    DeflationAuditEntry tail;
    tail.step = step;
    tail.channels = current.Channels();
    tail.comparison = "mixture_vs_reduced";
    tail.candidate_a = name_x;
    tail.candidate_b = name_next;
    tail.score_a = score_x;
    tail.score_b = score_next;
    tail.decision = score_x > score_next ? "return_mixture" : "continue";
    result.audit.push_back(tail);
    if (score_x > score_next) {
      result.estimate = current.Channel(0);
      result.returned = "mixture";
      return result;
    }
    current = std::move(reduced);
  }

  DeflationAuditEntry last;
  last.step = cfg.max_steps;
  last.channels = current.Channels();
  last.comparison = "budget";
  last.candidate_a = "x" + std::to_string(cfg.max_steps);
  last.candidate_b = "-";
  last.decision = "budget_exhausted";
  result.audit.push_back(last);
  result.estimate = current.Channel(0);
  result.returned = "reduced_mixture";
  return result;
}

}  // namespace ivex
