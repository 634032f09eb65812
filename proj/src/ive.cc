// src/ive.cc

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

#include "ivex/ive.h"

#include <cmath>
#include <limits>

namespace ivex {

// Each iteration follows the majorization scheme for the super-Gaussian
// contrast on the joint frame norm r:
//
//   1. r_l    = sqrt(sum_k |w_k^H x_l|^2 + pilot_l)        over all bins
//   2. wcov   = E_t[(1/r) x x^H]          per (bin, block)
//   3. a      = cov w / (w^H cov w)       mixing estimate, w^H a = 1
//   4. sigma  = sqrt(w^H cov w)           block scale of the target
//   5. w_new  = (sum_t wcov/sigma^2)^{-1} sum_t (w^H wcov w / sigma^2) a
//   6. w_new /= sqrt(sum_t w_new^H wcov w_new)
//
// cov is data-only, so it is computed once up front. After the update the
// stored a and sigma are refreshed from the new w, keeping the state
// self-consistent (w^H a = 1 and the normalization hold exactly at every
// iteration boundary).
//
// The leftover unit-phase ambiguity of each w_k is pinned by rotating w_k so
// its largest-magnitude entry becomes real positive. Without a fixed phase
// convention, per-iteration trajectories would only be comparable up to a
// per-bin phase. The separated image a(0) u is invariant to this rotation.

namespace {

struct BlendStats {
  const std::vector<CMat>* cov = nullptr;   // per bin, previous block
  const std::vector<CMat>* wcov = nullptr;  // per bin, previous block
  double alpha = 0.3;
};

struct StaticRun {
  DemixingState state;
  int iterations_run = 0;
  bool converged = false;
  std::vector<double> trace;
};

// Core iteration loop over the frame range [begin, begin + part.total_frames)
// of x. `blend` mixes previous-block statistics into cov and wcov (kBs mode;
// requires a single-block partition). The pilot vector, when nonempty, is
// indexed by absolute frame position.
StaticRun RunRange(const ComplexSpectrogram& x, int begin,
                   const BlockPartition& part, std::vector<CVec> w,
                   int iterations, double tol,
                   const std::vector<double>& pilot, double pilot_gain,
                   const BlendStats* blend, const IterationObserver& observer,
                   int iteration_offset) {
  const int bins = x.Bins();
  const int d = x.Channels();
  const int n = part.total_frames;
  const int num_blocks = part.block_count;

  StaticRun run;
  DemixingState& state = run.state;
  state.w = std::move(w);

  // Data covariances, optionally smoothed with the previous block's.
  state.cov.assign(bins, std::vector<CMat>());
  for (int k = 0; k < bins; ++k) {
    state.cov[k].reserve(num_blocks);
    for (int t = 0; t < num_blocks; ++t) {
      const int bsize = part.BlockSize(t);
      CMat acc = CMat::Zero(d, d);
      acc.selfadjointView<Eigen::Lower>().rankUpdate(
          x.data[k].middleCols(begin + part.BlockBegin(t), bsize),
          1.0 / bsize);
      CMat full = acc.selfadjointView<Eigen::Lower>();
      if (blend != nullptr) {
        full = (1.0 - blend->alpha) * (*blend->cov)[k] + blend->alpha * full;
        full = (full + full.adjoint()).eval() * 0.5;
      }
      state.cov[k].push_back(std::move(full));
    }
  }
  state.wcov.assign(bins, std::vector<CMat>(num_blocks, CMat::Zero(d, d)));
  state.a.assign(bins, std::vector<CVec>(num_blocks, CVec::Zero(d)));
  state.sigma.assign(bins, std::vector<double>(num_blocks, 0.0));

  auto refresh_mixing = [&]() {
    for (int k = 0; k < bins; ++k) {
      for (int t = 0; t < num_blocks; ++t) {
        state.a[k][t] = OgcMixingVector(state.cov[k][t], state.w[k]);
        state.sigma[k][t] = SoiScale(state.cov[k][t], state.w[k]);
      }
    }
  };
  refresh_mixing();

  // Running separator outputs u[k][l] for the current w.
  Eigen::MatrixXcd u(bins, n);
  auto compute_u = [&](const std::vector<CVec>& sep, Eigen::MatrixXcd* out) {
    for (int k = 0; k < bins; ++k)
      out->row(k) = sep[k].adjoint() * x.data[k].middleCols(begin, n);
  };
  compute_u(state.w, &u);

  std::vector<CVec> w_new(bins);
  Eigen::MatrixXcd u_new(bins, n);
  Eigen::VectorXd r(n);

  // The normalization below pins the separator output near bins/num_blocks
  // per frame norm regardless of input gain, while the supplied guide
  // energies are in raw data units. Rescale the guide once so that its mean
  // over active frames sits pilot_gain times above the output energy level;
  // otherwise its influence would depend on the recording level. Frames with
  // zero guide stay at zero, and an all-zero or empty guide leaves the run
  // identical to an unguided one.
  std::vector<double> guide(n, 0.0);
  if (!pilot.empty() && pilot_gain > 0.0) {
    double active_sum = 0.0;
    int active = 0;
    for (int l = 0; l < n; ++l) {
      if (pilot[begin + l] > 0.0) {
        active_sum += pilot[begin + l];
        ++active;
      }
    }
    if (active > 0) {
      const double level = static_cast<double>(bins) / num_blocks;
      const double gamma = pilot_gain * level * level / (active_sum / active);
      for (int l = 0; l < n; ++l) guide[l] = pilot[begin + l] * gamma;
    }
  }
  const bool guided = !pilot.empty() && pilot_gain > 0.0;

  for (int it = 1; it <= iterations; ++it) {
    // Frame norms with the silence guard.
    double mean_energy = 0.0;
    for (int l = 0; l < n; ++l) {
      double e = u.col(l).squaredNorm();
      if (guided) e += guide[l];
      r(l) = e;
      mean_energy += e;
    }
    mean_energy /= n;
    const double r_floor =
        std::max(1e-8 * std::sqrt(mean_energy), 1e-300);
    for (int l = 0; l < n; ++l)
      r(l) = std::max(std::sqrt(r(l)), r_floor);

    for (int k = 0; k < bins; ++k) {
      for (int t = 0; t < num_blocks; ++t) {
        CMat v = WeightedCovariance(
            x.data[k].middleCols(begin + part.BlockBegin(t),
                                 part.BlockSize(t)),
            r.segment(part.BlockBegin(t), part.BlockSize(t)));
        if (blend != nullptr) {
          v = (1.0 - blend->alpha) * (*blend->wcov)[k] + blend->alpha * v;
          v = (v + v.adjoint()).eval() * 0.5;
        }
        state.wcov[k][t] = std::move(v);
      }
      w_new[k] =
          UpdateW(state.wcov[k], state.a[k], state.sigma[k], state.w[k]);
    }
    NormalizeW(&w_new, state.wcov);

    // Pin the unit-phase ambiguity (see the file comment).
    compute_u(w_new, &u_new);
    for (int k = 0; k < bins; ++k) {
      int peak = 0;
      w_new[k].cwiseAbs().maxCoeff(&peak);
      const Cplx m = w_new[k](peak);
      const double mag = std::abs(m);
      if (mag > 0.0) {
        const Cplx c = std::conj(m) / mag;
        w_new[k] *= c;
        u_new.row(k) *= std::conj(c);
      }
    }

    double delta = 0.0;
    for (int k = 0; k < bins; ++k)
      delta = std::max(delta, (w_new[k] - state.w[k]).norm());
    state.w = w_new;
    u.swap(u_new);
    refresh_mixing();

    run.trace.push_back(delta);
    run.iterations_run = it;
    if (observer) observer(iteration_offset + it, state, part);
    if (delta < tol) {
      run.converged = true;
      break;
    }
  }
  return run;
}

std::vector<CVec> InitialW(const SolverConfig& cfg, int bins, int d) {
  std::vector<CVec> w(bins);
  switch (cfg.init) {
    case InitKind::kOnes:
      for (auto& v : w) v = CVec::Ones(d);
      break;
    case InitKind::kUnitVector: {
      if (cfg.init_channel < 0 || cfg.init_channel >= d)
        throw DataError("invalid input: init channel out of range");
      for (auto& v : w) {
        v = CVec::Zero(d);
        v(cfg.init_channel) = 1.0;
      }
      break;
    }
    case InitKind::kCustom: {
      if (static_cast<int>(cfg.init_custom.size()) != bins)
        throw DataError("invalid input: custom init needs one vector per bin");
      for (const CVec& v : cfg.init_custom) {
        if (v.size() != d)
          throw DataError("invalid input: custom init dimension mismatch");
      }
      w = cfg.init_custom;
      break;
    }
  }
  return w;
}

void ValidateConfig(const ComplexSpectrogram& x, const SolverConfig& cfg) {
  if (x.Channels() < 2)
    throw DataError("invalid input: extraction needs at least two channels");
  if (x.Frames() < 1) throw DataError("invalid input: empty spectrogram");
  if (cfg.iterations < 1)
    throw DataError("invalid input: iterations must be positive");
  if (cfg.block_len < 1)
    throw DataError("invalid input: block length must be positive");
  if (cfg.convergence_tol < 0.0)
    throw DataError("invalid input: negative convergence tolerance");
  if (cfg.mode == SolverMode::kBs &&
      (cfg.forgetting <= 0.0 || cfg.forgetting > 1.0))
    throw DataError("invalid input: forgetting factor must be in (0, 1]");
  if (!cfg.pilot.empty()) {
    if (static_cast<int>(cfg.pilot.size()) != x.Frames())
      throw DataError("invalid input: pilot length mismatch");
    if (!(cfg.pilot_gain >= 0.0))
      throw DataError("invalid input: pilot gain must be nonnegative");
    for (double p : cfg.pilot) {
      if (!(p >= 0.0))
        throw DataError("invalid input: pilot values must be nonnegative");
    }
  }
}

ComplexSpectrogram SingleChannelLike(const ComplexSpectrogram& x) {
  ComplexSpectrogram out;
  out.sample_rate = x.sample_rate;
  out.spec = x.spec;
  out.data.assign(x.Bins(), CMat::Zero(1, x.Frames()));
  return out;
}

}  // namespace

double AuxiliaryR(const CVec& u, double pilot_value) {
  if (!(pilot_value >= 0.0))
    throw DataError("invalid input: pilot values must be nonnegative");
  return std::sqrt(u.squaredNorm() + pilot_value);
}

CMat WeightedCovariance(const Eigen::Ref<const CMat>& x_block,
                        const Eigen::Ref<const Eigen::VectorXd>& r) {
  const int n = static_cast<int>(x_block.cols());
  if (static_cast<int>(r.size()) != n)
    throw DataError("invalid input: r length does not match block");
  Eigen::VectorXd scale(n);
  for (int l = 0; l < n; ++l) {
    if (!(r(l) > 0.0))
      throw DataError("invalid input: frame norms must be positive");
    scale(l) = 1.0 / std::sqrt(r(l));
  }
  CMat scaled = x_block * scale.asDiagonal();
  CMat acc = CMat::Zero(x_block.rows(), x_block.rows());
  acc.selfadjointView<Eigen::Lower>().rankUpdate(scaled, 1.0 / n);
  CMat full = acc.selfadjointView<Eigen::Lower>();
  return full;
}

CVec OgcMixingVector(const CMat& cov, const CVec& w) {
  const int d = static_cast<int>(w.size());
  const Cplx q = (w.adjoint() * cov * w)(0);
  const double denom = q.real();
  const double floor =
      1e-14 * w.squaredNorm() * std::abs(cov.trace().real()) / d;
  if (!(denom > floor) || !std::isfinite(denom))
    throw NumericalError("degenerate SOI variance on block");
  return (cov * w) / denom;
}

double SoiScale(const CMat& cov, const CVec& w) {
  const int d = static_cast<int>(w.size());
  const Cplx q = (w.adjoint() * cov * w)(0);
  const double scale =
      w.squaredNorm() * std::abs(cov.trace().real()) / d + 1e-300;
  if (q.real() < -1e-10 * scale || std::abs(q.imag()) > 1e-8 * scale)
    throw NumericalError("covariance not PSD");
  return std::sqrt(std::max(q.real(), 0.0));
}

CVec UpdateW(const std::vector<CMat>& wcov, const std::vector<CVec>& a,
             const std::vector<double>& sigma, const CVec& w) {
  const int num_blocks = static_cast<int>(wcov.size());
  const int d = static_cast<int>(w.size());
  if (num_blocks == 0 || a.size() != wcov.size() || sigma.size() != wcov.size())
    throw DataError("invalid input: per-block statistics size mismatch");
  CMat lhs = CMat::Zero(d, d);
  CVec rhs = CVec::Zero(d);
  for (int t = 0; t < num_blocks; ++t) {
    if (!(sigma[t] > 0.0))
      throw NumericalError("degenerate SOI variance on block");
    const double inv_s2 = 1.0 / (sigma[t] * sigma[t]);
    lhs += wcov[t] * inv_s2;
    const double form = (w.adjoint() * wcov[t] * w)(0).real();
    rhs += (form * inv_s2) * a[t];
  }
  Eigen::LDLT<CMat> ldlt(lhs);
  CVec sol = ldlt.solve(rhs);
  // A singular system still passes a backward-error test (the junk lives in
  // the null space), so also require the pivots to be well conditioned.
  double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  if (ldlt.info() == Eigen::Success) {
    const auto& pivots = ldlt.vectorD();
    for (int i = 0; i < d; ++i) {
      const double m = std::abs(pivots(i));
      dmax = std::max(dmax, m);
      dmin = std::min(dmin, m);
    }
  }
  const double scale = lhs.norm() * sol.norm() + rhs.norm() + 1e-300;
  const bool bad = ldlt.info() != Eigen::Success || !sol.allFinite() ||
                   !(dmin > 1e-13 * dmax) ||
                   (lhs * sol - rhs).norm() > 1e-8 * scale;
  if (bad) {
    // Singular statistics (an overdetermined array sees a rank-deficient
    // covariance): a small ridge keeps the solution inside the data
    // subspace, since the right-hand side lives there.
    double ridge = 1e-9 * lhs.trace().real() / d;
    if (!(ridge > 0.0)) ridge = 1e-30;
    Eigen::LDLT<CMat> retry(lhs + ridge * CMat::Identity(d, d));
    sol = retry.solve(rhs);
    if (retry.info() != Eigen::Success || !sol.allFinite())
      throw NumericalError("rank-deficient block statistics");
  }
  return sol;
}

void NormalizeW(std::vector<CVec>* w,
                const std::vector<std::vector<CMat>>& wcov) {
  if (w->size() != wcov.size())
    throw DataError("invalid input: separator/statistics size mismatch");
  for (size_t k = 0; k < w->size(); ++k) {
    double form = 0.0;
    for (const CMat& v : wcov[k])
      form += ((*w)[k].adjoint() * v * (*w)[k])(0).real();
    if (!(form > 0.0) || !std::isfinite(form))
      throw NumericalError("null separating vector");
    (*w)[k] /= std::sqrt(form);
  }
}

ExtractionResult Run(const ComplexSpectrogram& x, const SolverConfig& cfg,
                     const IterationObserver& observer) {
  ValidateConfig(x, cfg);
  const int bins = x.Bins();
  const int d = x.Channels();
  const int frames = x.Frames();

  ExtractionResult result;
  result.soi_estimate = SingleChannelLike(x);
  result.soi_image = SingleChannelLike(x);

  if (cfg.mode == SolverMode::kFs || cfg.mode == SolverMode::kCsv) {
    const int block_len =
        cfg.mode == SolverMode::kFs ? frames : cfg.block_len;
    const BlockPartition part = Partition(frames, block_len);
    StaticRun run =
        RunRange(x, 0, part, InitialW(cfg, bins, d), cfg.iterations,
                 cfg.convergence_tol, cfg.pilot, cfg.pilot_gain, nullptr,
                 observer, 0);
    for (int k = 0; k < bins; ++k) {
      const auto row =
          run.state.w[k].adjoint() * x.data[k];
      result.soi_estimate.data[k] = row;
      for (int l = 0; l < frames; ++l) {
        result.soi_image.data[k](0, l) =
            run.state.a[k][part.BlockOf(l)](0) * row(l);
      }
    }
    result.state = std::move(run.state);
    result.partition = part;
    result.iterations_run = run.iterations_run;
    result.converged = run.converged;
    result.delta_w_trace = std::move(run.trace);
    return result;
  }

  // kBs: sliding blocks, warm start, recursive statistics, causal stitching.
  const int block_len = std::min(cfg.block_len, frames);
  const int shift =
      cfg.block_shift > 0 ? cfg.block_shift : std::max(1, block_len / 4);
  std::vector<CVec> w = InitialW(cfg, bins, d);
  std::vector<CMat> prev_cov;
  std::vector<CMat> prev_wcov;
  bool have_prev = false;
  int iteration_offset = 0;
  StaticRun last;
  BlockPartition last_part;
  for (int start = 0; start < frames; start += shift) {
    const int end = std::min(start + block_len, frames);
    const BlockPartition part = Partition(end - start, end - start);
    BlendStats blend;
    blend.cov = &prev_cov;
    blend.wcov = &prev_wcov;
    blend.alpha = cfg.forgetting;
    StaticRun run = RunRange(x, start, part, w, cfg.iterations,
                             cfg.convergence_tol, cfg.pilot, cfg.pilot_gain,
                             have_prev ? &blend : nullptr, observer,
                             iteration_offset);
    iteration_offset += run.iterations_run;
    w = run.state.w;
    prev_cov.assign(bins, CMat());
    prev_wcov.assign(bins, CMat());
    for (int k = 0; k < bins; ++k) {
      prev_cov[k] = run.state.cov[k][0];
      prev_wcov[k] = run.state.wcov[k][0];
    }
    have_prev = true;
    for (int k = 0; k < bins; ++k) {
      const Cplx gain = run.state.a[k][0](0);
      for (int l = start; l < end; ++l) {
        const Cplx ul = (w[k].adjoint() * x.data[k].col(l))(0);
        result.soi_estimate.data[k](0, l) = ul;
        result.soi_image.data[k](0, l) = gain * ul;
      }
    }
    for (double dlt : run.trace) result.delta_w_trace.push_back(dlt);
    last = std::move(run);
    last_part = part;
    if (end >= frames) break;
  }
  result.state = std::move(last.state);
  result.partition = last_part;
  result.iterations_run = iteration_offset;
  result.converged = last.converged;
  return result;
}

}  // namespace ivex
