// src/metrics.cc

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

#include "ivex/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ivex/common.h"

namespace ivex {

namespace {

constexpr double kCapDb = 100.0;

void ValidateFinite(const Signal& x, const char* what) {
  for (double v : x)
    if (!std::isfinite(v))
      throw DataError(std::string("invalid input: non-finite ") + what);
}

// Lagged inner products between two equal-length signals:
// out[shift + flen - 1] = sum_u a[u] * b[u + shift], shift in (-flen, flen).
std::vector<double> LaggedProducts(const Signal& a, const Signal& b,
                                   int flen) {
  int n = static_cast<int>(a.size());
  std::vector<double> out(2 * flen - 1, 0.0);
  for (int shift = -(flen - 1); shift <= flen - 1; shift++) {
    int lo = std::max(0, -shift);
    int hi = std::min(n, n - shift);
    double acc = 0.0;
    for (int u = lo; u < hi; u++) acc += a[u] * b[u + shift];
    out[shift + flen - 1] = acc;
  }
  return out;
}

// Right-hand side for one reference: q[tau] = <s shifted by tau, estimate>.
Eigen::VectorXd ShiftedInner(const Signal& ref, const Signal& est, int flen) {
  int n = static_cast<int>(ref.size());
  Eigen::VectorXd q(flen);
  for (int tau = 0; tau < flen; tau++) {
    double acc = 0.0;
    for (int u = 0; u + tau < n; u++) acc += ref[u] * est[u + tau];
    q(tau) = acc;
  }
  return q;
}

// Solves g * c = q, falling back to a ridge when the Gram matrix is rank
// deficient. Returns whether the ridge was needed.
bool GramSolve(const Eigen::MatrixXd& g, const Eigen::VectorXd& q,
               Eigen::VectorXd* c) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  if (ldlt.info() == Eigen::Success) {
    *c = ldlt.solve(q);
    double resid = (g * *c - q).norm();
    double ref = q.norm() + g.norm() * c->norm();
    if (resid <= 1e-8 * std::max(ref, 1e-300)) return false;
  }
  double ridge = 1e-9 * std::max(g.trace() / g.rows(), 1e-300);
  Eigen::MatrixXd gr = g;
  gr.diagonal().array() += ridge;
  Eigen::LDLT<Eigen::MatrixXd> ldlt2(gr);
  if (ldlt2.info() != Eigen::Success)
    throw NumericalError("rank-deficient block statistics");
  *c = ldlt2.solve(q);
  return true;
}

// Adds the filtered reference sum_tau c[tau] * ref[t - tau] into out.
void AccumulateFiltered(const Signal& ref, const Eigen::VectorXd& c,
                        Signal* out) {
  int n = static_cast<int>(ref.size());
  int flen = static_cast<int>(c.size());
  for (int tau = 0; tau < flen; tau++) {
    double w = c(tau);
    if (w == 0.0) continue;
    for (int u = 0; u < n; u++) (*out)[u + tau] += w * ref[u];
  }
}

struct WindowScores {
  RatioPair out;
  RatioPair in;
  bool regularized = false;
};

WindowScores ScoreSlice(const Signal& est, const Signal& mix,
                        const std::vector<Signal>& refs, int soi_index,
                        int flen) {
  WindowScores s;
  Decomposition d_out = Decompose(est, refs, soi_index, flen);
  Decomposition d_in = Decompose(mix, refs, soi_index, flen);
  s.out = SirSdr(d_out);
  s.in = SirSdr(d_in);
  s.regularized = d_out.regularized || d_in.regularized;
  return s;
}

}  // namespace

Decomposition Decompose(const Signal& estimate,
                        const std::vector<Signal>& references, int soi_index,
                        int filter_len) {
  int n = static_cast<int>(estimate.size());
  int num_refs = static_cast<int>(references.size());
  if (n == 0) throw DataError("invalid input: empty estimate");
  if (num_refs == 0) throw DataError("invalid input: no references");
  if (soi_index < 0 || soi_index >= num_refs)
    throw DataError("invalid input: reference index out of range");
  if (filter_len < 1 || filter_len > n)
    throw DataError("invalid input: filter length");
  ValidateFinite(estimate, "estimate");
  for (const auto& r : references) {
    if (static_cast<int>(r.size()) != n)
      throw DataError("invalid input: reference length mismatch");
    ValidateFinite(r, "reference");
  }

  const int flen = filter_len;
  const int padded = n + flen - 1;
  const int dim = num_refs * flen;

  // Gram matrix over all delayed references. Entry ((j, tau), (j2, tau2))
  // is the lagged product at shift tau - tau2, so one lag table per pair
  // covers the whole block.
  Eigen::MatrixXd gram(dim, dim);
  for (int j = 0; j < num_refs; j++) {
    for (int j2 = j; j2 < num_refs; j2++) {
      std::vector<double> lag =
          LaggedProducts(references[j], references[j2], flen);
      for (int tau = 0; tau < flen; tau++)
        for (int tau2 = 0; tau2 < flen; tau2++) {
          double v = lag[(tau - tau2) + flen - 1];
          gram(j * flen + tau, j2 * flen + tau2) = v;
          gram(j2 * flen + tau2, j * flen + tau) = v;
        }
    }
  }
  Eigen::VectorXd rhs(dim);
  for (int j = 0; j < num_refs; j++)
    rhs.segment(j * flen, flen) = ShiftedInner(references[j], estimate, flen);

  Decomposition out;
  Eigen::VectorXd c_all;
  bool reg_all = GramSolve(gram, rhs, &c_all);

  Eigen::MatrixXd gram_soi =
      gram.block(soi_index * flen, soi_index * flen, flen, flen);
  Eigen::VectorXd c_soi;
  bool reg_soi =
      GramSolve(gram_soi, rhs.segment(soi_index * flen, flen), &c_soi);
  out.regularized = reg_all || reg_soi;

  Signal all_proj(padded, 0.0);
  for (int j = 0; j < num_refs; j++)
    AccumulateFiltered(references[j], c_all.segment(j * flen, flen),
                       &all_proj);
  out.target.assign(padded, 0.0);
  AccumulateFiltered(references[soi_index], c_soi, &out.target);

  out.interference.resize(padded);
  out.artifact.resize(padded);
  for (int t = 0; t < padded; t++) {
    out.interference[t] = all_proj[t] - out.target[t];
    double e = t < n ? estimate[t] : 0.0;
    out.artifact[t] = e - all_proj[t];
  }
  return out;
}

double ClampedRatioDb(double numerator, double denominator) {
  if (numerator <= 0.0) return -kCapDb;
  if (denominator <= 0.0) return kCapDb;
  return std::clamp(10.0 * std::log10(numerator / denominator), -kCapDb,
                    kCapDb);
}

RatioPair SirSdr(const Decomposition& parts) {
  double et = 0.0, ei = 0.0, ea = 0.0;
  for (double v : parts.target) et += v * v;
  for (double v : parts.interference) ei += v * v;
  for (double v : parts.artifact) ea += v * v;
  RatioPair r;
  r.sir_db = ClampedRatioDb(et, ei);
  r.sdr_db = ClampedRatioDb(et, ei + ea);
  return r;
}

double AttenuationStd(const Signal& estimate, const Signal& reference,
                      const FrameSpec& spec) {
  if (estimate.size() != reference.size())
    throw DataError("invalid input: length mismatch");
  ComplexSpectrogram est_sg = Analyze({estimate}, spec, 0);
  ComplexSpectrogram ref_sg = Analyze({reference}, spec, 0);
  std::vector<double> est_e = FrameEnergies(est_sg, 0);
  std::vector<double> ref_e = FrameEnergies(ref_sg, 0);

  double max_ref = 0.0;
  for (double e : ref_e) max_ref = std::max(max_ref, e);
  if (max_ref <= 0.0) throw DataError("invalid input: silent reference");

  std::vector<double> ratios;
  for (size_t t = 0; t < ref_e.size(); t++)
    if (ref_e[t] >= 1e-4 * max_ref) ratios.push_back(est_e[t] / ref_e[t]);
  if (ratios.empty()) throw DataError("invalid input: silent reference");

  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= ratios.size();
  double var = 0.0;
  for (double r : ratios) var += (r - mean) * (r - mean);
  var /= ratios.size();
  return std::sqrt(var);
}

EvalReport Evaluate(const Signal& estimate, const Signal& mixture_channel,
                    const SourceRoles& roles, const FrameSpec& spec,
                    const EvalOptions& opts) {
  size_t n = estimate.size();
  if (n == 0) throw DataError("invalid input: empty estimate");
  if (mixture_channel.size() != n || roles.soi.size() != n)
    throw DataError("invalid input: length mismatch");
  std::vector<Signal> refs;
  refs.push_back(roles.soi);
  for (const auto& b : roles.background) refs.push_back(b);
  if (!roles.noise.empty()) refs.push_back(roles.noise);
  for (const auto& r : refs)
    if (r.size() != n) throw DataError("invalid input: length mismatch");

  EvalReport report;
  if (!opts.windowed) {
    WindowScores s =
        ScoreSlice(estimate, mixture_channel, refs, 0, opts.filter_len);
    report.sir_db = s.out.sir_db;
    report.sdr_db = s.out.sdr_db;
    report.input_sir_db = s.in.sir_db;
    report.input_sdr_db = s.in.sdr_db;
    report.regularized = s.regularized;
  } else {
    int win = static_cast<int>(std::llround(opts.window_s *
                                            roles.sample_rate));
    if (win < opts.filter_len)
      throw DataError("invalid input: window shorter than filter");
    int num_windows = static_cast<int>(n) / win;
    if (num_windows == 0)
      throw DataError("insufficient samples: signal shorter than window");

    std::vector<double> win_energy(num_windows, 0.0);
    double max_energy = 0.0;
    for (int w = 0; w < num_windows; w++) {
      for (int t = w * win; t < (w + 1) * win; t++)
        win_energy[w] += roles.soi[t] * roles.soi[t];
      max_energy = std::max(max_energy, win_energy[w]);
    }
    if (max_energy <= 0.0) throw DataError("invalid input: silent reference");

    for (int w = 0; w < num_windows; w++) {
      if (win_energy[w] < opts.silence_rel * max_energy) continue;
      Signal est_w(estimate.begin() + w * win,
                   estimate.begin() + (w + 1) * win);
      Signal mix_w(mixture_channel.begin() + w * win,
                   mixture_channel.begin() + (w + 1) * win);
      std::vector<Signal> refs_w;
      for (const auto& r : refs)
        refs_w.emplace_back(r.begin() + w * win, r.begin() + (w + 1) * win);
      WindowScores s = ScoreSlice(est_w, mix_w, refs_w, 0, opts.filter_len);
      IntervalScore iv;
      iv.begin_s = static_cast<double>(w) * win / roles.sample_rate;
      iv.end_s = static_cast<double>(w + 1) * win / roles.sample_rate;
      iv.sir_db = s.out.sir_db;
      iv.sdr_db = s.out.sdr_db;
      iv.isir_db = s.out.sir_db - s.in.sir_db;
      iv.isdr_db = s.out.sdr_db - s.in.sdr_db;
      report.intervals.push_back(iv);
      report.regularized = report.regularized || s.regularized;
    }
    if (report.intervals.empty())
      throw DataError("invalid input: silent reference");
    for (const auto& iv : report.intervals) {
      report.sir_db += iv.sir_db;
      report.sdr_db += iv.sdr_db;
      report.input_sir_db += iv.sir_db - iv.isir_db;
      report.input_sdr_db += iv.sdr_db - iv.isdr_db;
    }
    double m = static_cast<double>(report.intervals.size());
    report.sir_db /= m;
    report.sdr_db /= m;
    report.input_sir_db /= m;
    report.input_sdr_db /= m;
  }
  report.isir_db = report.sir_db - report.input_sir_db;
  report.isdr_db = report.sdr_db - report.input_sdr_db;
  report.attenuation_std = AttenuationStd(estimate, roles.soi, spec);
  return report;
}

}  // namespace ivex
