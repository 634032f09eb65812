// src/simkit.cc

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

#include "ivex/simkit.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "ivex/common.h"
#include "ivex/rng.h"

namespace ivex {

namespace {

void ValidateScenario(const Scenario& sc) {
  if (sc.num_speakers < 1) throw DataError("invalid input: num_speakers < 1");
  if (sc.num_channels < sc.num_speakers + (sc.noise ? 1 : 0))
    throw DataError("invalid input: fewer channels than sources");
  if (sc.duration_s <= 0) throw DataError("invalid input: duration_s <= 0");
  if (sc.sample_rate <= 0) throw DataError("invalid input: sample_rate <= 0");
  if (sc.pause_density < 0 || sc.pause_density >= 1)
    throw DataError("invalid input: pause_density outside [0, 1)");
  if (sc.peak <= 0) throw DataError("invalid input: peak <= 0");
}

// On/off gate with an exact silence budget. Speech and pause segment
// durations are drawn first, then rescaled so the pauses occupy
// pause_density of the total; 10 ms half-cosine ramps are carved out of the
// speech side so pauses stay fully silent.
std::vector<double> ActivityGate(Rng* rng, int n, int sample_rate,
                                 double pause_density) {
  std::vector<double> gate(n, 1.0);
  if (pause_density <= 0.0) return gate;

  int num_pairs = std::max(
      1, static_cast<int>(std::ceil(n / (1.2 * sample_rate))) + 1);
  std::vector<double> speech(num_pairs), pause(num_pairs);
  double speech_sum = 0.0, pause_sum = 0.0;
  for (int i = 0; i < num_pairs; i++) {
    speech[i] = 0.5 + 0.8 * rng->Uniform();
    pause[i] = 0.2 + 0.6 * rng->Uniform();
    speech_sum += speech[i];
    pause_sum += pause[i];
  }
  double speech_target = (1.0 - pause_density) * n;
  double pause_target = pause_density * n;
  for (int i = 0; i < num_pairs; i++) {
    speech[i] *= speech_target / speech_sum;
    pause[i] *= pause_target / pause_sum;
  }

  int ramp = std::max(1, sample_rate / 100);
  double pos = 0.0;
  bool in_speech = true;
  int seg = 0;
  int t = 0;
  while (t < n) {
    double len = in_speech ? speech[seg % num_pairs] : pause[seg % num_pairs];
    int end = std::min(n, static_cast<int>(std::llround(pos + len)));
    int begin = t;
    if (!in_speech) {
      std::fill(gate.begin() + begin, gate.begin() + end, 0.0);
    } else {
      int span = end - begin;
      int r = std::min(ramp, span / 2);
      for (int i = 0; i < r; i++) {
        double c = 0.5 - 0.5 * std::cos(kPi * (i + 1) / (r + 1));
        gate[begin + i] = c;
        gate[end - 1 - i] = c;
      }
    }
    pos += len;
    t = end;
    if (!in_speech) seg++;
    in_speech = !in_speech;
  }
  return gate;
}

// Piecewise-linear control track: one random value per control interval,
// linearly interpolated between interval midpoints.
std::vector<double> ControlTrack(Rng* rng, int n, int interval, double lo,
                                 double hi) {
  int points = n / interval + 2;
  std::vector<double> ctrl(points);
  for (int i = 0; i < points; i++) ctrl[i] = lo + (hi - lo) * rng->Uniform();
  std::vector<double> track(n);
  for (int t = 0; t < n; t++) {
    double x = static_cast<double>(t) / interval;
    int i = static_cast<int>(x);
    double frac = x - i;
    track[t] = ctrl[i] * (1.0 - frac) + ctrl[i + 1] * frac;
  }
  return track;
}

Signal SpeechLikeSource(uint64_t seed, uint64_t stream, int n,
                        int sample_rate, double pause_density) {
  Rng rng(seed, stream);
  std::vector<double> gate = ActivityGate(&rng, n, sample_rate, pause_density);
  std::vector<double> freq =
      ControlTrack(&rng, n, sample_rate / 10, 300.0, 3000.0);
  std::vector<double> env =
      ControlTrack(&rng, n, 6 * sample_rate / 100, 0.25, 1.0);

  // Laplacian excitation through a two-pole resonator whose center frequency
  // wanders; the heavy-tailed excitation keeps the source super-Gaussian.
  Signal y(n, 0.0);
  const double rho = 0.92;
  double y1 = 0.0, y2 = 0.0;
  for (int t = 0; t < n; t++) {
    double theta = 2.0 * kPi * freq[t] / sample_rate;
    double v = rng.Laplacian() + 2.0 * rho * std::cos(theta) * y1 -
               rho * rho * y2;
    y2 = y1;
    y1 = v;
    y[t] = v * env[t] * gate[t];
  }

  double energy = 0.0;
  int active = 0;
  for (int t = 0; t < n; t++) {
    if (gate[t] > 0.5) {
      energy += y[t] * y[t];
      active++;
    }
  }
  if (active == 0 || energy <= 0.0)
    throw NumericalError("degenerate synthetic source");
  double scale = 1.0 / std::sqrt(energy / active);
  for (int t = 0; t < n; t++) y[t] *= scale;
  return y;
}

double CondNumber(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  double smin = svd.singularValues().tail<1>()(0);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return svd.singularValues()(0) / smin;
}

Eigen::MatrixXd ColumnNormalized(Eigen::MatrixXd a) {
  for (int j = 0; j < a.cols(); j++) {
    double norm = a.col(j).norm();
    if (norm > 0.0) a.col(j) /= norm;
  }
  return a;
}

Eigen::MatrixXd RandomMatrix(Rng* rng, int rows, int cols) {
  Eigen::MatrixXd a(rows, cols);
  for (int i = 0; i < rows; i++)
    for (int j = 0; j < cols; j++) a(i, j) = rng->Gaussian();
  return a;
}

// Draws a mixing trajectory; every matrix on it must be well conditioned.
std::vector<Eigen::MatrixXd> DrawTrajectory(Rng* rng, int rows, int cols,
                                            int blocks, double movement) {
  const double kMaxCond = 100.0;
  for (int attempt = 0; attempt < 1000; attempt++) {
    Eigen::MatrixXd start = ColumnNormalized(RandomMatrix(rng, rows, cols));
    Eigen::MatrixXd drift = RandomMatrix(rng, rows, cols);
    std::vector<Eigen::MatrixXd> traj(blocks);
    bool ok = true;
    for (int b = 0; b < blocks; b++) {
      double frac = blocks > 1 ? static_cast<double>(b) / (blocks - 1) : 0.0;
      traj[b] = ColumnNormalized(start + frac * movement * drift);
      if (CondNumber(traj[b]) > kMaxCond) {
        ok = false;
        break;
      }
    }
    if (ok) return traj;
  }
  throw NumericalError("could not draw a well conditioned mixing matrix");
}

// Image of one source at every microphone under per-block hold mixing.
MultiSignal BlockImage(const Signal& src, int source_index,
                       const std::vector<Eigen::MatrixXd>& traj,
                       int block_len) {
  int n = static_cast<int>(src.size());
  int d = static_cast<int>(traj[0].rows());
  MultiSignal img(d, Signal(n, 0.0));
  for (int t = 0; t < n; t++) {
    int b = std::min<int>(t / block_len, static_cast<int>(traj.size()) - 1);
    for (int c = 0; c < d; c++) img[c][t] += traj[b](c, source_index) * src[t];
  }
  return img;
}

MultiSignal FirImage(const Signal& src,
                     const std::vector<std::vector<double>>& taps) {
  int n = static_cast<int>(src.size());
  int d = static_cast<int>(taps.size());
  MultiSignal img(d, Signal(n, 0.0));
  for (int c = 0; c < d; c++) {
    int f = static_cast<int>(taps[c].size());
    for (int t = 0; t < n; t++) {
      double acc = 0.0;
      int tmax = std::min(f, t + 1);
      for (int tau = 0; tau < tmax; tau++) acc += taps[c][tau] * src[t - tau];
      img[c][t] = acc;
    }
  }
  return img;
}

double Ch0Energy(const MultiSignal& img) {
  double e = 0.0;
  for (double v : img[0]) e += v * v;
  return e;
}

double SumCh0Energy(const std::vector<MultiSignal>& stems, int begin,
                    int end) {
  if (begin >= end) return 0.0;
  double e = 0.0;
  size_t n = stems[begin][0].size();
  for (size_t t = 0; t < n; t++) {
    double s = 0.0;
    for (int j = begin; j < end; j++) s += stems[j][0][t];
    e += s * s;
  }
  return e;
}

double RatioDb(double num, double den) {
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  if (num <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(num / den);
}

// Per-source amplitude gains that realize the scenario's SIR and SNR targets
// on the first microphone. All interferers share one gain, solved against the
// energy of their summed first-mic image; the noise gain is solved against
// the full speech image after the interferer gain is applied.
std::vector<double> SolveGains(const std::vector<MultiSignal>& stems,
                               const Scenario& sc) {
  int num_sources = static_cast<int>(stems.size());
  int num_speakers = sc.num_speakers;
  std::vector<double> gains(num_sources, 1.0);
  if (num_speakers > 1) {
    double soi_e = Ch0Energy(stems[0]);
    double int_e = SumCh0Energy(stems, 1, num_speakers);
    if (soi_e <= 0.0 || int_e <= 0.0)
      throw DataError("cannot set SIR against silent source");
    double g = std::sqrt(soi_e / (int_e * std::pow(10.0, sc.sir_db / 10.0)));
    for (int j = 1; j < num_speakers; j++) gains[j] = g;
  }
  if (sc.noise) {
    size_t n = stems[0][0].size();
    double speech_e = 0.0;
    for (size_t t = 0; t < n; t++) {
      double s = 0.0;
      for (int j = 0; j < num_speakers; j++) s += gains[j] * stems[j][0][t];
      speech_e += s * s;
    }
    double noise_e = Ch0Energy(stems[num_speakers]);
    if (speech_e <= 0.0 || noise_e <= 0.0)
      throw DataError("cannot set SIR against silent source");
    gains[num_speakers] =
        std::sqrt(speech_e / (noise_e * std::pow(10.0, sc.snr_db / 10.0)));
  }
  return gains;
}

// Peak absolute value of the mixture that the given per-source gains would
// produce, without materializing the scaled stems.
double GainedMixturePeak(const std::vector<MultiSignal>& stems,
                         const std::vector<double>& gains, int d) {
  size_t n = stems[0][0].size();
  double peak = 0.0;
  for (int c = 0; c < d; c++)
    for (size_t t = 0; t < n; t++) {
      double s = 0.0;
      for (size_t j = 0; j < stems.size(); j++) s += gains[j] * stems[j][c][t];
      peak = std::max(peak, std::abs(s));
    }
  return peak;
}

// Mixture as the exact sample-wise sum of the stems, and realized first-mic
// ratios measured from those stems.
void FinishMix(std::vector<MultiSignal> stems, const Scenario& sc,
               MixOutput* out) {
  int num_sources = static_cast<int>(stems.size());
  int num_speakers = sc.num_speakers;
  size_t n = stems[0][0].size();
  int d = sc.num_channels;

  MultiSignal mixture(d, Signal(n, 0.0));
  for (int c = 0; c < d; c++)
    for (size_t t = 0; t < n; t++) {
      double s = 0.0;
      for (int j = 0; j < num_sources; j++) s += stems[j][c][t];
      mixture[c][t] = s;
    }

  out->realized_sir_db =
      num_speakers > 1
          ? RatioDb(Ch0Energy(stems[0]), SumCh0Energy(stems, 1, num_speakers))
          : std::numeric_limits<double>::infinity();
  out->realized_snr_db =
      sc.noise ? RatioDb(SumCh0Energy(stems, 0, num_speakers),
                         Ch0Energy(stems[num_speakers]))
               : std::numeric_limits<double>::infinity();
  out->mixture = std::move(mixture);
  out->stems = std::move(stems);
}

}  // namespace

MultiSignal GenSources(const Scenario& sc) {
  ValidateScenario(sc);
  int n = static_cast<int>(std::llround(sc.duration_s * sc.sample_rate));
  if (n <= 0) throw DataError("invalid input: empty scenario");
  MultiSignal sources;
  for (int i = 0; i < sc.num_speakers; i++)
    sources.push_back(SpeechLikeSource(sc.seed, 1 + i, n, sc.sample_rate,
                                       sc.pause_density));
  if (sc.noise) {
    Rng rng(sc.seed, 100);
    Signal noise(n);
    for (int t = 0; t < n; t++) noise[t] = rng.Gaussian();
    sources.push_back(std::move(noise));
  }
  return sources;
}

MixOutput MixWithMatrices(const MultiSignal& sources,
                          const std::vector<Eigen::MatrixXd>& block_matrices,
                          const Scenario& sc) {
  ValidateScenario(sc);
  int num_sources = static_cast<int>(sources.size());
  if (num_sources != sc.num_speakers + (sc.noise ? 1 : 0))
    throw DataError("invalid input: source count does not match scenario");
  if (block_matrices.empty())
    throw DataError("invalid input: no mixing matrices");
  size_t n = sources[0].size();
  for (const auto& s : sources)
    if (s.size() != n || n == 0)
      throw DataError("invalid input: source length mismatch");
  for (const auto& a : block_matrices)
    if (a.rows() != sc.num_channels || a.cols() != num_sources)
      throw DataError("invalid input: mixing matrix shape");

  int blocks = static_cast<int>(block_matrices.size());
  int block_len =
      static_cast<int>((n + blocks - 1) / static_cast<size_t>(blocks));
  std::vector<MultiSignal> stems;
  for (int j = 0; j < num_sources; j++)
    stems.push_back(BlockImage(sources[j], j, block_matrices, block_len));
  MixOutput out;
  FinishMix(std::move(stems), sc, &out);
  out.block_matrices = block_matrices;
  out.block_len_samples = block_len;
  return out;
}

MixOutput Mix(const MultiSignal& sources, const Scenario& sc) {
  ValidateScenario(sc);
  int num_sources = static_cast<int>(sources.size());
  if (num_sources != sc.num_speakers + (sc.noise ? 1 : 0))
    throw DataError("invalid input: source count does not match scenario");

  size_t n = sources[0].size();
  for (const auto& s : sources)
    if (s.size() != n || n == 0)
      throw DataError("invalid input: source length mismatch");

  Rng rng(sc.seed, 7);
  if (sc.mixing == MixingKind::kInstantaneous ||
      sc.mixing == MixingKind::kBlockVarying) {
    int blocks = sc.mixing == MixingKind::kInstantaneous
                     ? 1
                     : std::max(1, sc.num_mixing_blocks);
    double movement = sc.mixing == MixingKind::kInstantaneous ? 0.0
                                                              : sc.movement;
    std::vector<Eigen::MatrixXd> traj =
        DrawTrajectory(&rng, sc.num_channels, num_sources, blocks, movement);
    int block_len =
        static_cast<int>((n + blocks - 1) / static_cast<size_t>(blocks));
    std::vector<MultiSignal> stems;
    for (int j = 0; j < num_sources; j++)
      stems.push_back(BlockImage(sources[j], j, traj, block_len));
    std::vector<double> gains = SolveGains(stems, sc);
    double peak = GainedMixturePeak(stems, gains, sc.num_channels);
    if (peak <= 0.0) throw DataError("invalid input: silent mixture");
    double scale = sc.peak / peak;
    // Fold the gains and the peak normalization into the matrices so the
    // recorded trajectory exactly reproduces the mixture.
    for (auto& a : traj)
      for (int j = 0; j < num_sources; j++) a.col(j) *= scale * gains[j];
    return MixWithMatrices(sources, traj, sc);
  }

  // Short random FIR channels: a well conditioned instantaneous part plus
  // exponentially decaying random taps.
  int taps = std::max(1, sc.fir_taps);
  std::vector<Eigen::MatrixXd> head =
      DrawTrajectory(&rng, sc.num_channels, num_sources, 1, 0.0);
  std::vector<MultiSignal> stems;
  for (int j = 0; j < num_sources; j++) {
    std::vector<std::vector<double>> h(sc.num_channels,
                                       std::vector<double>(taps, 0.0));
    for (int c = 0; c < sc.num_channels; c++) {
      h[c][0] = head[0](c, j);
      for (int tau = 1; tau < taps; tau++)
        h[c][tau] = head[0](c, j) * 0.4 *
                    std::exp(-2.5 * tau / taps) * rng.Gaussian();
    }
    stems.push_back(FirImage(sources[j], h));
  }
  std::vector<double> gains = SolveGains(stems, sc);
  double peak = GainedMixturePeak(stems, gains, sc.num_channels);
  if (peak <= 0.0) throw DataError("invalid input: silent mixture");
  double scale = sc.peak / peak;
  for (int j = 0; j < num_sources; j++)
    for (int c = 0; c < sc.num_channels; c++)
      for (size_t t = 0; t < n; t++) stems[j][c][t] *= scale * gains[j];
  MixOutput out;
  FinishMix(std::move(stems), sc, &out);
  out.block_len_samples = static_cast<int>(n);
  return out;
}

SourceRoles RolesFromStems(const MixOutput& mix, const Scenario& sc,
                           int soi_index) {
  if (soi_index < 0 || soi_index >= sc.num_speakers)
    throw DataError("SOI not in enrollment set");
  SourceRoles roles;
  roles.sample_rate = sc.sample_rate;
  roles.soi = mix.stems[soi_index][0];
  for (int j = 0; j < sc.num_speakers; j++)
    if (j != soi_index) roles.background.push_back(mix.stems[j][0]);
  if (sc.noise) roles.noise = mix.stems[sc.num_speakers][0];
  return roles;
}

}  // namespace ivex
