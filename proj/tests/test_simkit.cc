// tests/test_simkit.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ivex/simkit.h"

using namespace ivex;

namespace {

Scenario SmallScene() {
  Scenario sc;
  sc.num_channels = 3;
  sc.num_speakers = 2;
  sc.noise = true;
  sc.duration_s = 2.0;
  sc.sample_rate = 8000;
  sc.sir_db = 5.0;
  sc.snr_db = 15.0;
  sc.seed = 70;
  return sc;
}

double EnergyOf(const Signal& s) {
  double e = 0.0;
  for (double v : s) e += v * v;
  return e;
}

double CondOf(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0) /
         svd.singularValues()(svd.singularValues().size() - 1);
}

bool BitEqual(const MultiSignal& a, const MultiSignal& b) {
  if (a.size() != b.size()) return false;
  for (size_t c = 0; c < a.size(); ++c) {
    if (a[c].size() != b[c].size()) return false;
    for (size_t t = 0; t < a[c].size(); ++t)
      if (a[c][t] != b[c][t]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("source generation is a pure function of the scenario") {
  Scenario sc = SmallScene();
  MultiSignal a = GenSources(sc);
  MultiSignal b = GenSources(sc);
  REQUIRE(a.size() == 3);  // two speakers and one noise source
  CHECK(BitEqual(a, b));

  sc.seed = 71;
  MultiSignal c = GenSources(sc);
  CHECK_FALSE(BitEqual(a, c));

  sc.noise = false;
  CHECK(GenSources(sc).size() == 2);
}

TEST_CASE("speech-like sources pause, stay heavy-tailed, and sit near unit "
          "power") {
  Scenario sc = SmallScene();
  MultiSignal sources = GenSources(sc);
  for (int j = 0; j < 2; ++j) {
    const Signal& s = sources[j];
    const int n = static_cast<int>(s.size());

    // Pauses are exactly silent, so the silence budget is directly countable.
    int zeros = 0;
    for (double v : s) zeros += v == 0.0 ? 1 : 0;
    double silent_fraction = static_cast<double>(zeros) / n;
    CHECK(silent_fraction == doctest::Approx(sc.pause_density).epsilon(0.08));

    double sumsq = 0.0, sum4 = 0.0, active_sumsq = 0.0;
    int active = 0;
    for (double v : s) {
      sumsq += v * v;
      sum4 += v * v * v * v;
      if (v != 0.0) {
        ++active;
        active_sumsq += v * v;
      }
    }
    double var = sumsq / n;
    double excess_kurtosis = sum4 / n / (var * var) - 3.0;
    CHECK(excess_kurtosis > 1.0);
    double active_rms = std::sqrt(active_sumsq / active);
    CHECK(active_rms > 0.85);
    CHECK(active_rms < 1.15);
  }

  // The noise source is plain and dense.
  int noise_zeros = 0;
  for (double v : sources[2]) noise_zeros += v == 0.0 ? 1 : 0;
  CHECK(noise_zeros == 0);
}

TEST_CASE("scenario validation") {
  Scenario sc = SmallScene();
  sc.num_channels = 2;  // three sources cannot fit
  CHECK_THROWS_AS(GenSources(sc), DataError);
  sc = SmallScene();
  sc.pause_density = 1.0;
  CHECK_THROWS_AS(GenSources(sc), DataError);
  sc = SmallScene();
  sc.duration_s = 0.0;
  CHECK_THROWS_AS(GenSources(sc), DataError);
  sc = SmallScene();
  sc.peak = 0.0;
  CHECK_THROWS_AS(Mix(GenSources(SmallScene()), sc), DataError);
}

TEST_CASE("mixing hits the requested ratios and peak") {
  for (MixingKind kind : {MixingKind::kInstantaneous, MixingKind::kBlockVarying,
                          MixingKind::kFir}) {
    Scenario sc = SmallScene();
    sc.mixing = kind;
    sc.num_mixing_blocks = 4;
    MixOutput out = Mix(GenSources(sc), sc);

    CHECK(std::abs(out.realized_sir_db - sc.sir_db) <= 1e-6);
    CHECK(std::abs(out.realized_snr_db - sc.snr_db) <= 1e-6);

    double peak = 0.0;
    for (const Signal& ch : out.mixture)
      for (double v : ch) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(sc.peak).epsilon(1e-9));

    // The mixture is the exact sample-wise sum of the stems.
    for (int c = 0; c < sc.num_channels; ++c) {
      for (size_t t = 0; t < out.mixture[c].size(); t += 997) {
        double sum = 0.0;
        for (const MultiSignal& stem : out.stems) sum += stem[c][t];
        CHECK(out.mixture[c][t] == sum);
      }
    }
  }
}

TEST_CASE("a negative target ratio is realized just as exactly") {
  Scenario sc = SmallScene();
  sc.sir_db = -5.0;
  MixOutput out = Mix(GenSources(sc), sc);
  CHECK(std::abs(out.realized_sir_db + 5.0) <= 1e-6);
}

TEST_CASE("identity mixing passes sources through untouched") {
  Scenario sc;
  sc.num_channels = 2;
  sc.num_speakers = 2;
  sc.noise = false;
  sc.duration_s = 1.0;
  sc.sample_rate = 8000;
  sc.seed = 72;
  MultiSignal sources = GenSources(sc);
  MixOutput out =
      MixWithMatrices(sources, {Eigen::MatrixXd::Identity(2, 2)}, sc);
  for (size_t t = 0; t < sources[0].size(); ++t) {
    CHECK(out.mixture[0][t] == sources[0][t]);
    CHECK(out.mixture[1][t] == sources[1][t]);
    CHECK(out.stems[0][1][t] == 0.0);
    CHECK(out.stems[1][0][t] == 0.0);
  }
  CHECK(out.block_len_samples == 8000);
}

TEST_CASE("a constant trajectory reproduces static mixing bit for bit") {
  Scenario sc = SmallScene();
  sc.noise = false;
  MultiSignal sources = GenSources(sc);
  Eigen::MatrixXd a(3, 2);
  a << 1.0, 0.3, -0.2, 0.9, 0.5, -0.4;
  MixOutput single = MixWithMatrices(sources, {a}, sc);
  MixOutput held = MixWithMatrices(sources, {a, a, a}, sc);
  CHECK(BitEqual(single.mixture, held.mixture));
  for (size_t j = 0; j < single.stems.size(); ++j)
    CHECK(BitEqual(single.stems[j], held.stems[j]));
  CHECK(single.realized_sir_db == held.realized_sir_db);
}

TEST_CASE("the recorded trajectory exactly explains the mixture") {
  Scenario sc = SmallScene();
  sc.mixing = MixingKind::kBlockVarying;
  sc.num_mixing_blocks = 4;
  sc.duration_s = 1.0;  // 8000 samples: blocks of exactly 2000
  MultiSignal sources = GenSources(sc);
  MixOutput out = Mix(sources, sc);
  REQUIRE(out.block_matrices.size() == 4);
  REQUIRE(out.block_len_samples == 2000);

  const int num_sources = 3;
  for (int b = 0; b < 4; ++b) {
    const int begin = b * 2000;
    Eigen::MatrixXd x(2000, num_sources);
    for (int j = 0; j < num_sources; ++j)
      for (int t = 0; t < 2000; ++t) x(t, j) = sources[j][begin + t];
    for (int c = 0; c < sc.num_channels; ++c) {
      Eigen::VectorXd y(2000);
      for (int t = 0; t < 2000; ++t) y(t) = out.mixture[c][begin + t];
      Eigen::VectorXd m = x.colPivHouseholderQr().solve(y);
      for (int j = 0; j < num_sources; ++j)
        CHECK(m(j) == doctest::Approx(out.block_matrices[b](c, j))
                          .epsilon(1e-8));
    }
    // Gains fold into column scales only, so renormalizing recovers a
    // well conditioned matrix.
    Eigen::MatrixXd renorm = out.block_matrices[b];
    for (int j = 0; j < num_sources; ++j) renorm.col(j) /= renorm.col(j).norm();
    CHECK(CondOf(renorm) <= 100.0 * (1.0 + 1e-9));
  }

  SUBCASE("replaying the recorded matrices rebuilds the mixture bitwise") {
    MixOutput replay = MixWithMatrices(sources, out.block_matrices, sc);
    CHECK(BitEqual(replay.mixture, out.mixture));
    for (size_t j = 0; j < replay.stems.size(); ++j)
      CHECK(BitEqual(replay.stems[j], out.stems[j]));
  }
}

TEST_CASE("a silent competitor cannot meet a ratio target") {
  Scenario sc = SmallScene();
  MultiSignal sources = GenSources(sc);
  for (double& v : sources[1]) v = 0.0;
  CHECK_THROWS_WITH_AS(Mix(sources, sc),
                       "cannot set SIR against silent source", DataError);
}

TEST_CASE("reference roles are sliced from the stems") {
  Scenario sc = SmallScene();
  MixOutput out = Mix(GenSources(sc), sc);

  SourceRoles roles = RolesFromStems(out, sc, 0);
  CHECK(roles.sample_rate == sc.sample_rate);
  CHECK(roles.soi == out.stems[0][0]);
  REQUIRE(roles.background.size() == 1);
  CHECK(roles.background[0] == out.stems[1][0]);
  CHECK(roles.noise == out.stems[2][0]);

  SourceRoles other = RolesFromStems(out, sc, 1);
  CHECK(other.soi == out.stems[1][0]);
  CHECK(other.background[0] == out.stems[0][0]);

  CHECK_THROWS_AS(RolesFromStems(out, sc, 2), DataError);
  CHECK_THROWS_AS(RolesFromStems(out, sc, -1), DataError);

  // The designated target's first-mic energy stands above the competition by
  // the realized ratio.
  double sir = 10.0 * std::log10(EnergyOf(roles.soi) /
                                 EnergyOf(roles.background[0]));
  CHECK(sir == doctest::Approx(out.realized_sir_db).epsilon(1e-9));
}
