// tests/test_deflation.cc

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
#include <map>
#include <vector>

#include "ivex/deflation.h"
#include "ivex/rng.h"
#include "ivex/stft.h"

using namespace ivex;

namespace {

// A spectrogram with explicit per-bin data, bypassing the analysis stage.
ComplexSpectrogram MakeSpectrogram(int bins, int channels, int frames) {
  ComplexSpectrogram sg;
  sg.sample_rate = 8000;
  sg.data.assign(bins, CMat::Zero(channels, frames));
  return sg;
}

DemixingState MakeState(const std::vector<CVec>& w,
                        const std::vector<CVec>& a, int blocks) {
  DemixingState state;
  state.w = w;
  state.a.resize(w.size());
  for (size_t k = 0; k < w.size(); ++k)
    state.a[k].assign(blocks, a[k]);
  return state;
}

ComplexSpectrogram AnalyzedNoise(uint64_t seed, int channels, int samples) {
  Rng rng(seed);
  MultiSignal sig(channels, Signal(samples));
  for (auto& ch : sig)
    for (double& v : ch) v = rng.Gaussian();
  FrameSpec spec;
  spec.frame_len = 64;
  spec.hop = 32;
  spec.fft_len = 64;
  return Analyze(sig, spec, 8000);
}

SolverConfig FastSolver() {
  SolverConfig cfg;
  cfg.iterations = 3;
  cfg.block_len = 1000;
  cfg.convergence_tol = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("source removal on a worked one-bin example") {
  // x = (1, 1), w = (1, 0), a = (1, 0.5): the residual is (0, 0.5).
  ComplexSpectrogram x = MakeSpectrogram(1, 2, 1);
  x.data[0](0, 0) = 1.0;
  x.data[0](1, 0) = 1.0;
  CVec w(2), a(2);
  w << 1.0, 0.0;
  a << 1.0, 0.5;
  DemixingState state = MakeState({w}, {a}, 1);
  BlockPartition part = Partition(1, 1);

  SUBCASE("dropping the first channel keeps the half") {
    ComplexSpectrogram out =
        Subtract(x, state, part, ReductionKind::kDropChannel, 0);
    REQUIRE(out.Channels() == 1);
    CHECK(std::abs(out.data[0](0, 0) - Cplx(0.5, 0.0)) <= 1e-15);
  }
  SUBCASE("the weakest-reliance rule discards the separator's dead channel") {
    // |w| = (1, 0), so channel 1 is the one the separator ignores.
    ComplexSpectrogram out =
        Subtract(x, state, part, ReductionKind::kDropWeakestChannel);
    REQUIRE(out.Channels() == 1);
    CHECK(std::abs(out.data[0](0, 0)) <= 1e-15);
  }
  SUBCASE("the principal direction keeps the residual energy") {
    ComplexSpectrogram out = Subtract(x, state, part, ReductionKind::kPca);
    REQUIRE(out.Channels() == 1);
    CHECK(std::abs(out.data[0](0, 0)) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("out-of-range drop index") {
    CHECK_THROWS_WITH_AS(
        Subtract(x, state, part, ReductionKind::kDropChannel, 2),
        "invalid reduction matrix", DataError);
    CHECK_THROWS_AS(Subtract(x, state, part, ReductionKind::kDropChannel, -1),
                    DataError);
  }
}

TEST_CASE("removing a rank-one source leaves nothing behind") {
  Rng rng(60);
  const int d = 3, frames = 12;
  CVec mix(d);
  for (int c = 0; c < d; ++c) mix(c) = Cplx(rng.Gaussian(), rng.Gaussian());
  ComplexSpectrogram x = MakeSpectrogram(2, d, frames);
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < frames; ++l)
      x.data[k].col(l) = mix * Cplx(rng.Gaussian(), rng.Gaussian());

  // Any separator with w^H mix == 1 reproduces the source exactly.
  CVec w = mix / mix.squaredNorm();
  DemixingState state = MakeState({w, w}, {mix, mix}, 1);
  BlockPartition part = Partition(frames, frames);
  ComplexSpectrogram out =
      Subtract(x, state, part, ReductionKind::kDropChannel, 0);

  double residual = 0.0, total = 0.0;
  for (int k = 0; k < 2; ++k) {
    residual += out.data[k].squaredNorm();
    total += x.data[k].squaredNorm();
  }
  CHECK(residual <= 1e-24 * total);
}

TEST_CASE("the separator is orthogonal to what it leaves behind") {
  Rng rng(61);
  const int d = 4, frames = 30, bins = 5, blocks = 3;
  ComplexSpectrogram x = MakeSpectrogram(bins, d, frames);
  for (int k = 0; k < bins; ++k)
    for (int c = 0; c < d; ++c)
      for (int l = 0; l < frames; ++l)
        x.data[k](c, l) = Cplx(rng.Gaussian(), rng.Gaussian());

  BlockPartition part = Partition(frames, 10);
  REQUIRE(part.block_count == blocks);
  DemixingState state;
  state.w.resize(bins);
  state.a.resize(bins);
  for (int k = 0; k < bins; ++k) {
    CVec w(d);
    for (int c = 0; c < d; ++c) w(c) = Cplx(rng.Gaussian(), rng.Gaussian());
    state.w[k] = w;
    for (int t = 0; t < blocks; ++t) {
      CVec a(d);
      for (int c = 0; c < d; ++c) a(c) = Cplx(rng.Gaussian(), rng.Gaussian());
      // Force the gain constraint the solver guarantees: w^H a == 1.
      a /= w.dot(a);
      state.a[k].push_back(a);
    }
  }

  // Residual recomputed here from the defining formula.
  std::vector<CMat> manual(bins);
  double x_norm = 0.0, w_residual = 0.0;
  for (int k = 0; k < bins; ++k) {
    manual[k] = CMat(d, frames);
    for (int l = 0; l < frames; ++l) {
      Cplx u = state.w[k].dot(x.data[k].col(l));
      manual[k].col(l) = x.data[k].col(l) - state.a[k][part.BlockOf(l)] * u;
      w_residual += std::norm(state.w[k].dot(manual[k].col(l)));
      x_norm += x.data[k].col(l).squaredNorm();
    }
  }
  CHECK(std::sqrt(w_residual) <= 1e-10 * std::sqrt(x_norm));

  ComplexSpectrogram dropped =
      Subtract(x, state, part, ReductionKind::kDropChannel, 2);
  for (int k = 0; k < bins; ++k) {
    int row = 0;
    for (int c = 0; c < d; ++c) {
      if (c == 2) continue;
      CHECK((dropped.data[k].row(row++) - manual[k].row(c))
                .cwiseAbs()
                .maxCoeff() <= 1e-15 * std::sqrt(x_norm));
    }
  }
}

TEST_CASE("removing one of two sources exposes the other") {
  Rng rng(62);
  const int frames = 20;
  CVec a1(2), a2(2);
  a1 << Cplx(1.0, 0.2), Cplx(0.4, -0.3);
  a2 << Cplx(0.3, -0.1), Cplx(1.1, 0.5);
  CMat s(2, frames);
  for (int i = 0; i < 2; ++i)
    for (int l = 0; l < frames; ++l)
      s(i, l) = Cplx(rng.Gaussian(), rng.Gaussian());

  ComplexSpectrogram x = MakeSpectrogram(1, 2, frames);
  for (int l = 0; l < frames; ++l)
    x.data[0].col(l) = a1 * s(0, l) + a2 * s(1, l);

  // w with w^H a1 = 1 and w^H a2 = 0 isolates source one exactly.
  CMat mixing(2, 2);
  mixing.col(0) = a1;
  mixing.col(1) = a2;
  CVec e1(2);
  e1 << 1.0, 0.0;
  CVec w = mixing.adjoint().fullPivLu().solve(e1);

  DemixingState state = MakeState({w}, {a1}, 1);
  BlockPartition part = Partition(frames, frames);
  ComplexSpectrogram out =
      Subtract(x, state, part, ReductionKind::kDropChannel, 0);
  for (int l = 0; l < frames; ++l) {
    CHECK(std::abs(out.data[0](0, l) - a2(1) * s(1, l)) <= 1e-12);
  }
}

TEST_CASE("audit entries survive the text round trip") {
  DeflationAuditEntry entry;
  entry.step = 2;
  entry.channels = 3;
  entry.comparison = "estimate_vs_mixture";
  entry.candidate_a = "u2";
  entry.candidate_b = "x2";
  entry.score_a = -0.12345678901234567;
  entry.score_b = 1.0 / 3.0;
  entry.decision = "deflate";

  DeflationAuditEntry back = AuditEntryFromLine(ToLine(entry));
  CHECK(back.step == entry.step);
  CHECK(back.channels == entry.channels);
  CHECK(back.comparison == entry.comparison);
  CHECK(back.candidate_a == entry.candidate_a);
  CHECK(back.candidate_b == entry.candidate_b);
  CHECK(back.score_a == entry.score_a);
  CHECK(back.score_b == entry.score_b);
  CHECK(back.decision == entry.decision);

  CHECK_THROWS_AS(AuditEntryFromLine("step=1 bogus"), DataError);
  CHECK_THROWS_AS(AuditEntryFromLine("step=1 unknown_key=2"), DataError);
}

TEST_CASE("deflation loop branches") {
  ComplexSpectrogram x = AnalyzedNoise(63, 3, 4000);
  DeflationConfig cfg;
  cfg.solver = FastSolver();
  cfg.max_steps = 2;
  std::vector<bool> no_mask;

  SUBCASE("a winning estimate is returned immediately") {
    AssessmentBackend backend =
        AssessmentBackend::Table({{"u0", 1.0}, {"x0", 0.0}});
    DeflationResult result =
        ExtractWithDeflation(x, cfg, no_mask, backend);
    CHECK(result.returned == "estimate");
    CHECK(result.solver_runs == 1);
    REQUIRE(result.audit.size() == 1);
    CHECK(result.audit[0].comparison == "estimate_vs_mixture");
    CHECK(result.audit[0].decision == "return_estimate");
    CHECK(result.audit[0].candidate_a == "u0");
    CHECK(result.audit[0].candidate_b == "x0");
    CHECK(result.audit[0].channels == 3);
    CHECK(result.estimate.Channels() == 1);
    CHECK(result.estimate.Frames() == x.Frames());
  }
  SUBCASE("a harmful reduction hands back the untouched mixture") {
    AssessmentBackend backend = AssessmentBackend::Table(
        {{"u0", 0.0}, {"x0", 1.0}, {"x1", 0.5}});
    DeflationResult result =
        ExtractWithDeflation(x, cfg, no_mask, backend);
    CHECK(result.returned == "mixture");
    CHECK(result.solver_runs == 1);
    REQUIRE(result.audit.size() == 2);
    CHECK(result.audit[0].decision == "deflate");
    CHECK(result.audit[1].comparison == "mixture_vs_reduced");
    CHECK(result.audit[1].decision == "return_mixture");
    CHECK(result.audit[1].candidate_a == "x0");
    CHECK(result.audit[1].candidate_b == "x1");
    // Bit-for-bit the first channel of the input mixture.
    for (int k = 0; k < x.Bins(); ++k)
      CHECK((result.estimate.data[k] - x.data[k].row(0))
                .cwiseAbs()
                .maxCoeff() == 0.0);
  }
  SUBCASE("an exhausted budget returns the reduced mixture") {
    // Exact score ties: both comparisons resolve toward deflation.
    cfg.max_steps = 1;
    AssessmentBackend backend = AssessmentBackend::Table(
        {{"u0", 1.0}, {"x0", 1.0}, {"x1", 1.0}});
    DeflationResult result =
        ExtractWithDeflation(x, cfg, no_mask, backend);
    CHECK(result.returned == "reduced_mixture");
    CHECK(result.solver_runs == 1);
    REQUIRE(result.audit.size() == 3);
    CHECK(result.audit[0].decision == "deflate");
    CHECK(result.audit[1].decision == "continue");
    CHECK(result.audit[2].comparison == "budget");
    CHECK(result.audit[2].decision == "budget_exhausted");
    CHECK(result.audit[2].candidate_a == "x1");
    CHECK(result.audit[2].candidate_b == "-");
    CHECK(result.estimate.Channels() == 1);
  }
  SUBCASE("two steps walk down to a two-channel mixture") {
    cfg.max_steps = 2;
    AssessmentBackend backend = AssessmentBackend::Table(
        {{"u0", 0.0}, {"x0", 1.0}, {"x1", 2.0}, {"u1", 0.0}, {"x2", 3.0}});
    DeflationResult result =
        ExtractWithDeflation(x, cfg, no_mask, backend);
    CHECK(result.returned == "reduced_mixture");
    CHECK(result.solver_runs == 2);
    REQUIRE(result.audit.size() == 5);
    CHECK(result.audit[2].channels == 2);
    CHECK(result.audit[4].decision == "budget_exhausted");
  }
  SUBCASE("a solver failure aborts cleanly") {
    cfg.solver.iterations = 0;
    AssessmentBackend backend = AssessmentBackend::Table({{"u0", 1.0}});
    DeflationResult result =
        ExtractWithDeflation(x, cfg, no_mask, backend);
    CHECK(result.returned == "aborted");
    CHECK(result.solver_runs == 0);
    CHECK_FALSE(result.error.empty());
  }
  SUBCASE("budget validation") {
    cfg.max_steps = 0;
    AssessmentBackend backend = AssessmentBackend::Table({});
    CHECK_THROWS_WITH_AS(
        ExtractWithDeflation(x, cfg, no_mask, backend),
        "invalid input: deflation budget must be in [1, d-1]", DataError);
    cfg.max_steps = 3;  // equals the channel count, one too many
    CHECK_THROWS_AS(ExtractWithDeflation(x, cfg, no_mask, backend),
                    DataError);
  }
  SUBCASE("mask length validation") {
    AssessmentBackend backend = AssessmentBackend::Table({});
    std::vector<bool> short_mask(3, true);
    CHECK_THROWS_AS(ExtractWithDeflation(x, cfg, short_mask, backend),
                    DataError);
  }
}

TEST_CASE("the dominance mask steers every restart pass") {
  // With a mask, each pass rebuilds its pilot from the current mixture, so
  // the solver sees a pilot of matching length at every width.
  ComplexSpectrogram x = AnalyzedNoise(64, 3, 4000);
  DeflationConfig cfg;
  cfg.solver = FastSolver();
  cfg.max_steps = 2;
  std::vector<bool> mask(x.Frames());
  for (int l = 0; l < x.Frames(); ++l) mask[l] = l % 2 == 0;
  AssessmentBackend backend = AssessmentBackend::Table(
      {{"u0", 0.0}, {"x0", 1.0}, {"x1", 2.0}, {"u1", 0.0}, {"x2", 3.0}});
  DeflationResult result = ExtractWithDeflation(x, cfg, mask, backend);
  CHECK(result.returned == "reduced_mixture");
  CHECK(result.solver_runs == 2);
}
