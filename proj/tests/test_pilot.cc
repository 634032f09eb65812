// tests/test_pilot.cc

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

#include "ivex/pilot.h"
#include "ivex/rng.h"
#include "ivex/stft.h"

using namespace ivex;

namespace {

FrameSpec SmallSpec() {
  FrameSpec spec;
  spec.frame_len = 4;
  spec.hop = 4;
  spec.fft_len = 4;
  spec.window = Window::kRectangular;
  return spec;
}

// Three rectangular 4-sample frames with hand-picked per-frame energies.
SourceRoles HandRoles() {
  SourceRoles roles;
  roles.sample_rate = 8000;
  // Frame energies 5, 2, 0.
  roles.soi = {2, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0};
  // One competing speaker with frame energies 2, 1, 1.
  roles.background = {{1, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0}};
  return roles;
}

}  // namespace

TEST_CASE("ground-truth dominance marks frames with a clear energy lead") {
  SourceRoles roles = HandRoles();
  // 5 > 2*2 in the first frame only; 2 > 2*1 fails the strict test.
  std::vector<bool> mask = OracleMask(roles, SmallSpec());
  REQUIRE(mask.size() == 3);
  CHECK(mask[0]);
  CHECK_FALSE(mask[1]);
  CHECK_FALSE(mask[2]);

  SUBCASE("noise joins the competition") {
    roles.noise = {1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    // Competition in frame 0 rises to 3, so 5 > 2*3 no longer holds.
    std::vector<bool> with_noise = OracleMask(roles, SmallSpec());
    CHECK_FALSE(with_noise[0]);
    CHECK_FALSE(with_noise[1]);
    CHECK_FALSE(with_noise[2]);
  }
  SUBCASE("an exact tie is not dominance") {
    roles.background = {roles.soi};
    std::vector<bool> tie = OracleMask(roles, SmallSpec(), 1.0);
    for (bool m : tie) CHECK_FALSE(m);
  }
  SUBCASE("a silent target is never dominant") {
    roles.soi.assign(12, 0.0);
    std::vector<bool> silent = OracleMask(roles, SmallSpec());
    for (bool m : silent) CHECK_FALSE(m);
  }
}

TEST_CASE("ground-truth dominance validates its inputs") {
  SourceRoles roles = HandRoles();
  SUBCASE("references are required") {
    roles.background.clear();
    CHECK_THROWS_WITH_AS(OracleMask(roles, SmallSpec()),
                         "oracle pilot requires reference stems", DataError);
  }
  SUBCASE("reference lengths must agree") {
    roles.background[0].pop_back();
    CHECK_THROWS_AS(OracleMask(roles, SmallSpec()), DataError);
  }
  SUBCASE("the threshold must be positive") {
    CHECK_THROWS_AS(OracleMask(roles, SmallSpec(), 0.0), DataError);
  }
}

TEST_CASE("score-table dominance") {
  ScoreTable table;
  table.roster = {"alice", "bob"};
  table.frame_scores = {{2.0, 1.0}, {1.0, 1.0}, {1.0, 2.0}, {0.5, 0.2}};

  SUBCASE("strict argmax without a floor") {
    std::vector<bool> mask = ScoreMask(table, "alice");
    REQUIRE(mask.size() == 4);
    CHECK(mask[0]);
    CHECK_FALSE(mask[1]);  // exact tie
    CHECK_FALSE(mask[2]);
    CHECK(mask[3]);
  }
  SUBCASE("the activity floor is strict as well") {
    table.theta_min["alice"] = 0.5;
    std::vector<bool> mask = ScoreMask(table, "alice");
    CHECK(mask[0]);
    CHECK_FALSE(mask[3]);  // 0.5 > 0.5 fails
    table.theta_min["alice"] = 0.49;
    CHECK(ScoreMask(table, "alice")[3]);
  }
  SUBCASE("raising the floor only shrinks the mask") {
    std::vector<double> floors = {-1.0, 0.0, 0.6, 1.5, 3.0};
    std::vector<bool> prev(4, true);
    for (double f : floors) {
      table.theta_min["alice"] = f;
      std::vector<bool> mask = ScoreMask(table, "alice");
      for (size_t l = 0; l < mask.size(); ++l) {
        if (mask[l]) CHECK(prev[l]);
      }
      prev = mask;
    }
  }
  SUBCASE("only score order matters") {
    ScoreTable scaled = table;
    for (auto& row : scaled.frame_scores)
      for (double& v : row) v = 2.0 * v + 3.0;
    CHECK(ScoreMask(scaled, "alice") == ScoreMask(table, "alice"));
    CHECK(ScoreMask(scaled, "bob") == ScoreMask(table, "bob"));
  }
  SUBCASE("unknown speakers are rejected") {
    CHECK_THROWS_AS(ScoreMask(table, "carol"), DataError);
  }
  SUBCASE("rows must cover the roster") {
    table.frame_scores[2] = {1.0};
    CHECK_THROWS_AS(ScoreMask(table, "alice"), DataError);
  }
}

TEST_CASE("score-table density comes out exactly as constructed") {
  ScoreTable table;
  table.roster = {"a", "b", "c"};
  Rng rng(40);
  int want = 0;
  for (int l = 0; l < 200; ++l) {
    double a = rng.Uniform(), b = rng.Uniform(), c = rng.Uniform();
    bool dominant = l % 10 < 7;  // 70 percent of frames by construction
    if (dominant) a = std::max({a, b, c}) + 0.5;
    else a = std::min({a, b, c}) - 0.5;
    table.frame_scores.push_back({a, b, c});
    want += dominant ? 1 : 0;
  }
  std::vector<bool> mask = ScoreMask(table, "a");
  int got = 0;
  for (bool m : mask) got += m ? 1 : 0;
  CHECK(got == want);
  CHECK(got == 140);
}

TEST_CASE("pilot assembly copies masked first-channel frame energies") {
  // One frame, fft_len 2: bins are DC and Nyquist, both counted once.
  ComplexSpectrogram sg;
  sg.sample_rate = 8000;
  sg.spec.frame_len = 2;
  sg.spec.hop = 2;
  sg.spec.fft_len = 2;
  sg.spec.window = Window::kRectangular;
  sg.data.assign(2, CMat::Zero(2, 1));
  sg.data[0](0, 0) = Cplx(3.0, 4.0);
  sg.data[1](0, 0) = Cplx(0.0, 0.0);
  sg.data[0](1, 0) = Cplx(9.0, 9.0);  // other channel must be ignored

  PilotTrack track = BuildPilot(sg, {true}, PilotTrack::Provenance::kOracle);
  CHECK(track.values[0] == 25.0);
  CHECK(track.mask[0]);
  CHECK(track.provenance == PilotTrack::Provenance::kOracle);

  PilotTrack off = BuildPilot(sg, {false}, PilotTrack::Provenance::kOracle);
  CHECK(off.values[0] == 0.0);
  CHECK_FALSE(off.mask[0]);
}

TEST_CASE("pilot values are positive exactly where the mask is set") {
  Rng rng(41);
  ComplexSpectrogram sg;
  sg.sample_rate = 8000;
  sg.spec.frame_len = 8;
  sg.spec.hop = 8;
  sg.spec.fft_len = 8;
  sg.data.assign(5, CMat::Zero(1, 6));
  for (int k = 0; k < 5; ++k)
    for (int f = 0; f < 6; ++f)
      if (f != 2)  // frame 2 stays silent
        sg.data[k](0, f) = Cplx(rng.Gaussian(), rng.Gaussian());

  std::vector<bool> mask = {true, false, true, true, false, true};
  PilotTrack track = BuildPilot(sg, mask, PilotTrack::Provenance::kCustom);
  REQUIRE(track.values.size() == 6);
  for (size_t l = 0; l < track.values.size(); ++l) {
    CHECK((track.values[l] > 0.0) == track.mask[l]);
  }
  // The masked silent frame was unmarked rather than kept at zero.
  CHECK_FALSE(track.mask[2]);
  CHECK(track.mask[0]);

  // Independent energy sum: DC and Nyquist once, interior bins twice.
  for (int l : {0, 3, 5}) {
    double want = std::norm(sg.data[0](0, l)) + std::norm(sg.data[4](0, l));
    for (int k = 1; k < 4; ++k) want += 2.0 * std::norm(sg.data[k](0, l));
    CHECK(track.values[l] == doctest::Approx(want).epsilon(1e-12));
  }

  CHECK_THROWS_AS(
      BuildPilot(sg, std::vector<bool>(5, true), PilotTrack::Provenance::kCustom),
      DataError);
}

TEST_CASE("mask corruption swaps comparable frames first") {
  // Six target frames with distinct energy margins and four competitor
  // frames, again with distinct margins.
  std::vector<bool> soi(12, false);
  std::vector<bool> interferer(12, false);
  std::vector<double> soi_e(12, 1.0);
  std::vector<double> bg_e(12, 1.0);
  for (int l = 0; l < 6; ++l) {
    soi[l] = true;
    soi_e[l] = 10.0 + l;  // margins 10, 11, ..., 15
    bg_e[l] = 1.0;
  }
  for (int l = 6; l < 10; ++l) {
    interferer[l] = true;
    soi_e[l] = 1.0;
    bg_e[l] = 20.0 - l;  // margins 14, 13, 12, 11
  }

  SUBCASE("zero fraction is the identity") {
    CHECK(CorruptMask(soi, 0.0, interferer, soi_e, bg_e, 7) == soi);
  }
  SUBCASE("full corruption moves the mask to the competition") {
    std::vector<bool> out = CorruptMask(soi, 1.0, interferer, soi_e, bg_e, 7);
    for (int l = 0; l < 6; ++l) CHECK_FALSE(out[l]);
    for (int l = 6; l < 10; ++l) CHECK(out[l]);
    CHECK_FALSE(out[10]);
    CHECK_FALSE(out[11]);
  }
  SUBCASE("half of six rounds to three and takes the closest margins") {
    std::vector<bool> out = CorruptMask(soi, 0.5, interferer, soi_e, bg_e, 7);
    // Cleared: frames 0..2 (smallest target lead). Kept: 3..5.
    CHECK_FALSE(out[0]);
    CHECK_FALSE(out[1]);
    CHECK_FALSE(out[2]);
    CHECK(out[3]);
    CHECK(out[4]);
    CHECK(out[5]);
    // Added: competitor frames with the weakest dominance, 9 then 8 then 7.
    CHECK_FALSE(out[6]);
    CHECK(out[7]);
    CHECK(out[8]);
    CHECK(out[9]);
  }
  SUBCASE("growing the fraction nests the swaps") {
    std::vector<bool> small = CorruptMask(soi, 0.3, interferer, soi_e, bg_e, 7);
    std::vector<bool> large = CorruptMask(soi, 0.8, interferer, soi_e, bg_e, 7);
    for (int l = 0; l < 6; ++l) {
      if (!small[l]) CHECK_FALSE(large[l]);
    }
    for (int l = 6; l < 12; ++l) {
      if (small[l]) CHECK(large[l]);
    }
  }
  SUBCASE("the seed is reproducible") {
    CHECK(CorruptMask(soi, 0.5, interferer, soi_e, bg_e, 99) ==
          CorruptMask(soi, 0.5, interferer, soi_e, bg_e, 99));
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(CorruptMask(soi, -0.1, interferer, soi_e, bg_e, 7),
                    DataError);
    CHECK_THROWS_AS(CorruptMask(soi, 1.1, interferer, soi_e, bg_e, 7),
                    DataError);
    soi_e.pop_back();
    CHECK_THROWS_AS(CorruptMask(soi, 0.5, interferer, soi_e, bg_e, 7),
                    DataError);
  }
}

TEST_CASE("mask alignment absorbs an off-by-one frame count") {
  std::vector<bool> mask = {true, false, true};
  CHECK(AlignMask(mask, 3) == mask);

  std::vector<bool> shorter = AlignMask(mask, 2);
  CHECK(shorter == std::vector<bool>{true, false});

  std::vector<bool> longer = AlignMask(mask, 4);
  CHECK(longer == std::vector<bool>{true, false, true, true});

  CHECK_THROWS_AS(AlignMask(mask, 5), DataError);
  CHECK_THROWS_AS(AlignMask(mask, 1), DataError);
}
