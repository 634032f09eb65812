// tests/test_wav_textio.cc

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

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ivex/rng.h"
#include "ivex/textio.h"
#include "ivex/wav.h"

using namespace ivex;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ivex_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string File(const std::string& name) const {
    return (path / name).string();
  }
  static int counter;
};
int TempDir::counter = 0;

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("g17 formatting round-trips doubles exactly") {
  for (double v : {0.1, 1.0 / 3.0, -0.0, 1e300, 5e-324, 123456.789,
                   -2.2250738585072014e-308, 0.0, 42.0}) {
    std::string s = FormatG17(v);
    double back = ParseDoubleStrict(s);
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
}

TEST_CASE("strict parsers reject trailing junk") {
  CHECK(ParseDoubleStrict("1.5e3") == 1500.0);
  CHECK(ParseIntStrict("-42") == -42);
  CHECK_THROWS_AS(ParseDoubleStrict("1.2.3"), DataError);
  CHECK_THROWS_AS(ParseDoubleStrict(""), DataError);
  CHECK_THROWS_AS(ParseDoubleStrict("abc"), DataError);
  CHECK_THROWS_AS(ParseIntStrict("12x"), DataError);
  CHECK_THROWS_AS(ParseIntStrict("3.5"), DataError);
}

TEST_CASE("key-value files keep order and skip comments") {
  TempDir tmp;
  KeyValues kv{{"alpha", "1"}, {"beta", "two"}, {"alpha", "3"}};
  std::string path = tmp.File("kv.txt");
  WriteKeyValues(path, kv);

  std::ofstream app(path, std::ios::app);
  app << "# trailing comment\n\n";
  app.close();

  KeyValues back = ReadKeyValuesFile(path);
  REQUIRE(back.size() == 3);
  CHECK(back[0] == kv[0]);
  CHECK(back[1] == kv[1]);
  CHECK(back[2] == kv[2]);
  CHECK(*FindKey(back, "alpha") == "1");
  CHECK(FindKey(back, "missing") == nullptr);
}

TEST_CASE("scenario serialization round-trips every field") {
  Scenario sc;
  sc.num_channels = 3;
  sc.num_speakers = 2;
  sc.noise = true;
  sc.duration_s = 4.25;
  sc.sample_rate = 8000;
  sc.mixing = MixingKind::kBlockVarying;
  sc.fir_taps = 24;
  sc.num_mixing_blocks = 5;
  sc.movement = 0.75;
  sc.sir_db = -3.5;
  sc.snr_db = 17.0;
  sc.pause_density = 0.4;
  sc.peak = 0.8;
  sc.seed = 987654321;

  KeyValues kv = ScenarioToKeyValues(sc);
  kv.emplace_back("realized_sir_db", "0.1");  // manifests carry extras
  Scenario back = ScenarioFromKeyValues(kv);
  CHECK(back.num_channels == sc.num_channels);
  CHECK(back.num_speakers == sc.num_speakers);
  CHECK(back.noise == sc.noise);
  CHECK(back.duration_s == sc.duration_s);
  CHECK(back.sample_rate == sc.sample_rate);
  CHECK(back.mixing == sc.mixing);
  CHECK(back.fir_taps == sc.fir_taps);
  CHECK(back.num_mixing_blocks == sc.num_mixing_blocks);
  CHECK(back.movement == sc.movement);
  CHECK(back.sir_db == sc.sir_db);
  CHECK(back.snr_db == sc.snr_db);
  CHECK(back.pause_density == sc.pause_density);
  CHECK(back.peak == sc.peak);
  CHECK(back.seed == sc.seed);

  for (MixingKind kind : {MixingKind::kInstantaneous, MixingKind::kFir,
                          MixingKind::kBlockVarying}) {
    CHECK(MixingKindFromName(MixingKindName(kind)) == kind);
  }
  CHECK_THROWS_AS(MixingKindFromName("nonsense"), DataError);
}

TEST_CASE("score tables round-trip bit-exactly") {
  TempDir tmp;
  ScoreTable table;
  table.roster = {"alice", "bob", "carol"};
  table.frame_scores = {{0.1, -2.5, 3.0},
                        {1.0 / 3.0, 0.0, -1e-17},
                        {5.5, 5.5, 5.5}};
  std::string path = tmp.File("scores.csv");
  WriteScoreTable(path, table);

  ScoreTable back = ReadScoreTable(path);
  REQUIRE(back.roster == table.roster);
  REQUIRE(back.Frames() == table.Frames());
  for (int l = 0; l < table.Frames(); ++l)
    for (int s = 0; s < table.Speakers(); ++s)
      CHECK(back.frame_scores[l][s] == table.frame_scores[l][s]);
}

TEST_CASE("score table parsing validates the layout") {
  TempDir tmp;
  std::string path = tmp.File("bad.csv");

  WriteLines(path, {"frame,a,b", "0,1.0,2.0", "2,1.0,2.0"});
  CHECK_THROWS_AS(ReadScoreTable(path), DataError);

  WriteLines(path, {"frame,a,b", "0,1.0"});
  CHECK_THROWS_AS(ReadScoreTable(path), DataError);

  WriteLines(path, {"a,b", "0,1.0"});
  CHECK_THROWS_AS(ReadScoreTable(path), DataError);

  WriteLines(path, {"frame,a,b", "# comment rows are fine", "0,1.0,2.0"});
  ScoreTable ok = ReadScoreTable(path);
  CHECK(ok.Frames() == 1);
  CHECK(ok.frame_scores[0][1] == 2.0);
}

TEST_CASE("activity floor and utterance score files round-trip") {
  TempDir tmp;
  std::map<std::string, double> floors{{"alice", -1.25}, {"bob", 0.5}};
  std::string fpath = tmp.File("floors.csv");
  WriteThetaMinFile(fpath, floors);
  CHECK(ReadThetaMinFile(fpath) == floors);

  std::vector<UtteranceScore> rows{{"estimate.wav", "alice", 1.5},
                                   {"mixture.wav", "alice", -0.25},
                                   {"mixture.wav", "bob", 2.0}};
  std::string upath = tmp.File("utt.csv");
  WriteUtteranceScores(upath, rows);
  std::vector<UtteranceScore> back = ReadUtteranceScores(upath);
  REQUIRE(back.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].signal_name == rows[i].signal_name);
    CHECK(back[i].speaker_id == rows[i].speaker_id);
    CHECK(back[i].score == rows[i].score);
  }

  WriteLines(upath, {"only_two,fields"});
  CHECK_THROWS_AS(ReadUtteranceScores(upath), DataError);
}

TEST_CASE("float wav files round-trip to the bit") {
  TempDir tmp;
  Rng rng(77);
  MultiSignal channels(3, Signal(500));
  for (auto& ch : channels)
    for (auto& v : ch) v = static_cast<float>(rng.Gaussian());

  std::string path = tmp.File("f32.wav");
  WriteWav(path, channels, 16000, WavFormat::kFloat32);
  WavData back = ReadWav(path);
  CHECK(back.sample_rate == 16000);
  REQUIRE(back.channels.size() == channels.size());
  for (size_t c = 0; c < channels.size(); ++c)
    for (size_t t = 0; t < channels[c].size(); ++t)
      CHECK(back.channels[c][t] == channels[c][t]);
}

TEST_CASE("wav writing is byte-deterministic") {
  TempDir tmp;
  Rng rng(78);
  MultiSignal channels(2, Signal(200));
  for (auto& ch : channels)
    for (auto& v : ch) v = rng.Gaussian();
  std::string p1 = tmp.File("a.wav");
  std::string p2 = tmp.File("b.wav");
  WriteWav(p1, channels, 8000);
  WriteWav(p2, channels, 8000);
  CHECK(Slurp(p1) == Slurp(p2));
  CHECK(!Slurp(p1).empty());
}

TEST_CASE("pcm16 wav quantizes and clips") {
  TempDir tmp;
  MultiSignal channels{{0.0, 0.5, -0.5, 1.5, -1.5, 0.125}};
  std::string path = tmp.File("pcm.wav");
  WriteWav(path, channels, 44100, WavFormat::kPcm16);
  WavData back = ReadWav(path);
  CHECK(back.sample_rate == 44100);
  REQUIRE(back.channels.size() == 1);
  CHECK(std::abs(back.channels[0][0]) <= 1.0 / 32768.0);
  CHECK(back.channels[0][1] == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(back.channels[0][2] == doctest::Approx(-0.5).epsilon(1e-3));
  CHECK(back.channels[0][3] <= 1.0);    // clipped, not wrapped
  CHECK(back.channels[0][3] > 0.99);
  CHECK(back.channels[0][4] >= -1.0);
  CHECK(back.channels[0][4] < -0.99);
}

TEST_CASE("wav reader rejects damaged input") {
  TempDir tmp;
  CHECK_THROWS_AS(ReadWav(tmp.File("missing.wav")), DataError);

  std::string path = tmp.File("garbage.wav");
  std::ofstream out(path, std::ios::binary);
  out << "this is not a riff container";
  out.close();
  CHECK_THROWS_AS(ReadWav(path), DataError);
}

TEST_CASE("line files round-trip") {
  TempDir tmp;
  std::vector<std::string> lines{"first", "", "third line with spaces"};
  std::string path = tmp.File("lines.txt");
  WriteLines(path, lines);
  CHECK(ReadAllLines(path) == lines);
}
