// src/textio.cc

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

#include "ivex/textio.h"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ivex/common.h"

namespace ivex {

namespace {

std::string Trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitCsvRow(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) fields.push_back(Trim(cur));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

std::string FormatG17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseDoubleStrict(const std::string& s) {
  std::string t = Trim(s);
  if (t.empty()) throw DataError("invalid input: empty number");
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE)
    throw DataError("invalid input: bad number '" + t + "'");
  return v;
}

long long ParseIntStrict(const std::string& s) {
  std::string t = Trim(s);
  if (t.empty()) throw DataError("invalid input: empty number");
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE)
    throw DataError("invalid input: bad integer '" + t + "'");
  return v;
}

void WriteKeyValues(const std::string& path, const KeyValues& kv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("invalid input: cannot write " + path);
  for (const auto& [key, value] : kv) out << key << "=" << value << "\n";
  out.flush();
  if (!out) throw DataError("invalid input: cannot write " + path);
}

KeyValues ReadKeyValuesFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("invalid input: cannot read " + path);
  KeyValues kv;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw DataError("invalid input: malformed line '" + t + "'");
    kv.emplace_back(Trim(t.substr(0, eq)), Trim(t.substr(eq + 1)));
  }
  return kv;
}

const std::string* FindKey(const KeyValues& kv, const std::string& key) {
  for (const auto& [k, v] : kv)
    if (k == key) return &v;
  return nullptr;
}

std::string MixingKindName(MixingKind kind) {
  switch (kind) {
    case MixingKind::kInstantaneous:
      return "instantaneous";
    case MixingKind::kFir:
      return "fir";
    case MixingKind::kBlockVarying:
      return "block_varying";
  }
  throw DataError("invalid input: mixing kind");
}

MixingKind MixingKindFromName(const std::string& name) {
  if (name == "instantaneous") return MixingKind::kInstantaneous;
  if (name == "fir") return MixingKind::kFir;
  if (name == "block_varying") return MixingKind::kBlockVarying;
  throw DataError("invalid input: unknown mixing kind '" + name + "'");
}

KeyValues ScenarioToKeyValues(const Scenario& sc) {
  KeyValues kv;
  kv.emplace_back("num_channels", std::to_string(sc.num_channels));
  kv.emplace_back("num_speakers", std::to_string(sc.num_speakers));
  kv.emplace_back("noise", sc.noise ? "1" : "0");
  kv.emplace_back("duration_s", FormatG17(sc.duration_s));
  kv.emplace_back("sample_rate", std::to_string(sc.sample_rate));
  kv.emplace_back("mixing", MixingKindName(sc.mixing));
  kv.emplace_back("fir_taps", std::to_string(sc.fir_taps));
  kv.emplace_back("num_mixing_blocks", std::to_string(sc.num_mixing_blocks));
  kv.emplace_back("movement", FormatG17(sc.movement));
  kv.emplace_back("sir_db", FormatG17(sc.sir_db));
  kv.emplace_back("snr_db", FormatG17(sc.snr_db));
  kv.emplace_back("pause_density", FormatG17(sc.pause_density));
  kv.emplace_back("peak", FormatG17(sc.peak));
  kv.emplace_back("seed", std::to_string(sc.seed));
  return kv;
}

Scenario ScenarioFromKeyValues(const KeyValues& kv) {
  Scenario sc;
  for (const auto& [key, value] : kv) {
    if (key == "num_channels")
      sc.num_channels = static_cast<int>(ParseIntStrict(value));
    else if (key == "num_speakers")
      sc.num_speakers = static_cast<int>(ParseIntStrict(value));
    else if (key == "noise")
      sc.noise = ParseIntStrict(value) != 0;
    else if (key == "duration_s")
      sc.duration_s = ParseDoubleStrict(value);
    else if (key == "sample_rate")
      sc.sample_rate = static_cast<int>(ParseIntStrict(value));
    else if (key == "mixing")
      sc.mixing = MixingKindFromName(value);
    else if (key == "fir_taps")
      sc.fir_taps = static_cast<int>(ParseIntStrict(value));
    else if (key == "num_mixing_blocks")
      sc.num_mixing_blocks = static_cast<int>(ParseIntStrict(value));
    else if (key == "movement")
      sc.movement = ParseDoubleStrict(value);
    else if (key == "sir_db")
      sc.sir_db = ParseDoubleStrict(value);
    else if (key == "snr_db")
      sc.snr_db = ParseDoubleStrict(value);
    else if (key == "pause_density")
      sc.pause_density = ParseDoubleStrict(value);
    else if (key == "peak")
      sc.peak = ParseDoubleStrict(value);
    else if (key == "seed")
      sc.seed = static_cast<uint64_t>(
          std::strtoull(value.c_str(), nullptr, 10));
    // Unknown keys are fine: manifests carry realized values and file
    // lists alongside the scenario.
  }
  return sc;
}

void WriteScoreTable(const std::string& path, const ScoreTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("invalid input: cannot write " + path);
  out << "frame";
  for (const std::string& speaker : table.roster) out << "," << speaker;
  out << "\n";
  for (size_t l = 0; l < table.frame_scores.size(); l++) {
    out << l;
    for (double score : table.frame_scores[l]) out << "," << FormatG17(score);
    out << "\n";
  }
  out.flush();
  if (!out) throw DataError("invalid input: cannot write " + path);
}

ScoreTable ReadScoreTable(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("invalid input: cannot read " + path);
  ScoreTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> fields = SplitCsvRow(t);
    if (!have_header) {
      if (fields.size() < 2 || fields[0] != "frame")
        throw DataError("invalid input: score table header must start with "
                        "'frame'");
      table.roster.assign(fields.begin() + 1, fields.end());
      have_header = true;
      continue;
    }
    if (fields.size() != table.roster.size() + 1)
      throw DataError("invalid input: score row width mismatch");
    if (ParseIntStrict(fields[0]) !=
        static_cast<long long>(table.frame_scores.size()))
      throw DataError("invalid input: score rows must be consecutive frames");
    std::vector<double> row(fields.size() - 1);
    for (size_t i = 1; i < fields.size(); i++)
      row[i - 1] = ParseDoubleStrict(fields[i]);
    table.frame_scores.push_back(std::move(row));
  }
  if (!have_header) throw DataError("invalid input: empty score table");
  return table;
}

void WriteThetaMinFile(const std::string& path,
                       const std::map<std::string, double>& floors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("invalid input: cannot write " + path);
  for (const auto& [speaker, floor] : floors)
    out << speaker << "," << FormatG17(floor) << "\n";
  out.flush();
  if (!out) throw DataError("invalid input: cannot write " + path);
}

std::map<std::string, double> ReadThetaMinFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("invalid input: cannot read " + path);
  std::map<std::string, double> floors;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> fields = SplitCsvRow(t);
    if (fields.size() != 2)
      throw DataError("invalid input: malformed line in " + path);
    floors[fields[0]] = ParseDoubleStrict(fields[1]);
  }
  return floors;
}

void WriteUtteranceScores(const std::string& path,
                          const std::vector<UtteranceScore>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("invalid input: cannot write " + path);
  for (const UtteranceScore& row : rows) {
    out << row.signal_name << "," << row.speaker_id << ","
        << FormatG17(row.score) << "\n";
  }
  out.flush();
  if (!out) throw DataError("invalid input: cannot write " + path);
}

std::vector<UtteranceScore> ReadUtteranceScores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("invalid input: cannot read " + path);
  std::vector<UtteranceScore> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> fields = SplitCsvRow(t);
    if (fields.size() != 3)
      throw DataError("invalid input: malformed line in " + path);
    rows.push_back({fields[0], fields[1], ParseDoubleStrict(fields[2])});
  }
  return rows;
}

void WriteLines(const std::string& path,
                const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("invalid input: cannot write " + path);
  for (const auto& l : lines) out << l << "\n";
  out.flush();
  if (!out) throw DataError("invalid input: cannot write " + path);
}

std::vector<std::string> ReadAllLines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("invalid input: cannot read " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace ivex
