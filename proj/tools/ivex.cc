// tools/ivex.cc

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

// Command line front end: simulate synthetic scenes, extract a target
// speaker from a mixture, score extractions against reference stems, and
// run seeded parameter sweeps. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 numerical failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <filesystem>

#include "CLI11.hpp"

#include "ivex/assess.h"
#include "ivex/common.h"
#include "ivex/deflation.h"
#include "ivex/ive.h"
#include "ivex/metrics.h"
#include "ivex/pilot.h"
#include "ivex/simkit.h"
#include "ivex/stft.h"
#include "ivex/textio.h"
#include "ivex/wav.h"

namespace fs = std::filesystem;
using namespace ivex;

namespace {

std::string OutputRoot() {
  const char* env = std::getenv("IVEX_OUTPUT_ROOT");
  return (env != nullptr && env[0] != '\0') ? env : ".";
}

std::string JoinPath(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string StemFileName(int source_index, int num_speakers) {
  if (source_index < num_speakers)
    return "speaker_" + std::to_string(source_index + 1) + "_image.wav";
  return "noise_image.wav";
}

SolverMode ModeFromName(const std::string& name) {
  if (name == "fs") return SolverMode::kFs;
  if (name == "csv") return SolverMode::kCsv;
  if (name == "bs") return SolverMode::kBs;
  throw DataError("invalid input: unknown mode '" + name + "'");
}

Window WindowFromName(const std::string& name) {
  if (name == "hamming") return Window::kHamming;
  if (name == "hann") return Window::kHann;
  if (name == "rectangular") return Window::kRectangular;
  throw DataError("invalid input: unknown window '" + name + "'");
}

ReductionKind ReductionFromName(const std::string& name) {
  if (name == "drop_weakest") return ReductionKind::kDropWeakestChannel;
  if (name == "drop") return ReductionKind::kDropChannel;
  if (name == "pca") return ReductionKind::kPca;
  throw DataError("invalid input: unknown reduction '" + name + "'");
}

// Config file overlay with flag > file > default precedence: file values
// only land where the user did not pass the flag.
void OvInt(const CLI::App& cmd, const KeyValues& kv, const char* flag,
           const char* key, int* var) {
  if (cmd.count(flag) == 0)
    if (const std::string* v = FindKey(kv, key))
      *var = static_cast<int>(ParseIntStrict(*v));
}

void OvU64(const CLI::App& cmd, const KeyValues& kv, const char* flag,
           const char* key, uint64_t* var) {
  if (cmd.count(flag) == 0)
    if (const std::string* v = FindKey(kv, key))
      *var = static_cast<uint64_t>(std::strtoull(v->c_str(), nullptr, 10));
}

void OvDouble(const CLI::App& cmd, const KeyValues& kv, const char* flag,
              const char* key, double* var) {
  if (cmd.count(flag) == 0)
    if (const std::string* v = FindKey(kv, key)) *var = ParseDoubleStrict(*v);
}

void OvStr(const CLI::App& cmd, const KeyValues& kv, const char* flag,
           const char* key, std::string* var) {
  if (cmd.count(flag) == 0)
    if (const std::string* v = FindKey(kv, key)) *var = *v;
}

void OvBool(const CLI::App& cmd, const KeyValues& kv, const char* flag,
            const char* key, bool* var) {
  if (cmd.count(flag) == 0)
    if (const std::string* v = FindKey(kv, key))
      *var = ParseIntStrict(*v) != 0;
}

std::vector<double> ParseDoubleList(const std::string& s) {
  std::vector<double> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(ParseDoubleStrict(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(ParseDoubleStrict(cur));
  if (out.empty()) throw DataError("invalid input: empty list");
  return out;
}

double Median(std::vector<double> v) {
  if (v.empty()) throw DataError("invalid input: median of nothing");
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void ParallelFor(int count, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; i++) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; j++)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1))
        body(i);
    });
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Scene directories
// ---------------------------------------------------------------------------

struct LoadedScene {
  Scenario sc;
  WavData mixture;
  std::vector<WavData> stems;
};

LoadedScene LoadScene(const std::string& dir) {
  LoadedScene scene;
  scene.sc = ScenarioFromKeyValues(ReadKeyValuesFile(JoinPath(dir,
                                                              "manifest.txt")));
  scene.mixture = ReadWav(JoinPath(dir, "mixture.wav"));
  int num_sources = scene.sc.num_speakers + (scene.sc.noise ? 1 : 0);
  for (int j = 0; j < num_sources; j++)
    scene.stems.push_back(
        ReadWav(JoinPath(dir, StemFileName(j, scene.sc.num_speakers))));
  return scene;
}

SourceRoles RolesFromScene(const LoadedScene& scene, int soi_index) {
  if (soi_index < 0 || soi_index >= scene.sc.num_speakers)
    throw DataError("SOI not in enrollment set");
  SourceRoles roles;
  roles.sample_rate = scene.sc.sample_rate;
  roles.soi = scene.stems[soi_index].channels[0];
  for (int j = 0; j < scene.sc.num_speakers; j++)
    if (j != soi_index)
      roles.background.push_back(scene.stems[j].channels[0]);
  if (scene.sc.noise)
    roles.noise = scene.stems[scene.sc.num_speakers].channels[0];
  return roles;
}

// Oracle dominance mask with a fraction of SOI frames swapped against
// interferer-dominated frames, closest energy margins first.
std::vector<bool> CorruptedOracleMask(const SourceRoles& roles,
                                      const FrameSpec& spec, double thro,
                                      double fraction, uint64_t seed) {
  if (roles.background.empty())
    throw DataError("invalid input: corruption needs an interferer stem");
  std::vector<bool> soi_mask = OracleMask(roles, spec, thro);

  SourceRoles swapped;
  swapped.sample_rate = roles.sample_rate;
  swapped.soi = roles.background[0];
  swapped.background.push_back(roles.soi);
  for (size_t j = 1; j < roles.background.size(); j++)
    swapped.background.push_back(roles.background[j]);
  swapped.noise = roles.noise;
  std::vector<bool> interferer_mask = OracleMask(swapped, spec, thro);

  std::vector<double> soi_e =
      FrameEnergies(Analyze({roles.soi}, spec, roles.sample_rate), 0);
  std::vector<double> bg_e(soi_e.size(), 0.0);
  for (const auto& b : roles.background) {
    std::vector<double> e =
        FrameEnergies(Analyze({b}, spec, roles.sample_rate), 0);
    for (size_t t = 0; t < bg_e.size(); t++) bg_e[t] += e[t];
  }
  if (!roles.noise.empty()) {
    std::vector<double> e =
        FrameEnergies(Analyze({roles.noise}, spec, roles.sample_rate), 0);
    for (size_t t = 0; t < bg_e.size(); t++) bg_e[t] += e[t];
  }
  return CorruptMask(soi_mask, fraction, interferer_mask, soi_e, bg_e, seed);
}

Signal TrimToLength(const Signal& x, size_t n) {
  Signal out(x);
  out.resize(n, 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  CLI::App* cmd = nullptr;
  std::string out;
  std::string config;
  std::string manifest;
  Scenario sc;
  std::string mixing = "instantaneous";
  int noise = 1;
};

void AddScenarioFlags(CLI::App* cmd, SimulateArgs* a) {
  cmd->add_option("--channels", a->sc.num_channels, "Microphone count");
  cmd->add_option("--speakers", a->sc.num_speakers, "Speech source count");
  cmd->add_option("--noise", a->noise, "Include a noise source (0/1)");
  cmd->add_option("--duration", a->sc.duration_s, "Scene length in seconds");
  cmd->add_option("--sample-rate", a->sc.sample_rate, "Sample rate in Hz");
  cmd->add_option("--mixing", a->mixing,
                  "Mixing kind: instantaneous, fir, block_varying");
  cmd->add_option("--fir-taps", a->sc.fir_taps, "FIR channel length");
  cmd->add_option("--mixing-blocks", a->sc.num_mixing_blocks,
                  "Trajectory length for block_varying mixing");
  cmd->add_option("--movement", a->sc.movement,
                  "How far block_varying matrices drift");
  cmd->add_option("--sir", a->sc.sir_db, "Target SIR at the first mic, dB");
  cmd->add_option("--snr", a->sc.snr_db, "Target SNR at the first mic, dB");
  cmd->add_option("--pause-density", a->sc.pause_density,
                  "Fraction of time each speaker pauses");
  cmd->add_option("--peak", a->sc.peak, "Mixture peak after normalization");
  cmd->add_option("--seed", a->sc.seed, "Scene seed");
}

void OverlayScenario(const CLI::App& cmd, const KeyValues& kv,
                     SimulateArgs* a) {
  OvInt(cmd, kv, "--channels", "num_channels", &a->sc.num_channels);
  OvInt(cmd, kv, "--speakers", "num_speakers", &a->sc.num_speakers);
  OvInt(cmd, kv, "--noise", "noise", &a->noise);
  OvDouble(cmd, kv, "--duration", "duration_s", &a->sc.duration_s);
  OvInt(cmd, kv, "--sample-rate", "sample_rate", &a->sc.sample_rate);
  OvStr(cmd, kv, "--mixing", "mixing", &a->mixing);
  OvInt(cmd, kv, "--fir-taps", "fir_taps", &a->sc.fir_taps);
  OvInt(cmd, kv, "--mixing-blocks", "num_mixing_blocks",
        &a->sc.num_mixing_blocks);
  OvDouble(cmd, kv, "--movement", "movement", &a->sc.movement);
  OvDouble(cmd, kv, "--sir", "sir_db", &a->sc.sir_db);
  OvDouble(cmd, kv, "--snr", "snr_db", &a->sc.snr_db);
  OvDouble(cmd, kv, "--pause-density", "pause_density",
           &a->sc.pause_density);
  OvDouble(cmd, kv, "--peak", "peak", &a->sc.peak);
  OvU64(cmd, kv, "--seed", "seed", &a->sc.seed);
}

// Simulates one scene into a directory: per-source mic images, their sum as
// the mixture, and a manifest that replays the scene exactly.
void WriteSceneDir(const std::string& out, const Scenario& sc) {
  fs::create_directories(out);
  MultiSignal sources = GenSources(sc);
  MixOutput mix = Mix(sources, sc);

  WriteWav(JoinPath(out, "mixture.wav"), mix.mixture, sc.sample_rate);
  for (size_t j = 0; j < mix.stems.size(); j++)
    WriteWav(JoinPath(out, StemFileName(static_cast<int>(j),
                                        sc.num_speakers)),
             mix.stems[j], sc.sample_rate);

  KeyValues kv = ScenarioToKeyValues(sc);
  kv.emplace_back("realized_sir_db", FormatG17(mix.realized_sir_db));
  kv.emplace_back("realized_snr_db", FormatG17(mix.realized_snr_db));
  kv.emplace_back("block_len_samples", std::to_string(mix.block_len_samples));
  kv.emplace_back("mixture", "mixture.wav");
  kv.emplace_back("num_stems", std::to_string(mix.stems.size()));
  for (size_t j = 0; j < mix.stems.size(); j++)
    kv.emplace_back("stem_" + std::to_string(j),
                    StemFileName(static_cast<int>(j), sc.num_speakers));
  WriteKeyValues(JoinPath(out, "manifest.txt"), kv);

  std::printf("wrote %s (realized SIR %.2f dB, SNR %.2f dB)\n", out.c_str(),
              mix.realized_sir_db, mix.realized_snr_db);
}

void RunSimulate(SimulateArgs* a) {
  if (!a->manifest.empty() && !a->config.empty())
    throw DataError("invalid input: give either --config or --manifest");
  if (!a->manifest.empty())
    OverlayScenario(*a->cmd, ReadKeyValuesFile(a->manifest), a);
  else if (!a->config.empty())
    OverlayScenario(*a->cmd, ReadKeyValuesFile(a->config), a);
  a->sc.mixing = MixingKindFromName(a->mixing);
  a->sc.noise = a->noise != 0;
  std::string out = a->out.empty()
                        ? JoinPath(OutputRoot(),
                                   "sim_" + std::to_string(a->sc.seed))
                        : a->out;
  WriteSceneDir(out, a->sc);
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

struct ExtractArgs {
  CLI::App* cmd = nullptr;
  std::string in;
  std::string out;
  std::string config;
  std::string mode = "csv";
  int iterations = -1;  // by mode: 50 whole-signal, 5 per block (bs)
  int block_len_frames = 200;
  int block_shift = 0;
  double forgetting = 0.3;
  double tol = 1e-6;
  int frame_len = 1024;
  int hop = 256;
  int fft_len = 0;
  std::string window = "hamming";
  std::string pilot = "none";
  std::string stems;
  std::string scores;
  std::string soi;
  int soi_index = 0;
  double thro = 2.0;
  double pilot_gain = 30.0;
  std::string theta_min_file;
  double theta_min = 0.0;
  bool have_theta_min = false;
  double corrupt_fraction = 0.0;
  uint64_t corrupt_seed = 0;
  bool deflate = false;
  int max_steps = 3;
  std::string reduction = "drop_weakest";
  int drop_index = 0;
  std::string assess = "oracle";
  std::string assess_scores;
};

void AddExtractFlags(CLI::App* cmd, ExtractArgs* a) {
  cmd->add_option("--in", a->in, "Mixture WAV to separate");
  cmd->add_option("--out", a->out, "Output directory");
  cmd->add_option("--config", a->config, "key=value config overlay");
  cmd->add_option("--mode", a->mode, "Solver mode: fs, csv, bs");
  cmd->add_option("--iterations", a->iterations, "Update iterations");
  cmd->add_option("--block-len-frames", a->block_len_frames,
                  "Frames per statistics block (csv, bs)");
  cmd->add_option("--block-shift", a->block_shift,
                  "Sliding step in frames for bs (0 = block/4)");
  cmd->add_option("--forgetting", a->forgetting,
                  "Weight on newest block statistics (bs)");
  cmd->add_option("--tol", a->tol, "Convergence tolerance on w");
  cmd->add_option("--frame-len", a->frame_len, "Analysis frame length");
  cmd->add_option("--hop", a->hop, "Analysis hop");
  cmd->add_option("--fft-len", a->fft_len, "FFT length (0 = frame length)");
  cmd->add_option("--window", a->window,
                  "Analysis window: hamming, hann, rectangular");
  cmd->add_option("--pilot", a->pilot, "Pilot source: none, oracle, scores");
  cmd->add_option("--stems", a->stems,
                  "Scene directory with reference stems (oracle pilot)");
  cmd->add_option("--scores", a->scores, "Per-frame speaker score CSV");
  cmd->add_option("--soi", a->soi, "Target speaker id in the score table");
  cmd->add_option("--soi-index", a->soi_index,
                  "Target speaker index for the oracle pilot");
  cmd->add_option("--thro", a->thro, "Dominance threshold");
  cmd->add_option("--pilot-gain", a->pilot_gain,
                  "Guide strength relative to the separator output energy");
  cmd->add_option("--theta-min-file", a->theta_min_file,
                  "speaker_id,theta_min side file for the score table");
  if (auto* o = cmd->add_option("--theta-min", a->theta_min,
                                "Activity floor override for --soi"))
    o->each([a](const std::string&) { a->have_theta_min = true; });
  cmd->add_option("--corrupt-fraction", a->corrupt_fraction,
                  "Swap this fraction of pilot SOI frames (oracle pilot)");
  cmd->add_option("--corrupt-seed", a->corrupt_seed,
                  "Seed for corruption tie-breaking");
  cmd->add_flag("--deflate", a->deflate, "Run guided deflation");
  cmd->add_option("--max-steps", a->max_steps, "Deflation step budget");
  cmd->add_option("--reduction", a->reduction,
                  "Channel reduction: drop_weakest, drop, pca");
  cmd->add_option("--drop-index", a->drop_index,
                  "Channel to drop for --reduction drop");
  cmd->add_option("--assess", a->assess, "Assessment backend: oracle, table");
  cmd->add_option("--assess-scores", a->assess_scores,
                  "name=value score file for --assess table");
}

void OverlayExtract(const CLI::App& cmd, const KeyValues& kv,
                    ExtractArgs* a) {
  OvStr(cmd, kv, "--in", "in", &a->in);
  OvStr(cmd, kv, "--mode", "mode", &a->mode);
  OvInt(cmd, kv, "--iterations", "iterations", &a->iterations);
  OvInt(cmd, kv, "--block-len-frames", "block_len_frames",
        &a->block_len_frames);
  OvInt(cmd, kv, "--block-shift", "block_shift", &a->block_shift);
  OvDouble(cmd, kv, "--forgetting", "forgetting", &a->forgetting);
  OvDouble(cmd, kv, "--tol", "tol", &a->tol);
  OvInt(cmd, kv, "--frame-len", "frame_len", &a->frame_len);
  OvInt(cmd, kv, "--hop", "hop", &a->hop);
  OvInt(cmd, kv, "--fft-len", "fft_len", &a->fft_len);
  OvStr(cmd, kv, "--window", "window", &a->window);
  OvStr(cmd, kv, "--pilot", "pilot", &a->pilot);
  OvStr(cmd, kv, "--stems", "stems", &a->stems);
  OvStr(cmd, kv, "--scores", "scores", &a->scores);
  OvStr(cmd, kv, "--soi", "soi", &a->soi);
  OvInt(cmd, kv, "--soi-index", "soi_index", &a->soi_index);
  OvDouble(cmd, kv, "--thro", "thro", &a->thro);
  OvDouble(cmd, kv, "--pilot-gain", "pilot_gain", &a->pilot_gain);
  OvStr(cmd, kv, "--theta-min-file", "theta_min_file", &a->theta_min_file);
  if (cmd.count("--theta-min") == 0)
    if (const std::string* v = FindKey(kv, "theta_min")) {
      a->theta_min = ParseDoubleStrict(*v);
      a->have_theta_min = true;
    }
  OvDouble(cmd, kv, "--corrupt-fraction", "corrupt_fraction",
           &a->corrupt_fraction);
  OvU64(cmd, kv, "--corrupt-seed", "corrupt_seed", &a->corrupt_seed);
  OvBool(cmd, kv, "--deflate", "deflate", &a->deflate);
  OvInt(cmd, kv, "--max-steps", "max_steps", &a->max_steps);
  OvStr(cmd, kv, "--reduction", "reduction", &a->reduction);
  OvInt(cmd, kv, "--drop-index", "drop_index", &a->drop_index);
  OvStr(cmd, kv, "--assess", "assess", &a->assess);
  OvStr(cmd, kv, "--assess-scores", "assess_scores", &a->assess_scores);
}

KeyValues ExtractEffectiveConfig(const ExtractArgs& a) {
  KeyValues kv;
  kv.emplace_back("in", a.in);
  kv.emplace_back("mode", a.mode);
  kv.emplace_back("iterations", std::to_string(a.iterations));
  kv.emplace_back("block_len_frames", std::to_string(a.block_len_frames));
  kv.emplace_back("block_shift", std::to_string(a.block_shift));
  kv.emplace_back("forgetting", FormatG17(a.forgetting));
  kv.emplace_back("tol", FormatG17(a.tol));
  kv.emplace_back("frame_len", std::to_string(a.frame_len));
  kv.emplace_back("hop", std::to_string(a.hop));
  kv.emplace_back("fft_len", std::to_string(a.fft_len));
  kv.emplace_back("window", a.window);
  kv.emplace_back("pilot", a.pilot);
  kv.emplace_back("stems", a.stems);
  kv.emplace_back("scores", a.scores);
  kv.emplace_back("soi", a.soi);
  kv.emplace_back("soi_index", std::to_string(a.soi_index));
  kv.emplace_back("thro", FormatG17(a.thro));
  kv.emplace_back("pilot_gain", FormatG17(a.pilot_gain));
  kv.emplace_back("theta_min_file", a.theta_min_file);
  if (a.have_theta_min)
    kv.emplace_back("theta_min", FormatG17(a.theta_min));
  kv.emplace_back("corrupt_fraction", FormatG17(a.corrupt_fraction));
  kv.emplace_back("corrupt_seed", std::to_string(a.corrupt_seed));
  kv.emplace_back("deflate", a.deflate ? "1" : "0");
  kv.emplace_back("max_steps", std::to_string(a.max_steps));
  kv.emplace_back("reduction", a.reduction);
  kv.emplace_back("drop_index", std::to_string(a.drop_index));
  kv.emplace_back("assess", a.assess);
  kv.emplace_back("assess_scores", a.assess_scores);
  return kv;
}

void RunExtract(ExtractArgs* a) {
  if (!a->config.empty())
    OverlayExtract(*a->cmd, ReadKeyValuesFile(a->config), a);
  if (a->in.empty()) throw DataError("invalid input: --in is required");
  if (a->iterations < 0) a->iterations = a->mode == "bs" ? 5 : 50;
  if (a->out.empty()) a->out = JoinPath(OutputRoot(), "extract_out");

  WavData wav = ReadWav(a->in);
  FrameSpec spec;
  spec.frame_len = a->frame_len;
  spec.hop = a->hop;
  spec.fft_len = a->fft_len > 0 ? a->fft_len : a->frame_len;
  spec.window = WindowFromName(a->window);
  ComplexSpectrogram sg = Analyze(wav.channels, spec, wav.sample_rate);

  std::vector<bool> mask;
  PilotTrack pilot_track;
  SourceRoles roles;
  bool have_roles = false;
  if (a->pilot == "oracle") {
    if (a->stems.empty())
      throw DataError("oracle pilot requires reference stems");
    LoadedScene scene = LoadScene(a->stems);
    roles = RolesFromScene(scene, a->soi_index);
    have_roles = true;
    mask = a->corrupt_fraction > 0.0
               ? CorruptedOracleMask(roles, spec, a->thro,
                                     a->corrupt_fraction, a->corrupt_seed)
               : OracleMask(roles, spec, a->thro);
    mask = AlignMask(mask, sg.Frames());
    pilot_track = BuildPilot(sg, mask, PilotTrack::Provenance::kOracle);
  } else if (a->pilot == "scores") {
    if (a->scores.empty())
      throw DataError("invalid input: --pilot scores needs --scores");
    ScoreTable table = ReadScoreTable(a->scores);
    if (!a->theta_min_file.empty())
      table.theta_min = ReadThetaMinFile(a->theta_min_file);
    if (a->have_theta_min) table.theta_min[a->soi] = a->theta_min;
    mask = AlignMask(ScoreMask(table, a->soi), sg.Frames());
    pilot_track = BuildPilot(sg, mask, PilotTrack::Provenance::kScoreTable);
  } else if (a->pilot != "none") {
    throw DataError("invalid input: unknown pilot '" + a->pilot + "'");
  }

  SolverConfig cfg;
  cfg.mode = ModeFromName(a->mode);
  cfg.iterations = a->iterations;
  cfg.block_len = a->block_len_frames;
  cfg.block_shift = a->block_shift;
  cfg.forgetting = a->forgetting;
  cfg.convergence_tol = a->tol;
  cfg.pilot = pilot_track.values;
  cfg.pilot_gain = a->pilot_gain;

  fs::create_directories(a->out);
  WriteKeyValues(JoinPath(a->out, "effective_config.txt"),
                 ExtractEffectiveConfig(*a));

  size_t num_samples = wav.channels[0].size();
  if (!a->deflate) {
    ExtractionResult result = Run(sg, cfg);
    Signal estimate = TrimToLength(Synthesize(result.soi_image)[0],
                                   num_samples);
    WriteWav(JoinPath(a->out, "estimate.wav"), {estimate}, wav.sample_rate);
    KeyValues report;
    report.emplace_back("iterations_run",
                        std::to_string(result.iterations_run));
    report.emplace_back("converged", result.converged ? "1" : "0");
    report.emplace_back("blocks",
                        std::to_string(result.partition.block_count));
    report.emplace_back("frames", std::to_string(sg.Frames()));
    report.emplace_back("bins", std::to_string(sg.Bins()));
    WriteKeyValues(JoinPath(a->out, "extract_report.txt"), report);
    std::printf("wrote %s (iterations %d, converged %d)\n", a->out.c_str(),
                result.iterations_run, result.converged ? 1 : 0);
    return;
  }

  DeflationConfig dcfg;
  dcfg.max_steps = a->max_steps;
  dcfg.reduction = ReductionFromName(a->reduction);
  dcfg.drop_index = a->drop_index;
  dcfg.solver = cfg;

  AssessmentBackend backend;
  if (a->assess == "oracle") {
    if (!have_roles) {
      if (a->stems.empty())
        throw DataError("oracle pilot requires reference stems");
      LoadedScene scene = LoadScene(a->stems);
      roles = RolesFromScene(scene, a->soi_index);
    }
    backend = AssessmentBackend::Oracle(roles.soi, wav.sample_rate);
  } else if (a->assess == "table") {
    if (a->assess_scores.empty())
      throw DataError("invalid input: --assess table needs --assess-scores");
    std::map<std::string, double> table;
    for (const UtteranceScore& row : ReadUtteranceScores(a->assess_scores)) {
      if (!a->soi.empty() && row.speaker_id != a->soi) continue;
      table[row.signal_name] = row.score;
    }
    if (table.empty())
      throw DataError("invalid input: no usable rows in " + a->assess_scores);
    backend = AssessmentBackend::Table(std::move(table));
  } else {
    throw DataError("invalid input: unknown assessment '" + a->assess + "'");
  }

  DeflationResult result = ExtractWithDeflation(sg, dcfg, mask, backend);
  std::vector<std::string> audit_lines;
  audit_lines.push_back("# deflation audit");
  for (const auto& entry : result.audit) audit_lines.push_back(ToLine(entry));
  audit_lines.push_back("returned=" + result.returned);
  if (!result.error.empty()) audit_lines.push_back("error=" + result.error);
  audit_lines.push_back("solver_runs=" + std::to_string(result.solver_runs));
  WriteLines(JoinPath(a->out, "audit.txt"), audit_lines);

  if (result.returned == "aborted") throw NumericalError(result.error);

  Signal estimate =
      TrimToLength(Synthesize(result.estimate)[0], num_samples);
  WriteWav(JoinPath(a->out, "estimate.wav"), {estimate}, wav.sample_rate);
  std::printf("wrote %s (returned %s, solver runs %d)\n", a->out.c_str(),
              result.returned.c_str(), result.solver_runs);
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  CLI::App* cmd = nullptr;
  std::string estimate;
  std::string stems;
  std::string mixture;
  std::string batch;
  std::string report;
  int mixture_channel = 0;
  int soi_index = 0;
  bool windowed = false;
  double window_s = 1.0;
  int filter_len = 512;
  int frame_len = 1024;
  int hop = 256;
  int fft_len = 0;
  std::string window = "hamming";
  bool categorize = false;
};

KeyValues ReportToKeyValues(const EvalReport& r, bool categorize) {
  KeyValues kv;
  kv.emplace_back("sir_db", FormatG17(r.sir_db));
  kv.emplace_back("sdr_db", FormatG17(r.sdr_db));
  kv.emplace_back("input_sir_db", FormatG17(r.input_sir_db));
  kv.emplace_back("input_sdr_db", FormatG17(r.input_sdr_db));
  kv.emplace_back("isir_db", FormatG17(r.isir_db));
  kv.emplace_back("isdr_db", FormatG17(r.isdr_db));
  kv.emplace_back("attenuation_std", FormatG17(r.attenuation_std));
  kv.emplace_back("regularized", r.regularized ? "1" : "0");
  if (categorize)
    kv.emplace_back("category", ToString(Categorize(r.isdr_db)));
  for (size_t i = 0; i < r.intervals.size(); i++) {
    const IntervalScore& iv = r.intervals[i];
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%g,%g,%.17g,%.17g,%.17g,%.17g",
                  iv.begin_s, iv.end_s, iv.sir_db, iv.sdr_db, iv.isir_db,
                  iv.isdr_db);
    kv.emplace_back("interval_" + std::to_string(i), buf);
  }
  return kv;
}

EvalReport EvaluateScene(const std::string& scene_dir,
                         const std::string& estimate_path,
                         const EvaluateArgs& a) {
  LoadedScene scene = LoadScene(scene_dir);
  SourceRoles roles = RolesFromScene(scene, a.soi_index);
  WavData est = ReadWav(estimate_path);
  std::string mixture_path = a.mixture.empty()
                                 ? JoinPath(scene_dir, "mixture.wav")
                                 : a.mixture;
  WavData mix = ReadWav(mixture_path);
  if (a.mixture_channel < 0 ||
      a.mixture_channel >= static_cast<int>(mix.channels.size()))
    throw DataError("invalid input: mixture channel out of range");

  const Signal& est_sig = est.channels[0];
  const Signal& mix_sig = mix.channels[a.mixture_channel];
  if (est_sig.size() != roles.soi.size() ||
      est_sig.size() != mix_sig.size()) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "invalid input: length mismatch estimate=%zu reference=%zu"
                  " mixture=%zu",
                  est_sig.size(), roles.soi.size(), mix_sig.size());
    throw DataError(buf);
  }

  FrameSpec spec;
  spec.frame_len = a.frame_len;
  spec.hop = a.hop;
  spec.fft_len = a.fft_len > 0 ? a.fft_len : a.frame_len;
  spec.window = WindowFromName(a.window);

  EvalOptions opts;
  opts.filter_len = a.filter_len;
  opts.windowed = a.windowed;
  opts.window_s = a.window_s;
  return Evaluate(est_sig, mix_sig, roles, spec, opts);
}

void RunEvaluate(EvaluateArgs* a) {
  if (!a->batch.empty()) {
    if (a->report.empty())
      throw DataError("invalid input: batch mode needs --report");
    std::vector<std::string> cells;
    for (const auto& entry : fs::directory_iterator(a->batch))
      if (entry.is_directory() &&
          fs::exists(entry.path() / "manifest.txt") &&
          fs::exists(entry.path() / "estimate.wav"))
        cells.push_back(entry.path().string());
    std::sort(cells.begin(), cells.end());
    if (cells.empty())
      throw DataError("invalid input: no scored cells under " + a->batch);

    std::vector<std::string> rows;
    rows.push_back(
        "cell,status,sir_db,sdr_db,isir_db,isdr_db,attenuation_std,category");
    for (const auto& cell : cells) {
      std::string name = fs::path(cell).filename().string();
      try {
        EvalReport r = EvaluateScene(cell, JoinPath(cell, "estimate.wav"),
                                     *a);
        char buf[320];
        std::snprintf(buf, sizeof(buf), "%s,ok,%.6f,%.6f,%.6f,%.6f,%.6f,%s",
                      name.c_str(), r.sir_db, r.sdr_db, r.isir_db,
                      r.isdr_db, r.attenuation_std,
                      ToString(Categorize(r.isdr_db)));
        rows.push_back(buf);
      } catch (const std::exception& e) {
        rows.push_back(name + ",error:" + e.what() + ",,,,,,");
      }
    }
    WriteLines(a->report, rows);
    std::printf("wrote %s (%zu cells)\n", a->report.c_str(), cells.size());
    return;
  }

  if (a->estimate.empty() || a->stems.empty())
    throw DataError("invalid input: --estimate and --stems are required");
  EvalReport r = EvaluateScene(a->stems, a->estimate, *a);
  KeyValues kv = ReportToKeyValues(r, a->categorize);
  for (const auto& [k, v] : kv) std::printf("%s=%s\n", k.c_str(), v.c_str());
  if (!a->report.empty()) WriteKeyValues(a->report, kv);
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string spec_file;
  std::string out;
  int jobs = 1;
};

struct SweepCellOutcome {
  std::string row;
  bool failed = false;
};

// One in-memory simulate/extract/evaluate pass shared by the sweep
// experiments.
struct CellRequest {
  Scenario sc;
  int block_len = 200;
  int iterations = 30;
  double thro = 2.0;
  enum class Pilot { kNone, kOracle, kCorrupted } pilot = Pilot::kOracle;
  double corrupt_fraction = 0.0;
  bool deflate = false;
  bool windowed_eval = false;
};

struct CellScores {
  EvalReport report;
  OutcomeCategory category = OutcomeCategory::kNoSource;
};

CellScores RunSweepCell(const CellRequest& req) {
  MultiSignal sources = GenSources(req.sc);
  MixOutput mix = Mix(sources, req.sc);
  SourceRoles roles = RolesFromStems(mix, req.sc, 0);

  FrameSpec spec;
  spec.frame_len = 1024;
  spec.hop = 256;
  spec.fft_len = 1024;
  spec.window = Window::kHamming;
  ComplexSpectrogram sg =
      Analyze(mix.mixture, spec, req.sc.sample_rate);

  std::vector<bool> mask;
  if (req.pilot == CellRequest::Pilot::kOracle)
    mask = AlignMask(OracleMask(roles, spec, req.thro), sg.Frames());
  else if (req.pilot == CellRequest::Pilot::kCorrupted)
    mask = AlignMask(CorruptedOracleMask(roles, spec, req.thro,
                                         req.corrupt_fraction, req.sc.seed),
                     sg.Frames());

  SolverConfig cfg;
  cfg.mode = SolverMode::kCsv;
  cfg.iterations = req.iterations;
  cfg.block_len = req.block_len;
  if (!mask.empty())
    cfg.pilot = BuildPilot(sg, mask, PilotTrack::Provenance::kOracle).values;

  size_t num_samples = mix.mixture[0].size();
  Signal estimate;
  if (req.deflate) {
    DeflationConfig dcfg;
    dcfg.solver = cfg;
    AssessmentBackend backend =
        AssessmentBackend::Oracle(roles.soi, req.sc.sample_rate);
    DeflationResult result = ExtractWithDeflation(sg, dcfg, mask, backend);
    if (result.returned == "aborted") throw NumericalError(result.error);
    estimate = TrimToLength(Synthesize(result.estimate)[0], num_samples);
  } else {
    ExtractionResult result = Run(sg, cfg);
    estimate = TrimToLength(Synthesize(result.soi_image)[0], num_samples);
  }

  EvalOptions opts;
  opts.windowed = req.windowed_eval;
  CellScores out;
  out.report = Evaluate(estimate, mix.mixture[0], roles, spec, opts);
  out.category = Categorize(out.report.isdr_db);
  return out;
}

Scenario SweepScenario(const KeyValues& kv, const Scenario& defaults) {
  // Spec-file scenario keys override the experiment defaults.
  KeyValues merged = ScenarioToKeyValues(defaults);
  for (const auto& [k, v] : kv) merged.emplace_back(k, v);
  return ScenarioFromKeyValues(merged);
}

int SweepInt(const KeyValues& kv, const char* key, int fallback) {
  const std::string* v = FindKey(kv, key);
  return v ? static_cast<int>(ParseIntStrict(*v)) : fallback;
}

void RunSweep(SweepArgs* a) {
  KeyValues kv = ReadKeyValuesFile(a->spec_file);
  const std::string* exp = FindKey(kv, "experiment");
  if (exp == nullptr)
    throw DataError("invalid input: sweep spec needs experiment=");
  int seeds = SweepInt(kv, "seeds", 10);
  uint64_t seed_base = 1;
  if (const std::string* v = FindKey(kv, "seed_base"))
    seed_base = static_cast<uint64_t>(std::strtoull(v->c_str(), nullptr, 10));
  int iterations = SweepInt(kv, "iterations", 30);
  std::string out = a->out.empty()
                        ? JoinPath(OutputRoot(), "sweep_" + *exp)
                        : a->out;
  fs::create_directories(out);

  std::vector<std::string> rows;
  std::vector<std::string> summary;

  if (*exp == "block_length") {
    Scenario defaults;
    defaults.num_channels = 4;
    defaults.num_speakers = 2;
    defaults.noise = true;
    defaults.duration_s = 16.0;
    defaults.mixing = MixingKind::kBlockVarying;
    defaults.num_mixing_blocks = 8;
    defaults.movement = 1.0;
    defaults.snr_db = 20.0;
    Scenario sc0 = SweepScenario(kv, defaults);
    std::vector<double> lens = {50, 200, 800};
    if (const std::string* v = FindKey(kv, "block_lens"))
      lens = ParseDoubleList(*v);

    int cells = seeds * static_cast<int>(lens.size());
    std::vector<SweepCellOutcome> outcomes(cells);
    ParallelFor(cells, a->jobs, [&](int i) {
      int si = i / static_cast<int>(lens.size());
      int li = i % static_cast<int>(lens.size());
      CellRequest req;
      req.sc = sc0;
      req.sc.seed = seed_base + si;
      req.block_len = static_cast<int>(lens[li]);
      req.iterations = iterations;
      req.windowed_eval = true;
      char buf[256];
      try {
        CellScores s = RunSweepCell(req);
        std::snprintf(buf, sizeof(buf), "%llu,%d,ok,%.6f,%.6f",
                      static_cast<unsigned long long>(req.sc.seed),
                      req.block_len, s.report.isir_db,
                      s.report.attenuation_std);
        outcomes[i].row = buf;
      } catch (const std::exception& e) {
        outcomes[i].row = std::to_string(req.sc.seed) + "," +
                          std::to_string(req.block_len) + ",error:" +
                          e.what() + ",,";
        outcomes[i].failed = true;
      }
    });
    rows.push_back("seed,block_len,status,isir_db,attenuation_std");
    for (const auto& o : outcomes) rows.push_back(o.row);
    for (size_t li = 0; li < lens.size(); li++) {
      std::vector<double> isir, att;
      for (int si = 0; si < seeds; si++) {
        const auto& o = outcomes[si * lens.size() + li];
        if (o.failed) continue;
        std::vector<std::string> f;
        std::string cur;
        for (char c : o.row) {
          if (c == ',') {
            f.push_back(cur);
            cur.clear();
          } else {
            cur.push_back(c);
          }
        }
        f.push_back(cur);
        isir.push_back(ParseDoubleStrict(f[3]));
        att.push_back(ParseDoubleStrict(f[4]));
      }
      char buf[192];
      std::snprintf(buf, sizeof(buf),
                    "block_len=%d median_isir_db=%.3f"
                    " median_attenuation_std=%.6f n=%zu",
                    static_cast<int>(lens[li]),
                    isir.empty() ? 0.0 : Median(isir),
                    att.empty() ? 0.0 : Median(att), isir.size());
      summary.push_back(buf);
    }
  } else if (*exp == "pilot_corruption") {
    Scenario defaults;
    defaults.num_channels = 2;
    defaults.num_speakers = 2;
    defaults.noise = false;
    defaults.duration_s = 8.0;
    defaults.mixing = MixingKind::kInstantaneous;
    Scenario sc0 = SweepScenario(kv, defaults);
    std::vector<double> fractions = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                     0.6, 0.7, 0.8, 0.9, 1.0};
    if (const std::string* v = FindKey(kv, "fractions"))
      fractions = ParseDoubleList(*v);

    int cells = seeds * static_cast<int>(fractions.size());
    std::vector<SweepCellOutcome> outcomes(cells);
    ParallelFor(cells, a->jobs, [&](int i) {
      int si = i / static_cast<int>(fractions.size());
      int fi = i % static_cast<int>(fractions.size());
      CellRequest req;
      req.sc = sc0;
      req.sc.seed = seed_base + si;
      req.iterations = iterations;
      req.pilot = CellRequest::Pilot::kCorrupted;
      req.corrupt_fraction = fractions[fi];
      char buf[256];
      try {
        CellScores s = RunSweepCell(req);
        std::snprintf(buf, sizeof(buf), "%llu,%.3f,ok,%.6f",
                      static_cast<unsigned long long>(req.sc.seed),
                      fractions[fi], s.report.sdr_db);
        outcomes[i].row = buf;
      } catch (const std::exception& e) {
        std::snprintf(buf, sizeof(buf), "%llu,%.3f,error:%s,",
                      static_cast<unsigned long long>(req.sc.seed),
                      fractions[fi], e.what());
        outcomes[i].row = buf;
        outcomes[i].failed = true;
      }
    });
    rows.push_back("seed,fraction,status,sdr_db");
    for (const auto& o : outcomes) rows.push_back(o.row);
    for (size_t fi = 0; fi < fractions.size(); fi++) {
      std::vector<double> sdr;
      for (int si = 0; si < seeds; si++) {
        const auto& o = outcomes[si * fractions.size() + fi];
        if (o.failed) continue;
        size_t pos = o.row.rfind(',');
        sdr.push_back(ParseDoubleStrict(o.row.substr(pos + 1)));
      }
      char buf[128];
      std::snprintf(buf, sizeof(buf), "fraction=%.3f median_sdr_db=%.3f n=%zu",
                    fractions[fi], sdr.empty() ? 0.0 : Median(sdr),
                    sdr.size());
      summary.push_back(buf);
    }
  } else if (*exp == "outcome_counts") {
    Scenario defaults;
    defaults.num_channels = 2;
    defaults.num_speakers = 2;
    defaults.noise = false;
    defaults.duration_s = 8.0;
    defaults.mixing = MixingKind::kInstantaneous;
    Scenario sc0 = SweepScenario(kv, defaults);
    double fraction = 0.3;
    if (const std::string* v = FindKey(kv, "corrupt_fraction"))
      fraction = ParseDoubleStrict(*v);
    const std::vector<std::string> arms = {"no_pilot", "corrupted",
                                           "corrupted_deflation"};

    int cells = seeds * static_cast<int>(arms.size());
    std::vector<SweepCellOutcome> outcomes(cells);
    ParallelFor(cells, a->jobs, [&](int i) {
      int si = i / static_cast<int>(arms.size());
      int ai = i % static_cast<int>(arms.size());
      CellRequest req;
      req.sc = sc0;
      req.sc.seed = seed_base + si;
      req.iterations = iterations;
      if (ai == 0) {
        req.pilot = CellRequest::Pilot::kNone;
      } else {
        req.pilot = CellRequest::Pilot::kCorrupted;
        req.corrupt_fraction = fraction;
        req.deflate = ai == 2;
      }
      try {
        CellScores s = RunSweepCell(req);
        outcomes[i].row = std::to_string(req.sc.seed) + "," + arms[ai] +
                          ",ok," + ToString(s.category);
      } catch (const std::exception& e) {
        outcomes[i].row = std::to_string(req.sc.seed) + "," + arms[ai] +
                          ",error:" + e.what() + ",";
        outcomes[i].failed = true;
      }
    });
    rows.push_back("seed,arm,status,category");
    for (const auto& o : outcomes) rows.push_back(o.row);
    for (size_t ai = 0; ai < arms.size(); ai++) {
      int unwanted = 0, scored = 0;
      for (int si = 0; si < seeds; si++) {
        const auto& o = outcomes[si * arms.size() + ai];
        if (o.failed) continue;
        scored++;
        if (o.row.size() >= 15 &&
            o.row.compare(o.row.size() - 15, 15, "unwanted_source") == 0)
          unwanted++;
      }
      summary.push_back("arm=" + arms[ai] + " unwanted_source=" +
                        std::to_string(unwanted) + " n=" +
                        std::to_string(scored));
    }
  } else {
    throw DataError("invalid input: unknown experiment '" + *exp + "'");
  }

  WriteLines(JoinPath(out, *exp + ".csv"), rows);
  WriteLines(JoinPath(out, "summary.txt"), summary);
  std::printf("wrote %s\n", out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided blind extraction of a target speaker"};
  app.require_subcommand(1);

  SimulateArgs sim;
  sim.cmd = app.add_subcommand("simulate", "Render a synthetic scene");
  sim.cmd->add_option("--out", sim.out, "Output directory");
  sim.cmd->add_option("--config", sim.config, "key=value scenario file");
  sim.cmd->add_option("--manifest", sim.manifest,
                      "Replay a scene from its manifest");
  AddScenarioFlags(sim.cmd, &sim);
  sim.cmd->callback([&sim] { RunSimulate(&sim); });

  ExtractArgs ext;
  ext.cmd = app.add_subcommand("extract", "Extract the target speaker");
  AddExtractFlags(ext.cmd, &ext);
  ext.cmd->callback([&ext] { RunExtract(&ext); });

  EvaluateArgs ev;
  ev.cmd = app.add_subcommand("evaluate", "Score an extraction");
  ev.cmd->add_option("--estimate", ev.estimate, "Estimate WAV");
  ev.cmd->add_option("--stems", ev.stems, "Scene directory with stems");
  ev.cmd->add_option("--mixture", ev.mixture,
                     "Mixture WAV (default <stems>/mixture.wav)");
  ev.cmd->add_option("--mixture-channel", ev.mixture_channel,
                     "Channel scored as the input");
  ev.cmd->add_option("--soi-index", ev.soi_index, "Target speaker index");
  ev.cmd->add_option("--batch", ev.batch,
                     "Directory of cells to score into one CSV");
  ev.cmd->add_option("--report", ev.report, "Report file");
  ev.cmd->add_flag("--windowed", ev.windowed, "Score fixed windows");
  ev.cmd->add_option("--window-s", ev.window_s, "Window length in seconds");
  ev.cmd->add_option("--filter-len", ev.filter_len,
                     "Projection filter length");
  ev.cmd->add_option("--frame-len", ev.frame_len, "Attenuation frame length");
  ev.cmd->add_option("--hop", ev.hop, "Attenuation hop");
  ev.cmd->add_option("--fft-len", ev.fft_len,
                     "Attenuation FFT length (0 = frame length)");
  ev.cmd->add_option("--window", ev.window, "Attenuation window");
  ev.cmd->add_flag("--categorize", ev.categorize, "Add the outcome label");
  ev.cmd->callback([&ev] { RunEvaluate(&ev); });

  SweepArgs sw;
  CLI::App* sw_cmd = app.add_subcommand("sweep", "Run a seeded experiment");
  sw_cmd->add_option("--spec", sw.spec_file, "Experiment spec file")
      ->required();
  sw_cmd->add_option("--out", sw.out, "Output directory");
  sw_cmd->add_option("--jobs", sw.jobs, "Parallel cells");
  sw_cmd->callback([&sw] { RunSweep(&sw); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
