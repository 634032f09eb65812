// src/assess.cc

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

#include "ivex/assess.h"

#include <cmath>

namespace ivex {

const char* ToString(OutcomeCategory category) {
  switch (category) {
    case OutcomeCategory::kUnwantedSource:
      return "unwanted_source";
    case OutcomeCategory::kNoSource:
      return "no_source";
    case OutcomeCategory::kSoiExtracted:
      return "soi_extracted";
  }
  return "unknown";
}

double NormalizedXcorrScore(const Signal& candidate, const Signal& reference,
                            int sample_rate, double max_lag_ms) {
  if (candidate.empty() || reference.empty())
    throw DataError("invalid input: empty signal in assessment");
  if (sample_rate <= 0)
    throw DataError("invalid input: sample rate must be positive");
  double cand_energy = 0.0;
  for (double v : candidate) cand_energy += v * v;
  double ref_energy = 0.0;
  for (double v : reference) ref_energy += v * v;
  const double denom = std::sqrt(cand_energy * ref_energy);
  const long long n = static_cast<long long>(
      std::min(candidate.size(), reference.size()));
  long long max_lag = std::llround(max_lag_ms * 1e-3 * sample_rate);
  if (max_lag >= n) max_lag = n - 1;

  double best = 0.0;
  if (denom > 0.0) {
    for (long long lag = -max_lag; lag <= max_lag; ++lag) {
      // Correlate candidate[t] against reference[t + lag].
      double acc = 0.0;
      const long long lo = std::max(0LL, -lag);
      const long long hi = std::min(
          static_cast<long long>(candidate.size()),
          static_cast<long long>(reference.size()) - lag);
      for (long long t = lo; t < hi; ++t)
        acc += candidate[t] * reference[t + lag];
      best = std::max(best, std::fabs(acc) / denom);
    }
  }
  return std::log(best + 1e-12);
}

AssessmentBackend AssessmentBackend::Oracle(Signal reference,
                                            int sample_rate) {
  AssessmentBackend backend;
  backend.kind = Kind::kOracleReference;
  backend.reference = std::move(reference);
  backend.sample_rate = sample_rate;
  return backend;
}

AssessmentBackend AssessmentBackend::Table(
    std::map<std::string, double> scores) {
  AssessmentBackend backend;
  backend.kind = Kind::kUtteranceScores;
  backend.scores = std::move(scores);
  return backend;
}

double AssessmentBackend::Score(const std::string& name,
                                const Signal& candidate) const {
  if (kind == Kind::kOracleReference)
    return NormalizedXcorrScore(candidate, reference, sample_rate, max_lag_ms);
  auto it = scores.find(name);
  if (it == scores.end()) throw DataError("unscored signal: " + name);
  return it->second;
}

Choice Assess(const Signal& candidate_a, const Signal& candidate_b,
              const std::string& name_a, const std::string& name_b,
              const AssessmentBackend& backend) {
  if (candidate_a.size() != candidate_b.size())
    throw DataError("invalid input: assessment candidates differ in length");
  const double score_a = backend.Score(name_a, candidate_a);
  const double score_b = backend.Score(name_b, candidate_b);
  return score_a > score_b ? Choice::kA : Choice::kB;
}

OutcomeCategory Categorize(double isdr_db) {
  if (isdr_db < -2.0) return OutcomeCategory::kUnwantedSource;
  if (isdr_db > 2.0) return OutcomeCategory::kSoiExtracted;
  return OutcomeCategory::kNoSource;
}

}  // namespace ivex
