// include/ivex/rng.h

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

#ifndef IVEX_RNG_H_
#define IVEX_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>

namespace ivex {

// Deterministic random draws. Only the raw mt19937_64 output is consumed;
// every distribution below is derived through fixed arithmetic, so a given
// (seed, stream) pair produces the same sequence with any standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0)
      : gen_(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1))) {}

  uint64_t Raw() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double Uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Inclusive bounds.
  int UniformInt(int lo, int hi) {
    return lo + static_cast<int>(gen_() % static_cast<uint64_t>(hi - lo + 1));
  }

  // Standard normal via Box-Muller.
  double Gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = Uniform();
    double u2 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(2.0 * 3.14159265358979323846 * u2);
    have_spare_ = true;
    return radius * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Zero-mean Laplacian with unit variance (scale 1/sqrt(2)).
  double Laplacian() {
    double u = Uniform() - 0.5;
    double inner = 1.0 - 2.0 * std::fabs(u);
    if (inner < 0x1.0p-60) inner = 0x1.0p-60;
    double mag = std::log(inner);
    double b = 1.0 / std::sqrt(2.0);
    return u >= 0.0 ? -b * mag : b * mag;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ivex

#endif  // IVEX_RNG_H_
