// include/ivex/common.h

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

#ifndef IVEX_COMMON_H_
#define IVEX_COMMON_H_

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ivex {

using Cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Time-domain audio: one vector per channel, all channels equally long.
using Signal = std::vector<double>;
using MultiSignal = std::vector<Signal>;

constexpr double kPi = 3.14159265358979323846;

// Malformed or inconsistent input: bad files, shape mismatches, out-of-range
// options. The command-line driver maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Degenerate numerics: singular block statistics, non-invertible framing and
// the like. The command-line driver maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ivex

#endif  // IVEX_COMMON_H_
