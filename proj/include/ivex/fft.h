// include/ivex/fft.h

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

#ifndef IVEX_FFT_H_
#define IVEX_FFT_H_

#include <memory>
#include <vector>

#include "ivex/common.h"

namespace ivex {

// Complex FFT of a fixed size. Power-of-two sizes run an iterative radix-2
// transform; other sizes go through Bluestein's chirp-z reduction onto a
// power-of-two transform. The plan holds precomputed twiddles and is safe to
// share between threads once constructed.
//
// Forward transform is unnormalized: X[k] = sum_n x[n] exp(-2 pi i k n / N).
// Inverse includes the 1/N factor, so Inverse(Forward(x)) == x.
class FftPlan {
 public:
  explicit FftPlan(int n);

  void Forward(std::vector<Cplx>* buf) const;
  void Inverse(std::vector<Cplx>* buf) const;

  int size() const { return n_; }

 private:
  void Radix2(Cplx* buf, int n, const std::vector<Cplx>& twiddles) const;

  int n_;
  bool pow2_;
  std::vector<Cplx> twiddles_;  // radix-2 stage twiddles for size n_ (or m_)

  // Bluestein workspace (pow2_ == false).
  int m_ = 0;                   // power of two >= 2 n - 1
  std::vector<Cplx> chirp_;     // exp(-i pi n^2 / N), n = 0..N-1
  std::vector<Cplx> kernel_fft_;
};

// One-shot conveniences for tests and small callers.
void Fft(std::vector<Cplx>* buf);
void Ifft(std::vector<Cplx>* buf);

}  // namespace ivex

#endif  // IVEX_FFT_H_
