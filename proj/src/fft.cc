// src/fft.cc

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

#include "ivex/fft.h"

#include <cmath>

namespace ivex {

namespace {

bool IsPowerOfTwo(int n) { return n > 0 && (n & (n - 1)) == 0; }

int NextPowerOfTwo(int n) {
  int m = 1;
  while (m < n) m <<= 1;
  return m;
}

// Twiddles for every radix-2 stage of a size-n transform, packed
// stage-by-stage: for stage length len there are len/2 factors
// exp(-2 pi i j / len), j = 0..len/2-1.
std::vector<Cplx> StageTwiddles(int n) {
  std::vector<Cplx> tw;
  tw.reserve(n);
  for (int len = 2; len <= n; len <<= 1) {
    for (int j = 0; j < len / 2; ++j) {
      double ang = -2.0 * kPi * j / len;
      tw.emplace_back(std::cos(ang), std::sin(ang));
    }
  }
  return tw;
}

}  // namespace

FftPlan::FftPlan(int n) : n_(n), pow2_(IsPowerOfTwo(n)) {
  if (n <= 0) throw DataError("invalid input: FFT size must be positive");
  if (pow2_) {
    twiddles_ = StageTwiddles(n_);
    return;
  }
  // Bluestein: x[n] -> x[n] * chirp[n], circular-convolve with the conjugate
  // chirp, multiply by chirp again. The convolution runs at size m_.
  m_ = NextPowerOfTwo(2 * n_ - 1);
  twiddles_ = StageTwiddles(m_);
  chirp_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    // Reduce i^2 mod 2N before the trig call to keep the argument small.
    long long q = (static_cast<long long>(i) * i) % (2LL * n_);
    double ang = -kPi * static_cast<double>(q) / n_;
    chirp_[i] = Cplx(std::cos(ang), std::sin(ang));
  }
  std::vector<Cplx> kernel(m_, Cplx(0.0, 0.0));
  kernel[0] = std::conj(chirp_[0]);
  for (int i = 1; i < n_; ++i) {
    kernel[i] = std::conj(chirp_[i]);
    kernel[m_ - i] = std::conj(chirp_[i]);
  }
  Radix2(kernel.data(), m_, twiddles_);
  kernel_fft_ = std::move(kernel);
}

void FftPlan::Radix2(Cplx* buf, int n, const std::vector<Cplx>& tw) const {
  // Bit-reversal permutation.
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(buf[i], buf[j]);
  }
  const Cplx* stage = tw.data();
  for (int len = 2; len <= n; len <<= 1) {
    int half = len / 2;
    for (int base = 0; base < n; base += len) {
      for (int j = 0; j < half; ++j) {
        Cplx even = buf[base + j];
        Cplx odd = buf[base + j + half] * stage[j];
        buf[base + j] = even + odd;
        buf[base + j + half] = even - odd;
      }
    }
    stage += half;
  }
}

void FftPlan::Forward(std::vector<Cplx>* buf) const {
  if (static_cast<int>(buf->size()) != n_)
    throw DataError("invalid input: FFT buffer length mismatch");
  if (pow2_) {
    Radix2(buf->data(), n_, twiddles_);
    return;
  }
  std::vector<Cplx> work(m_, Cplx(0.0, 0.0));
  for (int i = 0; i < n_; ++i) work[i] = (*buf)[i] * chirp_[i];
  Radix2(work.data(), m_, twiddles_);
  for (int i = 0; i < m_; ++i) work[i] *= kernel_fft_[i];
  // Inverse size-m transform via conjugation.
  for (auto& v : work) v = std::conj(v);
  Radix2(work.data(), m_, twiddles_);
  double inv_m = 1.0 / m_;
  for (int i = 0; i < n_; ++i)
    (*buf)[i] = std::conj(work[i]) * inv_m * chirp_[i];
}

void FftPlan::Inverse(std::vector<Cplx>* buf) const {
  for (auto& v : *buf) v = std::conj(v);
  Forward(buf);
  double inv_n = 1.0 / n_;
  for (auto& v : *buf) v = std::conj(v) * inv_n;
}

void Fft(std::vector<Cplx>* buf) {
  FftPlan(static_cast<int>(buf->size())).Forward(buf);
}

void Ifft(std::vector<Cplx>* buf) {
  FftPlan(static_cast<int>(buf->size())).Inverse(buf);
}

}  // namespace ivex
