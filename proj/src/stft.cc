// src/stft.cc

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

#include "ivex/stft.h"

#include <cmath>

#include "ivex/fft.h"

namespace ivex {

namespace {

void ValidateSpec(const FrameSpec& spec) {
  if (spec.hop <= 0 || spec.frame_len < spec.hop ||
      spec.fft_len < spec.frame_len) {
    throw DataError(
        "invalid input: frame spec requires 0 < hop <= frame_len <= fft_len");
  }
}

}  // namespace

std::vector<double> WindowCoefficients(Window window, int len) {
  if (len <= 0) throw DataError("invalid input: window length");
  std::vector<double> w(len, 1.0);
  if (len == 1) return w;
  switch (window) {
    case Window::kHamming:
      for (int n = 0; n < len; ++n)
        w[n] = 0.54 - 0.46 * std::cos(2.0 * kPi * n / (len - 1));
      break;
    case Window::kHann:
      for (int n = 0; n < len; ++n)
        w[n] = 0.5 * (1.0 - std::cos(2.0 * kPi * n / (len - 1)));
      break;
    case Window::kRectangular:
      break;
  }
  return w;
}

ComplexSpectrogram ComplexSpectrogram::Channel(int channel) const {
  if (channel < 0 || channel >= Channels())
    throw DataError("invalid input: channel index out of range");
  ComplexSpectrogram out;
  out.sample_rate = sample_rate;
  out.spec = spec;
  out.data.reserve(data.size());
  for (const CMat& m : data) out.data.push_back(m.row(channel));
  return out;
}

int FrameCount(long long num_samples, const FrameSpec& spec) {
  ValidateSpec(spec);
  if (num_samples < spec.frame_len)
    throw DataError("insufficient samples: signal shorter than one frame");
  long long over = num_samples - spec.frame_len;
  return static_cast<int>(over / spec.hop) + 1;
}

ComplexSpectrogram Analyze(const MultiSignal& signal, const FrameSpec& spec,
                           int sample_rate) {
  ValidateSpec(spec);
  if (signal.empty() || signal[0].empty())
    throw DataError("invalid input: empty signal");
  const size_t num_samples = signal[0].size();
  for (const Signal& ch : signal) {
    if (ch.size() != num_samples)
      throw DataError("invalid input: channel length mismatch");
    for (double v : ch) {
      if (!std::isfinite(v))
        throw DataError("invalid input: non-finite sample");
    }
  }
  const int channels = static_cast<int>(signal.size());
  const int frames = FrameCount(static_cast<long long>(num_samples), spec);
  const int bins = spec.Bins();

  ComplexSpectrogram out;
  out.sample_rate = sample_rate;
  out.spec = spec;
  out.data.assign(bins, CMat::Zero(channels, frames));

  const std::vector<double> win = WindowCoefficients(spec.window,
                                                     spec.frame_len);
  FftPlan plan(spec.fft_len);
  std::vector<Cplx> buf(spec.fft_len);
  for (int c = 0; c < channels; ++c) {
    const Signal& ch = signal[c];
    for (int f = 0; f < frames; ++f) {
      const long long start = static_cast<long long>(f) * spec.hop;
      for (int n = 0; n < spec.frame_len; ++n) {
        const long long idx = start + n;
        const double v =
            idx < static_cast<long long>(num_samples) ? ch[idx] : 0.0;
        buf[n] = Cplx(win[n] * v, 0.0);
      }
      for (int n = spec.frame_len; n < spec.fft_len; ++n)
        buf[n] = Cplx(0.0, 0.0);
      plan.Forward(&buf);
      for (int k = 0; k < bins; ++k) out.data[k](c, f) = buf[k];
    }
  }
  return out;
}

MultiSignal Synthesize(const ComplexSpectrogram& sg) {
  ValidateSpec(sg.spec);
  if (sg.data.empty() || sg.Frames() == 0 || sg.Channels() == 0)
    throw DataError("invalid input: empty spectrogram");
  if (sg.Bins() != sg.spec.Bins())
    throw DataError("invalid input: bin count does not match frame spec");
  const int channels = sg.Channels();
  const int frames = sg.Frames();
  const int bins = sg.Bins();
  const int fft_len = sg.spec.fft_len;
  const int frame_len = sg.spec.frame_len;
  const int hop = sg.spec.hop;
  const long long out_len =
      static_cast<long long>(frames - 1) * hop + frame_len;

  const std::vector<double> win = WindowCoefficients(sg.spec.window,
                                                     frame_len);
  std::vector<double> denom(out_len, 0.0);
  for (int f = 0; f < frames; ++f) {
    const long long start = static_cast<long long>(f) * hop;
    for (int n = 0; n < frame_len; ++n) denom[start + n] += win[n] * win[n];
  }
  double denom_max = 0.0;
  for (double v : denom) denom_max = std::max(denom_max, v);
  if (denom_max <= 0.0)
    throw NumericalError("non-invertible framing: window has no energy");
  const double denom_floor = 1e-12 * denom_max;

  MultiSignal out(channels, Signal(out_len, 0.0));
  FftPlan plan(fft_len);
  std::vector<Cplx> buf(fft_len);
  for (int c = 0; c < channels; ++c) {
    Signal& acc = out[c];
    for (int f = 0; f < frames; ++f) {
      buf[0] = sg.data[0](c, f);
      for (int k = 1; k < bins; ++k) {
        buf[k] = sg.data[k](c, f);
        if (fft_len - k != k) buf[fft_len - k] = std::conj(buf[k]);
      }
      plan.Inverse(&buf);
      const long long start = static_cast<long long>(f) * hop;
      for (int n = 0; n < frame_len; ++n)
        acc[start + n] += win[n] * buf[n].real();
    }
  }
  for (long long n = 0; n < out_len; ++n) {
    if (denom[n] > denom_floor) {
      for (int c = 0; c < channels; ++c) out[c][n] /= denom[n];
    } else if (n >= frame_len && n < out_len - frame_len) {
      throw NumericalError(
          "non-invertible framing: zero window energy in the interior");
    } else {
      for (int c = 0; c < channels; ++c) out[c][n] = 0.0;
    }
  }
  return out;
}

std::vector<double> FrameEnergies(const ComplexSpectrogram& sg, int channel) {
  if (channel < 0 || channel >= sg.Channels())
    throw DataError("invalid input: channel index out of range");
  const int bins = sg.Bins();
  const int frames = sg.Frames();
  const bool has_nyquist = sg.spec.fft_len % 2 == 0;
  std::vector<double> energy(frames, 0.0);
  for (int k = 0; k < bins; ++k) {
    double weight = 2.0;
    if (k == 0) weight = 1.0;
    if (has_nyquist && k == bins - 1) weight = 1.0;
    const auto row = sg.data[k].row(channel);
    for (int f = 0; f < frames; ++f)
      energy[f] += weight * std::norm(row(f));
  }
  return energy;
}

}  // namespace ivex
