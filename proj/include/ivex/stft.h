// include/ivex/stft.h

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

#ifndef IVEX_STFT_H_
#define IVEX_STFT_H_

#include <vector>

#include "ivex/common.h"

namespace ivex {

enum class Window { kHamming, kHann, kRectangular };

// Analysis framing. Frames start every `hop` samples, cover `frame_len`
// samples, and are zero-padded to `fft_len` before the transform.
// Requires 0 < hop <= frame_len <= fft_len.
struct FrameSpec {
  int frame_len = 1024;
  int hop = 200;
  Window window = Window::kHamming;
  int fft_len = 1024;

  int Bins() const { return fft_len / 2 + 1; }
};

std::vector<double> WindowCoefficients(Window window, int len);

// One-sided multichannel STFT tensor. data[k] is a channels x frames complex
// matrix for bin k; bins run 0..fft_len/2 (DC through Nyquist).
//
// Phase is referenced to the frame start: frame f covers samples
// [f*hop, f*hop + frame_len) and is transformed in place, with no centering
// shift. The forward transform is unnormalized.
struct ComplexSpectrogram {
  int sample_rate = 0;
  FrameSpec spec;
  std::vector<CMat> data;

  int Bins() const { return static_cast<int>(data.size()); }
  int Channels() const {
    return data.empty() ? 0 : static_cast<int>(data[0].rows());
  }
  int Frames() const {
    return data.empty() ? 0 : static_cast<int>(data[0].cols());
  }

  // Copy of a single channel as a one-channel spectrogram.
  ComplexSpectrogram Channel(int channel) const;
};

// Number of analysis frames for a signal of `num_samples`:
// (num_samples - frame_len) / hop + 1 with integer division, so trailing
// samples that do not fill a complete frame are dropped. Signals shorter
// than one frame are an error.
int FrameCount(long long num_samples, const FrameSpec& spec);

// Forward STFT of a multichannel signal. Throws DataError on empty or
// non-finite input ("invalid input"), on signals shorter than one frame
// ("insufficient samples"), and on an inconsistent FrameSpec.
ComplexSpectrogram Analyze(const MultiSignal& signal, const FrameSpec& spec,
                           int sample_rate);

// Weighted overlap-add synthesis: each frame is inverse-transformed,
// windowed again, accumulated, and normalized by the accumulated squared
// window. Output length is (frames - 1) * hop + frame_len. Samples whose
// window energy is zero are only tolerated within one frame length of either
// edge; a zero-energy interior sample throws NumericalError
// ("non-invertible framing"). Reconstruction is exact (to rounding) wherever
// the window energy is positive.
MultiSignal Synthesize(const ComplexSpectrogram& spectrogram);

// Per-frame energy of one channel under the one-sided doubling convention:
// interior bins count twice, DC once, and Nyquist (present for even fft_len)
// once. With that convention the value equals fft_len times the energy of
// the windowed frame (Parseval). All frame-energy comparisons in this
// toolkit (pilot values, dominance decisions, attenuation ratios) use this
// helper so the convention is applied uniformly.
std::vector<double> FrameEnergies(const ComplexSpectrogram& spectrogram,
                                  int channel);

}  // namespace ivex

#endif  // IVEX_STFT_H_
