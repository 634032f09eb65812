// include/ivex/wav.h

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

#ifndef IVEX_WAV_H_
#define IVEX_WAV_H_

#include <string>

#include "ivex/common.h"

namespace ivex {

enum class WavFormat { kPcm16, kFloat32 };

struct WavData {
  int sample_rate = 0;
  MultiSignal channels;
};

// Reads a RIFF/WAVE file. Supports 16-bit PCM and 32-bit IEEE float, mono or
// multichannel, little-endian. Unknown chunks are skipped. Throws DataError
// on malformed files or unsupported encodings.
WavData ReadWav(const std::string& path);

// Writes a RIFF/WAVE file with a fixed header layout, so identical input
// produces identical bytes. PCM16 samples are clipped to [-1, 1] and rounded;
// float output stores samples as IEEE float32 unmodified.
void WriteWav(const std::string& path, const MultiSignal& channels,
              int sample_rate, WavFormat format = WavFormat::kFloat32);

}  // namespace ivex

#endif  // IVEX_WAV_H_
