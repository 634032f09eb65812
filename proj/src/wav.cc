// src/wav.cc

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

#include "ivex/wav.h"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace ivex {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t ReadU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t ReadU16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::string* out, uint32_t v) {
  out->push_back(static_cast<char>(v & 0xFF));
  out->push_back(static_cast<char>((v >> 8) & 0xFF));
  out->push_back(static_cast<char>((v >> 16) & 0xFF));
  out->push_back(static_cast<char>((v >> 24) & 0xFF));
}

void PutU16(std::string* out, uint16_t v) {
  out->push_back(static_cast<char>(v & 0xFF));
  out->push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace

WavData ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  const uint8_t* p = reinterpret_cast<const uint8_t*>(bytes.data());
  const size_t size = bytes.size();
  if (size < 12 || std::memcmp(p, "RIFF", 4) != 0 ||
      std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw DataError("malformed WAV header: " + path);
  }

  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
  size_t data_off = 0;
  size_t data_len = 0;
  bool have_fmt = false;

  size_t off = 12;
  while (off + 8 <= size) {
    const char* id = bytes.data() + off;
    uint32_t chunk_len = ReadU32(p + off + 4);
    size_t body = off + 8;
    if (body + chunk_len > size) chunk_len = static_cast<uint32_t>(size - body);
    if (std::memcmp(id, "fmt ", 4) == 0 && chunk_len >= 16) {
      format = ReadU16(p + body);
      channels = ReadU16(p + body + 2);
      sample_rate = ReadU32(p + body + 4);
      bits = ReadU16(p + body + 14);
      if (format == kFormatExtensible && chunk_len >= 40) {
        // The actual encoding lives in the first two bytes of the subformat.
        format = ReadU16(p + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = body;
      data_len = chunk_len;
    }
    off = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_off == 0)
    throw DataError("malformed WAV file (missing fmt/data): " + path);
  if (channels == 0) throw DataError("malformed WAV file (no channels)");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32)
    throw DataError("unsupported WAV encoding (want PCM16 or float32): " +
                    path);

  const size_t bytes_per_sample = pcm16 ? 2 : 4;
  const size_t frame_bytes = bytes_per_sample * channels;
  const size_t num_frames = data_len / frame_bytes;

  WavData out;
  out.sample_rate = static_cast<int>(sample_rate);
  out.channels.assign(channels, Signal(num_frames, 0.0));
  const uint8_t* d = p + data_off;
  for (size_t f = 0; f < num_frames; ++f) {
    for (int c = 0; c < channels; ++c) {
      const uint8_t* s = d + f * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        int16_t v = static_cast<int16_t>(s[0] | (s[1] << 8));
        out.channels[c][f] = v / 32768.0;
      } else {
        uint32_t raw = ReadU32(s);
        float v;
        std::memcpy(&v, &raw, 4);
        out.channels[c][f] = v;
      }
    }
  }
  return out;
}

void WriteWav(const std::string& path, const MultiSignal& channels,
              int sample_rate, WavFormat format) {
  if (channels.empty() || channels[0].empty())
    throw DataError("invalid input: no samples to write");
  const size_t num_frames = channels[0].size();
  for (const Signal& ch : channels) {
    if (ch.size() != num_frames)
      throw DataError("invalid input: channel length mismatch");
  }
  const int nch = static_cast<int>(channels.size());
  const bool pcm = format == WavFormat::kPcm16;
  const uint16_t bits = pcm ? 16 : 32;
  const uint32_t byte_rate = sample_rate * nch * bits / 8;
  const uint16_t block_align = static_cast<uint16_t>(nch * bits / 8);
  const uint32_t data_len = static_cast<uint32_t>(num_frames * block_align);

  std::string out;
  out.reserve(64 + data_len);
  out.append("RIFF");
  const uint32_t fact_len = pcm ? 0 : 12;  // fact chunk for non-PCM data
  PutU32(&out, 4 + 24 + fact_len + 8 + data_len);
  out.append("WAVE");
  out.append("fmt ");
  PutU32(&out, 16);
  PutU16(&out, pcm ? kFormatPcm : kFormatFloat);
  PutU16(&out, static_cast<uint16_t>(nch));
  PutU32(&out, static_cast<uint32_t>(sample_rate));
  PutU32(&out, byte_rate);
  PutU16(&out, block_align);
  PutU16(&out, bits);
  if (!pcm) {
    out.append("fact");
    PutU32(&out, 4);
    PutU32(&out, static_cast<uint32_t>(num_frames));
  }
  out.append("data");
  PutU32(&out, data_len);
  for (size_t f = 0; f < num_frames; ++f) {
    for (int c = 0; c < nch; ++c) {
      double v = channels[c][f];
      if (pcm) {
        double scaled = std::lround(std::max(-1.0, std::min(1.0, v)) * 32767.0);
        PutU16(&out, static_cast<uint16_t>(static_cast<int16_t>(scaled)));
      } else {
        float fv = static_cast<float>(v);
        uint32_t raw;
        std::memcpy(&raw, &fv, 4);
        PutU32(&out, raw);
      }
    }
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write WAV file: " + path);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw DataError("short write on WAV file: " + path);
}

}  // namespace ivex
