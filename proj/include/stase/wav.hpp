#pragma once

// RIFF/WAVE reading and writing: PCM 16/24-bit and IEEE float 32-bit,
// mono or stereo. Integer samples map to [-1, 1) by 1 / 2^(bits-1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "stase/audio_buffer.hpp"
#include "stase/error.hpp"

namespace stase::wav {

enum class BitDepth { Pcm16, Pcm24, Float32 };

namespace detail {

inline std::uint32_t u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace detail

/// Decodes a complete WAV file image.
inline AudioBuffer decode(const std::vector<std::uint8_t>& bytes) {
  using namespace detail;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::UnsupportedFormat, "not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(reinterpret_cast<const char*>(bytes.data() + pos), 4);
    const std::uint32_t size = u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size()) throw Error(ErrorCode::Corrupt, "truncated fmt chunk");
      format = u16(bytes.data() + body);
      channels = u16(bytes.data() + body + 2);
      rate = u32(bytes.data() + body + 4);
      bits = u16(bytes.data() + body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorCode::Corrupt, "truncated extensible fmt chunk");
        format = u16(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw Error(ErrorCode::Corrupt, "data chunk before fmt chunk");
      if (format != kFormatPcm && format != kFormatFloat)
        throw Error(ErrorCode::UnsupportedFormat, "fmt format tag " + std::to_string(format));
      if ((format == kFormatPcm && bits != 16 && bits != 24) || (format == kFormatFloat && bits != 32))
        throw Error(ErrorCode::UnsupportedFormat, "fmt bits per sample " + std::to_string(bits));
      if (channels != 1 && channels != 2)
        throw Error(ErrorCode::UnsupportedFormat, "fmt channel count " + std::to_string(channels));
      if (!is_supported_rate(static_cast<int>(rate)))
        throw Error(ErrorCode::UnsupportedFormat, "fmt sample rate " + std::to_string(rate));
      if (body + size > bytes.size()) throw Error(ErrorCode::Corrupt, "data chunk truncated");
      const std::size_t bytes_per_sample = bits / 8;
      const std::size_t frame = bytes_per_sample * channels;
      if (size % frame != 0) throw Error(ErrorCode::Corrupt, "data chunk is not a whole number of frames");
      const std::size_t frames = size / frame;
      std::vector<std::vector<double>> out(channels, std::vector<double>(frames));
      const std::uint8_t* p = bytes.data() + body;
      for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t c = 0; c < channels; ++c, p += bytes_per_sample) {
          double v = 0.0;
          if (format == kFormatFloat) {
            const std::uint32_t raw = u32(p);
            float fl;
            std::memcpy(&fl, &raw, sizeof fl);
            v = static_cast<double>(fl);
          } else if (bits == 16) {
            v = static_cast<double>(static_cast<std::int16_t>(u16(p))) / 32768.0;
          } else {
            std::int32_t s = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
            if (s & 0x800000) s -= 0x1000000;
            v = static_cast<double>(s) / 8388608.0;
          }
          out[c][f] = v;
        }
      }
      try {
        return AudioBuffer(std::move(out), static_cast<int>(rate));
      } catch (const Error& e) {
        throw Error(ErrorCode::Corrupt, e.what());
      }
    }
    pos = body + size + (size & 1u);
  }
  throw Error(have_fmt ? ErrorCode::Corrupt : ErrorCode::UnsupportedFormat,
              have_fmt ? "missing data chunk" : "missing fmt chunk");
}

inline AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

/// Integer quantisation: clamp to [-1, 1 - 2^-(bits-1)], scale, round half away from zero.
inline std::int32_t quantize(double x, int bits) {
  const double full = std::ldexp(1.0, bits - 1);
  const double hi = 1.0 - 1.0 / full;
  const double v = std::clamp(x, -1.0, hi);
  return static_cast<std::int32_t>(std::round(v * full));
}

inline std::vector<std::uint8_t> encode(const AudioBuffer& buffer, BitDepth depth) {
  using namespace detail;
  const std::uint16_t channels = static_cast<std::uint16_t>(buffer.channel_count());
  const std::uint16_t bits = depth == BitDepth::Pcm16 ? 16 : depth == BitDepth::Pcm24 ? 24 : 32;
  const std::uint16_t format = depth == BitDepth::Float32 ? kFormatFloat : kFormatPcm;
  const std::uint32_t rate = static_cast<std::uint32_t>(buffer.sample_rate());
  const std::uint32_t block = channels * (bits / 8u);
  const std::uint32_t data_size = static_cast<std::uint32_t>(buffer.frames() * block);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size + 1);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size + (data_size & 1u));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, channels);
  put_u32(out, rate);
  put_u32(out, rate * block);
  put_u16(out, static_cast<std::uint16_t>(block));
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (std::size_t f = 0; f < buffer.frames(); ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double x = buffer.channel(c)[f];
      if (depth == BitDepth::Float32) {
        const float fl = static_cast<float>(x);
        std::uint32_t raw;
        std::memcpy(&raw, &fl, sizeof raw);
        put_u32(out, raw);
      } else if (depth == BitDepth::Pcm16) {
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(quantize(x, 16))));
      } else {
        const auto s = static_cast<std::uint32_t>(quantize(x, 24));
        out.push_back(static_cast<std::uint8_t>(s));
        out.push_back(static_cast<std::uint8_t>(s >> 8));
        out.push_back(static_cast<std::uint8_t>(s >> 16));
      }
    }
  }
  if (data_size & 1u) out.push_back(0);
  return out;
}

inline void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path, BitDepth depth) {
  const auto bytes = encode(buffer, depth);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace stase::wav
