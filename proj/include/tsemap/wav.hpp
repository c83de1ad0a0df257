#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "tsemap/error.hpp"
#include "tsemap/signal.hpp"

namespace tsemap {

enum class WavEncoding { pcm16, float32 };

inline WavEncoding parse_wav_encoding(const std::string& s) {
  if (s == "pcm16") return WavEncoding::pcm16;
  if (s == "float32") return WavEncoding::float32;
  fail("unsupported encoding: " + s);
}

namespace wav_detail {

inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

inline void put_tag(std::vector<unsigned char>& out, const char* tag) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(tag[i]));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace wav_detail

/// 16-bit quantization: x * 32768, rounded to nearest and saturated.
inline std::int16_t to_pcm16(double x) {
  const double v = std::nearbyint(x * 32768.0);
  if (v >= 32767.0) return 32767;
  if (v <= -32768.0) return -32768;
  return static_cast<std::int16_t>(v);
}

/// Decodes a RIFF/WAVE byte image. Accepts mono 16-bit PCM and mono 32-bit
/// IEEE float, including the WAVE_FORMAT_EXTENSIBLE wrapper of either.
inline AudioBuffer decode_wav(const std::vector<unsigned char>& bytes,
                              const std::string& name = "<memory>") {
  using namespace wav_detail;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(name + ": not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) {
      // Tolerate a truncated trailing data chunk.
      if (std::memcmp(chunk, "data", 4) != 0) fail(name + ": truncated chunk");
    }
    const std::size_t avail = std::min<std::size_t>(len, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) fail(name + ": short fmt chunk");
      format = get_u16(chunk + 8);
      channels = get_u16(chunk + 10);
      rate = get_u32(chunk + 12);
      bits = get_u16(chunk + 22);
      if (format == kFormatExtensible) {
        if (avail < 26) fail(name + ": short extensible fmt chunk");
        format = get_u16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_len = static_cast<std::uint32_t>(avail);
    }
    pos = body + len + (len & 1U);
  }
  if (!have_fmt) fail(name + ": missing fmt chunk");
  if (data == nullptr) fail(name + ": missing data chunk");
  if (channels != 1) fail(name + ": mono required (found " + std::to_string(channels) + " channels)");
  if (rate == 0) fail(name + ": zero sample rate");

  std::vector<double> samples;
  if (format == kFormatPcm && bits == 16) {
    samples.resize(data_len / 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto raw = static_cast<std::int16_t>(get_u16(data + 2 * i));
      samples[i] = static_cast<double>(raw) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    samples.resize(data_len / 4);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = static_cast<double>(std::bit_cast<float>(get_u32(data + 4 * i)));
    }
  } else {
    fail(name + ": unsupported encoding (format " + std::to_string(format) + ", " +
         std::to_string(bits) + " bits)");
  }
  return AudioBuffer(std::move(samples), static_cast<int>(rate));
}

inline std::vector<unsigned char> encode_wav(const AudioBuffer& buf, WavEncoding encoding) {
  using namespace wav_detail;
  const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : 32;
  const std::uint16_t format = encoding == WavEncoding::pcm16 ? kFormatPcm : kFormatFloat;
  const std::uint32_t block = bits / 8;
  const std::uint32_t data_len = static_cast<std::uint32_t>(buf.size() * block);
  const auto rate = static_cast<std::uint32_t>(buf.sample_rate());

  std::vector<unsigned char> out;
  out.reserve(44 + data_len);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_len);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * block);
  put_u16(out, static_cast<std::uint16_t>(block));
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_len);
  for (double x : buf.samples()) {
    if (encoding == WavEncoding::pcm16) {
      put_u16(out, static_cast<std::uint16_t>(to_pcm16(x)));
    } else {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    }
  }
  return out;
}

inline AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_wav(bytes, path.string());
}

/// float32 stores samples as float; round trips are bit-exact for buffers
/// whose values are representable in single precision.
inline void write_wav(const std::filesystem::path& path, const AudioBuffer& buf,
                      WavEncoding encoding = WavEncoding::float32) {
  const auto bytes = encode_wav(buf, encoding);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_fail("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) io_fail("write failed: " + path.string());
}

}  // namespace tsemap
