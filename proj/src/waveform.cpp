// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tonelink/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

namespace tonelink {

double energy(std::span<const float> x) {
  double acc = 0.0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return acc;
}

double mean_power(std::span<const float> x) {
  return x.empty() ? 0.0 : energy(x) / static_cast<double>(x.size());
}

double rms(std::span<const float> x) { return std::sqrt(mean_power(x)); }

double peak(std::span<const float> x) {
  double p = 0.0;
  for (float v : x) p = std::max(p, static_cast<double>(std::abs(v)));
  return p;
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

}  // namespace

std::vector<std::uint8_t> encode_wav(const Waveform& w) {
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (float v : w.samples) {
    const double clamped = std::clamp(static_cast<double>(v), -1.0, 1.0);
    const auto q = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  return out;
}

Waveform decode_wav(std::span<const std::uint8_t> b) {
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
      std::memcmp(b.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("not a RIFF/WAVE file");
  std::size_t pos = 12;
  int format = 0, channels = 0, bits = 0;
  Waveform w;
  bool have_fmt = false;
  while (pos + 8 <= b.size()) {
    const std::string id(reinterpret_cast<const char*>(b.data() + pos), 4);
    const std::uint32_t len = get_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > b.size()) throw std::runtime_error("truncated WAV chunk: " + id);
    if (id == "fmt ") {
      if (len < 16) throw std::runtime_error("short fmt chunk");
      format = get_u16(b, body);
      channels = get_u16(b, body + 2);
      w.sample_rate = static_cast<int>(get_u32(b, body + 4));
      bits = get_u16(b, body + 14);
      if (format == 0xFFFE && len >= 26) format = get_u16(b, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw std::runtime_error("data chunk before fmt chunk");
      if (channels != 1) throw std::runtime_error("only mono WAV is supported");
      if (format == 1 && bits == 16) {
        w.samples.resize(len / 2);
        // Same scale as the writer so a round trip only adds rounding error.
        for (std::size_t i = 0; i < w.samples.size(); ++i) {
          const double v = static_cast<std::int16_t>(get_u16(b, body + 2 * i)) / 32767.0;
          w.samples[i] = static_cast<float>(std::max(v, -1.0));
        }
      } else if (format == 3 && bits == 32) {
        w.samples.resize(len / 4);
        std::memcpy(w.samples.data(), b.data() + body, w.samples.size() * 4);
      } else {
        throw std::runtime_error("unsupported WAV encoding (need 16-bit PCM or 32-bit float)");
      }
      return w;
    }
    pos = body + len + (len & 1);
  }
  throw std::runtime_error("WAV has no data chunk");
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  const auto bytes = encode_wav(w);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

}  // namespace tonelink
