#include "qvc/runtime/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "qvc/errors.hpp"
#include "qvc/nn/weights.hpp"

namespace qvc::runtime {
namespace {

using Kind = WavError::Kind;

std::uint32_t u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | p[1] << 8); }

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

}  // namespace

Waveform wav_decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw WavError(Kind::Malformed, "not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_len = 0;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t len = u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (len > bytes.size() - body) throw WavError(Kind::Malformed, "chunk extends past end of file");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) throw WavError(Kind::Malformed, "fmt chunk too short");
      const std::uint8_t* f = bytes.data() + body;
      const std::uint16_t format = u16(f);
      const std::uint16_t channels = u16(f + 2);
      const std::uint32_t rate = u32(f + 4);
      const std::uint16_t bits = u16(f + 14);
      if (format != 1) throw WavError(Kind::UnsupportedCodec, "only PCM (format 1) is supported, got " + std::to_string(format));
      if (channels != 1) throw WavError(Kind::UnsupportedChannels, "only mono is supported, got " + std::to_string(channels) + " channels");
      if (rate != static_cast<std::uint32_t>(kSampleRate)) {
        throw WavError(Kind::UnsupportedRate, "sample rate must be 16000 Hz, got " + std::to_string(rate));
      }
      if (bits != 16) throw WavError(Kind::UnsupportedBitDepth, "only 16-bit samples are supported, got " + std::to_string(bits));
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = len;
      have_data = true;
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt) throw WavError(Kind::Malformed, "missing fmt chunk");
  if (!have_data) throw WavError(Kind::Malformed, "missing data chunk");
  if (data_len % 2 != 0) throw WavError(Kind::Malformed, "data chunk holds a partial sample");

  Waveform w;
  w.samples.resize(data_len / 2);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const auto v = static_cast<std::int16_t>(u16(data + 2 * i));
    w.samples[i] = static_cast<float>(v) / 32768.0f;
  }
  return w;
}

std::vector<std::uint8_t> wav_encode(const Waveform& w) {
  if (w.sample_rate != kSampleRate) throw InvalidArgument("wav_encode: waveform must be 16 kHz");
  const std::size_t data_len = w.samples.size() * 2;
  if (data_len > 0xFFFFFFFFu - 36) throw InvalidArgument("wav_encode: waveform too long for RIFF");
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, static_cast<std::uint32_t>(36 + data_len));
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, kSampleRate);
  put32(out, kSampleRate * 2);
  put16(out, 2);
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, static_cast<std::uint32_t>(data_len));
  for (float s : w.samples) {
    const float x = std::isfinite(s) ? std::clamp(s, -1.0f, 1.0f) : 0.0f;
    const long q = std::lround(static_cast<double>(x) * 32768.0);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
  }
  return out;
}

Waveform wav_read(const std::filesystem::path& path) { return wav_decode(nn::read_file_bytes(path)); }

void wav_write(const std::filesystem::path& path, const Waveform& w) { nn::write_file_bytes(path, wav_encode(w)); }

}  // namespace qvc::runtime
