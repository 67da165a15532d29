#include "qvc/runtime/features.hpp"

#include <cstring>
#include <string>

#include "qvc/errors.hpp"
#include "qvc/nn/weights.hpp"

namespace qvc::runtime {
namespace {

using Kind = LoadError::Kind;

void put32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

constexpr std::size_t kHeader = 16;

}  // namespace

std::vector<std::uint8_t> features_encode(const Matrix& frames) {
  if (frames.rows > 0xFFFFFFFFu || frames.cols > 0xFFFFFFFFu) throw InvalidArgument("QVCF: dimensions exceed u32");
  const std::size_t payload = frames.data.size() * 4;
  std::vector<std::uint8_t> out(kHeader + payload + 4);
  std::memcpy(out.data(), "QVCF", 4);
  put32(out.data() + 4, kFeaturesVersion);
  put32(out.data() + 8, static_cast<std::uint32_t>(frames.rows));
  put32(out.data() + 12, static_cast<std::uint32_t>(frames.cols));
  std::memcpy(out.data() + kHeader, frames.data.data(), payload);
  put32(out.data() + kHeader + payload, nn::crc32(std::span<const std::uint8_t>(out.data() + kHeader, payload)));
  return out;
}

Matrix features_decode(std::span<const std::uint8_t> bytes, std::size_t expected_dim) {
  if (bytes.size() < 4) throw LoadError(Kind::Truncated, "QVCF: file shorter than magic");
  if (std::memcmp(bytes.data(), "QVCF", 4) != 0) throw LoadError(Kind::BadMagic, "QVCF: bad magic");
  if (bytes.size() < kHeader) throw LoadError(Kind::Truncated, "QVCF: truncated header");
  const auto version = get32(bytes.data() + 4);
  if (version != kFeaturesVersion) throw LoadError(Kind::BadVersion, "QVCF: unsupported version " + std::to_string(version));
  const std::uint64_t frames = get32(bytes.data() + 8);
  const std::uint64_t dim = get32(bytes.data() + 12);
  if (expected_dim != 0 && dim != expected_dim) {
    throw LoadError(Kind::BadHeader, "QVCF: feature dim is " + std::to_string(dim) + ", expected " +
                                         std::to_string(expected_dim));
  }
  const std::uint64_t payload = frames * dim * 4;
  const std::uint64_t total = kHeader + payload + 4;
  if (bytes.size() < total) {
    throw LoadError(Kind::Truncated, "QVCF: expected " + std::to_string(total) + " bytes, file has " +
                                         std::to_string(bytes.size()));
  }
  if (bytes.size() > total) throw LoadError(Kind::SizeMismatch, "QVCF: trailing bytes after checksum");
  const auto body = bytes.subspan(kHeader, static_cast<std::size_t>(payload));
  if (nn::crc32(body) != get32(bytes.data() + kHeader + payload)) {
    throw LoadError(Kind::Checksum, "QVCF: payload checksum mismatch");
  }
  Matrix m(static_cast<std::size_t>(frames), static_cast<std::size_t>(dim));
  std::memcpy(m.data.data(), body.data(), body.size());
  return m;
}

model::ContentFeatures read_content_features(const std::filesystem::path& path) {
  return {features_decode(nn::read_file_bytes(path), kContentDim)};
}

void write_content_features(const std::filesystem::path& path, const model::ContentFeatures& f) {
  if (f.dim() != kContentDim) throw ShapeError("content features must have dim 256");
  nn::write_file_bytes(path, features_encode(f.frames));
}

Matrix read_frame_tensor(const std::filesystem::path& path) { return features_decode(nn::read_file_bytes(path), 0); }

void write_frame_tensor(const std::filesystem::path& path, const Matrix& frames) {
  nn::write_file_bytes(path, features_encode(frames));
}

}  // namespace qvc::runtime
