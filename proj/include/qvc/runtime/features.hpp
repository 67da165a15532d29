#pragma once

// QVCF v1 content-feature file:
//
//   "QVCF" | u32 version | u32 T | u32 dim | T*dim f32 (row-major) | u32 CRC32
//
// little-endian throughout; the CRC covers the f32 payload. Content features
// always have dim 256; other dims are accepted where a reader asks for them
// (loss auditing reuses the layout for arbitrary frame-major tensors).
// Details in docs/formats.md.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qvc/model/encoders.hpp"

namespace qvc::runtime {

inline constexpr std::uint32_t kFeaturesVersion = 1;
inline constexpr std::size_t kContentDim = 256;

std::vector<std::uint8_t> features_encode(const Matrix& frames);
// expected_dim == 0 accepts any width.
Matrix features_decode(std::span<const std::uint8_t> bytes, std::size_t expected_dim = kContentDim);

model::ContentFeatures read_content_features(const std::filesystem::path& path);
void write_content_features(const std::filesystem::path& path, const model::ContentFeatures& f);

Matrix read_frame_tensor(const std::filesystem::path& path);
void write_frame_tensor(const std::filesystem::path& path, const Matrix& frames);

}  // namespace qvc::runtime
