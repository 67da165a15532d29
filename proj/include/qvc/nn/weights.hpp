#pragma once

// Named-tensor container and its on-disk form, QVCW v1:
//
//   "QVCW" | u32 version | u64 header_len | header (JSON, header_len bytes)
//   | payload | u32 CRC32(payload)
//
// All integers little-endian. The header is
//   {"config": {...}, "tensors": {name: {"dtype": "f32", "shape": [...],
//                                        "offset": bytes, "len": bytes}}}
// with offsets relative to the start of the payload. Tensors are written in
// name order and packed without gaps. See docs/formats.md.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qvc/nn/tensor.hpp"

namespace qvc::nn {

inline constexpr std::uint32_t kWeightsVersion = 1;

// Expected (name, shape) pairs for a network.
using Manifest = std::vector<std::pair<std::string, std::vector<std::int64_t>>>;

class ModelWeights {
 public:
  nlohmann::json config = nlohmann::json::object();

  void add(const std::string& name, Tensor t);
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  // Throws LoadError(Manifest) when absent.
  const Tensor& get(const std::string& name) const;
  // As get(), plus a ShapeError if the stored shape differs.
  const Tensor& require(const std::string& name, std::span<const std::int64_t> shape) const;
  const Tensor& require(const std::string& name, std::initializer_list<std::int64_t> shape) const {
    return require(name, std::span<const std::int64_t>(shape.begin(), shape.size()));
  }

  const std::map<std::string, Tensor>& tensors() const noexcept { return tensors_; }
  std::size_t parameter_count() const noexcept;

  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;

 private:
  std::map<std::string, Tensor> tensors_;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> save_weights(const ModelWeights& w);
ModelWeights load_weights(std::span<const std::uint8_t> bytes);

void write_weights_file(const std::filesystem::path& path, const ModelWeights& w);
ModelWeights read_weights_file(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace qvc::nn
