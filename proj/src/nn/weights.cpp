#include "qvc/nn/weights.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include <zlib.h>

#include "qvc/errors.hpp"

namespace qvc::nn {

static_assert(std::endian::native == std::endian::little, "QVCW payloads are read with memcpy");

namespace {

constexpr char kMagic[4] = {'Q', 'V', 'C', 'W'};
constexpr std::size_t kPreamble = 4 + 4 + 8;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

using Kind = LoadError::Kind;

}  // namespace

void ModelWeights::add(const std::string& name, Tensor t) {
  if (name.empty()) throw InvalidArgument("tensor name must be non-empty");
  if (!tensors_.emplace(name, std::move(t)).second) throw InvalidArgument("duplicate tensor name: " + name);
}

const Tensor& ModelWeights::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw LoadError(Kind::Manifest, "missing tensor: " + name);
  return it->second;
}

const Tensor& ModelWeights::require(const std::string& name, std::span<const std::int64_t> shape) const {
  const Tensor& t = get(name);
  if (!std::equal(t.shape.begin(), t.shape.end(), shape.begin(), shape.end())) {
    throw ShapeError("tensor " + name + " has shape " + shape_string(t.shape) + ", expected " + shape_string(shape));
  }
  return t;
}

std::size_t ModelWeights::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, t] : tensors_) n += t.numel();
  return n;
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  constexpr std::size_t kChunk = std::size_t{1} << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const std::size_t n = std::min(kChunk, bytes.size() - off);
    crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> save_weights(const ModelWeights& w) {
  nlohmann::json table = nlohmann::json::object();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : w.tensors()) {
    const std::uint64_t len = t.numel() * sizeof(float);
    table[name] = {{"dtype", "f32"}, {"shape", t.shape}, {"offset", offset}, {"len", len}};
    offset += len;
  }
  const nlohmann::json header = {{"config", w.config}, {"tensors", table}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kPreamble + text.size() + offset + 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_le<std::uint32_t>(out, kWeightsVersion);
  put_le<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  const std::size_t payload_start = out.size();
  out.resize(payload_start + offset);
  std::size_t cursor = payload_start;
  for (const auto& [_, t] : w.tensors()) {
    std::memcpy(out.data() + cursor, t.data.data(), t.numel() * sizeof(float));
    cursor += t.numel() * sizeof(float);
  }
  const auto crc = crc32(std::span<const std::uint8_t>(out.data() + payload_start, offset));
  put_le<std::uint32_t>(out, crc);
  return out;
}

ModelWeights load_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw LoadError(Kind::Truncated, "QVCW: file shorter than magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw LoadError(Kind::BadMagic, "QVCW: bad magic");
  if (bytes.size() < kPreamble) throw LoadError(Kind::Truncated, "QVCW: truncated preamble");
  const auto version = get_le<std::uint32_t>(bytes.data() + 4);
  if (version != kWeightsVersion) {
    throw LoadError(Kind::BadVersion, "QVCW: unsupported version " + std::to_string(version));
  }
  const auto header_len = get_le<std::uint64_t>(bytes.data() + 8);
  if (header_len > bytes.size() - kPreamble || bytes.size() - kPreamble - header_len < 4) {
    throw LoadError(Kind::Truncated, "QVCW: header length " + std::to_string(header_len) + " exceeds file size");
  }
  const std::size_t payload_start = kPreamble + header_len;
  const std::size_t payload_len = bytes.size() - payload_start - 4;

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + kPreamble, bytes.begin() + static_cast<std::ptrdiff_t>(payload_start));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(Kind::BadHeader, std::string("QVCW: header is not valid JSON: ") + e.what());
  }
  if (!header.is_object() || !header.contains("tensors") || !header["tensors"].is_object()) {
    throw LoadError(Kind::BadHeader, "QVCW: header lacks a tensor table");
  }

  // A payload shorter than the table says is a cut-off file, not corruption.
  std::uint64_t declared = 0;
  for (const auto& [name, entry] : header["tensors"].items()) {
    if (entry.is_object() && entry.contains("offset") && entry.contains("len") && entry["offset"].is_number_unsigned() &&
        entry["len"].is_number_unsigned()) {
      declared = std::max(declared, entry["offset"].get<std::uint64_t>() + entry["len"].get<std::uint64_t>());
    }
  }
  if (declared > payload_len) {
    throw LoadError(Kind::Truncated, "QVCW: payload holds " + std::to_string(payload_len) + " bytes, tensor table needs " +
                                         std::to_string(declared));
  }

  const auto payload = bytes.subspan(payload_start, payload_len);
  const auto stored_crc = get_le<std::uint32_t>(bytes.data() + payload_start + payload_len);
  if (crc32(payload) != stored_crc) throw LoadError(Kind::Checksum, "QVCW: payload checksum mismatch");

  ModelWeights w;
  w.config = header.value("config", nlohmann::json::object());
  std::uint64_t covered = 0;
  try {
    for (const auto& [name, entry] : header["tensors"].items()) {
      if (entry.at("dtype").get<std::string>() != "f32") {
        throw LoadError(Kind::BadHeader, "QVCW: tensor " + name + " has unsupported dtype");
      }
      auto shape = entry.at("shape").get<std::vector<std::int64_t>>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const auto len = entry.at("len").get<std::uint64_t>();
      for (auto d : shape) {
        if (d < 0 || d > (std::int64_t{1} << 32)) throw LoadError(Kind::BadHeader, "QVCW: bad dimension in " + name);
      }
      const std::size_t numel = shape_numel(shape);
      if (numel > payload_len / sizeof(float) || len != numel * sizeof(float)) {
        throw LoadError(Kind::SizeMismatch, "QVCW: tensor " + name + " length " + std::to_string(len) +
                                                " disagrees with shape " + shape_string(shape));
      }
      if (offset > payload_len || len > payload_len - offset) {
        throw LoadError(Kind::SizeMismatch, "QVCW: tensor " + name + " lies outside the payload");
      }
      std::vector<float> data(numel);
      std::memcpy(data.data(), payload.data() + offset, len);
      covered += len;
      w.add(name, Tensor(std::move(shape), std::move(data)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(Kind::BadHeader, std::string("QVCW: malformed tensor entry: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw LoadError(Kind::BadHeader, std::string("QVCW: ") + e.what());
  }
  if (covered != payload_len) {
    throw LoadError(Kind::SizeMismatch, "QVCW: tensor table covers " + std::to_string(covered) + " of " +
                                            std::to_string(payload_len) + " payload bytes");
  }
  return w;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  if (size < 0) throw IoError("cannot determine size of " + path.string());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (!bytes.empty() && !in.read(reinterpret_cast<char*>(bytes.data()), size)) {
    throw IoError("short read from " + path.string());
  }
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to " + path.string() + " failed");
}

void write_weights_file(const std::filesystem::path& path, const ModelWeights& w) {
  write_file_bytes(path, save_weights(w));
}

ModelWeights read_weights_file(const std::filesystem::path& path) { return load_weights(read_file_bytes(path)); }

}  // namespace qvc::nn
