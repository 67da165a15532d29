#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qvc::nn {

/// Parameter tensor: arbitrary rank, row-major f32 payload.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> s, float fill = 0.0f);
  Tensor(std::vector<std::int64_t> s, std::vector<float> d);

  std::size_t numel() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return shape.size(); }
  std::size_t dim(std::size_t i) const { return static_cast<std::size_t>(shape.at(i)); }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::size_t shape_numel(std::span<const std::int64_t> shape);
std::string shape_string(std::span<const std::int64_t> shape);

/// Activation tensor laid out (batch, channels, time).
struct Tensor3 {
  std::size_t batch = 0;
  std::size_t channels = 0;
  std::size_t time = 0;
  std::vector<float> data;

  Tensor3() = default;
  Tensor3(std::size_t b, std::size_t c, std::size_t t, float fill = 0.0f)
      : batch(b), channels(c), time(t), data(b * c * t, fill) {}

  float& at(std::size_t b, std::size_t c, std::size_t t) { return data[(b * channels + c) * time + t]; }
  float at(std::size_t b, std::size_t c, std::size_t t) const { return data[(b * channels + c) * time + t]; }

  std::span<float> row(std::size_t b, std::size_t c) { return {data.data() + (b * channels + c) * time, time}; }
  std::span<const float> row(std::size_t b, std::size_t c) const {
    return {data.data() + (b * channels + c) * time, time};
  }
  float* plane(std::size_t b) { return data.data() + b * channels * time; }
  const float* plane(std::size_t b) const { return data.data() + b * channels * time; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;
};

// Channels [begin, begin + count) of every batch item.
Tensor3 slice_channels(const Tensor3& x, std::size_t begin, std::size_t count);
// Concatenate along channels; batch and time must agree.
Tensor3 concat_channels(const Tensor3& a, const Tensor3& b);

}  // namespace qvc::nn
