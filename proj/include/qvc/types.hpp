#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qvc {

inline constexpr int kSampleRate = 16000;

/// Mono audio at 16 kHz, nominal range [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate = kSampleRate;

  std::size_t size() const noexcept { return samples.size(); }
  double seconds() const noexcept { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Dense row-major real matrix. Time-frequency data is stored frame-major
/// (one row per frame).
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, float fill = 0.0f) : rows(r), cols(c), data(r * c, fill) {}

  float& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<float> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// Throws InvalidArgument on a non-16 kHz rate or non-finite samples.
void validate_waveform(const Waveform& w);

}  // namespace qvc
