#pragma once

// Shared helpers for the unit tests and the acceptance runner.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qvc/nn/tensor.hpp"
#include "qvc/nn/weights.hpp"
#include "qvc/types.hpp"

namespace qvc::test {

inline std::vector<float> uniform(std::size_t n, std::uint64_t seed, float lo = -1.0f, float hi = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> d(lo, hi);
  std::vector<float> v(n);
  for (float& x : v) x = d(rng);
  return v;
}

inline std::vector<float> normal(std::size_t n, std::uint64_t seed, float sd = 1.0f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d(0.0f, sd);
  std::vector<float> v(n);
  for (float& x : v) x = d(rng);
  return v;
}

inline nn::Tensor3 random_tensor3(std::size_t b, std::size_t c, std::size_t t, std::uint64_t seed) {
  nn::Tensor3 x(b, c, t);
  x.data = uniform(x.data.size(), seed);
  return x;
}

inline nn::Tensor random_tensor(std::vector<std::int64_t> shape, std::uint64_t seed, float scale = 1.0f) {
  nn::Tensor t(std::move(shape));
  t.data = uniform(t.numel(), seed, -scale, scale);
  return t;
}

// Every manifest entry filled from U(-scale / sqrt(fan_in), scale / sqrt(fan_in)).
inline nn::ModelWeights random_from_manifest(const nn::Manifest& m, std::uint64_t seed, float scale = 1.0f) {
  nn::ModelWeights w;
  std::uint64_t s = seed;
  for (const auto& [name, shape] : m) {
    std::size_t fan_in = 1;
    for (std::size_t i = 1; i < shape.size(); ++i) fan_in *= static_cast<std::size_t>(shape[i]);
    const float a = scale / std::sqrt(static_cast<float>(fan_in));
    w.add(name, random_tensor(shape, ++s * 0x9E3779B97F4A7C15ull, a));
  }
  return w;
}

inline double rel_l2(std::span<const float> a, std::span<const float> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    num += d * d;
    den += static_cast<double>(b[i]) * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double max_abs_diff(std::span<const float> a, std::span<const float> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  return m;
}

// Scratch directory unique to the running process.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() /
           ("qvc-test-" + tag + "-" + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(p);
  return p;
}

// Hand-built RIFF/WAVE bytes with arbitrary fmt fields.
inline std::vector<std::uint8_t> wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                           std::uint16_t bits, const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> out;
  auto put = [&](std::uint32_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  tag("RIFF");
  put(static_cast<std::uint32_t>(36 + data.size() + (data.size() & 1u)), 4);
  tag("WAVE");
  tag("fmt ");
  put(16, 4);
  put(format, 2);
  put(channels, 2);
  put(rate, 4);
  put(rate * channels * bits / 8, 4);
  put(channels * bits / 8, 2);
  put(bits, 2);
  tag("data");
  put(static_cast<std::uint32_t>(data.size()), 4);
  out.insert(out.end(), data.begin(), data.end());
  if (data.size() & 1u) out.push_back(0);
  return out;
}

}  // namespace qvc::test
