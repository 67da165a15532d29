#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qvc/model/model.hpp"
#include "qvc/runtime/pipeline.hpp"

namespace qvc::runtime {

// Reference throughput figures for the original implementation (kHz of audio
// generated per second). Hardware-specific; printed for comparison only.
inline constexpr double kReferenceCpuKhz = 280.00;
inline constexpr double kReferenceGpuKhz = 5320.78;

// Version of the JSON emitted by to_json(BenchReport).
inline constexpr int kBenchSchemaVersion = 1;

enum class BenchMode { Full, DecoderOnly };

const char* bench_mode_name(BenchMode m) noexcept;
BenchMode parse_bench_mode(const std::string& s);

struct BenchOptions {
  double seconds = 10.0;  // utterance length per stream; the reference utterance has the same length
  std::size_t threads = 1;
  BenchMode mode = BenchMode::Full;
  std::size_t repetitions = 5;
  std::uint64_t seed = 1;
  double noise_scale = kDefaultNoiseScale;
};

/// One untimed warm-up pass, then `repetitions` timed passes; every figure is
/// the median over timed passes. A pass runs one utterance on each of
/// `threads` independent streams (seed + stream index) and its wall time
/// spans thread start to the last join.
struct BenchReport {
  BenchMode mode = BenchMode::Full;
  std::size_t threads = 1;
  std::size_t repetitions = 0;
  std::size_t frames = 0;   // content/latent frames per stream
  std::size_t samples = 0;  // output samples per pass, all streams
  double wall_seconds = 0.0;
  double khz_generated = 0.0;  // samples / wall_seconds / 1000
  double real_time_factor = 0.0;  // khz_generated / 16
  StageTimings stages;  // stream 0, medians per stage
  std::vector<double> pass_seconds;
  std::string simd_backend;
};

BenchReport bench(const model::Model& m, const BenchOptions& opt);

nlohmann::json to_json(const BenchReport& r);
std::string to_text(const BenchReport& r);

}  // namespace qvc::runtime
