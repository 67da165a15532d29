#include "qvc/runtime/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

#include "qvc/errors.hpp"
#include "qvc/log.hpp"
#include "qvc/simd/kernels.hpp"

namespace qvc::runtime {
namespace {

using Clock = std::chrono::steady_clock;

struct Stream {
  model::ContentFeatures features;
  Waveform reference;
  nn::Tensor3 z;
  model::SpeakerEmbedding g;
  std::uint64_t seed = 0;
};

Stream make_stream(const model::Model& m, std::size_t frames, std::uint64_t seed) {
  const auto& cfg = m.config();
  Stream s;
  s.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);

  s.features.frames = Matrix(frames, cfg.content.in_channels);
  for (float& v : s.features.frames.data) v = normal(rng);

  s.reference.samples.resize(frames * model::kFrameHop);
  std::uniform_real_distribution<float> uni(-0.3f, 0.3f);
  for (float& v : s.reference.samples) v = uni(rng);

  s.z = nn::Tensor3(1, cfg.latent_channels, frames);
  for (float& v : s.z.data) v = normal(rng);
  s.g.g.resize(cfg.speaker_channels);
  double norm = 0.0;
  for (float& v : s.g.g) {
    v = normal(rng);
    norm += static_cast<double>(v) * v;
  }
  for (float& v : s.g.g) v = static_cast<float>(v / std::sqrt(norm));
  return s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::size_t run_stream(const model::Model& m, const Stream& s, BenchMode mode, double noise_scale, StageTimings& t) {
  if (mode == BenchMode::DecoderOnly) {
    const auto t0 = Clock::now();
    const Waveform out = m.decoder().forward(s.z, s.g.span());
    t = StageTimings{};
    t.decoder = std::chrono::duration<double>(Clock::now() - t0).count();
    return out.size();
  }
  ConversionRequest req;
  req.source = s.features;
  req.target_ref = s.reference;
  req.noise_scale = noise_scale;
  req.seed = s.seed;
  return convert(req, m, &t).size();
}

}  // namespace

const char* bench_mode_name(BenchMode m) noexcept { return m == BenchMode::Full ? "full" : "decoder-only"; }

BenchMode parse_bench_mode(const std::string& s) {
  if (s == "full") return BenchMode::Full;
  if (s == "decoder-only") return BenchMode::DecoderOnly;
  throw UsageError("unknown bench mode '" + s + "' (expected full or decoder-only)");
}

BenchReport bench(const model::Model& m, const BenchOptions& opt) {
  if (opt.threads < 1) throw InvalidArgument("bench: threads must be >= 1");
  if (opt.repetitions < 1) throw InvalidArgument("bench: repetitions must be >= 1");
  if (!(opt.seconds > 0.0) || !std::isfinite(opt.seconds)) throw InvalidArgument("bench: seconds must be positive");
  const auto frames = static_cast<std::size_t>(
      std::max(1.0, std::round(opt.seconds * kSampleRate / static_cast<double>(model::kFrameHop))));

  std::vector<Stream> streams;
  streams.reserve(opt.threads);
  for (std::size_t i = 0; i < opt.threads; ++i) streams.push_back(make_stream(m, frames, opt.seed + i));

  std::vector<StageTimings> timings(opt.threads);
  std::vector<std::size_t> produced(opt.threads);
  auto pass = [&]() {
    const auto t0 = Clock::now();
    if (opt.threads == 1) {
      produced[0] = run_stream(m, streams[0], opt.mode, opt.noise_scale, timings[0]);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(opt.threads);
      for (std::size_t i = 0; i < opt.threads; ++i) {
        pool.emplace_back([&, i] { produced[i] = run_stream(m, streams[i], opt.mode, opt.noise_scale, timings[i]); });
      }
      for (auto& th : pool) th.join();
    }
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };

  spdlog::debug("bench: warm-up ({} frames x {} streams, {})", frames, opt.threads, bench_mode_name(opt.mode));
  pass();

  BenchReport r;
  r.mode = opt.mode;
  r.threads = opt.threads;
  r.repetitions = opt.repetitions;
  r.frames = frames;
  r.simd_backend = simd::backend_name(simd::active_backend());
  std::vector<double> speaker, content, flow, decoder;
  for (std::size_t rep = 0; rep < opt.repetitions; ++rep) {
    r.pass_seconds.push_back(pass());
    speaker.push_back(timings[0].speaker);
    content.push_back(timings[0].content);
    flow.push_back(timings[0].flow);
    decoder.push_back(timings[0].decoder);
    spdlog::debug("bench: pass {} took {:.4f} s", rep + 1, r.pass_seconds.back());
  }
  r.samples = 0;
  for (std::size_t n : produced) r.samples += n;
  r.wall_seconds = median(r.pass_seconds);
  r.khz_generated = static_cast<double>(r.samples) / r.wall_seconds / 1000.0;
  r.real_time_factor = r.khz_generated / 16.0;
  r.stages = {median(speaker), median(content), median(flow), median(decoder)};
  return r;
}

nlohmann::json to_json(const BenchReport& r) {
  return {
      {"schema_version", kBenchSchemaVersion},
      {"mode", bench_mode_name(r.mode)},
      {"threads", r.threads},
      {"repetitions", r.repetitions},
      {"warmup_passes", 1},
      {"frames_per_stream", r.frames},
      {"samples", r.samples},
      {"wall_seconds", r.wall_seconds},
      {"khz_generated", r.khz_generated},
      {"real_time_factor", r.real_time_factor},
      {"pass_seconds", r.pass_seconds},
      {"stage_seconds",
       {{"speaker_encoder", r.stages.speaker},
        {"content_encoder", r.stages.content},
        {"flow", r.stages.flow},
        {"decoder", r.stages.decoder}}},
      {"simd_backend", r.simd_backend},
      {"reference_khz", {{"cpu", kReferenceCpuKhz}, {"gpu", kReferenceGpuKhz}}},
  };
}

std::string to_text(const BenchReport& r) {
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "mode            %s\n"
                "threads         %zu\n"
                "simd            %s\n"
                "samples/pass    %zu (%zu frames per stream)\n"
                "wall (median)   %.4f s over %zu passes\n"
                "throughput      %.2f kHz (real-time factor %.2f)\n"
                "stages (s)      speaker %.4f  content %.4f  flow %.4f  decoder %.4f\n"
                "reference       %.2f kHz CPU, %.2f kHz GPU (original implementation, different hardware)\n",
                bench_mode_name(r.mode), r.threads, r.simd_backend.c_str(), r.samples, r.frames, r.wall_seconds,
                r.repetitions, r.khz_generated, r.real_time_factor, r.stages.speaker, r.stages.content, r.stages.flow,
                r.stages.decoder, kReferenceCpuKhz, kReferenceGpuKhz);
  return buf;
}

}  // namespace qvc::runtime
