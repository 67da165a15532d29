#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <vector>

#include "qvc/errors.hpp"
#include "qvc/model/model.hpp"
#include "qvc/runtime/bench.hpp"
#include "qvc/runtime/features.hpp"
#include "qvc/runtime/inspect.hpp"
#include "qvc/runtime/pipeline.hpp"
#include "qvc/runtime/wav.hpp"
#include "support.hpp"

using namespace qvc;
using namespace qvc::runtime;

namespace {

const model::Model& tiny() {
  static const model::Model m = model::Model::load(model::random_weights(model::ModelConfig::tiny(), 21));
  return m;
}

model::ContentFeatures features(std::size_t frames, std::uint64_t seed) {
  model::ContentFeatures f{Matrix(frames, kContentDim)};
  f.frames.data = test::normal(f.frames.data.size(), seed);
  return f;
}

Waveform noise_wave(std::size_t n, std::uint64_t seed, float amp = 0.3f) {
  return Waveform{test::uniform(n, seed, -amp, amp)};
}

template <class E>
typename E::Kind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return {};
}

}  // namespace

TEST_SUITE("wav") {
  TEST_CASE("roundtrip stays within one quantization step") {
    std::vector<float> x = test::uniform(4000, 1);
    for (float v : {-1.0f, 1.0f, 0.0f, 0.99998f, -0.99998f, 0.5f / 32768.0f}) x.push_back(v);
    const auto back = wav_decode(wav_encode(Waveform{x}));
    REQUIRE(back.size() == x.size());
    CHECK(back.sample_rate == 16000);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back.samples[i] - x[i]) <= 1.0 / 32767.0);
  }

  TEST_CASE("encoding clamps and is stable") {
    const auto bytes = wav_encode(Waveform{{2.0f, -3.0f, NAN}});
    const auto w = wav_decode(bytes);
    CHECK(w.samples[0] == 32767.0f / 32768.0f);
    CHECK(w.samples[1] == -1.0f);
    CHECK(w.samples[2] == 0.0f);
    CHECK(wav_encode(w) == bytes);
    CHECK(bytes.size() == 44 + 6);
    CHECK_THROWS_AS(wav_encode(Waveform{{0.0f}, 22050}), InvalidArgument);
  }

  TEST_CASE("unsupported formats") {
    const std::vector<std::uint8_t> two{0, 0, 0, 0};
    CHECK(kind_of<WavError>([&] { wav_decode(test::wav_bytes(1, 1, 16001, 16, two)); }) == WavError::Kind::UnsupportedRate);
    CHECK(kind_of<WavError>([&] { wav_decode(test::wav_bytes(1, 1, 44100, 16, two)); }) == WavError::Kind::UnsupportedRate);
    CHECK(kind_of<WavError>([&] { wav_decode(test::wav_bytes(1, 2, 16000, 16, two)); }) == WavError::Kind::UnsupportedChannels);
    CHECK(kind_of<WavError>([&] { wav_decode(test::wav_bytes(3, 1, 16000, 32, two)); }) == WavError::Kind::UnsupportedCodec);
    CHECK(kind_of<WavError>([&] { wav_decode(test::wav_bytes(1, 1, 16000, 24, two)); }) == WavError::Kind::UnsupportedBitDepth);
    CHECK(kind_of<WavError>([&] { wav_decode(test::wav_bytes(1, 1, 16000, 8, two)); }) == WavError::Kind::UnsupportedBitDepth);
  }

  TEST_CASE("empty and malformed input") {
    CHECK(wav_decode(test::wav_bytes(1, 1, 16000, 16, {})).size() == 0);
    auto ok = test::wav_bytes(1, 1, 16000, 16, {1, 0, 2, 0});
    CHECK(wav_decode(ok).samples == std::vector<float>{1.0f / 32768, 2.0f / 32768});

    using K = WavError::Kind;
    CHECK(kind_of<WavError>([] { wav_decode(std::vector<std::uint8_t>{}); }) == K::Malformed);
    CHECK(kind_of<WavError>([&] { wav_decode(std::span(ok).first(20)); }) == K::Malformed);
    CHECK(kind_of<WavError>([&] { wav_decode(std::span(ok).first(ok.size() - 1)); }) == K::Malformed);
    auto bad = ok;
    std::memcpy(bad.data(), "RIFX", 4);
    CHECK(kind_of<WavError>([&] { wav_decode(bad); }) == K::Malformed);
    CHECK(kind_of<WavError>([&] { wav_decode(test::wav_bytes(1, 1, 16000, 16, {1, 2, 3})); }) == K::Malformed);
    // No data chunk.
    CHECK(kind_of<WavError>([&] { wav_decode(std::span(ok).first(36)); }) == K::Malformed);
  }

  TEST_CASE("extra chunks are skipped") {
    auto bytes = test::wav_bytes(1, 1, 16000, 16, {0, 64});
    const std::vector<std::uint8_t> list{'L', 'I', 'S', 'T', 3, 0, 0, 0, 'a', 'b', 'c', 0};
    bytes.insert(bytes.begin() + 36, list.begin(), list.end());
    CHECK(wav_decode(bytes).samples == std::vector<float>{0.5f});
  }

  TEST_CASE("files") {
    const auto dir = test::scratch_dir("wav");
    const Waveform w = noise_wave(321, 2);
    wav_write(dir / "a.wav", w);
    CHECK(wav_read(dir / "a.wav").size() == 321);
    CHECK_THROWS_AS(wav_read(dir / "missing.wav"), IoError);
    std::filesystem::remove_all(dir);
  }
}

TEST_SUITE("features file") {
  TEST_CASE("roundtrip") {
    const auto f = features(13, 3);
    const auto bytes = features_encode(f.frames);
    CHECK(bytes.size() == 16 + 13 * 256 * 4 + 4);
    CHECK(std::memcmp(bytes.data(), "QVCF", 4) == 0);
    CHECK(features_decode(bytes) == f.frames);
    Matrix odd(3, 7);
    odd.data = test::uniform(21, 4);
    CHECK(features_decode(features_encode(odd), 0) == odd);
    CHECK(features_decode(features_encode(Matrix(0, 256))).rows == 0);
  }

  TEST_CASE("typed errors") {
    using K = LoadError::Kind;
    const auto good = features_encode(features(4, 5).frames);
    auto patched = [&](std::size_t at, std::uint8_t v) {
      auto b = good;
      b[at] ^= v;
      return b;
    };
    CHECK(kind_of<LoadError>([&] { features_decode(patched(0, 1)); }) == K::BadMagic);
    CHECK(kind_of<LoadError>([&] { features_decode(patched(4, 2)); }) == K::BadVersion);
    CHECK(kind_of<LoadError>([&] { features_decode(patched(40, 1)); }) == K::Checksum);
    CHECK(kind_of<LoadError>([&] { features_decode(std::span(good).first(good.size() - 3)); }) == K::Truncated);
    CHECK(kind_of<LoadError>([&] { features_decode(std::span(good).first(10)); }) == K::Truncated);
    auto longer = good;
    longer.push_back(0);
    CHECK(kind_of<LoadError>([&] { features_decode(longer); }) == K::SizeMismatch);
    CHECK(kind_of<LoadError>([&] { features_decode(features_encode(Matrix(2, 80))); }) == K::BadHeader);
  }

  TEST_CASE("files") {
    const auto dir = test::scratch_dir("qvcf");
    const auto f = features(6, 7);
    write_content_features(dir / "a.qvcf", f);
    CHECK(read_content_features(dir / "a.qvcf").frames == f.frames);
    CHECK_THROWS_AS(write_content_features(dir / "b.qvcf", model::ContentFeatures{Matrix(2, 128)}), ShapeError);
    write_frame_tensor(dir / "c.qvcf", Matrix(2, 80, 1.5f));
    CHECK(read_frame_tensor(dir / "c.qvcf") == Matrix(2, 80, 1.5f));
    CHECK_THROWS_AS(read_content_features(dir / "c.qvcf"), LoadError);
    CHECK_THROWS_AS(read_content_features(dir / "none.qvcf"), IoError);
    std::filesystem::remove_all(dir);
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("output length and determinism") {
    const auto ref = noise_wave(16000, 8);
    for (std::size_t t : {1u, 7u, 51u}) {
      ConversionRequest req{features(t, t), ref, kDefaultNoiseScale, 5};
      StageTimings timings;
      const auto out = convert(req, tiny(), &timings);
      CHECK(out.size() == 320 * t);
      CHECK(timings.total() > 0.0);
      CHECK(convert(req, tiny()).samples == out.samples);
    }
    ConversionRequest zero{features(9, 1), ref, 0.0, 1};
    ConversionRequest other_seed{features(9, 1), ref, 0.0, 2};
    CHECK(convert(zero, tiny()).samples == convert(other_seed, tiny()).samples);
    ConversionRequest noisy{features(9, 1), ref, 1.0, 2};
    CHECK(convert(noisy, tiny()).samples != convert(zero, tiny()).samples);
  }

  TEST_CASE("target speaker changes the output") {
    const auto f = features(20, 9);
    const auto a = convert({f, noise_wave(16000, 10), 0.0, 0}, tiny());
    const auto b = convert({f, noise_wave(16000, 11, 0.8f), 0.0, 0}, tiny());
    CHECK(test::rel_l2(a.samples, b.samples) > 0.0);
    // A precomputed embedding matches the waveform path.
    const auto g = embed_speaker(noise_wave(16000, 10), tiny());
    CHECK(convert({f, g, 0.0, 0}, tiny()).samples == a.samples);
  }

  TEST_CASE("request validation") {
    const auto ref = noise_wave(8000, 1);
    CHECK_THROWS_WITH_AS(convert({Waveform{test::uniform(3200, 1)}, ref, 0.3, 0}, tiny()),
                         doctest::Contains("qvc-export"), UsageError);
    CHECK_THROWS_AS(convert({features(3, 1), ref, -0.1, 0}, tiny()), InvalidArgument);
    CHECK_THROWS_AS(convert({features(3, 1), ref, 2.5, 0}, tiny()), InvalidArgument);
    CHECK_THROWS_AS(convert({features(3, 1), ref, NAN, 0}, tiny()), InvalidArgument);
    CHECK_NOTHROW(convert({features(3, 1), ref, 2.0, 0}, tiny()));
    CHECK_THROWS_AS(convert({features(0, 1), ref, 0.3, 0}, tiny()), InvalidArgument);
    CHECK_THROWS_AS(convert({model::ContentFeatures{Matrix(3, 255)}, ref, 0.3, 0}, tiny()), ShapeError);
    CHECK_THROWS_AS(convert({features(3, 1), model::SpeakerEmbedding{{1.0f, 0.0f}}, 0.3, 0}, tiny()), ShapeError);
    CHECK_THROWS_AS(convert({features(3, 1), Waveform{{0.0f, 0.1f}, 8000}, 0.3, 0}, tiny()), InvalidArgument);
  }
}

TEST_SUITE("bench") {
  TEST_CASE("report arithmetic") {
    for (auto mode : {BenchMode::Full, BenchMode::DecoderOnly}) {
      for (std::size_t threads : {1u, 2u}) {
        BenchOptions opt;
        opt.seconds = 0.1;
        opt.repetitions = 3;
        opt.threads = threads;
        opt.mode = mode;
        const auto r = bench(tiny(), opt);
        CHECK(r.frames == 5);
        CHECK(r.samples == threads * 5 * 320);
        CHECK(r.pass_seconds.size() == 3);
        CHECK(r.khz_generated == static_cast<double>(r.samples) / r.wall_seconds / 1000.0);
        CHECK(r.real_time_factor == r.khz_generated / 16.0);
        CHECK(r.stages.decoder > 0.0);
        if (mode == BenchMode::DecoderOnly) CHECK(r.stages.speaker == 0.0);
        const auto j = to_json(r);
        CHECK(j["schema_version"] == 1);
        CHECK(j["mode"] == bench_mode_name(mode));
        CHECK(j["reference_khz"]["cpu"] == 280.00);
        CHECK(j["reference_khz"]["gpu"] == 5320.78);
        for (const char* key : {"threads", "repetitions", "frames_per_stream", "samples", "wall_seconds",
                                "khz_generated", "real_time_factor", "pass_seconds", "stage_seconds", "simd_backend"})
          CHECK(j.contains(key));
        CHECK(to_text(r).find("280.00") != std::string::npos);
      }
    }
  }

  TEST_CASE("reference figures") {
    CHECK(kReferenceCpuKhz == 280.00);
    CHECK(kReferenceGpuKhz == 5320.78);
  }

  TEST_CASE("options") {
    CHECK(parse_bench_mode("full") == BenchMode::Full);
    CHECK(parse_bench_mode("decoder-only") == BenchMode::DecoderOnly);
    CHECK_THROWS_AS(parse_bench_mode("fast"), UsageError);
    BenchOptions bad;
    bad.threads = 0;
    CHECK_THROWS_AS(bench(tiny(), bad), InvalidArgument);
    bad = {};
    bad.repetitions = 0;
    CHECK_THROWS_AS(bench(tiny(), bad), InvalidArgument);
    bad = {};
    bad.seconds = -1;
    CHECK_THROWS_AS(bench(tiny(), bad), InvalidArgument);
  }
}

TEST_SUITE("inspect") {
  TEST_CASE("valid container") {
    const auto w = model::random_weights(model::ModelConfig::tiny(), 4);
    const auto r = inspect(nn::load_weights(nn::save_weights(w)));
    CHECK(r.ok());
    CHECK(r.error.empty());
    CHECK(r.samples_per_frame == 320);
    CHECK(r.tensor_count == w.tensors().size());
    std::size_t total = 0;
    for (const auto& [name, t] : w.tensors()) {
      std::size_t n = 1;
      for (auto d : t.shape) n *= static_cast<std::size_t>(d);
      total += n;
    }
    CHECK(r.parameter_count == total);
    const auto j = to_json(r);
    CHECK(j["hop_identity"]["ok"] == true);
    CHECK(j["hop_identity"]["value"] == 320);
    CHECK(!j.contains("error"));
  }

  TEST_CASE("broken containers are reported, not thrown") {
    auto w = model::random_weights(model::ModelConfig::tiny(), 4);
    auto hop = w;
    hop.config["decoder"]["upsample_scales"] = {5, 5};
    const auto r = inspect(hop);
    CHECK(!r.ok());
    CHECK(!r.hop_identity_ok);
    CHECK(r.samples_per_frame == 400);
    CHECK(to_json(r)["hop_identity"]["ok"] == false);

    auto extra = w;
    extra.add("stray", nn::Tensor({2}));
    const auto e = inspect(extra);
    CHECK(e.hop_identity_ok);
    CHECK(e.config_ok);
    CHECK(!e.manifest_ok);
    CHECK(!e.error.empty());

    auto garbled = w;
    garbled.config = {{"latent_channels", "many"}};
    CHECK(!inspect(garbled).ok());
  }
}
