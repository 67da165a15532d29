#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "qvc/dsp/filter.hpp"
#include "qvc/dsp/mel.hpp"
#include "qvc/dsp/stft.hpp"
#include "qvc/errors.hpp"
#include "qvc/model/model.hpp"
#include "support.hpp"

using namespace qvc;
using nn::Tensor;
using nn::Tensor3;

namespace {

double sigm(double v) { return 1.0 / (1.0 + std::exp(-v)); }

model::FlowConfig small_flow(std::size_t n_flows, bool mean_only) { return {n_flows, 6, 3, 1, 2, mean_only}; }

struct FlowFixture {
  nn::ModelWeights w;
  model::FlowStack stack;
};

FlowFixture make_flow(const model::FlowConfig& cfg, std::size_t channels, std::size_t cond, std::uint64_t seed,
                      float scale = 1.0f) {
  nn::Manifest m;
  model::FlowStack::manifest(m, "flow", cfg, channels, cond);
  FlowFixture f{test::random_from_manifest(m, seed, scale), {}};
  f.stack = model::FlowStack(f.w, "flow", cfg, channels, cond);
  return f;
}

model::GaussianEncoder make_encoder(nn::ModelWeights& w, const model::EncoderConfig& cfg, std::size_t cond,
                                    std::uint64_t seed) {
  nn::Manifest m;
  model::GaussianEncoder::manifest(m, "e", cfg, cond);
  w = test::random_from_manifest(m, seed);
  return model::GaussianEncoder(w, "e", cfg, cond);
}

const model::Model& tiny_model() {
  static const model::Model m = model::Model::load(model::random_weights(model::ModelConfig::tiny(), 3));
  return m;
}

}  // namespace

TEST_SUITE("encoders") {
  TEST_CASE("content encoder shapes and zero projection") {
    const model::EncoderConfig cfg{256, 4, 6, 5, 1, 2};
    nn::ModelWeights w;
    make_encoder(w, cfg, 0, 1);
    for (const char* n : {"e.proj.weight", "e.proj.bias"}) {
      auto t = w.get(n);
      std::fill(t.data.begin(), t.data.end(), 0.0f);
      nn::ModelWeights copy;
      for (const auto& [name, tensor] : w.tensors()) copy.add(name, name == n ? t : tensor);
      w = copy;
    }
    const model::GaussianEncoder enc(w, "e", cfg, 0);
    model::ContentFeatures c{Matrix(9, 256)};
    c.frames.data = test::uniform(9 * 256, 2);
    const auto out = model::content_encoder(c, enc);
    CHECK(out.m.time == 9);
    CHECK(out.m.channels == 4);
    for (float v : out.m.data) CHECK(v == 0.0f);
    for (float v : out.logs.data) CHECK(v == 0.0f);
    CHECK_THROWS_AS(model::content_encoder(model::ContentFeatures{Matrix(9, 255)}, enc), ShapeError);
  }

  TEST_CASE("reduced config matches a hand trace") {
    // in 2, hidden 1, out 1, kernel 1, one WN layer.
    const model::EncoderConfig cfg{2, 1, 1, 1, 1, 1};
    nn::ModelWeights w;
    w.add("e.pre.weight", Tensor({1, 2, 1}, {0.5f, -0.25f}));
    w.add("e.pre.bias", Tensor({1}, {0.1f}));
    w.add("e.enc.in_layers.0.weight", Tensor({2, 1, 1}, {1.5f, 0.8f}));
    w.add("e.enc.in_layers.0.bias", Tensor({2}, {0.0f, -0.3f}));
    w.add("e.enc.res_skip_layers.0.weight", Tensor({1, 1, 1}, {0.9f}));
    w.add("e.enc.res_skip_layers.0.bias", Tensor({1}, {0.05f}));
    w.add("e.proj.weight", Tensor({2, 1, 1}, {1.1f, -0.7f}));
    w.add("e.proj.bias", Tensor({2}, {0.2f, 0.4f}));
    const model::GaussianEncoder enc(w, "e", cfg, 0);
    model::ContentFeatures c{Matrix(3, 2)};
    c.frames.data = {1.0f, 2.0f, -1.0f, 0.5f, 0.0f, 3.0f};
    const auto out = model::content_encoder(c, enc);
    for (std::size_t t = 0; t < 3; ++t) {
      const double h = 0.5 * c.frames(t, 0) - 0.25 * c.frames(t, 1) + 0.1;
      const double skip = 0.9 * std::tanh(1.5 * h) * sigm(0.8 * h - 0.3) + 0.05;
      CHECK(out.m.at(0, 0, t) == doctest::Approx(1.1 * skip + 0.2).epsilon(1e-6));
      CHECK(out.logs.at(0, 0, t) == doctest::Approx(-0.7 * skip + 0.4).epsilon(1e-6));
    }
  }

  TEST_CASE("posterior reparameterization") {
    const model::EncoderConfig cfg{641, 2, 4, 3, 1, 2};
    nn::ModelWeights w;
    const auto enc = make_encoder(w, cfg, 3, 5);
    Matrix x(2, 641);
    x.data = test::uniform(x.data.size(), 6, 0.0f, 1.0f);
    const model::SpeakerEmbedding g{{0.6f, 0.0f, 0.8f}};

    const auto mean = model::posterior_encoder(x, g, enc);
    CHECK(*mean.z == mean.m);
    CHECK(model::posterior_encoder(x, g, enc).z == mean.z);
    const std::vector<float> zero(4, 0.0f), ones(4, 1.0f);
    CHECK(*model::posterior_encoder(x, g, enc, zero).z == mean.m);
    const auto one = model::posterior_encoder(x, g, enc, ones);
    for (std::size_t i = 0; i < 4; ++i) CHECK(one.z->data[i] == mean.m.data[i] + std::exp(mean.logs.data[i]));

    // Sample statistics over 1e5 draws.
    const std::size_t draws = 100000;
    std::vector<double> sum(4, 0.0), sq(4, 0.0);
    for (std::size_t d = 0; d < draws; ++d) {
      const auto eps = model::gaussian_noise(4, 1000 + d);
      const auto z = *model::posterior_encoder(x, g, enc, eps).z;
      for (std::size_t i = 0; i < 4; ++i) {
        sum[i] += z.data[i];
        sq[i] += double(z.data[i]) * z.data[i];
      }
    }
    for (std::size_t i = 0; i < 4; ++i) {
      const double mu = sum[i] / draws;
      const double sd = std::sqrt(sq[i] / draws - mu * mu);
      const double want_sd = std::exp(mean.logs.data[i]);
      CHECK(std::abs(mu - mean.m.data[i]) < 0.01 * want_sd);
      CHECK(sd == doctest::Approx(want_sd).epsilon(0.01));
    }
    CHECK_THROWS_AS(model::posterior_encoder(Matrix(2, 640), g, enc), ShapeError);
  }

  TEST_CASE("speaker encoder") {
    const model::SpeakerEncoderConfig cfg{80, 5, 4, true};
    nn::Manifest m;
    model::SpeakerEncoder::manifest(m, "s", cfg);
    const auto w = test::random_from_manifest(m, 8);
    const model::SpeakerEncoder enc(w, "s", cfg);
    dsp::MelSpectrogram mel{Matrix(12, 80), 1e-5};
    mel.frames.data = test::uniform(mel.frames.data.size(), 9, -5.0f, 1.0f);
    const auto g = model::speaker_encoder(mel, enc);
    double norm = 0.0;
    for (float v : g.g) norm += double(v) * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));

    dsp::MelSpectrogram rev = mel;
    for (std::size_t t = 0; t < 12; ++t) std::copy(mel.frames.row(11 - t).begin(), mel.frames.row(11 - t).end(), rev.frames.row(t).begin());
    CHECK(model::speaker_encoder(rev, enc).g != g.g);

    nn::ModelWeights zero;
    for (const auto& [name, shape] : m) zero.add(name, Tensor(shape));
    zero = [&] {
      nn::ModelWeights z;
      for (const auto& [name, t] : zero.tensors()) z.add(name, name == "s.linear.bias" ? Tensor({4}, {3.0f, 0.0f, -4.0f, 0.0f}) : t);
      return z;
    }();
    const auto gb = model::speaker_encoder(mel, model::SpeakerEncoder(zero, "s", cfg));
    CHECK(gb.g == std::vector<float>{0.6f, 0.0f, -0.8f, 0.0f});

    CHECK_THROWS_AS(model::speaker_encoder(dsp::MelSpectrogram{Matrix(0, 80), 1e-5}, enc), ShapeError);
    CHECK_THROWS_AS(model::speaker_encoder(dsp::MelSpectrogram{Matrix(3, 40), 1e-5}, enc), ShapeError);
  }

  TEST_CASE("noise is seeded") {
    CHECK(model::gaussian_noise(16, 5) == model::gaussian_noise(16, 5));
    CHECK(model::gaussian_noise(16, 5) != model::gaussian_noise(16, 6));
  }
}

TEST_SUITE("flow") {
  TEST_CASE("scalar coupling example") {
    // One channel pair, T = 3; WN output forced to m = 1, logs = ln 2 via biases.
    model::FlowConfig cfg{1, 1, 1, 1, 1, false};
    nn::Manifest m;
    model::FlowStack::manifest(m, "flow", cfg, 2, 0);
    nn::ModelWeights w;
    for (const auto& [name, shape] : m) w.add(name, Tensor(shape));
    w = [&] {
      nn::ModelWeights out;
      for (const auto& [name, t] : w.tensors())
        out.add(name, name == "flow.flows.0.post.bias" ? Tensor({2}, {1.0f, static_cast<float>(std::log(2.0))}) : t);
      return out;
    }();
    const model::FlowStack stack(w, "flow", cfg, 2, 0);
    Tensor3 z(1, 2, 3);
    z.data = {0.5f, -1.0f, 2.0f, 3.0f, 3.0f, 3.0f};
    const auto f = model::coupling_forward(z, {}, stack.layer(0));
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK(f.z.at(0, 0, t) == z.at(0, 0, t));
      CHECK(f.z.at(0, 1, t) == doctest::Approx(7.0));
    }
    CHECK(f.logdet == doctest::Approx(3.0 * std::log(2.0)));
    const auto back = model::coupling_inverse(f.z, {}, stack.layer(0));
    for (std::size_t t = 0; t < 3; ++t) CHECK(back.z.at(0, 1, t) == doctest::Approx(3.0));
    CHECK(back.logdet == doctest::Approx(-3.0 * std::log(2.0)));
  }

  TEST_CASE("zero network is the identity") {
    const auto cfg = small_flow(1, false);
    nn::Manifest m;
    model::FlowStack::manifest(m, "flow", cfg, 4, 0);
    nn::ModelWeights w;
    for (const auto& [name, shape] : m) w.add(name, Tensor(shape));
    const model::FlowStack stack(w, "flow", cfg, 4, 0);
    const auto z = test::random_tensor3(1, 4, 5, 1);
    const auto f = model::coupling_forward(z, {}, stack.layer(0));
    CHECK(f.z == z);
    CHECK(f.logdet == 0.0);
    CHECK(model::coupling_inverse(z, {}, stack.layer(0)).z == z);
  }

  TEST_CASE("empty stack") {
    const auto fx = make_flow(small_flow(0, true), 4, 0, 1);
    const auto z = test::random_tensor3(1, 4, 5, 2);
    const auto f = fx.stack.forward(z, {});
    CHECK(f.z == z);
    CHECK(f.logdet == 0.0);
  }

  TEST_CASE("inverse of forward and logdet accounting") {
    for (bool mean_only : {true, false}) {
      const auto fx = make_flow(small_flow(4, mean_only), 6, 3, 10 + mean_only);
      const auto z = test::random_tensor3(1, 6, 11, 3);
      const auto g = test::uniform(3, 4);
      const auto f = fx.stack.forward(z, g);
      const auto b = fx.stack.inverse(f.z, g);
      CHECK(test::max_abs_diff(b.z.data, z.data) < 1e-5);
      CHECK(b.logdet == doctest::Approx(-f.logdet));
      if (mean_only) {
        CHECK(f.logdet == 0.0);
      } else {
        CHECK(f.logdet != 0.0);
      }

      // Per-layer accounting.
      double sum = 0.0;
      Tensor3 cur = z;
      for (std::size_t i = 0; i < fx.stack.size(); ++i) {
        const auto step = model::coupling_forward(cur, g, fx.stack.layer(i));
        sum += step.logdet;
        cur = model::channel_flip(step.z);
      }
      CHECK(cur == f.z);
      CHECK(sum == f.logdet);
    }
  }

  TEST_CASE("logdet against a finite-difference Jacobian") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto fx = make_flow(small_flow(seed % 2 ? 2 : 1, false), 4, 3, 40 + seed);
      const auto g = test::uniform(3, 50 + seed);
      const auto z = test::random_tensor3(1, 4, 2, 60 + seed);
      const std::vector<double> x(z.data.begin(), z.data.end());
      auto f = [&](const std::vector<double>& v) {
        Tensor3 in(1, 4, 2);
        for (std::size_t i = 0; i < v.size(); ++i) in.data[i] = static_cast<float>(v[i]);
        const auto out = fx.stack.forward(in, g).z;
        return std::vector<double>(out.data.begin(), out.data.end());
      };
      const double fd = test::fd_log_det(f, x, 1e-2);
      CHECK(fx.stack.forward(z, g).logdet == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
    }
  }

  TEST_CASE("conditioning is live and odd channels are rejected") {
    const auto fx = make_flow(small_flow(2, true), 4, 3, 7);
    const auto z = test::random_tensor3(1, 4, 6, 8);
    CHECK(fx.stack.forward(z, std::vector<float>{1, 0, 0}).z != fx.stack.forward(z, std::vector<float>{0, 1, 0}).z);
    CHECK_THROWS_AS(fx.stack.forward(test::random_tensor3(1, 5, 6, 9), std::vector<float>{1, 0, 0}), ShapeError);
    CHECK_THROWS_AS(make_flow(small_flow(1, true), 5, 0, 1), ShapeError);
  }

  TEST_CASE("log-scale clamp keeps the map invertible") {
    const auto fx = make_flow(small_flow(2, false), 4, 0, 11, 40.0f);
    const auto z = test::random_tensor3(1, 4, 5, 12);
    const auto f = fx.stack.forward(z, {});
    for (float v : f.z.data) REQUIRE(std::isfinite(v));
    CHECK(std::abs(f.logdet) <= 2 * 2 * 5 * 10.0 + 1e-6);
  }
}

TEST_SUITE("decoder") {
  TEST_CASE("upsample geometry") {
    const auto a = model::upsample_options(5, 10);
    CHECK(a.padding == 3);
    CHECK(a.output_padding == 1);
    const auto b = model::upsample_options(4, 8);
    CHECK(b.padding == 2);
    CHECK(b.output_padding == 0);
    for (std::size_t t : {1u, 2u, 7u, 51u}) {
      CHECK(nn::conv_transpose1d_out_time(t, 10, a) == 5 * t);
      CHECK(nn::conv_transpose1d_out_time(t, 8, b) == 4 * t);
    }
  }

  TEST_CASE("output length is 320 T") {
    const auto& m = tiny_model();
    const auto g = test::uniform(m.config().speaker_channels, 1);
    for (std::size_t t : {1u, 2u, 7u, 51u}) {
      const auto z = test::random_tensor3(1, m.config().latent_channels, t, t);
      const auto out = m.decoder().forward(z, g);
      CHECK(out.size() == 320 * t);
      for (float v : out.samples) REQUIRE(std::isfinite(v));
    }
    const auto z = test::random_tensor3(1, m.config().latent_channels, 5, 99);
    CHECK(m.decoder().forward(z, g).samples == m.decoder().forward(z, g).samples);
    CHECK(m.decoder().head(m.decoder().trunk(z, g)).channels == 72);
    CHECK(m.decoder().head(m.decoder().trunk(z, g)).time == 5 * 20 + 1);
  }

  TEST_CASE("mag and phase heads") {
    model::DecoderConfig cfg;
    CHECK(cfg.head_channels() == 72);
    Tensor3 zero(1, 72, 6);
    const auto s = model::mag_phase_heads(zero, cfg);
    REQUIRE(s.magnitude.size() == 4);
    for (std::size_t b = 0; b < 4; ++b) {
      for (float v : s.magnitude[b].data) CHECK(v == 1.0f);
      for (float v : s.phase[b].data) CHECK(v == 0.0f);
    }
    auto big = test::random_tensor3(1, 72, 6, 3);
    for (float& v : big.data) v *= 50.0f;
    const auto t = model::mag_phase_heads(big, cfg);
    for (const auto& mag : t.magnitude)
      for (float v : mag.data) {
        CHECK(v > 0.0f);
        CHECK(v <= std::exp(10.0f));
      }
    // Channel layout: band s uses [s*18, s*18 + 9) for magnitude.
    Tensor3 one(1, 72, 2);
    one.at(0, 2 * 18 + 3, 1) = 1.0f;
    one.at(0, 1 * 18 + 9 + 4, 0) = 0.5f;
    const auto l = model::mag_phase_heads(one, cfg);
    CHECK(l.magnitude[2](1, 3) == doctest::Approx(std::exp(1.0)));
    CHECK(l.phase[1](0, 4) == 0.5f);
    CHECK_THROWS_AS(model::mag_phase_heads(Tensor3(1, 70, 2), cfg), ShapeError);
  }

  TEST_CASE("sub-band iSTFT") {
    model::DecoderConfig cfg;
    model::SubbandSpectra zero;
    for (int b = 0; b < 4; ++b) {
      zero.magnitude.emplace_back(11, 9);
      zero.phase.emplace_back(11, 9);
    }
    for (const auto& band : model::subband_istft(zero, cfg)) {
      CHECK(band.size() == 40);
      for (float v : band) CHECK(v == 0.0f);
    }

    // A synthetic sub-band signal survives analysis + resynthesis.
    const auto x = test::uniform(200, 4);
    const auto spec = dsp::stft(x, dsp::kSubbandStft);
    model::SubbandSpectra s;
    for (int b = 0; b < 4; ++b) {
      Matrix mag(spec.frames, 9), ph(spec.frames, 9);
      for (std::size_t i = 0; i < spec.bins.size(); ++i) {
        mag.data[i] = static_cast<float>(std::abs(spec.bins[i]));
        ph.data[i] = static_cast<float>(std::arg(spec.bins[i]));
      }
      s.magnitude.push_back(mag);
      s.phase.push_back(ph);
    }
    const auto bands = model::subband_istft(s, cfg);
    REQUIRE(bands[0].size() == 200);
    CHECK(test::max_abs_diff(std::span(bands[0]).subspan(16, 168), std::span(x).subspan(16, 168)) < 1e-5);
  }

  TEST_CASE("multiband synthesis") {
    model::DecoderConfig cfg;
    Matrix filter(4, 63);
    filter(0, 31) = 1.0f;
    std::vector<std::vector<float>> bands(4, std::vector<float>(10, 0.0f));
    for (float v : model::multiband_synthesis(bands, filter, cfg)) CHECK(v == 0.0f);

    bands[0][3] = 0.5f;
    const auto out = model::multiband_synthesis(bands, filter, cfg);
    REQUIRE(out.size() == 40);
    for (std::size_t i = 0; i < 40; ++i) CHECK(out[i] == (i == 12 ? 2.0f : 0.0f));

    // Linear in each band.
    const auto bank = dsp::pqmf_synthesis_bank(4, 63);
    std::vector<std::vector<float>> a(4), b(4), mix(4);
    for (int k = 0; k < 4; ++k) {
      a[k] = test::uniform(30, 10 + k);
      b[k] = test::uniform(30, 20 + k);
      mix[k].resize(30);
      for (int i = 0; i < 30; ++i) mix[k][i] = 2.0f * a[k][i] - 0.5f * b[k][i];
    }
    const auto ya = model::multiband_synthesis(a, bank, cfg), yb = model::multiband_synthesis(b, bank, cfg);
    const auto ym = model::multiband_synthesis(mix, bank, cfg);
    for (std::size_t i = 0; i < ym.size(); ++i) CHECK(ym[i] == doctest::Approx(2.0 * ya[i] - 0.5 * yb[i]).epsilon(1e-5).scale(1.0));

    bands[2].resize(9);
    CHECK_THROWS_AS(model::multiband_synthesis(bands, filter, cfg), ShapeError);
  }
}

TEST_SUITE("model") {
  TEST_CASE("hop identity is enforced") {
    model::DecoderConfig ok;
    CHECK(ok.samples_per_frame() == 320);
    CHECK_NOTHROW(ok.validate());
    for (auto scales : {std::vector<std::size_t>{5, 5}, std::vector<std::size_t>{8, 8}, std::vector<std::size_t>{5, 4, 2}}) {
      model::DecoderConfig bad = ok;
      bad.upsample_scales = scales;
      bad.upsample_kernels.assign(scales.size(), 8);
      CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
    model::DecoderConfig hop = ok;
    hop.istft_hop = 2;
    CHECK_THROWS_WITH_AS(hop.validate(), doctest::Contains("hop identity"), ConfigError);
    model::DecoderConfig sb = ok;
    sb.subbands = 2;
    CHECK_THROWS_AS(sb.validate(), ConfigError);
    // [8, 10] with hop 4 and 1 sub-band also multiplies to 320.
    model::DecoderConfig alt = ok;
    alt.upsample_scales = {8, 10};
    alt.upsample_kernels = {16, 20};
    alt.subbands = 1;
    CHECK(alt.samples_per_frame() == 320);
  }

  TEST_CASE("loader rejects a container whose config breaks the identity") {
    auto w = model::random_weights(model::ModelConfig::tiny(), 1);
    w.config["decoder"]["upsample_scales"] = {5, 5};
    CHECK_THROWS_AS(model::Model::load(w), ConfigError);
  }

  TEST_CASE("config json roundtrip") {
    for (const auto& cfg : {model::ModelConfig{}, model::ModelConfig::tiny()}) {
      const auto j = model::to_json(cfg);
      CHECK(model::to_json(model::model_config_from_json(j)) == j);
    }
    CHECK(model::to_json(model::ModelConfig{})["decoder"]["upsample_scales"] == nlohmann::json{5, 4});
    nlohmann::json bad = model::to_json(model::ModelConfig{});
    bad["latent_channels"] = "wide";
    CHECK_THROWS_AS(model::model_config_from_json(bad), ConfigError);
  }

  TEST_CASE("random weights satisfy the manifest") {
    const auto cfg = model::ModelConfig::tiny();
    const auto w = model::random_weights(cfg, 5);
    const auto manifest = model::model_manifest(cfg);
    CHECK_NOTHROW(model::check_manifest(w, manifest));
    std::size_t total = 0;
    for (const auto& [name, shape] : manifest) {
      std::size_t n = 1;
      for (auto d : shape) n *= static_cast<std::size_t>(d);
      total += n;
    }
    CHECK(w.parameter_count() == total);
    CHECK(w == model::random_weights(cfg, 5));
    CHECK(!(w == model::random_weights(cfg, 6)));
    const auto& sf = w.get("dec.synth_filter");
    const auto bank = dsp::pqmf_synthesis_bank(4, 63);
    CHECK(sf.data == bank.data);
  }

  TEST_CASE("default model size") {
    const auto manifest = model::model_manifest(model::ModelConfig{});
    std::size_t total = 0;
    for (const auto& [name, shape] : manifest) {
      std::size_t n = 1;
      for (auto d : shape) n *= static_cast<std::size_t>(d);
      total += n;
    }
    CHECK(total > 20'000'000);
    CHECK(total < 50'000'000);
    bool has_pre = false, has_post = false;
    for (const auto& [name, shape] : manifest) {
      if (name == "dec.conv_pre.weight") has_pre = shape == std::vector<std::int64_t>{512, 192, 7};
      if (name == "dec.subband_conv_post.weight") has_post = shape == std::vector<std::int64_t>{72, 128, 7};
    }
    CHECK(has_pre);
    CHECK(has_post);
  }

  TEST_CASE("manifest mismatch is reported at load") {
    auto w = model::random_weights(model::ModelConfig::tiny(), 2);
    w.add("dec.unused", Tensor({1}));
    CHECK_THROWS_AS(model::Model::load(w), LoadError);
  }
}
