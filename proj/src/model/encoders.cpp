#include "qvc/model/encoders.hpp"

#include <cmath>
#include <random>

#include "qvc/errors.hpp"
#include "qvc/simd/kernels.hpp"

namespace qvc::model {

std::vector<float> gaussian_noise(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  std::vector<float> out(count);
  for (auto& v : out) v = dist(rng);
  return out;
}

nn::Tensor3 frames_to_tensor(const Matrix& frames) {
  nn::Tensor3 x(1, frames.cols, frames.rows);
  for (std::size_t t = 0; t < frames.rows; ++t) {
    for (std::size_t c = 0; c < frames.cols; ++c) x.at(0, c, t) = frames(t, c);
  }
  return x;
}

Matrix tensor_to_frames(const nn::Tensor3& x) {
  Matrix m(x.time, x.channels);
  for (std::size_t c = 0; c < x.channels; ++c) {
    for (std::size_t t = 0; t < x.time; ++t) m(t, c) = x.at(0, c, t);
  }
  return m;
}

GaussianEncoder::GaussianEncoder(const nn::ModelWeights& w, const std::string& prefix, const EncoderConfig& cfg,
                                 std::size_t cond_channels)
    : cfg_(cfg), wn_cfg_{cfg.hidden, cfg.kernel, cfg.dilation_rate, cfg.layers, cond_channels} {
  const auto h = static_cast<std::int64_t>(cfg.hidden);
  pre_ = nn::bind_conv(w, prefix + ".pre", {h, static_cast<std::int64_t>(cfg.in_channels), 1});
  wn_ = nn::bind_wn(w, prefix + ".enc", wn_cfg_);
  proj_ = nn::bind_conv(w, prefix + ".proj", {2 * static_cast<std::int64_t>(cfg.out_channels), h, 1});
}

void GaussianEncoder::manifest(nn::Manifest& out, const std::string& prefix, const EncoderConfig& cfg,
                               std::size_t cond_channels) {
  const auto h = static_cast<std::int64_t>(cfg.hidden);
  const auto o2 = 2 * static_cast<std::int64_t>(cfg.out_channels);
  out.push_back({prefix + ".pre.weight", {h, static_cast<std::int64_t>(cfg.in_channels), 1}});
  out.push_back({prefix + ".pre.bias", {h}});
  nn::wn_manifest(out, prefix + ".enc", {cfg.hidden, cfg.kernel, cfg.dilation_rate, cfg.layers, cond_channels});
  out.push_back({prefix + ".proj.weight", {o2, h, 1}});
  out.push_back({prefix + ".proj.bias", {o2}});
}

GaussianLatent GaussianEncoder::forward(const nn::Tensor3& x, std::span<const float> g) const {
  if (x.channels != cfg_.in_channels) {
    throw ShapeError("encoder: input has " + std::to_string(x.channels) + " channels, expected " +
                     std::to_string(cfg_.in_channels));
  }
  if (x.time == 0) throw ShapeError("encoder: input has no frames");
  nn::Tensor3 h = nn::conv1d(x, *pre_.weight, pre_.bias_span());
  h = nn::wn_stack(h, g, wn_, wn_cfg_);
  const nn::Tensor3 stats = nn::conv1d(h, *proj_.weight, proj_.bias_span());
  GaussianLatent out;
  out.m = nn::slice_channels(stats, 0, cfg_.out_channels);
  out.logs = nn::slice_channels(stats, cfg_.out_channels, cfg_.out_channels);
  return out;
}

GaussianLatent content_encoder(const ContentFeatures& c, const GaussianEncoder& enc) {
  if (c.dim() != enc.config().in_channels) {
    throw ShapeError("content features have dim " + std::to_string(c.dim()) + ", expected " +
                     std::to_string(enc.config().in_channels));
  }
  return enc.forward(frames_to_tensor(c.frames), {});
}

GaussianLatent posterior_encoder(const Matrix& x_lin, const SpeakerEmbedding& g, const GaussianEncoder& enc,
                                 std::span<const float> eps) {
  if (x_lin.cols != enc.config().in_channels) {
    throw ShapeError("linear spectrogram has " + std::to_string(x_lin.cols) + " bins, expected " +
                     std::to_string(enc.config().in_channels));
  }
  GaussianLatent out = enc.forward(frames_to_tensor(x_lin), g.span());
  nn::Tensor3 z = out.m;
  if (!eps.empty()) {
    if (eps.size() != z.data.size()) throw ShapeError("posterior_encoder: noise size does not match latent");
    for (std::size_t i = 0; i < z.data.size(); ++i) z.data[i] += std::exp(out.logs.data[i]) * eps[i];
  }
  out.z = std::move(z);
  return out;
}

SpeakerEncoder::SpeakerEncoder(const nn::ModelWeights& w, const std::string& prefix, const SpeakerEncoderConfig& cfg)
    : cfg_(cfg) {
  lstm_ = nn::bind_lstm(w, prefix + ".lstm", cfg.mel_bands, cfg.lstm_hidden);
  const auto e = static_cast<std::int64_t>(cfg.embedding);
  linear_w_ = &w.require(prefix + ".linear.weight", {e, static_cast<std::int64_t>(cfg.lstm_hidden)});
  linear_b_ = &w.require(prefix + ".linear.bias", {e});
}

void SpeakerEncoder::manifest(nn::Manifest& out, const std::string& prefix, const SpeakerEncoderConfig& cfg) {
  const auto h4 = 4 * static_cast<std::int64_t>(cfg.lstm_hidden);
  const auto h = static_cast<std::int64_t>(cfg.lstm_hidden);
  const auto e = static_cast<std::int64_t>(cfg.embedding);
  out.push_back({prefix + ".lstm.weight_ih_l0", {h4, static_cast<std::int64_t>(cfg.mel_bands)}});
  out.push_back({prefix + ".lstm.weight_hh_l0", {h4, h}});
  out.push_back({prefix + ".lstm.bias_ih_l0", {h4}});
  out.push_back({prefix + ".lstm.bias_hh_l0", {h4}});
  out.push_back({prefix + ".linear.weight", {e, h}});
  out.push_back({prefix + ".linear.bias", {e}});
}

SpeakerEmbedding SpeakerEncoder::forward(const dsp::MelSpectrogram& mel) const {
  if (mel.num_frames() == 0) throw ShapeError("speaker encoder: mel spectrogram has no frames");
  if (mel.num_bands() != cfg_.mel_bands) {
    throw ShapeError("speaker encoder: expected " + std::to_string(cfg_.mel_bands) + " mel bands, got " +
                     std::to_string(mel.num_bands()));
  }
  const auto hidden = nn::lstm_forward(mel.frames, lstm_);
  SpeakerEmbedding out;
  out.g.resize(cfg_.embedding);
  for (std::size_t o = 0; o < cfg_.embedding; ++o) {
    out.g[o] = simd::dot({linear_w_->data.data() + o * hidden.size(), hidden.size()}, hidden) + linear_b_->data[o];
  }
  if (cfg_.normalize) {
    double norm = 0.0;
    for (float v : out.g) norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    if (!(norm > 1e-12) || !std::isfinite(norm)) {
      throw NumericalError("speaker encoder: embedding has zero or non-finite norm");
    }
    for (auto& v : out.g) v = static_cast<float>(v / norm);
  }
  return out;
}

SpeakerEmbedding speaker_encoder(const dsp::MelSpectrogram& mel, const SpeakerEncoder& enc) { return enc.forward(mel); }

}  // namespace qvc::model
