#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qvc/dsp/mel.hpp"
#include "qvc/model/config.hpp"
#include "qvc/nn/layers.hpp"
#include "qvc/types.hpp"

namespace qvc::model {

/// T x 256 content features at 50 frames per second, produced by the
/// external content extractor.
struct ContentFeatures {
  Matrix frames;

  std::size_t num_frames() const noexcept { return frames.rows; }
  std::size_t dim() const noexcept { return frames.cols; }
};

/// Diagonal Gaussian over the latent (channels x T each).
struct GaussianLatent {
  nn::Tensor3 m;
  nn::Tensor3 logs;
  std::optional<nn::Tensor3> z;
};

/// Speaker conditioning vector g.
struct SpeakerEmbedding {
  std::vector<float> g;

  std::span<const float> span() const noexcept { return g; }
};

// Standard-normal draws from a 64-bit seeded generator.
std::vector<float> gaussian_noise(std::size_t count, std::uint64_t seed);

// (T x C) frame-major matrix -> (1, C, T) tensor, and back.
nn::Tensor3 frames_to_tensor(const Matrix& frames);
Matrix tensor_to_frames(const nn::Tensor3& x);

/// pre 1x1 conv -> gated WN stack -> 1x1 projection split into (m, logs).
/// The content encoder is this stack unconditioned; the posterior encoder
/// conditions every layer on g.
class GaussianEncoder {
 public:
  GaussianEncoder() = default;
  GaussianEncoder(const nn::ModelWeights& w, const std::string& prefix, const EncoderConfig& cfg,
                  std::size_t cond_channels);

  static void manifest(nn::Manifest& out, const std::string& prefix, const EncoderConfig& cfg,
                       std::size_t cond_channels);

  const EncoderConfig& config() const noexcept { return cfg_; }
  GaussianLatent forward(const nn::Tensor3& x, std::span<const float> g) const;

 private:
  EncoderConfig cfg_;
  nn::WnConfig wn_cfg_;
  nn::ConvParams pre_;
  nn::WnWeights wn_;
  nn::ConvParams proj_;
};

// Speaker-independent prior statistics from content features.
GaussianLatent content_encoder(const ContentFeatures& c, const GaussianEncoder& enc);

// Posterior statistics of a T x 641 linear spectrogram conditioned on g.
// z = m + exp(logs) * eps; an empty eps means eps = 0.
GaussianLatent posterior_encoder(const Matrix& x_lin, const SpeakerEmbedding& g, const GaussianEncoder& enc,
                                 std::span<const float> eps = {});

/// mel frames -> LSTM (last hidden state) -> linear -> L2 normalization.
class SpeakerEncoder {
 public:
  SpeakerEncoder() = default;
  SpeakerEncoder(const nn::ModelWeights& w, const std::string& prefix, const SpeakerEncoderConfig& cfg);

  static void manifest(nn::Manifest& out, const std::string& prefix, const SpeakerEncoderConfig& cfg);

  SpeakerEmbedding forward(const dsp::MelSpectrogram& mel) const;

 private:
  SpeakerEncoderConfig cfg_;
  nn::LstmWeights lstm_;
  const nn::Tensor* linear_w_ = nullptr;
  const nn::Tensor* linear_b_ = nullptr;
};

SpeakerEmbedding speaker_encoder(const dsp::MelSpectrogram& mel, const SpeakerEncoder& enc);

}  // namespace qvc::model
