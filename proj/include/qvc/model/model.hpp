#pragma once

#include <cstdint>
#include <memory>

#include "qvc/model/config.hpp"
#include "qvc/model/decoder.hpp"
#include "qvc/model/encoders.hpp"
#include "qvc/model/flow.hpp"
#include "qvc/nn/weights.hpp"

namespace qvc::model {

// Every tensor the network reads, in a fixed order.
nn::Manifest model_manifest(const ModelConfig& cfg);

/// All sub-networks bound to one immutable weight set. Cheap to copy; the
/// weights are shared.
class Model {
 public:
  // Parses and validates the config, then checks the tensor table against
  // the manifest: missing, mis-shaped and unread tensors all fail.
  static Model load(std::shared_ptr<const nn::ModelWeights> weights);
  static Model load(nn::ModelWeights weights);

  const ModelConfig& config() const noexcept { return cfg_; }
  const nn::ModelWeights& weights() const noexcept { return *weights_; }

  const GaussianEncoder& content() const noexcept { return content_; }
  const GaussianEncoder& posterior() const noexcept { return posterior_; }
  const SpeakerEncoder& speaker() const noexcept { return speaker_; }
  const FlowStack& flow() const noexcept { return flow_; }
  const Decoder& decoder() const noexcept { return decoder_; }

 private:
  std::shared_ptr<const nn::ModelWeights> weights_;
  ModelConfig cfg_;
  GaussianEncoder content_;
  GaussianEncoder posterior_;
  SpeakerEncoder speaker_;
  FlowStack flow_;
  Decoder decoder_;
};

// Throws LoadError(Manifest) listing every discrepancy.
void check_manifest(const nn::ModelWeights& w, const nn::Manifest& manifest);

// Random weights for benchmarking and tests. Convolutions and linear layers
// draw from U(-a, a) with a = gain / sqrt(fan_in); the synthesis filter is
// the cosine-modulated Kaiser low-pass bank.
nn::ModelWeights random_weights(const ModelConfig& cfg, std::uint64_t seed);

}  // namespace qvc::model
