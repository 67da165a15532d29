#pragma once

// Speaker-conditioned affine coupling flow.
//
// Each coupling splits z into halves (za, zb), runs a gated WN stack on za
// and emits (m, logs'); zb' = m + zb * exp(logs'). A channel reversal follows
// every coupling. logs' is clamped to [-10, 10] before use; in mean_only mode
// it is identically zero and the flow is volume preserving.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qvc/model/config.hpp"
#include "qvc/nn/layers.hpp"

namespace qvc::model {

inline constexpr float kLogScaleLimit = 10.0f;

struct CouplingLayer {
  std::size_t channels = 0;
  bool mean_only = true;
  nn::WnConfig wn_cfg;
  nn::ConvParams pre;   // (hidden, channels/2, 1)
  nn::WnWeights enc;
  nn::ConvParams post;  // (channels/2 * (mean_only ? 1 : 2), hidden, 1)
};

struct FlowResult {
  nn::Tensor3 z;
  double logdet = 0.0;
};

FlowResult coupling_forward(const nn::Tensor3& z, std::span<const float> g, const CouplingLayer& layer);
FlowResult coupling_inverse(const nn::Tensor3& z, std::span<const float> g, const CouplingLayer& layer);

// Reverse the channel order.
nn::Tensor3 channel_flip(const nn::Tensor3& z);

class FlowStack {
 public:
  FlowStack() = default;
  // Layers are stored as `<prefix>.flows.{2i}` (odd indices are the
  // parameter-free flips).
  FlowStack(const nn::ModelWeights& w, const std::string& prefix, const FlowConfig& cfg, std::size_t channels,
            std::size_t cond_channels);

  static void manifest(nn::Manifest& out, const std::string& prefix, const FlowConfig& cfg, std::size_t channels,
                       std::size_t cond_channels);

  std::size_t size() const noexcept { return layers_.size(); }
  const CouplingLayer& layer(std::size_t i) const { return layers_.at(i); }

  FlowResult forward(const nn::Tensor3& z, std::span<const float> g) const;
  // The returned logdet is that of the inverse map (the negated forward one).
  FlowResult inverse(const nn::Tensor3& z, std::span<const float> g) const;

 private:
  std::vector<CouplingLayer> layers_;
};

}  // namespace qvc::model
