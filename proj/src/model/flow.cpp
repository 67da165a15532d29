#include "qvc/model/flow.hpp"

#include <algorithm>
#include <cmath>

#include "qvc/errors.hpp"

namespace qvc::model {
namespace {

struct Stats {
  nn::Tensor3 m;
  nn::Tensor3 logs;  // empty when mean_only
};

Stats coupling_stats(const nn::Tensor3& za, std::span<const float> g, const CouplingLayer& layer) {
  nn::Tensor3 h = nn::conv1d(za, *layer.pre.weight, layer.pre.bias_span());
  h = nn::wn_stack(h, g, layer.enc, layer.wn_cfg);
  nn::Tensor3 stats = nn::conv1d(h, *layer.post.weight, layer.post.bias_span());
  const std::size_t half = layer.channels / 2;
  if (layer.mean_only) return {std::move(stats), {}};
  Stats s{nn::slice_channels(stats, 0, half), nn::slice_channels(stats, half, half)};
  for (auto& v : s.logs.data) v = std::clamp(v, -kLogScaleLimit, kLogScaleLimit);
  return s;
}

void check_channels(const nn::Tensor3& z, const CouplingLayer& layer) {
  if (z.channels % 2 != 0) throw ShapeError("coupling: channel count must be even");
  if (z.channels != layer.channels) {
    throw ShapeError("coupling: latent has " + std::to_string(z.channels) + " channels, layer expects " +
                     std::to_string(layer.channels));
  }
}

}  // namespace

FlowResult coupling_forward(const nn::Tensor3& z, std::span<const float> g, const CouplingLayer& layer) {
  check_channels(z, layer);
  const std::size_t half = z.channels / 2;
  const nn::Tensor3 za = nn::slice_channels(z, 0, half);
  nn::Tensor3 zb = nn::slice_channels(z, half, half);
  const Stats s = coupling_stats(za, g, layer);
  double logdet = 0.0;
  for (std::size_t i = 0; i < zb.data.size(); ++i) {
    if (s.logs.data.empty()) {
      zb.data[i] = s.m.data[i] + zb.data[i];
    } else {
      zb.data[i] = s.m.data[i] + zb.data[i] * std::exp(s.logs.data[i]);
      logdet += s.logs.data[i];
    }
  }
  return {nn::concat_channels(za, zb), logdet};
}

FlowResult coupling_inverse(const nn::Tensor3& z, std::span<const float> g, const CouplingLayer& layer) {
  check_channels(z, layer);
  const std::size_t half = z.channels / 2;
  const nn::Tensor3 za = nn::slice_channels(z, 0, half);
  nn::Tensor3 zb = nn::slice_channels(z, half, half);
  const Stats s = coupling_stats(za, g, layer);
  double logdet = 0.0;
  for (std::size_t i = 0; i < zb.data.size(); ++i) {
    if (s.logs.data.empty()) {
      zb.data[i] = zb.data[i] - s.m.data[i];
    } else {
      zb.data[i] = (zb.data[i] - s.m.data[i]) * std::exp(-s.logs.data[i]);
      logdet -= s.logs.data[i];
    }
  }
  return {nn::concat_channels(za, zb), logdet};
}

nn::Tensor3 channel_flip(const nn::Tensor3& z) {
  nn::Tensor3 out(z.batch, z.channels, z.time);
  for (std::size_t b = 0; b < z.batch; ++b) {
    for (std::size_t c = 0; c < z.channels; ++c) {
      std::ranges::copy(z.row(b, c), out.row(b, z.channels - 1 - c).begin());
    }
  }
  return out;
}

FlowStack::FlowStack(const nn::ModelWeights& w, const std::string& prefix, const FlowConfig& cfg,
                     std::size_t channels, std::size_t cond_channels) {
  if (channels % 2 != 0) throw ShapeError("flow: channel count must be even");
  const auto half = static_cast<std::int64_t>(channels / 2);
  const auto h = static_cast<std::int64_t>(cfg.hidden);
  const std::int64_t post_out = cfg.mean_only ? half : 2 * half;
  for (std::size_t i = 0; i < cfg.n_flows; ++i) {
    const std::string p = prefix + ".flows." + std::to_string(2 * i);
    CouplingLayer layer;
    layer.channels = channels;
    layer.mean_only = cfg.mean_only;
    layer.wn_cfg = {cfg.hidden, cfg.kernel, cfg.dilation_rate, cfg.layers, cond_channels};
    layer.pre = nn::bind_conv(w, p + ".pre", {h, half, 1});
    layer.enc = nn::bind_wn(w, p + ".enc", layer.wn_cfg);
    layer.post = nn::bind_conv(w, p + ".post", {post_out, h, 1});
    layers_.push_back(std::move(layer));
  }
}

void FlowStack::manifest(nn::Manifest& out, const std::string& prefix, const FlowConfig& cfg, std::size_t channels,
                         std::size_t cond_channels) {
  const auto half = static_cast<std::int64_t>(channels / 2);
  const auto h = static_cast<std::int64_t>(cfg.hidden);
  const std::int64_t post_out = cfg.mean_only ? half : 2 * half;
  for (std::size_t i = 0; i < cfg.n_flows; ++i) {
    const std::string p = prefix + ".flows." + std::to_string(2 * i);
    out.push_back({p + ".pre.weight", {h, half, 1}});
    out.push_back({p + ".pre.bias", {h}});
    nn::wn_manifest(out, p + ".enc", {cfg.hidden, cfg.kernel, cfg.dilation_rate, cfg.layers, cond_channels});
    out.push_back({p + ".post.weight", {post_out, h, 1}});
    out.push_back({p + ".post.bias", {post_out}});
  }
}

FlowResult FlowStack::forward(const nn::Tensor3& z, std::span<const float> g) const {
  FlowResult acc{z, 0.0};
  for (const auto& layer : layers_) {
    FlowResult step = coupling_forward(acc.z, g, layer);
    acc.z = channel_flip(step.z);
    acc.logdet += step.logdet;
  }
  return acc;
}

FlowResult FlowStack::inverse(const nn::Tensor3& z, std::span<const float> g) const {
  FlowResult acc{z, 0.0};
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    FlowResult step = coupling_inverse(channel_flip(acc.z), g, *it);
    acc.z = std::move(step.z);
    acc.logdet += step.logdet;
  }
  return acc;
}

}  // namespace qvc::model
