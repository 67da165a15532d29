#include <cmath>
#include <random>
#include <string_view>

#include "qvc/dsp/filter.hpp"
#include "qvc/model/model.hpp"

namespace qvc::model {
namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool contains(std::string_view s, std::string_view part) { return s.find(part) != std::string_view::npos; }

// Layers whose outputs feed exponentials or residual sums get damped.
float gain_for(std::string_view name) {
  if (contains(name, ".post.")) return 0.1f;
  if (contains(name, "subband_conv_post")) return 0.5f;
  if (contains(name, ".proj.")) return 0.5f;
  if (contains(name, ".res_skip_layers.")) return 0.5f;
  if (contains(name, ".convs2.")) return 0.5f;
  return 1.0f;
}

}  // namespace

nn::ModelWeights random_weights(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  nn::ModelWeights w;
  w.config = to_json(cfg);
  for (const auto& [name, shape] : model_manifest(cfg)) {
    nn::Tensor t(shape);
    if (name == "dec.synth_filter") {
      const Matrix bank = dsp::pqmf_synthesis_bank(cfg.decoder.subbands, cfg.decoder.synth_filter_taps);
      t.data = bank.data;
      w.add(name, std::move(t));
      continue;
    }
    std::size_t fan_in = 1;
    if (shape.size() >= 2) {
      fan_in = static_cast<std::size_t>(shape[1]);
      for (std::size_t i = 2; i < shape.size(); ++i) fan_in *= static_cast<std::size_t>(shape[i]);
    }
    if (contains(name, ".lstm.")) fan_in = cfg.speaker.lstm_hidden;
    float bound = gain_for(name) / std::sqrt(static_cast<float>(fan_in));
    if (ends_with(name, ".bias") && !contains(name, ".lstm.")) bound = 0.02f;
    std::uniform_real_distribution<float> dist(-bound, bound);
    for (auto& v : t.data) v = dist(rng);
    w.add(name, std::move(t));
  }
  return w;
}

}  // namespace qvc::model
