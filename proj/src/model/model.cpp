#include "qvc/model/model.hpp"

#include <set>

#include "qvc/errors.hpp"

namespace qvc::model {

nn::Manifest model_manifest(const ModelConfig& cfg) {
  nn::Manifest m;
  GaussianEncoder::manifest(m, "enc_p", cfg.content, 0);
  GaussianEncoder::manifest(m, "enc_q", cfg.posterior, cfg.speaker_channels);
  SpeakerEncoder::manifest(m, "enc_spk", cfg.speaker);
  FlowStack::manifest(m, "flow", cfg.flow, cfg.latent_channels, cfg.speaker_channels);
  Decoder::manifest(m, "dec", cfg.decoder, cfg.latent_channels, cfg.speaker_channels);
  return m;
}

void check_manifest(const nn::ModelWeights& w, const nn::Manifest& manifest) {
  std::string problems;
  std::size_t count = 0;
  auto note = [&](const std::string& msg) {
    if (count++ < 20) problems += "\n  " + msg;
  };
  std::set<std::string> expected;
  for (const auto& [name, shape] : manifest) {
    expected.insert(name);
    if (!w.contains(name)) {
      note("missing " + name + " " + nn::shape_string(shape));
      continue;
    }
    const auto& t = w.get(name);
    if (t.shape != shape) note("shape of " + name + " is " + nn::shape_string(t.shape) + ", expected " + nn::shape_string(shape));
  }
  for (const auto& [name, _] : w.tensors()) {
    if (!expected.count(name)) note("unexpected tensor " + name);
  }
  if (count > 0) {
    throw LoadError(LoadError::Kind::Manifest,
                    "weight manifest mismatch (" + std::to_string(count) + " problems):" + problems);
  }
}

Model Model::load(nn::ModelWeights weights) { return load(std::make_shared<const nn::ModelWeights>(std::move(weights))); }

Model Model::load(std::shared_ptr<const nn::ModelWeights> weights) {
  Model m;
  m.weights_ = std::move(weights);
  m.cfg_ = model_config_from_json(m.weights_->config);
  m.cfg_.validate();
  check_manifest(*m.weights_, model_manifest(m.cfg_));
  const auto& w = *m.weights_;
  m.content_ = GaussianEncoder(w, "enc_p", m.cfg_.content, 0);
  m.posterior_ = GaussianEncoder(w, "enc_q", m.cfg_.posterior, m.cfg_.speaker_channels);
  m.speaker_ = SpeakerEncoder(w, "enc_spk", m.cfg_.speaker);
  m.flow_ = FlowStack(w, "flow", m.cfg_.flow, m.cfg_.latent_channels, m.cfg_.speaker_channels);
  m.decoder_ = Decoder(w, "dec", m.cfg_.decoder, m.cfg_.latent_channels, m.cfg_.speaker_channels);
  return m;
}

}  // namespace qvc::model
