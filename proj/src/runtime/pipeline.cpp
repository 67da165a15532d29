#include "qvc/runtime/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "qvc/dsp/mel.hpp"
#include "qvc/errors.hpp"

namespace qvc::runtime {
namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

model::SpeakerEmbedding embed_speaker(const Waveform& ref, const model::Model& m) {
  validate_waveform(ref);
  return model::speaker_encoder(dsp::mel_spectrogram(ref), m.speaker());
}

Waveform convert(const ConversionRequest& req, const model::Model& m, StageTimings* timings) {
  if (!(req.noise_scale >= 0.0 && req.noise_scale <= kMaxNoiseScale)) {
    throw InvalidArgument("noise_scale must lie in [0, 2], got " + std::to_string(req.noise_scale));
  }
  if (std::holds_alternative<Waveform>(req.source)) {
    throw UsageError(
        "raw-waveform sources need precomputed content features; run `qvc-export features` on the source audio "
        "and pass the resulting .qvcf file");
  }
  const auto& features = std::get<model::ContentFeatures>(req.source);
  if (features.num_frames() == 0) throw InvalidArgument("content features have zero frames");

  StageTimings t;
  auto t0 = Clock::now();
  model::SpeakerEmbedding g;
  if (const auto* ref = std::get_if<Waveform>(&req.target_ref)) {
    g = embed_speaker(*ref, m);
  } else {
    g = std::get<model::SpeakerEmbedding>(req.target_ref);
    if (g.g.size() != m.config().speaker.embedding) {
      throw ShapeError("speaker embedding has " + std::to_string(g.g.size()) + " entries, model expects " +
                       std::to_string(m.config().speaker.embedding));
    }
  }
  t.speaker = since(t0);

  t0 = Clock::now();
  model::GaussianLatent prior = model::content_encoder(features, m.content());
  const std::size_t n = prior.m.data.size();
  const std::vector<float> eps = model::gaussian_noise(n, req.seed);
  const float scale = static_cast<float>(req.noise_scale);
  nn::Tensor3 z_p = prior.m;
  for (std::size_t i = 0; i < n; ++i) z_p.data[i] += std::exp(prior.logs.data[i]) * scale * eps[i];
  t.content = since(t0);

  t0 = Clock::now();
  const nn::Tensor3 z = m.flow().inverse(z_p, g.span()).z;
  t.flow = since(t0);

  t0 = Clock::now();
  Waveform out = m.decoder().forward(z, g.span());
  t.decoder = since(t0);

  if (timings) *timings = t;
  return out;
}

}  // namespace qvc::runtime
