#pragma once

#include <cstdint>
#include <variant>

#include "qvc/model/model.hpp"
#include "qvc/types.hpp"

namespace qvc::runtime {

inline constexpr double kDefaultNoiseScale = 0.333;
inline constexpr double kMaxNoiseScale = 2.0;

struct ConversionRequest {
  // A raw waveform source is accepted only to produce a helpful error: the
  // engine does not run the content extractor.
  std::variant<model::ContentFeatures, Waveform> source;
  std::variant<Waveform, model::SpeakerEmbedding> target_ref;
  double noise_scale = kDefaultNoiseScale;
  std::uint64_t seed = 0;
};

/// Wall-clock seconds per stage of one conversion.
struct StageTimings {
  double speaker = 0.0;
  double content = 0.0;
  double flow = 0.0;
  double decoder = 0.0;

  double total() const noexcept { return speaker + content + flow + decoder; }
};

model::SpeakerEmbedding embed_speaker(const Waveform& ref, const model::Model& m);

// Output length is T * 320 samples.
Waveform convert(const ConversionRequest& req, const model::Model& m, StageTimings* timings = nullptr);

}  // namespace qvc::runtime
