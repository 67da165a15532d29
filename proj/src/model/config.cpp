#include "qvc/model/config.hpp"

#include <numeric>
#include <string>

#include "qvc/errors.hpp"

namespace qvc::model {
namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type: " + e.what());
  }
}

nlohmann::json enc_json(const EncoderConfig& e) {
  return {{"in_channels", e.in_channels}, {"out_channels", e.out_channels}, {"hidden", e.hidden},
          {"kernel", e.kernel},           {"dilation_rate", e.dilation_rate}, {"layers", e.layers}};
}

EncoderConfig enc_from(const nlohmann::json& j, EncoderConfig e) {
  read(j, "in_channels", e.in_channels);
  read(j, "out_channels", e.out_channels);
  read(j, "hidden", e.hidden);
  read(j, "kernel", e.kernel);
  read(j, "dilation_rate", e.dilation_rate);
  read(j, "layers", e.layers);
  return e;
}

void validate_encoder(const EncoderConfig& e, const char* name) {
  const std::string n(name);
  require(e.in_channels > 0 && e.out_channels > 0 && e.hidden > 0, n + ": channel widths must be positive");
  require(e.kernel % 2 == 1, n + ": kernel must be odd");
  require(e.layers > 0 && e.dilation_rate > 0, n + ": layers and dilation_rate must be positive");
}

}  // namespace

std::size_t DecoderConfig::samples_per_frame() const noexcept {
  const std::size_t up = std::accumulate(upsample_scales.begin(), upsample_scales.end(), std::size_t{1},
                                         std::multiplies<>());
  return up * istft_hop * subbands;
}

void DecoderConfig::validate() const {
  require(!upsample_scales.empty(), "decoder: upsample_scales must be non-empty");
  require(upsample_kernels.size() == upsample_scales.size(),
          "decoder: upsample_kernels and upsample_scales must have equal length");
  for (std::size_t i = 0; i < upsample_scales.size(); ++i) {
    require(upsample_scales[i] > 0, "decoder: upsample scales must be positive");
    require(upsample_kernels[i] >= upsample_scales[i], "decoder: upsample kernel must be >= its scale");
  }
  require(samples_per_frame() == kFrameHop,
          "hop identity violated: product(upsample_scales) * istft_hop * subbands = " +
              std::to_string(samples_per_frame()) + ", must equal " + std::to_string(kFrameHop));
  require((upsample_initial_channels >> upsample_scales.size()) > 0 &&
              (upsample_initial_channels % (std::size_t{1} << upsample_scales.size())) == 0,
          "decoder: upsample_initial_channels must be divisible by 2^stages");
  require(!resblock_kernels.empty() && resblock_dilations.size() == resblock_kernels.size(),
          "decoder: resblock_kernels and resblock_dilations must have equal, non-zero length");
  for (std::size_t i = 0; i < resblock_kernels.size(); ++i) {
    require(resblock_kernels[i] % 2 == 1, "decoder: resblock kernels must be odd");
    require(!resblock_dilations[i].empty(), "decoder: resblock dilation lists must be non-empty");
  }
  require(istft_n_fft >= 2 && istft_hop > 0 && istft_hop <= istft_n_fft, "decoder: istft sizes invalid");
  require(subbands > 0, "decoder: subbands must be positive");
  require(synth_filter_taps % 2 == 1, "decoder: synth_filter_taps must be odd");
  require(head_kernel % 2 == 1, "decoder: head_kernel must be odd");
}

void ModelConfig::validate() const {
  require(latent_channels % 2 == 0 && latent_channels > 0, "latent_channels must be even and positive");
  require(speaker_channels > 0, "speaker_channels must be positive");
  validate_encoder(content, "content encoder");
  validate_encoder(posterior, "posterior encoder");
  require(content.out_channels == latent_channels, "content encoder out_channels must equal latent_channels");
  require(posterior.out_channels == latent_channels, "posterior encoder out_channels must equal latent_channels");
  require(posterior.in_channels == spec_bins, "posterior encoder in_channels must equal spec_bins");
  require(speaker.mel_bands > 0 && speaker.lstm_hidden > 0, "speaker encoder sizes must be positive");
  require(speaker.embedding == speaker_channels, "speaker embedding size must equal speaker_channels");
  require(flow.hidden > 0 && flow.kernel % 2 == 1 && flow.layers > 0 && flow.dilation_rate > 0,
          "flow: hidden/kernel/layers invalid");
  decoder.validate();
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.latent_channels = 8;
  c.speaker_channels = 8;
  c.spec_bins = 641;
  c.content = {256, 8, 8, 5, 1, 2};
  c.posterior = {641, 8, 8, 5, 1, 2};
  c.speaker = {80, 8, 8, true};
  c.flow = {2, 8, 5, 1, 2, true};
  c.decoder.upsample_initial_channels = 16;
  return c;
}

nlohmann::json to_json(const ModelConfig& c) {
  const auto& d = c.decoder;
  return {
      {"sample_rate", 16000},
      {"frame_hop", kFrameHop},
      {"latent_channels", c.latent_channels},
      {"speaker_channels", c.speaker_channels},
      {"spec_bins", c.spec_bins},
      {"content_encoder", enc_json(c.content)},
      {"posterior_encoder", enc_json(c.posterior)},
      {"speaker_encoder",
       {{"mel_bands", c.speaker.mel_bands},
        {"lstm_hidden", c.speaker.lstm_hidden},
        {"embedding", c.speaker.embedding},
        {"normalize", c.speaker.normalize}}},
      {"flow",
       {{"n_flows", c.flow.n_flows},
        {"hidden", c.flow.hidden},
        {"kernel", c.flow.kernel},
        {"dilation_rate", c.flow.dilation_rate},
        {"layers", c.flow.layers},
        {"mean_only", c.flow.mean_only}}},
      {"decoder",
       {{"upsample_scales", d.upsample_scales},
        {"upsample_kernels", d.upsample_kernels},
        {"upsample_initial_channels", d.upsample_initial_channels},
        {"resblock_kernels", d.resblock_kernels},
        {"resblock_dilations", d.resblock_dilations},
        {"istft_n_fft", d.istft_n_fft},
        {"istft_hop", d.istft_hop},
        {"subbands", d.subbands},
        {"synth_filter_taps", d.synth_filter_taps},
        {"head_kernel", d.head_kernel},
        {"speaker_conditioning", "pre-conv"}}},
  };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  ModelConfig c;
  read(j, "latent_channels", c.latent_channels);
  read(j, "speaker_channels", c.speaker_channels);
  read(j, "spec_bins", c.spec_bins);
  if (j.contains("content_encoder")) c.content = enc_from(j["content_encoder"], c.content);
  if (j.contains("posterior_encoder")) c.posterior = enc_from(j["posterior_encoder"], c.posterior);
  if (j.contains("speaker_encoder")) {
    const auto& s = j["speaker_encoder"];
    read(s, "mel_bands", c.speaker.mel_bands);
    read(s, "lstm_hidden", c.speaker.lstm_hidden);
    read(s, "embedding", c.speaker.embedding);
    read(s, "normalize", c.speaker.normalize);
  }
  if (j.contains("flow")) {
    const auto& f = j["flow"];
    read(f, "n_flows", c.flow.n_flows);
    read(f, "hidden", c.flow.hidden);
    read(f, "kernel", c.flow.kernel);
    read(f, "dilation_rate", c.flow.dilation_rate);
    read(f, "layers", c.flow.layers);
    read(f, "mean_only", c.flow.mean_only);
  }
  if (j.contains("decoder")) {
    const auto& d = j["decoder"];
    read(d, "upsample_scales", c.decoder.upsample_scales);
    read(d, "upsample_kernels", c.decoder.upsample_kernels);
    read(d, "upsample_initial_channels", c.decoder.upsample_initial_channels);
    read(d, "resblock_kernels", c.decoder.resblock_kernels);
    read(d, "resblock_dilations", c.decoder.resblock_dilations);
    read(d, "istft_n_fft", c.decoder.istft_n_fft);
    read(d, "istft_hop", c.decoder.istft_hop);
    read(d, "subbands", c.decoder.subbands);
    read(d, "synth_filter_taps", c.decoder.synth_filter_taps);
    read(d, "head_kernel", c.decoder.head_kernel);
    if (d.contains("speaker_conditioning") && d["speaker_conditioning"] != "pre-conv") {
      throw ConfigError("decoder: only pre-conv speaker conditioning is supported");
    }
  }
  return c;
}

}  // namespace qvc::model
