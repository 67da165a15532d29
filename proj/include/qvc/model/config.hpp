#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

namespace qvc::model {

// Samples per content/latent frame at 16 kHz (20 ms).
inline constexpr std::size_t kFrameHop = 320;

struct EncoderConfig {
  std::size_t in_channels = 256;
  std::size_t out_channels = 192;
  std::size_t hidden = 192;
  std::size_t kernel = 5;
  std::size_t dilation_rate = 1;
  std::size_t layers = 16;
};

struct SpeakerEncoderConfig {
  std::size_t mel_bands = 80;
  std::size_t lstm_hidden = 256;
  std::size_t embedding = 256;
  bool normalize = true;
};

struct FlowConfig {
  std::size_t n_flows = 4;
  std::size_t hidden = 192;
  std::size_t kernel = 5;
  std::size_t dilation_rate = 1;
  std::size_t layers = 4;
  bool mean_only = true;
};

struct DecoderConfig {
  std::vector<std::size_t> upsample_scales{5, 4};
  std::vector<std::size_t> upsample_kernels{10, 8};
  std::size_t upsample_initial_channels = 512;
  std::vector<std::size_t> resblock_kernels{3, 7, 11};
  std::vector<std::vector<std::size_t>> resblock_dilations{{1, 3, 5}, {1, 3, 5}, {1, 3, 5}};
  std::size_t istft_n_fft = 16;
  std::size_t istft_hop = 4;
  std::size_t subbands = 4;
  std::size_t synth_filter_taps = 63;
  std::size_t head_kernel = 7;

  // product(upsample_scales) * istft_hop * subbands
  std::size_t samples_per_frame() const noexcept;
  // Channel width after upsampling stage i (i = 0 is conv_pre's output).
  std::size_t channels_at(std::size_t stage) const noexcept { return upsample_initial_channels >> stage; }
  // subbands * (n_fft/2 + 1) * 2
  std::size_t head_channels() const noexcept { return subbands * (istft_n_fft / 2 + 1) * 2; }
  // Throws ConfigError naming the violated constraint.
  void validate() const;
};

struct ModelConfig {
  std::size_t latent_channels = 192;
  std::size_t speaker_channels = 256;
  std::size_t spec_bins = 641;
  EncoderConfig content{256, 192, 192, 5, 1, 16};
  EncoderConfig posterior{641, 192, 192, 5, 1, 16};
  SpeakerEncoderConfig speaker;
  FlowConfig flow;
  DecoderConfig decoder;

  void validate() const;

  // A narrow configuration with the default decoder rates, for tests.
  static ModelConfig tiny();
};

nlohmann::json to_json(const ModelConfig& c);
// Missing keys take defaults; wrong types raise ConfigError.
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace qvc::model
