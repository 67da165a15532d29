#pragma once

// Multi-stream iSTFT decoder.
//
//   z (C x T) --conv_pre--> + cond(g)
//     --[lrelu 0.1, conv_transpose x scale_i, mean of resblocks]--> per stage
//     --lrelu 0.01, left reflect pad 1, head conv--> 72 x (T' + 1)
//     --per sub-band: exp(mag) and raw phase, iSTFT(16, 4, 16)--> 4 x 4T'
//     --zero insertion x4 + synthesis filter, summed--> 320 T samples
//
// where T' = T * product(upsample_scales).

#include <span>
#include <string>
#include <vector>

#include "qvc/model/config.hpp"
#include "qvc/nn/layers.hpp"
#include "qvc/types.hpp"

namespace qvc::model {

inline constexpr float kMagnitudeLogLimit = 10.0f;
inline constexpr float kHeadSlope = 0.01f;

/// Per sub-band magnitude and phase, each frames x (n_fft/2 + 1).
struct SubbandSpectra {
  std::vector<Matrix> magnitude;
  std::vector<Matrix> phase;
};

// Splits head output (subbands * bins * 2 channels) into magnitude = exp(min(raw, 10))
// and raw phase.
SubbandSpectra mag_phase_heads(const nn::Tensor3& head_out, const DecoderConfig& cfg);

// One waveform of (frames - 1) * istft_hop samples per sub-band.
std::vector<std::vector<float>> subband_istft(const SubbandSpectra& spectra, const DecoderConfig& cfg);

// Zero-insertion upsampling by `subbands` followed by each band's synthesis
// filter (subbands x taps, fir_filter orientation), summed.
std::vector<float> multiband_synthesis(std::span<const std::vector<float>> bands, const Matrix& synth_filter,
                                       const DecoderConfig& cfg);

class Decoder {
 public:
  Decoder() = default;
  Decoder(const nn::ModelWeights& w, const std::string& prefix, const DecoderConfig& cfg, std::size_t latent_channels,
          std::size_t cond_channels);

  static void manifest(nn::Manifest& out, const std::string& prefix, const DecoderConfig& cfg,
                       std::size_t latent_channels, std::size_t cond_channels);

  const DecoderConfig& config() const noexcept { return cfg_; }

  // Upsampled hidden state, (1, C_last, T * product(scales)).
  nn::Tensor3 trunk(const nn::Tensor3& z, std::span<const float> g) const;
  // Head conv output, (1, head_channels, T' + 1).
  nn::Tensor3 head(const nn::Tensor3& hidden) const;
  Waveform forward(const nn::Tensor3& z, std::span<const float> g) const;

  const Matrix& synth_filter() const noexcept { return synth_filter_; }

 private:
  DecoderConfig cfg_;
  std::size_t latent_channels_ = 0;
  nn::ConvParams conv_pre_;
  nn::ConvParams cond_;
  std::vector<nn::ConvParams> ups_;
  std::vector<nn::ResBlockWeights> resblocks_;
  nn::ConvParams head_;
  Matrix synth_filter_;
};

// Transposed-conv geometry that maps T frames to exactly scale * T.
nn::ConvTranspose1dOptions upsample_options(std::size_t scale, std::size_t kernel);

}  // namespace qvc::model
