#include "qvc/model/decoder.hpp"

#include <cmath>

#include "qvc/dsp/filter.hpp"
#include "qvc/dsp/stft.hpp"
#include "qvc/errors.hpp"
#include "qvc/simd/kernels.hpp"

namespace qvc::model {

nn::ConvTranspose1dOptions upsample_options(std::size_t scale, std::size_t kernel) {
  const std::size_t padding = (kernel - scale + 1) / 2;
  const std::size_t output_padding = scale + 2 * padding - kernel;
  return {scale, padding, output_padding};
}

SubbandSpectra mag_phase_heads(const nn::Tensor3& head_out, const DecoderConfig& cfg) {
  const std::size_t bins = cfg.istft_n_fft / 2 + 1;
  if (head_out.channels != cfg.head_channels()) {
    throw ShapeError("mag_phase_heads: expected " + std::to_string(cfg.head_channels()) + " channels, got " +
                     std::to_string(head_out.channels));
  }
  const std::size_t frames = head_out.time;
  SubbandSpectra out;
  for (std::size_t s = 0; s < cfg.subbands; ++s) {
    Matrix mag(frames, bins);
    Matrix phase(frames, bins);
    for (std::size_t k = 0; k < bins; ++k) {
      const auto raw_mag = head_out.row(0, s * 2 * bins + k);
      const auto raw_phase = head_out.row(0, s * 2 * bins + bins + k);
      for (std::size_t t = 0; t < frames; ++t) {
        mag(t, k) = std::exp(std::min(raw_mag[t], kMagnitudeLogLimit));
        phase(t, k) = raw_phase[t];
      }
    }
    out.magnitude.push_back(std::move(mag));
    out.phase.push_back(std::move(phase));
  }
  return out;
}

std::vector<std::vector<float>> subband_istft(const SubbandSpectra& spectra, const DecoderConfig& cfg) {
  const dsp::StftConfig stft_cfg{cfg.istft_n_fft, cfg.istft_hop, cfg.istft_n_fft};
  const dsp::IstftEngine engine(stft_cfg);
  if (spectra.magnitude.size() != spectra.phase.size()) throw ShapeError("subband_istft: band count mismatch");
  std::vector<std::vector<float>> bands;
  for (std::size_t s = 0; s < spectra.magnitude.size(); ++s) {
    const Matrix& mag = spectra.magnitude[s];
    const Matrix& phase = spectra.phase[s];
    if (mag.cols != stft_cfg.bins() || phase.rows != mag.rows || phase.cols != mag.cols) {
      throw ShapeError("subband_istft: magnitude/phase shape mismatch");
    }
    dsp::ComplexSpectrogram spec(stft_cfg, mag.rows);
    for (std::size_t i = 0; i < mag.data.size(); ++i) spec.bins[i] = std::polar<double>(mag.data[i], phase.data[i]);
    bands.push_back(engine.run(spec));
  }
  return bands;
}

std::vector<float> multiband_synthesis(std::span<const std::vector<float>> bands, const Matrix& synth_filter,
                                       const DecoderConfig& cfg) {
  if (bands.size() != cfg.subbands || synth_filter.rows != cfg.subbands) {
    throw ShapeError("multiband_synthesis: expected " + std::to_string(cfg.subbands) + " sub-bands");
  }
  const std::size_t len = bands.front().size();
  for (const auto& b : bands) {
    if (b.size() != len) throw ShapeError("multiband_synthesis: sub-band lengths differ");
  }
  std::vector<float> out(len * cfg.subbands, 0.0f);
  for (std::size_t s = 0; s < cfg.subbands; ++s) {
    const auto up = dsp::zero_insert_upsample(bands[s], cfg.subbands);
    const auto filtered = dsp::fir_filter(up, synth_filter.row(s));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += filtered[i];
  }
  return out;
}

Decoder::Decoder(const nn::ModelWeights& w, const std::string& prefix, const DecoderConfig& cfg,
                 std::size_t latent_channels, std::size_t cond_channels)
    : cfg_(cfg), latent_channels_(latent_channels) {
  cfg_.validate();
  const auto c0 = static_cast<std::int64_t>(cfg.upsample_initial_channels);
  conv_pre_ = nn::bind_conv(w, prefix + ".conv_pre", {c0, static_cast<std::int64_t>(latent_channels), 7});
  cond_ = nn::bind_conv(w, prefix + ".cond", {c0, static_cast<std::int64_t>(cond_channels), 1});
  for (std::size_t i = 0; i < cfg.upsample_scales.size(); ++i) {
    const auto cin = static_cast<std::int64_t>(cfg.channels_at(i));
    const auto cout = static_cast<std::int64_t>(cfg.channels_at(i + 1));
    ups_.push_back(nn::bind_conv(w, prefix + ".ups." + std::to_string(i),
                                 {cin, cout, static_cast<std::int64_t>(cfg.upsample_kernels[i])}, 1));
    for (std::size_t j = 0; j < cfg.resblock_kernels.size(); ++j) {
      const std::size_t idx = i * cfg.resblock_kernels.size() + j;
      resblocks_.push_back(nn::bind_resblock(w, prefix + ".resblocks." + std::to_string(idx), cfg.channels_at(i + 1),
                                             cfg.resblock_kernels[j], cfg.resblock_dilations[j].size()));
    }
  }
  const auto c_last = static_cast<std::int64_t>(cfg.channels_at(cfg.upsample_scales.size()));
  head_ = nn::bind_conv(w, prefix + ".subband_conv_post",
                        {static_cast<std::int64_t>(cfg.head_channels()), c_last, static_cast<std::int64_t>(cfg.head_kernel)});
  const auto& sf = w.require(prefix + ".synth_filter", {static_cast<std::int64_t>(cfg.subbands),
                                                         static_cast<std::int64_t>(cfg.synth_filter_taps)});
  synth_filter_ = Matrix(cfg.subbands, cfg.synth_filter_taps);
  synth_filter_.data = sf.data;
}

void Decoder::manifest(nn::Manifest& out, const std::string& prefix, const DecoderConfig& cfg,
                       std::size_t latent_channels, std::size_t cond_channels) {
  const auto c0 = static_cast<std::int64_t>(cfg.upsample_initial_channels);
  out.push_back({prefix + ".conv_pre.weight", {c0, static_cast<std::int64_t>(latent_channels), 7}});
  out.push_back({prefix + ".conv_pre.bias", {c0}});
  out.push_back({prefix + ".cond.weight", {c0, static_cast<std::int64_t>(cond_channels), 1}});
  out.push_back({prefix + ".cond.bias", {c0}});
  for (std::size_t i = 0; i < cfg.upsample_scales.size(); ++i) {
    const auto cin = static_cast<std::int64_t>(cfg.channels_at(i));
    const auto cout = static_cast<std::int64_t>(cfg.channels_at(i + 1));
    out.push_back({prefix + ".ups." + std::to_string(i) + ".weight",
                   {cin, cout, static_cast<std::int64_t>(cfg.upsample_kernels[i])}});
    out.push_back({prefix + ".ups." + std::to_string(i) + ".bias", {cout}});
    for (std::size_t j = 0; j < cfg.resblock_kernels.size(); ++j) {
      const std::size_t idx = i * cfg.resblock_kernels.size() + j;
      nn::resblock_manifest(out, prefix + ".resblocks." + std::to_string(idx), cfg.channels_at(i + 1),
                            cfg.resblock_kernels[j], cfg.resblock_dilations[j].size());
    }
  }
  const auto c_last = static_cast<std::int64_t>(cfg.channels_at(cfg.upsample_scales.size()));
  const auto hc = static_cast<std::int64_t>(cfg.head_channels());
  out.push_back({prefix + ".subband_conv_post.weight", {hc, c_last, static_cast<std::int64_t>(cfg.head_kernel)}});
  out.push_back({prefix + ".subband_conv_post.bias", {hc}});
  out.push_back({prefix + ".synth_filter",
                 {static_cast<std::int64_t>(cfg.subbands), static_cast<std::int64_t>(cfg.synth_filter_taps)}});
}

nn::Tensor3 Decoder::trunk(const nn::Tensor3& z, std::span<const float> g) const {
  if (z.channels != latent_channels_) {
    throw ShapeError("decoder: latent has " + std::to_string(z.channels) + " channels, expected " +
                     std::to_string(latent_channels_));
  }
  if (z.time == 0) throw ShapeError("decoder: latent has no frames");
  if (g.size() != cond_.weight->dim(1)) throw ShapeError("decoder: speaker embedding has the wrong length");

  nn::Tensor3 x = nn::conv1d(z, *conv_pre_.weight, conv_pre_.bias_span(), {1, 1, 3});
  const auto cb = cond_.bias_span();
  for (std::size_t c = 0; c < x.channels; ++c) {
    const float shift = simd::dot({cond_.weight->data.data() + c * g.size(), g.size()}, g) + cb[c];
    for (auto& v : x.row(0, c)) v += shift;
  }

  const std::size_t nk = cfg_.resblock_kernels.size();
  const float inv_nk = 1.0f / static_cast<float>(nk);
  for (std::size_t i = 0; i < ups_.size(); ++i) {
    nn::leaky_relu_inplace(x, nn::kResBlockSlope);
    x = nn::conv_transpose1d(x, *ups_[i].weight, ups_[i].bias_span(),
                             upsample_options(cfg_.upsample_scales[i], cfg_.upsample_kernels[i]));
    nn::Tensor3 sum(x.batch, x.channels, x.time);
    for (std::size_t j = 0; j < nk; ++j) {
      const nn::Tensor3 r = nn::resblock(x, resblocks_[i * nk + j], cfg_.resblock_kernels[j], cfg_.resblock_dilations[j]);
      simd::axpy(inv_nk, r.data, sum.data);
    }
    x = std::move(sum);
  }
  return x;
}

nn::Tensor3 Decoder::head(const nn::Tensor3& hidden) const {
  if (hidden.time < 2) throw ShapeError("decoder head: need at least 2 frames for reflection padding");
  nn::Tensor3 act = hidden;
  nn::leaky_relu_inplace(act, kHeadSlope);
  nn::Tensor3 padded(act.batch, act.channels, act.time + 1);
  for (std::size_t b = 0; b < act.batch; ++b) {
    for (std::size_t c = 0; c < act.channels; ++c) {
      const auto src = act.row(b, c);
      auto dst = padded.row(b, c);
      dst[0] = src[1];
      std::ranges::copy(src, dst.begin() + 1);
    }
  }
  return nn::conv1d(padded, *head_.weight, head_.bias_span(), {1, 1, (cfg_.head_kernel - 1) / 2});
}

Waveform Decoder::forward(const nn::Tensor3& z, std::span<const float> g) const {
  if (z.batch != 1) throw ShapeError("decoder: batch size must be 1");
  const nn::Tensor3 hidden = trunk(z, g);
  const SubbandSpectra spectra = mag_phase_heads(head(hidden), cfg_);
  const auto bands = subband_istft(spectra, cfg_);
  Waveform out;
  out.samples = multiband_synthesis(bands, synth_filter_, cfg_);
  return out;
}

}  // namespace qvc::model
