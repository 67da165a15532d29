#include "qvc/dsp/stft.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qvc/errors.hpp"

namespace qvc {

void validate_waveform(const Waveform& w) {
  if (w.sample_rate != kSampleRate) {
    throw InvalidArgument("waveform sample rate must be 16000 Hz, got " + std::to_string(w.sample_rate));
  }
  for (float v : w.samples) {
    if (!std::isfinite(v)) throw InvalidArgument("waveform contains non-finite samples");
  }
}

}  // namespace qvc

namespace qvc::dsp {

void StftConfig::validate() const {
  if (hop == 0 || win_length == 0 || n_fft == 0) throw InvalidArgument("STFT sizes must be positive");
  if (win_length > n_fft) throw InvalidArgument("STFT win_length must not exceed n_fft");
  if (hop > win_length) throw InvalidArgument("STFT hop must not exceed win_length");
  if (win_length < 2) throw InvalidArgument("STFT window needs at least 2 samples");
}

std::vector<double> hann_window(std::size_t n) {
  if (n < 2) throw InvalidArgument("hann_window: n must be >= 2");
  std::vector<double> w(n);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = 0.5 - 0.5 * std::cos(step * static_cast<double>(k));
  return w;
}

std::vector<double> padded_window(const StftConfig& cfg) {
  const auto hann = hann_window(cfg.win_length);
  std::vector<double> w(cfg.n_fft, 0.0);
  const std::size_t offset = (cfg.n_fft - cfg.win_length) / 2;
  for (std::size_t k = 0; k < cfg.win_length; ++k) w[offset + k] = hann[k];
  return w;
}

std::size_t stft_frame_count(std::size_t length, const StftConfig& cfg) { return 1 + length / cfg.hop; }

ComplexSpectrogram stft(std::span<const float> samples, const StftConfig& cfg) {
  cfg.validate();
  const std::size_t len = samples.size();
  if (len == 0) throw InvalidArgument("stft: empty input");
  const std::size_t pad = cfg.n_fft / 2;
  if (len < cfg.win_length || len <= pad) {
    throw InvalidArgument("stft: input of " + std::to_string(len) + " samples is shorter than the window");
  }

  // Reflect padding (edge sample not repeated).
  std::vector<double> padded(len + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    padded[pad - 1 - i] = samples[i + 1];
    padded[pad + len + i] = samples[len - 2 - i];
  }
  for (std::size_t i = 0; i < len; ++i) padded[pad + i] = samples[i];

  const std::size_t frames = stft_frame_count(len, cfg);
  ComplexSpectrogram out(cfg, frames);
  const FftPlan plan(cfg.n_fft);
  const auto window = padded_window(cfg);
  std::vector<double> frame(cfg.n_fft);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = padded.data() + t * cfg.hop;
    for (std::size_t k = 0; k < cfg.n_fft; ++k) frame[k] = src[k] * window[k];
    rfft(plan, frame, out.frame(t));
  }
  return out;
}

ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg) {
  validate_waveform(w);
  return stft(std::span<const float>(w.samples), cfg);
}

IstftEngine::IstftEngine(const StftConfig& cfg) : cfg_(cfg), plan_((cfg.validate(), cfg.n_fft)), window_(padded_window(cfg)) {}

std::vector<float> IstftEngine::run(const ComplexSpectrogram& s) const {
  if (!(s.config == cfg_)) throw ShapeError("istft: spectrogram configuration does not match engine");
  if (s.bins.size() != s.frames * cfg_.bins()) throw ShapeError("istft: bin count inconsistent with frame count");
  if (s.frames == 0) return {};

  const std::size_t n_fft = cfg_.n_fft;
  const std::size_t hop = cfg_.hop;
  const std::size_t full = n_fft + hop * (s.frames - 1);
  std::vector<double> acc(full, 0.0);
  std::vector<double> wsum(full, 0.0);
  std::vector<double> frame(n_fft);
  for (std::size_t t = 0; t < s.frames; ++t) {
    irfft(plan_, s.frame(t), frame);
    double* dst = acc.data() + t * hop;
    double* ws = wsum.data() + t * hop;
    for (std::size_t k = 0; k < n_fft; ++k) {
      dst[k] += frame[k] * window_[k];
      ws[k] += window_[k] * window_[k];
    }
  }

  const std::size_t start = n_fft / 2;
  const std::size_t out_len = hop * (s.frames - 1);
  std::vector<float> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double w = wsum[start + i];
    if (w < 1e-8) {
      throw NumericalError("istft: window overlap sum " + std::to_string(w) + " at sample " + std::to_string(i) +
                           " is below 1e-8; configuration does not satisfy overlap-add");
    }
    out[i] = static_cast<float>(acc[start + i] / w);
  }
  return out;
}

std::vector<float> istft(const ComplexSpectrogram& s) { return IstftEngine(s.config).run(s); }

Matrix magnitude(const ComplexSpectrogram& s) {
  Matrix m(s.frames, s.bins_per_frame());
  for (std::size_t i = 0; i < s.bins.size(); ++i) m.data[i] = static_cast<float>(std::abs(s.bins[i]));
  return m;
}

Matrix linear_magnitude(const Waveform& w) { return magnitude(stft(w, kAnalysisStft)); }

}  // namespace qvc::dsp
