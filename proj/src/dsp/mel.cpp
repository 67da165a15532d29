#include "qvc/dsp/mel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qvc/errors.hpp"

namespace qvc::dsp {
namespace {

constexpr double kLinearStep = 200.0 / 3.0;
constexpr double kLogStartHz = 1000.0;
constexpr double kLogStartMel = kLogStartHz / kLinearStep;

double log_step() { return std::log(6.4) / 27.0; }

}  // namespace

double hz_to_mel(double hz) {
  if (hz < kLogStartHz) return hz / kLinearStep;
  return kLogStartMel + std::log(hz / kLogStartHz) / log_step();
}

double mel_to_hz(double mel) {
  if (mel < kLogStartMel) return mel * kLinearStep;
  return kLogStartHz * std::exp(log_step() * (mel - kLogStartMel));
}

Matrix mel_filterbank(const MelConfig& cfg) {
  const std::size_t bins = cfg.stft.bins();
  const std::size_t n_mels = cfg.n_mels;
  if (n_mels == 0) throw InvalidArgument("mel_filterbank: n_mels must be positive");
  if (!(cfg.fmax > cfg.fmin) || cfg.fmin < 0.0) throw InvalidArgument("mel_filterbank: need 0 <= fmin < fmax");

  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }

  Matrix fb(n_mels, bins);
  const double bin_hz = static_cast<double>(cfg.sample_rate) / static_cast<double>(cfg.stft.n_fft);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m];
    const double mid = edges[m + 1];
    const double hi = edges[m + 2];
    const double norm = 2.0 / (hi - lo);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = bin_hz * static_cast<double>(k);
      const double rise = (f - lo) / (mid - lo);
      const double fall = (hi - f) / (hi - mid);
      fb(m, k) = static_cast<float>(std::max(0.0, std::min(rise, fall)) * norm);
    }
  }
  return fb;
}

MelSpectrogram mel_from_magnitude(const Matrix& magnitude, const MelConfig& cfg) {
  if (magnitude.cols != cfg.stft.bins()) {
    throw ShapeError("mel: magnitude has " + std::to_string(magnitude.cols) + " bins, expected " +
                     std::to_string(cfg.stft.bins()));
  }
  const Matrix fb = mel_filterbank(cfg);
  MelSpectrogram out{Matrix(magnitude.rows, cfg.n_mels), cfg.log_floor};
  for (std::size_t t = 0; t < magnitude.rows; ++t) {
    const auto mag = magnitude.row(t);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      const auto w = fb.row(m);
      double acc = 0.0;
      for (std::size_t k = 0; k < mag.size(); ++k) acc += static_cast<double>(w[k]) * mag[k];
      out.frames(t, m) = static_cast<float>(std::log(std::max(acc, cfg.log_floor)));
    }
  }
  return out;
}

MelSpectrogram mel_spectrogram(const Waveform& w, const MelConfig& cfg) {
  return mel_from_magnitude(magnitude(stft(w, cfg.stft)), cfg);
}

MelSpectrogram sr_resize(const MelSpectrogram& m, double ratio) {
  if (!(ratio >= 0.5 && ratio <= 2.0)) {
    throw InvalidArgument("sr_resize: ratio must lie in [0.5, 2.0], got " + std::to_string(ratio));
  }
  const std::size_t bands = m.num_bands();
  MelSpectrogram out{Matrix(m.num_frames(), bands), m.log_floor};
  if (ratio == 1.0) {
    out.frames = m.frames;
    return out;
  }
  const float floor_value = static_cast<float>(std::log(m.log_floor));
  const double top = static_cast<double>(bands - 1);
  for (std::size_t t = 0; t < m.num_frames(); ++t) {
    const auto src = m.frames.row(t);
    auto dst = out.frames.row(t);
    for (std::size_t j = 0; j < bands; ++j) {
      const double pos = static_cast<double>(j) / ratio;
      if (pos > top) {
        dst[j] = floor_value;
        continue;
      }
      const auto lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, bands - 1);
      const double frac = pos - static_cast<double>(lo);
      dst[j] = static_cast<float>((1.0 - frac) * src[lo] + frac * src[hi]);
    }
  }
  return out;
}

}  // namespace qvc::dsp
