#pragma once

#include <cstddef>

#include "qvc/dsp/stft.hpp"
#include "qvc/types.hpp"

namespace qvc::dsp {

/// Log-mel analysis parameters. Slaney mel scale with Slaney area
/// normalization, applied to the magnitude (not power) spectrogram.
struct MelConfig {
  StftConfig stft = kAnalysisStft;
  int sample_rate = kSampleRate;
  std::size_t n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-5;
};

/// T x 80 log-mel energies.
struct MelSpectrogram {
  Matrix frames;
  double log_floor = 1e-5;

  std::size_t num_frames() const noexcept { return frames.rows; }
  std::size_t num_bands() const noexcept { return frames.cols; }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// n_mels x (n_fft/2 + 1) triangular filterbank.
Matrix mel_filterbank(const MelConfig& cfg = {});

MelSpectrogram mel_from_magnitude(const Matrix& magnitude, const MelConfig& cfg = {});
MelSpectrogram mel_spectrogram(const Waveform& w, const MelConfig& cfg = {});

// Spectrogram-resize augmentation. Output band j takes the linearly
// interpolated value at source band j / ratio; bands whose source position
// falls past the top band are filled with log(floor). Time is untouched.
// Requires 0.5 <= ratio <= 2.
MelSpectrogram sr_resize(const MelSpectrogram& m, double ratio);

}  // namespace qvc::dsp
