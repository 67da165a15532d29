#pragma once

// Short-time Fourier analysis/synthesis.
//
// Conventions (normative, see docs/dsp.md):
//  * periodic Hann window, zero-padded symmetrically to n_fft when
//    win_length < n_fft;
//  * analysis reflect-pads n_fft/2 samples on both sides, so a signal of
//    length L yields 1 + floor(L / hop) frames;
//  * synthesis overlap-adds windowed inverse frames, divides by the
//    overlapped squared window and trims n_fft/2 from the front, giving
//    (frames - 1) * hop samples.

#include <cstddef>
#include <span>
#include <vector>

#include "qvc/dsp/fft.hpp"
#include "qvc/types.hpp"

namespace qvc::dsp {

struct StftConfig {
  std::size_t n_fft = 1280;
  std::size_t hop = 320;
  std::size_t win_length = 1280;

  std::size_t bins() const noexcept { return n_fft / 2 + 1; }
  // Throws InvalidArgument unless n_fft >= win_length >= hop >= 1.
  void validate() const;
  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

inline constexpr StftConfig kAnalysisStft{1280, 320, 1280};
inline constexpr StftConfig kSubbandStft{16, 4, 16};

/// Frame-major complex spectrogram: frames x (n_fft/2 + 1).
struct ComplexSpectrogram {
  StftConfig config;
  std::size_t frames = 0;
  std::vector<cplx> bins;

  ComplexSpectrogram() = default;
  ComplexSpectrogram(StftConfig cfg, std::size_t n_frames)
      : config(cfg), frames(n_frames), bins(n_frames * cfg.bins()) {}

  std::size_t bins_per_frame() const noexcept { return config.bins(); }
  std::span<cplx> frame(std::size_t t) { return {bins.data() + t * bins_per_frame(), bins_per_frame()}; }
  std::span<const cplx> frame(std::size_t t) const { return {bins.data() + t * bins_per_frame(), bins_per_frame()}; }
};

// Periodic Hann: w[k] = 0.5 - 0.5 cos(2 pi k / n). Requires n >= 2.
std::vector<double> hann_window(std::size_t n);

// Hann of win_length centered in an n_fft-long zero frame.
std::vector<double> padded_window(const StftConfig& cfg);

std::size_t stft_frame_count(std::size_t length, const StftConfig& cfg);

ComplexSpectrogram stft(std::span<const float> samples, const StftConfig& cfg = kAnalysisStft);
ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg = kAnalysisStft);

// Throws NumericalError if the overlapped squared window drops below 1e-8
// at any output sample.
std::vector<float> istft(const ComplexSpectrogram& s);

/// Reusable synthesis state for many short inverse transforms with one
/// configuration (the decoder runs one per sub-band per call).
class IstftEngine {
 public:
  explicit IstftEngine(const StftConfig& cfg);
  const StftConfig& config() const noexcept { return cfg_; }
  std::vector<float> run(const ComplexSpectrogram& s) const;

 private:
  StftConfig cfg_;
  FftPlan plan_;
  std::vector<double> window_;
};

// |stft| with the analysis configuration: T x 641.
Matrix linear_magnitude(const Waveform& w);
Matrix magnitude(const ComplexSpectrogram& s);

}  // namespace qvc::dsp
