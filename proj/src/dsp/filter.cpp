#include "qvc/dsp/filter.hpp"

#include <cmath>
#include <numbers>

#include "qvc/errors.hpp"

namespace qvc::dsp {

std::vector<float> zero_insert_upsample(std::span<const float> in, std::size_t factor) {
  if (factor == 0) throw InvalidArgument("zero_insert_upsample: factor must be >= 1");
  std::vector<float> out(in.size() * factor, 0.0f);
  const float gain = static_cast<float>(factor);
  for (std::size_t k = 0; k < in.size(); ++k) out[k * factor] = in[k] * gain;
  return out;
}

std::vector<float> fir_filter(std::span<const float> x, std::span<const float> taps) {
  if (taps.empty()) throw InvalidArgument("fir_filter: taps must be non-empty");
  if (taps.size() % 2 == 0) throw InvalidArgument("fir_filter: tap count must be odd for same-length output");
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto len = static_cast<std::ptrdiff_t>(taps.size());
  const std::ptrdiff_t center = (len - 1) / 2;
  std::vector<float> y(x.size(), 0.0f);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, i + center - (n - 1));
    const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(len - 1, i + center);
    for (std::ptrdiff_t j = j_lo; j <= j_hi; ++j) acc += static_cast<double>(taps[j]) * x[i + center - j];
    y[i] = static_cast<float>(acc);
  }
  return y;
}

std::vector<double> kaiser_lowpass(std::size_t taps, double cutoff, double beta) {
  if (taps % 2 != 0) throw InvalidArgument("kaiser_lowpass: taps must be even");
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw InvalidArgument("kaiser_lowpass: cutoff must be in (0, 1)");
  const double omega = std::numbers::pi * cutoff;
  const double mid = static_cast<double>(taps) / 2.0;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  std::vector<double> h(taps + 1);
  for (std::size_t n = 0; n <= taps; ++n) {
    const double d = static_cast<double>(n) - mid;
    const double ideal = d == 0.0 ? omega / std::numbers::pi : std::sin(omega * d) / (std::numbers::pi * d);
    const double r = d / mid;
    const double win = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[n] = ideal * win;
  }
  return h;
}

Matrix pqmf_synthesis_bank(std::size_t subbands, std::size_t taps, double cutoff, double beta) {
  if (subbands == 0) throw InvalidArgument("pqmf_synthesis_bank: subbands must be positive");
  if (taps < 3 || taps % 2 == 0) throw InvalidArgument("pqmf_synthesis_bank: taps must be odd and >= 3");
  const auto proto = kaiser_lowpass(taps - 1, cutoff, beta);
  const double mid = static_cast<double>(taps - 1) / 2.0;
  const double k_count = static_cast<double>(subbands);
  Matrix bank(subbands, taps);
  for (std::size_t k = 0; k < subbands; ++k) {
    const double phase = (k % 2 == 0 ? -1.0 : 1.0) * std::numbers::pi / 4.0;
    const double freq = (2.0 * static_cast<double>(k) + 1.0) * std::numbers::pi / (2.0 * k_count);
    for (std::size_t n = 0; n < taps; ++n) {
      const double g = 2.0 * proto[n] * std::cos(freq * (static_cast<double>(n) - mid) + phase);
      // Stored reversed: fir_filter convolves, the modulated bank is defined
      // for correlation.
      bank(k, taps - 1 - n) = static_cast<float>(g);
    }
  }
  return bank;
}

}  // namespace qvc::dsp
