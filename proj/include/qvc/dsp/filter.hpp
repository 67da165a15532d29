#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qvc/types.hpp"

namespace qvc::dsp {

// out[k * factor] = in[k] * factor, zeros elsewhere. The gain keeps the DC
// level of the band after an ideal 1/factor low-pass.
std::vector<float> zero_insert_upsample(std::span<const float> in, std::size_t factor);

// Same-length FIR filtering with an odd tap count:
//   y[n] = sum_j taps[j] * x[n + (L-1)/2 - j],  x = 0 outside [0, N).
std::vector<float> fir_filter(std::span<const float> x, std::span<const float> taps);

// Kaiser-windowed sinc low-pass prototype with `taps + 1` coefficients.
// cutoff is a fraction of Nyquist.
std::vector<double> kaiser_lowpass(std::size_t taps, double cutoff, double beta);

// Cosine-modulated synthesis bank built from kaiser_lowpass(taps - 1, cutoff,
// beta): subbands x taps, stored in fir_filter orientation.
Matrix pqmf_synthesis_bank(std::size_t subbands, std::size_t taps, double cutoff = 0.142, double beta = 9.0);

}  // namespace qvc::dsp
