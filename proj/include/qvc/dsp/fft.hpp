#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace qvc::dsp {

using cplx = std::complex<double>;

/// Complex DFT of a fixed length. Powers of two use an iterative radix-2
/// transform; any other length goes through Bluestein's chirp-z algorithm on
/// a power-of-two inner plan. Plans are immutable and may be shared between
/// threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;

  std::size_t size() const noexcept { return n_; }

  // X[k] = sum_t x[t] exp(-2 pi i k t / n), in place.
  void forward(std::span<cplx> data) const;
  // x[t] = (1/n) sum_k X[k] exp(+2 pi i k t / n), in place.
  void inverse(std::span<cplx> data) const;

 private:
  void radix2(std::span<cplx> data) const;
  void bluestein(std::span<cplx> data) const;

  std::size_t n_ = 0;
  bool pow2_ = true;
  std::vector<cplx> twiddles_;        // radix-2: exp(-2 pi i k / n), k < n/2
  std::vector<std::size_t> bitrev_;   // radix-2 permutation
  std::vector<cplx> chirp_;           // bluestein: exp(-i pi k^2 / n)
  std::vector<cplx> kernel_fft_;      // bluestein: FFT of the conjugate chirp
  std::unique_ptr<FftPlan> inner_;
};

// One-sided transform of a real frame; out.size() == n/2 + 1.
void rfft(const FftPlan& plan, std::span<const double> in, std::span<cplx> out);
// Inverse of rfft under Hermitian symmetry; imaginary parts of the DC and
// Nyquist bins are ignored.
void irfft(const FftPlan& plan, std::span<const cplx> in, std::span<double> out);

}  // namespace qvc::dsp
