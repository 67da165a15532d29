#include "qvc/dsp/fft.hpp"

#include <cmath>
#include <numbers>

#include "qvc/errors.hpp"

namespace qvc::dsp {
namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n), pow2_(is_pow2(n)) {
  if (n == 0) throw InvalidArgument("FFT length must be positive");
  const double pi = std::numbers::pi;
  if (pow2_) {
    twiddles_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double a = -2.0 * pi * static_cast<double>(k) / static_cast<double>(n);
      twiddles_[k] = {std::cos(a), std::sin(a)};
    }
    bitrev_.resize(n);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      bitrev_[i] = r;
    }
    return;
  }

  // Bluestein: k^2 is reduced mod 2n before the angle is formed so the chirp
  // stays accurate for large k.
  const std::size_t m = next_pow2(2 * n - 1);
  chirp_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k2 = (k * k) % (2 * n);
    const double a = -pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp_[k] = {std::cos(a), std::sin(a)};
  }
  inner_ = std::make_unique<FftPlan>(m);
  kernel_fft_.assign(m, cplx{});
  kernel_fft_[0] = std::conj(chirp_[0]);
  for (std::size_t k = 1; k < n; ++k) {
    kernel_fft_[k] = std::conj(chirp_[k]);
    kernel_fft_[m - k] = std::conj(chirp_[k]);
  }
  inner_->forward(kernel_fft_);
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::radix2(std::span<cplx> data) const {
  const std::size_t n = n_;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cplx w = twiddles_[k * step];
        const cplx u = data[start + k];
        const cplx v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

void FftPlan::bluestein(std::span<cplx> data) const {
  const std::size_t m = inner_->size();
  std::vector<cplx> work(m, cplx{});
  for (std::size_t k = 0; k < n_; ++k) work[k] = data[k] * chirp_[k];
  inner_->forward(work);
  for (std::size_t k = 0; k < m; ++k) work[k] *= kernel_fft_[k];
  inner_->inverse(work);
  for (std::size_t k = 0; k < n_; ++k) data[k] = work[k] * chirp_[k];
}

void FftPlan::forward(std::span<cplx> data) const {
  if (data.size() != n_) throw ShapeError("FFT input length does not match plan");
  if (pow2_) {
    radix2(data);
  } else {
    bluestein(data);
  }
}

void FftPlan::inverse(std::span<cplx> data) const {
  if (data.size() != n_) throw ShapeError("FFT input length does not match plan");
  for (auto& v : data) v = std::conj(v);
  forward(data);
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : data) v = std::conj(v) * scale;
}

void rfft(const FftPlan& plan, std::span<const double> in, std::span<cplx> out) {
  const std::size_t n = plan.size();
  if (in.size() != n || out.size() != n / 2 + 1) throw ShapeError("rfft: buffer sizes do not match plan");
  std::vector<cplx> work(in.begin(), in.end());
  plan.forward(work);
  for (std::size_t k = 0; k <= n / 2; ++k) out[k] = work[k];
  out[0].imag(0.0);
  if (n % 2 == 0) out[n / 2].imag(0.0);
}

void irfft(const FftPlan& plan, std::span<const cplx> in, std::span<double> out) {
  const std::size_t n = plan.size();
  if (out.size() != n || in.size() != n / 2 + 1) throw ShapeError("irfft: buffer sizes do not match plan");
  std::vector<cplx> work(n);
  work[0] = {in[0].real(), 0.0};
  for (std::size_t k = 1; k < (n + 1) / 2; ++k) {
    work[k] = in[k];
    work[n - k] = std::conj(in[k]);
  }
  if (n % 2 == 0) work[n / 2] = {in[n / 2].real(), 0.0};
  plan.inverse(work);
  for (std::size_t t = 0; t < n; ++t) out[t] = work[t].real();
}

}  // namespace qvc::dsp
