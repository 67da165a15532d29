#pragma once

// Data-parallel inner loops used by the layer library.
//
// Every kernel has a scalar reference in qvc::simd::scalar and, where the
// target supports it, a vectorized variant (qvc::simd::avx2). The dispatching
// entry points in qvc::simd pick the variant once at startup from CPU
// features; QVC_SIMD=scalar|avx2 overrides the choice.

#include <cstddef>
#include <span>

namespace qvc::simd {

enum class Backend { Scalar, Avx2 };

const char* backend_name(Backend b) noexcept;
bool backend_supported(Backend b) noexcept;
Backend active_backend() noexcept;
// Throws InvalidArgument when the CPU cannot run `b`.
void set_backend(Backend b);

// C[i, j] += sum_p A[i*lda + p] * b_rows[p][j]   for i < m, j < n, p < k.
// Each B row is a separate pointer so a convolution can pass shifted views
// of one padded input without materializing an im2col matrix.
void gemm_rows(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
               const float* const* b_rows, float* c, std::size_t ldc);

float dot(std::span<const float> a, std::span<const float> b);

// y += alpha * x
void axpy(float alpha, std::span<const float> x, std::span<float> y);

namespace scalar {
void gemm_rows(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
               const float* const* b_rows, float* c, std::size_t ldc);
float dot(std::span<const float> a, std::span<const float> b);
void axpy(float alpha, std::span<const float> x, std::span<float> y);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define QVC_HAVE_AVX2_KERNELS 1
namespace avx2 {
void gemm_rows(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
               const float* const* b_rows, float* c, std::size_t ldc);
float dot(std::span<const float> a, std::span<const float> b);
void axpy(float alpha, std::span<const float> x, std::span<float> y);
}  // namespace avx2
#else
#define QVC_HAVE_AVX2_KERNELS 0
#endif

}  // namespace qvc::simd
