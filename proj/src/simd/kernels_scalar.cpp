#include "qvc/simd/kernels.hpp"

namespace qvc::simd::scalar {

void gemm_rows(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
               const float* const* b_rows, float* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    float* crow = c + i * ldc;
    const float* arow = a + i * lda;
    for (std::size_t p = 0; p < k; ++p) {
      const float w = arow[p];
      const float* brow = b_rows[p];
      for (std::size_t j = 0; j < n; ++j) crow[j] += w * brow[j];
    }
  }
}

float dot(std::span<const float> a, std::span<const float> b) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace qvc::simd::scalar
