#include "qvc/simd/kernels.hpp"

#if QVC_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <algorithm>
#include <cstdint>

#pragma GCC push_options
#pragma GCC target("avx2,fma")

namespace qvc::simd::avx2 {
namespace {

constexpr std::size_t kRowBlock = 6;
constexpr std::size_t kDepthBlock = 256;

inline __m256i tail_mask(std::size_t width) {
  alignas(32) static const std::int32_t table[16] = {-1, -1, -1, -1, -1, -1, -1, -1, 0, 0, 0, 0, 0, 0, 0, 0};
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(table + 8 - width));
}

// MR rows x 16 columns of C, accumulated over kc rows of B.
template <std::size_t MR>
inline void block_16(std::size_t kc, const float* a, std::size_t lda, const float* const* b, std::size_t col,
                     float* c, std::size_t ldc) {
  __m256 acc0[MR];
  __m256 acc1[MR];
#pragma GCC unroll 6
  for (std::size_t r = 0; r < MR; ++r) {
    acc0[r] = _mm256_loadu_ps(c + r * ldc + col);
    acc1[r] = _mm256_loadu_ps(c + r * ldc + col + 8);
  }
  for (std::size_t p = 0; p < kc; ++p) {
    const __m256 b0 = _mm256_loadu_ps(b[p] + col);
    const __m256 b1 = _mm256_loadu_ps(b[p] + col + 8);
#pragma GCC unroll 6
    for (std::size_t r = 0; r < MR; ++r) {
      const __m256 av = _mm256_broadcast_ss(a + r * lda + p);
      acc0[r] = _mm256_fmadd_ps(av, b0, acc0[r]);
      acc1[r] = _mm256_fmadd_ps(av, b1, acc1[r]);
    }
  }
#pragma GCC unroll 6
  for (std::size_t r = 0; r < MR; ++r) {
    _mm256_storeu_ps(c + r * ldc + col, acc0[r]);
    _mm256_storeu_ps(c + r * ldc + col + 8, acc1[r]);
  }
}

// MR rows x `width` (1..8) columns, masked.
template <std::size_t MR>
inline void block_masked(std::size_t kc, const float* a, std::size_t lda, const float* const* b, std::size_t col,
                         std::size_t width, float* c, std::size_t ldc) {
  const __m256i mask = tail_mask(width);
  __m256 acc[MR];
#pragma GCC unroll 6
  for (std::size_t r = 0; r < MR; ++r) acc[r] = _mm256_maskload_ps(c + r * ldc + col, mask);
  for (std::size_t p = 0; p < kc; ++p) {
    const __m256 bv = _mm256_maskload_ps(b[p] + col, mask);
#pragma GCC unroll 6
    for (std::size_t r = 0; r < MR; ++r) {
      acc[r] = _mm256_fmadd_ps(_mm256_broadcast_ss(a + r * lda + p), bv, acc[r]);
    }
  }
#pragma GCC unroll 6
  for (std::size_t r = 0; r < MR; ++r) _mm256_maskstore_ps(c + r * ldc + col, mask, acc[r]);
}

template <std::size_t MR>
void row_panel(std::size_t n, std::size_t kc, const float* a, std::size_t lda, const float* const* b, float* c,
               std::size_t ldc) {
  std::size_t col = 0;
  for (; col + 16 <= n; col += 16) block_16<MR>(kc, a, lda, b, col, c, ldc);
  for (; col < n; col += 8) block_masked<MR>(kc, a, lda, b, col, std::min<std::size_t>(8, n - col), c, ldc);
}

void panel_dispatch(std::size_t rows, std::size_t n, std::size_t kc, const float* a, std::size_t lda,
                    const float* const* b, float* c, std::size_t ldc) {
  switch (rows) {
    case 6: row_panel<6>(n, kc, a, lda, b, c, ldc); break;
    case 5: row_panel<5>(n, kc, a, lda, b, c, ldc); break;
    case 4: row_panel<4>(n, kc, a, lda, b, c, ldc); break;
    case 3: row_panel<3>(n, kc, a, lda, b, c, ldc); break;
    case 2: row_panel<2>(n, kc, a, lda, b, c, ldc); break;
    case 1: row_panel<1>(n, kc, a, lda, b, c, ldc); break;
    default: break;
  }
}

}  // namespace

void gemm_rows(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
               const float* const* b_rows, float* c, std::size_t ldc) {
  if (m == 0 || n == 0) return;
  for (std::size_t p0 = 0; p0 < k; p0 += kDepthBlock) {
    const std::size_t kc = std::min(kDepthBlock, k - p0);
    for (std::size_t i = 0; i < m; i += kRowBlock) {
      const std::size_t rows = std::min(kRowBlock, m - i);
      panel_dispatch(rows, n, kc, a + i * lda + p0, lda, b_rows + p0, c + i * ldc, ldc);
    }
  }
}

float dot(std::span<const float> a, std::span<const float> b) {
  const std::size_t n = a.size();
  __m256 s0 = _mm256_setzero_ps();
  __m256 s1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm256_fmadd_ps(_mm256_loadu_ps(a.data() + i), _mm256_loadu_ps(b.data() + i), s0);
    s1 = _mm256_fmadd_ps(_mm256_loadu_ps(a.data() + i + 8), _mm256_loadu_ps(b.data() + i + 8), s1);
  }
  if (i < n) {
    for (; i < n; i += 8) {
      const __m256i mask = tail_mask(std::min<std::size_t>(8, n - i));
      s0 = _mm256_fmadd_ps(_mm256_maskload_ps(a.data() + i, mask), _mm256_maskload_ps(b.data() + i, mask), s0);
    }
  }
  const __m256 s = _mm256_add_ps(s0, s1);
  __m128 lo = _mm_add_ps(_mm256_castps256_ps128(s), _mm256_extractf128_ps(s, 1));
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  return _mm_cvtss_f32(lo);
}

void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  const std::size_t n = x.size();
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y.data() + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x.data() + i), _mm256_loadu_ps(y.data() + i)));
  }
  if (i < n) {
    const __m256i mask = tail_mask(n - i);
    const __m256 yv = _mm256_maskload_ps(y.data() + i, mask);
    _mm256_maskstore_ps(y.data() + i, mask, _mm256_fmadd_ps(av, _mm256_maskload_ps(x.data() + i, mask), yv));
  }
}

}  // namespace qvc::simd::avx2

#pragma GCC pop_options

#endif
