#include <atomic>
#include <cstdlib>
#include <string_view>

#include "qvc/errors.hpp"
#include "qvc/simd/kernels.hpp"

namespace qvc::simd {
namespace {

Backend detect() noexcept {
  Backend best = Backend::Scalar;
#if QVC_HAVE_AVX2_KERNELS
  if (backend_supported(Backend::Avx2)) best = Backend::Avx2;
#endif
  if (const char* env = std::getenv("QVC_SIMD")) {
    const std::string_view v(env);
    if (v == "scalar") best = Backend::Scalar;
  }
  return best;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{detect()};
  return b;
}

}  // namespace

const char* backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

bool backend_supported(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2:
#if QVC_HAVE_AVX2_KERNELS
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_supported(b)) {
    throw InvalidArgument(std::string("SIMD backend not supported on this CPU: ") + backend_name(b));
  }
  current().store(b, std::memory_order_relaxed);
}

void gemm_rows(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
               const float* const* b_rows, float* c, std::size_t ldc) {
#if QVC_HAVE_AVX2_KERNELS
  if (active_backend() == Backend::Avx2) return avx2::gemm_rows(m, n, k, a, lda, b_rows, c, ldc);
#endif
  scalar::gemm_rows(m, n, k, a, lda, b_rows, c, ldc);
}

float dot(std::span<const float> a, std::span<const float> b) {
#if QVC_HAVE_AVX2_KERNELS
  if (active_backend() == Backend::Avx2) return avx2::dot(a, b);
#endif
  return scalar::dot(a, b);
}

void axpy(float alpha, std::span<const float> x, std::span<float> y) {
#if QVC_HAVE_AVX2_KERNELS
  if (active_backend() == Backend::Avx2) return avx2::axpy(alpha, x, y);
#endif
  scalar::axpy(alpha, x, y);
}

}  // namespace qvc::simd
