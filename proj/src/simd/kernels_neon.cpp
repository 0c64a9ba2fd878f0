#include "cforge/simd/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace cforge::simd {
namespace {

void add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale(double alpha, const double* x, double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double total = (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) +
                 (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
  for (; i < n; ++i) total = total + a[i] * b[i];
  return total;
}

void mul_ik(const double* k, const double* c, double* out, std::size_t ncomplex) {
  const uint64x2_t sign = {0x8000000000000000ULL, 0ULL};
  for (std::size_t j = 0; j < ncomplex; ++j) {
    const float64x2_t v = vld1q_f64(c + 2 * j);
    const float64x2_t swapped = vextq_f64(v, v, 1);
    const float64x2_t prod = vmulq_f64(vdupq_n_f64(k[j]), swapped);
    vst1q_f64(out + 2 * j, vreinterpretq_f64_u64(veorq_u64(vreinterpretq_u64_f64(prod), sign)));
  }
}

void mul_real(const double* m, const double* c, double* out, std::size_t ncomplex) {
  for (std::size_t j = 0; j < ncomplex; ++j) {
    vst1q_f64(out + 2 * j, vmulq_f64(vdupq_n_f64(m[j]), vld1q_f64(c + 2 * j)));
  }
}

const KernelTable neon{Isa::neon, add, sub, mul, axpy, scale, dot, mul_ik, mul_real,
                       detail::scalar_table.sym3_inverse};

}  // namespace

namespace detail {
const KernelTable* neon_table() { return &neon; }
}  // namespace detail

}  // namespace cforge::simd

#else

namespace cforge::simd::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace cforge::simd::detail

#endif
