#include "cforge/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

#define CFORGE_AVX2 __attribute__((target("avx2")))

namespace cforge::simd {
namespace {

CFORGE_AVX2 void add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

CFORGE_AVX2 void sub(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

CFORGE_AVX2 void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

CFORGE_AVX2 void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

CFORGE_AVX2 void scale(double alpha, const double* x, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

CFORGE_AVX2 double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  double total = (s[0] + s[1]) + (s[2] + s[3]);
  for (; i < n; ++i) total = total + a[i] * b[i];
  return total;
}

CFORGE_AVX2 void mul_ik(const double* k, const double* c, double* out, std::size_t ncomplex) {
  const __m256d sign = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);
  std::size_t j = 0;
  for (; j + 2 <= ncomplex; j += 2) {
    const __m128d kk = _mm_loadu_pd(k + j);
    const __m256d kd = _mm256_set_m128d(_mm_unpackhi_pd(kk, kk), _mm_unpacklo_pd(kk, kk));
    const __m256d swapped = _mm256_permute_pd(_mm256_loadu_pd(c + 2 * j), 0b0101);
    _mm256_storeu_pd(out + 2 * j, _mm256_xor_pd(_mm256_mul_pd(kd, swapped), sign));
  }
  for (; j < ncomplex; ++j) {
    const double re = c[2 * j];
    const double im = c[2 * j + 1];
    out[2 * j] = -(k[j] * im);
    out[2 * j + 1] = k[j] * re;
  }
}

CFORGE_AVX2 void mul_real(const double* m, const double* c, double* out, std::size_t ncomplex) {
  std::size_t j = 0;
  for (; j + 2 <= ncomplex; j += 2) {
    const __m128d mm = _mm_loadu_pd(m + j);
    const __m256d md = _mm256_set_m128d(_mm_unpackhi_pd(mm, mm), _mm_unpacklo_pd(mm, mm));
    _mm256_storeu_pd(out + 2 * j, _mm256_mul_pd(md, _mm256_loadu_pd(c + 2 * j)));
  }
  for (; j < ncomplex; ++j) {
    out[2 * j] = m[j] * c[2 * j];
    out[2 * j + 1] = m[j] * c[2 * j + 1];
  }
}

CFORGE_AVX2 void sym3_inverse(const double* const* g, double* const* inv, double* det, std::size_t n) {
  std::size_t p = 0;
  for (; p + 4 <= n; p += 4) {
    const __m256d a = _mm256_loadu_pd(g[0] + p), b = _mm256_loadu_pd(g[1] + p);
    const __m256d c = _mm256_loadu_pd(g[2] + p), d = _mm256_loadu_pd(g[3] + p);
    const __m256d e = _mm256_loadu_pd(g[4] + p), f = _mm256_loadu_pd(g[5] + p);
    const __m256d c00 = _mm256_sub_pd(_mm256_mul_pd(d, f), _mm256_mul_pd(e, e));
    const __m256d c01 = _mm256_sub_pd(_mm256_mul_pd(c, e), _mm256_mul_pd(b, f));
    const __m256d c02 = _mm256_sub_pd(_mm256_mul_pd(b, e), _mm256_mul_pd(c, d));
    const __m256d c11 = _mm256_sub_pd(_mm256_mul_pd(a, f), _mm256_mul_pd(c, c));
    const __m256d c12 = _mm256_sub_pd(_mm256_mul_pd(b, c), _mm256_mul_pd(a, e));
    const __m256d c22 = _mm256_sub_pd(_mm256_mul_pd(a, d), _mm256_mul_pd(b, b));
    const __m256d dt = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(a, c00), _mm256_mul_pd(b, c01)),
                                     _mm256_mul_pd(c, c02));
    _mm256_storeu_pd(det + p, dt);
    _mm256_storeu_pd(inv[0] + p, _mm256_div_pd(c00, dt));
    _mm256_storeu_pd(inv[1] + p, _mm256_div_pd(c01, dt));
    _mm256_storeu_pd(inv[2] + p, _mm256_div_pd(c02, dt));
    _mm256_storeu_pd(inv[3] + p, _mm256_div_pd(c11, dt));
    _mm256_storeu_pd(inv[4] + p, _mm256_div_pd(c12, dt));
    _mm256_storeu_pd(inv[5] + p, _mm256_div_pd(c22, dt));
  }
  if (p < n) {
    const double* gt[6];
    double* it[6];
    for (int c = 0; c < 6; ++c) {
      gt[c] = g[c] + p;
      it[c] = inv[c] + p;
    }
    detail::scalar_table.sym3_inverse(gt, it, det + p, n - p);
  }
}

const KernelTable avx2{Isa::avx2, add, sub, mul, axpy, scale, dot, mul_ik, mul_real, sym3_inverse};

}  // namespace

namespace detail {
const KernelTable* avx2_table() { return &avx2; }
}  // namespace detail

}  // namespace cforge::simd

#else

namespace cforge::simd::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace cforge::simd::detail

#endif
