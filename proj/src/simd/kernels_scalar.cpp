#include "cforge/simd/kernels.hpp"

namespace cforge::simd {
namespace {

void add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale(double alpha, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) s[l] = s[l] + a[i + l] * b[i + l];
  }
  double total = (s[0] + s[1]) + (s[2] + s[3]);
  for (; i < n; ++i) total = total + a[i] * b[i];
  return total;
}

void mul_ik(const double* k, const double* c, double* out, std::size_t ncomplex) {
  for (std::size_t j = 0; j < ncomplex; ++j) {
    const double re = c[2 * j];
    const double im = c[2 * j + 1];
    out[2 * j] = -(k[j] * im);
    out[2 * j + 1] = k[j] * re;
  }
}

void mul_real(const double* m, const double* c, double* out, std::size_t ncomplex) {
  for (std::size_t j = 0; j < ncomplex; ++j) {
    out[2 * j] = m[j] * c[2 * j];
    out[2 * j + 1] = m[j] * c[2 * j + 1];
  }
}

void sym3_inverse(const double* const* g, double* const* inv, double* det, std::size_t n) {
  for (std::size_t p = 0; p < n; ++p) {
    const double a = g[0][p], b = g[1][p], c = g[2][p];
    const double d = g[3][p], e = g[4][p], f = g[5][p];
    const double c00 = d * f - e * e;
    const double c01 = c * e - b * f;
    const double c02 = b * e - c * d;
    const double c11 = a * f - c * c;
    const double c12 = b * c - a * e;
    const double c22 = a * d - b * b;
    const double dt = (a * c00 + b * c01) + c * c02;
    det[p] = dt;
    inv[0][p] = c00 / dt;
    inv[1][p] = c01 / dt;
    inv[2][p] = c02 / dt;
    inv[3][p] = c11 / dt;
    inv[4][p] = c12 / dt;
    inv[5][p] = c22 / dt;
  }
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::scalar, add, sub, mul, axpy, scale, dot, mul_ik, mul_real, sym3_inverse};
}

}  // namespace cforge::simd
