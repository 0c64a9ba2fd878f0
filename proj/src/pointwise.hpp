#pragma once

// Small fixed-capacity matrices used inside per-grid-point loops.

#include <array>
#include <stdexcept>

#include "cforge/curvature.hpp"

namespace cforge::detail {

inline constexpr int kMaxDim = 8;

struct Mat {
  int n = 0;
  std::array<std::array<double, kMaxDim>, kMaxDim> a{};
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
};

inline void check_dim(int n) {
  if (n > kMaxDim) throw std::invalid_argument("dimension exceeds supported maximum of 8");
}

inline Mat gather(const SymField& s, std::size_t p) {
  Mat m;
  m.n = s.dim();
  for (int i = 0; i < m.n; ++i) {
    for (int j = i; j < m.n; ++j) {
      const double v = s(i, j)[p];
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

inline void scatter(SymField& s, std::size_t p, const Mat& m) {
  for (int i = 0; i < m.n; ++i) {
    for (int j = i; j < m.n; ++j) s(i, j)[p] = 0.5 * (m(i, j) + m(j, i));
  }
}

// Symmetric field read into a matrix without the symmetrizing average.
inline void scatter_upper(SymField& s, std::size_t p, const Mat& m) {
  for (int i = 0; i < m.n; ++i) {
    for (int j = i; j < m.n; ++j) s(i, j)[p] = m(i, j);
  }
}

inline Mat mul(const Mat& x, const Mat& y) {
  Mat r;
  r.n = x.n;
  for (int i = 0; i < x.n; ++i) {
    for (int j = 0; j < x.n; ++j) {
      double s = 0.0;
      for (int k = 0; k < x.n; ++k) s += x(i, k) * y(k, j);
      r(i, j) = s;
    }
  }
  return r;
}

// sum_ij x_ij y_ij
inline double contract(const Mat& x, const Mat& y) {
  double s = 0.0;
  for (int i = 0; i < x.n; ++i) {
    for (int j = 0; j < x.n; ++j) s += x(i, j) * y(i, j);
  }
  return s;
}

// x_ia y_ab x_jb, i.e. x y x^T for symmetric x
inline Mat sandwich(const Mat& x, const Mat& y) {
  Mat xy = mul(x, y);
  Mat r;
  r.n = x.n;
  for (int i = 0; i < x.n; ++i) {
    for (int j = 0; j < x.n; ++j) {
      double s = 0.0;
      for (int b = 0; b < x.n; ++b) s += xy(i, b) * x(j, b);
      r(i, j) = s;
    }
  }
  return r;
}

// A^k_ij at one point as a dense [k][i][j] array.
struct PointA {
  int n;
  std::array<double, detail::kMaxDim * detail::kMaxDim * detail::kMaxDim> v{};
  double operator()(int k, int i, int j) const { return v[static_cast<std::size_t>((k * n + i) * n + j)]; }
  double& operator()(int k, int i, int j) { return v[static_cast<std::size_t>((k * n + i) * n + j)]; }
};

inline PointA gather_a(const ChristoffelDelta& A, std::size_t p) {
  PointA a{A.dim()};
  for (int k = 0; k < a.n; ++k) {
    for (int i = 0; i < a.n; ++i) {
      for (int j = i; j < a.n; ++j) {
        const double x = A[k](i, j)[p];
        a(k, i, j) = x;
        a(k, j, i) = x;
      }
    }
  }
  return a;
}

}  // namespace cforge::detail
