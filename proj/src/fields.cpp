#include "cforge/fields.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "cforge/simd/kernels.hpp"
#include "pointwise.hpp"

namespace cforge {

using detail::gather;
using detail::Mat;

namespace {

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, detail::kMaxDim, detail::kMaxDim>;

SmallMatrix to_eigen(const Mat& m) {
  SmallMatrix e(m.n, m.n);
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) e(i, j) = m(i, j);
  }
  return e;
}

std::string point_label(const Grid& grid, std::size_t p) {
  std::string s = "(";
  const auto idx = grid.unravel(p);
  for (std::size_t a = 0; a < idx.size(); ++a) s += (a ? "," : "") + std::to_string(idx[a]);
  return s + ")";
}

}  // namespace

EllipticityInfo ellipticity(const SymField& g) {
  detail::check_dim(g.dim());
  EllipticityInfo info;
  info.min_eigenvalue = std::numeric_limits<double>::infinity();
  info.max_eigenvalue = -std::numeric_limits<double>::infinity();
  const std::size_t points = g.components().front().size();
  for (std::size_t p = 0; p < points; ++p) {
    double lo = 0.0, hi = 0.0;
    const Mat m = gather(g, p);
    if (m.n == 3) {
      Eigen::Matrix3d e;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e(i, j) = m(i, j);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
      es.computeDirect(e, Eigen::EigenvaluesOnly);
      lo = es.eigenvalues()(0);
      hi = es.eigenvalues()(2);
    } else {
      Eigen::SelfAdjointEigenSolver<SmallMatrix> es(to_eigen(m), Eigen::EigenvaluesOnly);
      lo = es.eigenvalues()(0);
      hi = es.eigenvalues()(m.n - 1);
    }
    if (lo < info.min_eigenvalue) {
      info.min_eigenvalue = lo;
      info.min_point = p;
    }
    info.max_eigenvalue = std::max(info.max_eigenvalue, hi);
  }
  info.lambda = info.min_eigenvalue > 0.0 ? std::min(info.min_eigenvalue, 1.0 / info.max_eigenvalue) : 0.0;
  return info;
}

EllipticityInfo require_elliptic(const MetricField& g) {
  const auto info = ellipticity(g.g);
  if (!info.positive()) {
    throw NonEllipticMetric("metric is not positive definite at grid point " +
                                point_label(*g.grid_ptr(), info.min_point) +
                                " (smallest eigenvalue " + std::to_string(info.min_eigenvalue) + ")",
                            info.min_point);
  }
  return info;
}

namespace {

// Pointwise inverse of a packed symmetric field; `det` receives determinants.
SymField invert_packed(const SymField& s, Field* det_out) {
  const int n = s.dim();
  detail::check_dim(n);
  const GridPtr& grid = s.grid_ptr();
  SymField inv(grid, n);
  Field det(grid);
  const std::size_t points = grid->total_points();
  if (n == 3) {
    const double* in[6];
    double* out[6];
    for (int c = 0; c < 6; ++c) {
      in[c] = s.components()[static_cast<std::size_t>(c)].data();
      out[c] = inv.components()[static_cast<std::size_t>(c)].data();
    }
    simd::kernels().sym3_inverse(in, out, det.data(), points);
  } else {
    for (std::size_t p = 0; p < points; ++p) {
      const SmallMatrix e = to_eigen(gather(s, p));
      Eigen::PartialPivLU<SmallMatrix> lu(e);
      det[p] = lu.determinant();
      const SmallMatrix ie = lu.inverse();
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) inv(i, j)[p] = 0.5 * (ie(i, j) + ie(j, i));
    }
  }
  for (std::size_t p = 0; p < points; ++p) {
    if (!(std::abs(det[p]) > 0.0) || !std::isfinite(det[p])) {
      throw NonEllipticMetric("singular matrix at grid point " + point_label(*grid, p), p);
    }
  }
  if (det_out) *det_out = std::move(det);
  return inv;
}

}  // namespace

SymField metric_inverse(const MetricField& g) { return invert_packed(g.g, nullptr); }

SymField lower_inverse(const SymField& ginv) { return invert_packed(ginv, nullptr); }

Field sqrt_det(const MetricField& g) {
  Field det;
  invert_packed(g.g, &det);
  for (std::size_t p = 0; p < det.size(); ++p) {
    if (det[p] <= 0.0) {
      throw NonEllipticMetric("metric determinant is not positive at grid point " + point_label(det.grid(), p), p);
    }
    det[p] = std::sqrt(det[p]);
  }
  return det;
}

SymField raise(const SymField& ginv, const SymField& covariant) {
  SymField out(ginv.grid_ptr(), ginv.dim());
  const std::size_t points = ginv.grid_ptr()->total_points();
  for (std::size_t p = 0; p < points; ++p) {
    detail::scatter(out, p, detail::sandwich(gather(ginv, p), gather(covariant, p)));
  }
  return out;
}

SymField lower(const SymField& g, const SymField& contravariant) { return raise(g, contravariant); }

MomentumField pi_from_K(const MetricField& g, const SymField& K) {
  const SymField ginv = metric_inverse(g);
  const Field sg = sqrt_det(g);
  const int n = g.dim();
  SymField pi(g.grid_ptr(), n);
  const std::size_t points = g.grid_ptr()->total_points();
  for (std::size_t p = 0; p < points; ++p) {
    const Mat gi = gather(ginv, p);
    const Mat k = gather(K, p);
    const Mat kup = detail::sandwich(gi, k);
    const double trk = detail::contract(gi, k);
    Mat out;
    out.n = n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = (kup(i, j) - trk * gi(i, j)) * sg[p];
    detail::scatter(pi, p, out);
  }
  return {std::move(pi)};
}

SymField K_from_pi(const MetricField& g, const MomentumField& pi) {
  const Field sg = sqrt_det(g);
  const int n = g.dim();
  SymField K(g.grid_ptr(), n);
  const std::size_t points = g.grid_ptr()->total_points();
  for (std::size_t p = 0; p < points; ++p) {
    const Mat gm = gather(g.g, p);
    const Mat pt = gather(pi.pi, p);  // contravariant density
    // pi~ = pi / sqrt(g); tr pi~ = (1 - n) tr K; K^{ij} = pi~^{ij} + tr K g^{ij}
    const Mat plow = detail::sandwich(gm, pt);
    const double trpi = detail::contract(gm, pt) / sg[p];
    const double trk = trpi / (1.0 - n);
    Mat out;
    out.n = n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = plow(i, j) / sg[p] + trk * gm(i, j);
    detail::scatter(K, p, out);
  }
  return K;
}

PhasePoint background(const GridPtr& grid) {
  const int n = grid->dim();
  const double tau = grid->spec().tau;
  return {MetricField{SymField::identity(grid, n)}, MomentumField{SymField::identity(grid, n, tau * (1.0 - n))}};
}

Field tensor_norm_sq(const MetricField& g, const SymField& T, Variance variance) {
  if (T.dim() != g.dim()) throw std::invalid_argument("tensor_norm_sq: rank/dimension mismatch");
  const SymField ginv = metric_inverse(g);
  const SymField& metric = variance == Variance::covariant ? ginv : g.g;
  Field out(g.grid_ptr());
  for (std::size_t p = 0; p < out.size(); ++p) {
    const Mat m = gather(metric, p);
    const Mat t = gather(T, p);
    out[p] = detail::contract(detail::sandwich(m, t), t);
  }
  return out;
}

Field trace(const MetricField& g, const SymField& T, Variance variance) {
  if (T.dim() != g.dim()) throw std::invalid_argument("trace: rank/dimension mismatch");
  const SymField& metric = variance == Variance::covariant ? metric_inverse(g) : g.g;
  Field out(g.grid_ptr());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = detail::contract(gather(metric, p), gather(T, p));
  return out;
}

PhasePoint perturbed(const PhasePoint& base, std::uint64_t seed, int band, double metric_amplitude,
                     double momentum_amplitude) {
  const int n = base.dim();
  const GridPtr& grid = base.grid_ptr();
  PhasePoint p = base;
  p.g.g.axpy(metric_amplitude, random_sym(grid, n, derive_seed(seed, 101), band));
  p.pi.pi.axpy(momentum_amplitude, random_sym(grid, n, derive_seed(seed, 202), band));
  return p;
}

PhasePoint displaced(const PhasePoint& p, const SymField& h, const SymField& q, double t) {
  PhasePoint out = p;
  out.g.g.axpy(t, h);
  out.pi.pi.axpy(t, q);
  return out;
}

}  // namespace cforge
