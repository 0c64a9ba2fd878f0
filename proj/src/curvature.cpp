#include "cforge/curvature.hpp"

#include <array>

#include "pointwise.hpp"

namespace cforge {

using detail::gather;
using detail::Mat;

namespace {

std::vector<SymField> first_derivatives(const SymField& s) {
  const int n = s.dim();
  std::vector<SymField> d(static_cast<std::size_t>(n), SymField(s.grid_ptr(), n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      auto grad = gradient(s(i, j));
      for (int l = 0; l < n; ++l) d[static_cast<std::size_t>(l)](i, j) = std::move(grad[static_cast<std::size_t>(l)]);
    }
  }
  return d;
}

// Gamma_{l,ij} = (d_i g_jl + d_j g_il - d_l g_ij) / 2 at one point
double gamma_lower(const std::vector<SymField>& dg, int l, int i, int j, std::size_t p) {
  const auto& d = [&](int a) -> const SymField& { return dg[static_cast<std::size_t>(a)]; };
  return 0.5 * (d(i)(j, l)[p] + d(j)(i, l)[p] - d(l)(i, j)[p]);
}

ChristoffelDelta christoffel_from(const SymField& ginv, const std::vector<SymField>& dg) {
  const int n = ginv.dim();
  const GridPtr& grid = ginv.grid_ptr();
  ChristoffelDelta A{std::vector<SymField>(static_cast<std::size_t>(n), SymField(grid, n))};
  const std::size_t points = grid->total_points();
  std::vector<double> low(static_cast<std::size_t>(n));
  for (std::size_t p = 0; p < points; ++p) {
    const Mat gi = gather(ginv, p);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        for (int l = 0; l < n; ++l) low[static_cast<std::size_t>(l)] = gamma_lower(dg, l, i, j, p);
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) s += gi(k, l) * low[static_cast<std::size_t>(l)];
          A[k](i, j)[p] = s;
        }
      }
    }
  }
  return A;
}

}  // namespace

namespace detail {

SymField ricci_from(const GridPtr& grid, int n, const ChristoffelDelta& A) {
  const std::size_t points = grid->total_points();
  // d_i A^i_jk
  SymField div(grid, n);
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      Field acc(grid);
      for (int i = 0; i < n; ++i) acc += derivative(A[i](j, k), i);
      div(j, k) = std::move(acc);
    }
  }
  // a_k = A^i_ik and its gradient
  std::vector<Field> trace_a;
  for (int k = 0; k < n; ++k) {
    Field acc(grid);
    for (int i = 0; i < n; ++i) acc += A[i](i, k);
    trace_a.push_back(std::move(acc));
  }
  std::vector<std::vector<Field>> da;  // da[k][j] = d_j a_k
  for (int k = 0; k < n; ++k) da.push_back(gradient(trace_a[static_cast<std::size_t>(k)]));

  SymField ric(grid, n);
  for (std::size_t p = 0; p < points; ++p) {
    const detail::PointA a = detail::gather_a(A, p);
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        double quad = 0.0;
        for (int l = 0; l < n; ++l) quad += a(l, j, k) * trace_a[static_cast<std::size_t>(l)][p];
        for (int i = 0; i < n; ++i)
          for (int l = 0; l < n; ++l) quad -= a(i, j, l) * a(l, k, i);
        const double sym_da = 0.5 * (da[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)][p] +
                                     da[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)][p]);
        ric(j, k)[p] = div(j, k)[p] - sym_da + quad;
      }
    }
  }
  return ric;
}

Field scalar_curvature_direct(const MetricGeometry& geo) {
  const int n = geo.n;
  const GridPtr& grid = geo.grid;
  const std::size_t points = grid->total_points();
  // H[a][b](k,l) = d_a d_b g_kl for a <= b
  std::vector<std::vector<SymField>> H(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    H[static_cast<std::size_t>(a)].assign(static_cast<std::size_t>(n), SymField());
    for (int b = a; b < n; ++b) {
      SymField s(grid, n);
      for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l) s(k, l) = derivative(geo.dg[static_cast<std::size_t>(a)](k, l), b);
      H[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = std::move(s);
    }
  }
  auto hess = [&](int a, int b, int k, int l, std::size_t p) {
    if (a > b) std::swap(a, b);
    return H[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)](k, l)[p];
  };

  Field R(grid);
  std::vector<Mat> dgm(static_cast<std::size_t>(n)), dginv(static_cast<std::size_t>(n));
  for (std::size_t p = 0; p < points; ++p) {
    const Mat gi = gather(geo.ginv, p);
    for (int i = 0; i < n; ++i) {
      dgm[static_cast<std::size_t>(i)] = gather(geo.dg[static_cast<std::size_t>(i)], p);
      Mat m = detail::sandwich(gi, dgm[static_cast<std::size_t>(i)]);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) m(a, b) = -m(a, b);
      dginv[static_cast<std::size_t>(i)] = m;
    }
    const detail::PointA a = detail::gather_a(geo.A, p);

    double second = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            second += gi(i, k) * gi(j, l) * (hess(i, j, k, l, p) - hess(i, k, j, l, p));

    double q = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double gjk = gi(j, k);
        double t = 0.0;
        for (int i = 0; i < n; ++i)
          for (int l = 0; l < n; ++l) t += dginv[static_cast<std::size_t>(i)](i, l) * gamma_lower(geo.dg, l, j, k, p);
        for (int i = 0; i < n; ++i)
          for (int l = 0; l < n; ++l)
            t -= 0.5 * dginv[static_cast<std::size_t>(j)](i, l) * dgm[static_cast<std::size_t>(k)](i, l);
        for (int l = 0; l < n; ++l) {
          double trace_l = 0.0;
          for (int i = 0; i < n; ++i) trace_l += a(i, i, l);
          t += a(l, j, k) * trace_l;
        }
        for (int i = 0; i < n; ++i)
          for (int l = 0; l < n; ++l) t -= a(i, j, l) * a(l, k, i);
        q += gjk * t;
      }
    }
    R[p] = second + q;
  }
  return R;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// MetricGeometry

MetricGeometry MetricGeometry::build(const MetricField& g) {
  MetricGeometry geo;
  geo.ellipticity = require_elliptic(g);
  geo.grid = g.grid_ptr();
  geo.n = g.dim();
  detail::check_dim(geo.n);
  geo.g = g.g;
  geo.ginv = metric_inverse(g);
  geo.sqrt_g = sqrt_det(g);
  geo.det = geo.sqrt_g * geo.sqrt_g;
  geo.dg = first_derivatives(g.g);
  geo.A = christoffel_from(geo.ginv, geo.dg);
  geo.ric = detail::ricci_from(geo.grid, geo.n, geo.A);
  geo.scal = Field(geo.grid);
  for (std::size_t p = 0; p < geo.scal.size(); ++p) {
    geo.scal[p] = detail::contract(gather(geo.ginv, p), gather(geo.ric, p));
  }
  return geo;
}

SymField MetricGeometry::hessian(const Field& N) const {
  const auto grad = gradient(N);
  SymField out(grid, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Field h = derivative(grad[static_cast<std::size_t>(i)], j);
      for (int k = 0; k < n; ++k) {
        const Field& ak = A[k](i, j);
        const Field& dk = grad[static_cast<std::size_t>(k)];
        for (std::size_t p = 0; p < h.size(); ++p) h[p] -= ak[p] * dk[p];
      }
      out(i, j) = std::move(h);
    }
  }
  return out;
}

Field MetricGeometry::laplacian(const Field& u) const {
  const SymField h = hessian(u);
  Field out(grid);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = detail::contract(gather(ginv, p), gather(h, p));
  return out;
}

std::vector<SymField> MetricGeometry::covariant_derivative(const SymField& h) const {
  std::vector<SymField> d = first_derivatives(h);
  const std::size_t points = grid->total_points();
  for (std::size_t p = 0; p < points; ++p) {
    const detail::PointA a = detail::gather_a(A, p);
    const Mat hm = gather(h, p);
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          double corr = 0.0;
          for (int l = 0; l < n; ++l) corr += a(l, k, i) * hm(l, j) + a(l, k, j) * hm(i, l);
          d[static_cast<std::size_t>(k)](i, j)[p] -= corr;
        }
      }
    }
  }
  return d;
}

std::vector<VectorField> MetricGeometry::vector_gradient(const VectorField& X) const {
  std::vector<VectorField> out(static_cast<std::size_t>(n), VectorField(grid, n));
  for (int i = 0; i < n; ++i) {
    auto grad = gradient(X[i]);
    for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)][i] = std::move(grad[static_cast<std::size_t>(k)]);
  }
  const std::size_t points = grid->total_points();
  for (std::size_t p = 0; p < points; ++p) {
    const detail::PointA a = detail::gather_a(A, p);
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        double corr = 0.0;
        for (int l = 0; l < n; ++l) corr += a(i, k, l) * X[l][p];
        out[static_cast<std::size_t>(k)][i][p] += corr;
      }
    }
  }
  return out;
}

std::vector<VectorField> MetricGeometry::covector_gradient(const VectorField& X) const {
  std::vector<VectorField> out(static_cast<std::size_t>(n), VectorField(grid, n));
  for (int j = 0; j < n; ++j) {
    auto grad = gradient(X[j]);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)][j] = std::move(grad[static_cast<std::size_t>(i)]);
  }
  const std::size_t points = grid->total_points();
  for (std::size_t p = 0; p < points; ++p) {
    const detail::PointA a = detail::gather_a(A, p);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double corr = 0.0;
        for (int l = 0; l < n; ++l) corr += a(l, i, j) * X[l][p];
        out[static_cast<std::size_t>(i)][j][p] -= corr;
      }
    }
  }
  return out;
}

VectorField MetricGeometry::density_divergence(const SymField& P) const {
  VectorField out(grid, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) out[j] += derivative(P(j, k), k);
  }
  const std::size_t points = grid->total_points();
  for (std::size_t p = 0; p < points; ++p) {
    const detail::PointA a = detail::gather_a(A, p);
    const Mat pm = gather(P, p);
    for (int j = 0; j < n; ++j) {
      double corr = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) corr += a(j, k, l) * pm(k, l);
      out[j][p] += corr;
    }
  }
  return out;
}

VectorField MetricGeometry::lower(const VectorField& X) const {
  VectorField out(grid, n);
  const std::size_t points = grid->total_points();
  for (std::size_t p = 0; p < points; ++p) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += g(i, l)[p] * X[l][p];
      out[i][p] = s;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ChristoffelDelta christoffel_delta(const MetricField& g) {
  require_elliptic(g);
  return christoffel_from(metric_inverse(g), first_derivatives(g.g));
}

SymField ricci(const MetricField& g) {
  const ChristoffelDelta A = christoffel_delta(g);
  return detail::ricci_from(g.grid_ptr(), g.dim(), A);
}

Field scalar_curvature(const MetricField& g) { return detail::scalar_curvature_direct(MetricGeometry::build(g)); }

Field scalar_curvature_from_ricci(const MetricField& g) {
  const SymField ric = ricci(g);
  const SymField ginv = metric_inverse(g);
  Field out(g.grid_ptr());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = detail::contract(gather(ginv, p), gather(ric, p));
  return out;
}

CurvaturePack e_and_pi(const MetricGeometry& geo, const MomentumField& pi, const Field& two_lambda) {
  const int n = geo.n;
  CurvaturePack pack{geo.ric, geo.scal, SymField(geo.grid, n), SymField(geo.grid, n)};
  const std::size_t points = geo.grid->total_points();
  for (std::size_t p = 0; p < points; ++p) {
    const Mat gi = gather(geo.ginv, p);
    const Mat gm = gather(geo.g, p);
    const Mat rup = detail::sandwich(gi, gather(geo.ric, p));
    const double half = 0.5 * (geo.scal[p] - two_lambda[p]);
    Mat e;
    e.n = n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) e(i, j) = rup(i, j) - half * gi(i, j);
    detail::scatter(pack.E, p, e);

    const Mat pm = gather(pi.pi, p);
    const double trpi = detail::contract(gm, pm);
    const double norm_sq = detail::contract(detail::sandwich(gm, pm), pm);
    const Mat pgp = detail::sandwich(pm, gm);  // pi^i_k pi^kj
    Mat q;
    q.n = n;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        q(i, j) = (2.0 / (n - 1) * trpi * pm(i, j) - 2.0 * pgp(i, j) + 0.5 * norm_sq * gi(i, j) -
                   trpi * trpi / (2.0 * (n - 1)) * gi(i, j)) /
                  geo.det[p];
      }
    }
    detail::scatter(pack.Pi, p, q);
  }
  return pack;
}

CurvaturePack e_and_pi(const MetricField& g, const MomentumField& pi, double Lambda) {
  const MetricGeometry geo = MetricGeometry::build(g);
  return e_and_pi(geo, pi, Field(geo.grid, 2.0 * Lambda));
}

}  // namespace cforge
