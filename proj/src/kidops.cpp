#include "cforge/kidops.hpp"

#include <cmath>

#include "pointwise.hpp"

namespace cforge {

using detail::gather;
using detail::Mat;

namespace {

MomentumField zero_momentum(const MetricField& g) { return {SymField(g.grid_ptr(), g.dim())}; }

}  // namespace

Linearization::Linearization(const PhasePoint& p, double Lambda, Mutant mutant)
    : Linearization(p, Field(p.grid_ptr(), 2.0 * Lambda), mutant) {}

Linearization::Linearization(const PhasePoint& p, const Field& two_lambda, Mutant mutant)
    : point_(p), two_lambda_(two_lambda), mutant_(mutant), geo_(MetricGeometry::build(p.g)) {
  const int n = geo_.n;
  curv_ = e_and_pi(geo_, p.pi, two_lambda_);
  div_pi_ = geo_.density_divergence(p.pi.pi);

  const GridPtr& grid = geo_.grid;
  const std::size_t points = grid->total_points();
  coeff_p_ = SymField(grid, n);
  for (std::size_t q = 0; q < points; ++q) {
    const Mat gm = gather(geo_.g, q);
    const Mat pm = gather(p.pi.pi, q);
    const Mat low = detail::sandwich(gm, pm);
    const double trpi = detail::contract(gm, pm);
    Mat c;
    c.n = n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = (2.0 / (n - 1) * trpi * gm(i, j) - 2.0 * low(i, j)) / geo_.sqrt_g[q];
    detail::scatter_upper(coeff_p_, q, c);
  }

  grad_pi_.assign(static_cast<std::size_t>(n), SymField(grid, n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      auto grad = gradient(p.pi.pi(i, j));
      for (int k = 0; k < n; ++k) grad_pi_[static_cast<std::size_t>(k)](i, j) = std::move(grad[static_cast<std::size_t>(k)]);
    }
  }
  for (std::size_t q = 0; q < points; ++q) {
    const detail::PointA a = detail::gather_a(geo_.A, q);
    const Mat pm = gather(p.pi.pi, q);
    for (int k = 0; k < n; ++k) {
      double weight = 0.0;
      for (int l = 0; l < n; ++l) weight += a(l, l, k);
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          double corr = -weight * pm(i, j);
          for (int l = 0; l < n; ++l) corr += a(i, k, l) * pm(l, j) + a(j, k, l) * pm(i, l);
          grad_pi_[static_cast<std::size_t>(k)](i, j)[q] += corr;
        }
      }
    }
  }
}

ConstraintValue Linearization::apply(const Variation& v) const {
  const int n = geo_.n;
  const GridPtr& grid = geo_.grid;
  const std::size_t points = grid->total_points();
  const SymField& pi = point_.pi.pi;

  Field trh(grid);
  for (std::size_t q = 0; q < points; ++q) trh[q] = detail::contract(gather(geo_.ginv, q), gather(v.h, q));
  const Field lap_trh = geo_.laplacian(trh);
  const auto dh = geo_.covariant_derivative(v.h);
  const auto D = [&](int k) -> const SymField& { return dh[static_cast<std::size_t>(k)]; };

  // W^i = nabla_j h^{ij}; div div h = d_i W^i + A^i_il W^l
  VectorField W(grid, n);
  for (std::size_t q = 0; q < points; ++q) {
    const Mat gi = gather(geo_.ginv, q);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int a = 0; a < n; ++a)
        for (int j = 0; j < n; ++j)
          for (int b = 0; b < n; ++b) s += gi(i, a) * gi(j, b) * D(b)(a, j)[q];
      W[i][q] = s;
    }
  }
  Field divdiv(grid);
  for (int i = 0; i < n; ++i) divdiv += derivative(W[i], i);
  for (std::size_t q = 0; q < points; ++q) {
    const detail::PointA a = detail::gather_a(geo_.A, q);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) s += a(i, i, l) * W[l][q];
    divdiv[q] += s;
  }

  const VectorField divp = geo_.density_divergence(v.p);
  const double lap_sign = mutant_ == Mutant::flip_trace_laplacian ? 1.0 : -1.0;
  const double hat_sign = mutant_ == Mutant::flip_pi_hat ? -1.0 : 1.0;

  ConstraintValue out = ConstraintValue::zero(grid, n);
  for (std::size_t q = 0; q < points; ++q) {
    const Mat hm = gather(v.h, q);
    const double sg = geo_.sqrt_g[q];
    out.phi0[q] = (divdiv[q] + lap_sign * lap_trh[q]) * sg - detail::contract(hm, gather(curv_.E, q)) * sg +
                  detail::contract(hm, gather(curv_.Pi, q)) * sg +
                  detail::contract(gather(v.p, q), gather(coeff_p_, q));

    const Mat pm = gather(pi, q);
    for (int i = 0; i < n; ++i) {
      double hat = 0.0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) hat += pm(j, k) * (2.0 * D(k)(i, j)[q] - D(i)(j, k)[q]);
      double rest = 0.0;
      for (int j = 0; j < n; ++j) rest += 2.0 * hm(i, j) * div_pi_[j][q] + 2.0 * geo_.g(i, j)[q] * divp[j][q];
      out.phii[i][q] = hat_sign * hat + rest;
    }
  }
  return out;
}

AdjointValue Linearization::adjoint(const LapseShift& xi) const {
  const int n = geo_.n;
  const GridPtr& grid = geo_.grid;
  const std::size_t points = grid->total_points();
  const SymField& pi = point_.pi.pi;

  const SymField hess = geo_.hessian(xi.N);
  const auto vg = geo_.vector_gradient(xi.X);  // [k][i] = nabla_k X^i
  const auto cg = geo_.covector_gradient(geo_.lower(xi.X));  // [i][j] = nabla_i X_j
  const double lie_sign = mutant_ == Mutant::flip_lie_density ? -1.0 : 1.0;

  AdjointValue out{SymField(grid, n), SymField(grid, n)};
  for (std::size_t q = 0; q < points; ++q) {
    const Mat gi = gather(geo_.ginv, q);
    const Mat hm = gather(hess, q);
    const Mat hup = detail::sandwich(gi, hm);
    const double lapN = detail::contract(gi, hm);
    const Mat E = gather(curv_.E, q);
    const Mat P = gather(curv_.Pi, q);
    const Mat pm = gather(pi, q);
    const Mat cp = gather(coeff_p_, q);
    const double N = xi.N[q];
    const double sg = geo_.sqrt_g[q];
    double divX = 0.0;
    for (int k = 0; k < n; ++k) divX += vg[static_cast<std::size_t>(k)][k][q];

    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double lie = lie_sign * divX * pm(i, j);
        for (int k = 0; k < n; ++k) {
          lie += xi.X[k][q] * grad_pi_[static_cast<std::size_t>(k)](i, j)[q];
          lie -= vg[static_cast<std::size_t>(k)][i][q] * pm(j, k) + vg[static_cast<std::size_t>(k)][j][q] * pm(i, k);
        }
        out.slot_h(i, j)[q] = (hup(i, j) - gi(i, j) * lapN - E(i, j) * N + P(i, j) * N) * sg + lie;
        out.slot_p(i, j)[q] =
            N * cp(i, j) - (cg[static_cast<std::size_t>(i)][j][q] + cg[static_cast<std::size_t>(j)][i][q]);
      }
    }
  }
  return out;
}

PStarValue Linearization::p_star(const LapseShift& xi) const {
  AdjointValue a = adjoint(xi);
  Field down(geo_.grid), up(geo_.grid);
  for (std::size_t q = 0; q < down.size(); ++q) {
    up[q] = std::sqrt(geo_.sqrt_g[q]);
    down[q] = 1.0 / up[q];
  }
  PStarValue out{std::move(a.slot_h), geo_.covariant_derivative(a.slot_p)};
  for (auto& c : out.first.components()) c *= down;
  for (auto& s : out.second) {
    for (auto& c : s.components()) c *= up;
  }
  return out;
}

Variation Linearization::special_variation(const Field& y, const VectorField& Y, double tau) const {
  const int n = geo_.n;
  const GridPtr& grid = geo_.grid;
  const std::size_t points = grid->total_points();
  const auto cg = geo_.covector_gradient(geo_.lower(Y));
  const double c = static_cast<double>((n - 1) * (n - 2)) * tau;

  Variation v = Variation::zero(grid, n);
  for (std::size_t q = 0; q < points; ++q) {
    Mat S;
    S.n = n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        S(i, j) = 0.5 * (cg[static_cast<std::size_t>(i)][j][q] + cg[static_cast<std::size_t>(j)][i][q]);
    const Mat gi = gather(geo_.ginv, q);
    const Mat Sup = detail::sandwich(gi, S);
    const double trS = detail::contract(gi, S);
    const double sg = geo_.sqrt_g[q];
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        v.h(i, j)[q] = 2.0 * y[q] * geo_.g(i, j)[q];
        v.p(i, j)[q] = (2.0 * Sup(i, j) - gi(i, j) * trS - c * y[q] * gi(i, j)) * sg;
      }
    }
  }
  return v;
}

ConstraintValue Linearization::f_op(const Field& y, const VectorField& Y, double tau) const {
  return apply(special_variation(y, Y, tau));
}

ConstraintValue dphi(const PhasePoint& p, const Variation& v, double Lambda) {
  return Linearization(p, Lambda).apply(v);
}

AdjointValue dphi_adjoint(const PhasePoint& p, const LapseShift& xi, double Lambda) {
  return Linearization(p, Lambda).adjoint(xi);
}

PStarValue p_star(const PhasePoint& p, const LapseShift& xi, double Lambda) {
  return Linearization(p, Lambda).p_star(xi);
}

Variation special_variation(const PhasePoint& p, const Field& y, const VectorField& Y, double tau) {
  return Linearization(p, 0.0).special_variation(y, Y, tau);
}

ConstraintValue f_op(const PhasePoint& p, const Field& y, const VectorField& Y, double Lambda, double tau) {
  return Linearization(p, Lambda).f_op(y, Y, tau);
}

double pairing(const ConstraintValue& c, const LapseShift& xi) { return inner(c.phi0, xi.N) + inner(c.phii, xi.X); }

double pairing(const Variation& v, const AdjointValue& a) { return inner(v.h, a.slot_h) + inner(v.p, a.slot_p); }

double l2_norm(const Variation& v) { return std::hypot(l2_norm(v.h), l2_norm(v.p)); }
double l2_norm(const LapseShift& xi) { return std::hypot(l2_norm(xi.N), l2_norm(xi.X)); }
double l2_norm(const AdjointValue& a) { return std::hypot(l2_norm(a.slot_h), l2_norm(a.slot_p)); }

double l2_norm(const PStarValue& a) {
  double s = l2_norm(a.first);
  s *= s;
  for (const auto& c : a.second) {
    const double x = l2_norm(c);
    s += x * x;
  }
  return std::sqrt(s);
}

SymField killing(const VectorField& X) {
  const int n = X.dim();
  std::vector<std::vector<Field>> d(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) d[static_cast<std::size_t>(j)] = gradient(X[j]);  // d[j][i] = d_i X_j
  SymField S(X.grid_ptr(), n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Field s = d[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] + d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      s *= 0.5;
      S(i, j) = std::move(s);
    }
  }
  return S;
}

Rank3Pair u_second_derivative_identity(const VectorField& X, bool flip_last) {
  const int n = X.dim();
  const GridPtr& grid = X.grid_ptr();
  Rank3Pair out{Rank3Field(grid, n), Rank3Field(grid, n)};
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) out.lhs(k, j, i) = second_derivative(X[i], k, j);

  const SymField S = killing(X);
  std::vector<SymField> dS(static_cast<std::size_t>(n), SymField(grid, n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      auto grad = gradient(S(i, j));
      for (int k = 0; k < n; ++k) dS[static_cast<std::size_t>(k)](i, j) = std::move(grad[static_cast<std::size_t>(k)]);
    }
  }
  const double sign = flip_last ? 1.0 : -1.0;
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        Field r = dS[static_cast<std::size_t>(k)](i, j) + dS[static_cast<std::size_t>(j)](i, k);
        r.axpy(sign, dS[static_cast<std::size_t>(i)](j, k));
        out.rhs(k, j, i) = std::move(r);
      }
    }
  }
  return out;
}

Rank3Field u_ring(const VectorField& X, double kappa) {
  const int n = X.dim();
  Rank3Field U(X.grid_ptr(), n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        Field u = second_derivative(X[i], k, j);
        if (j == k) u.axpy(kappa, X[i]);
        if (i == k) u.axpy(-kappa, X[j]);
        U(k, j, i) = std::move(u);
      }
    }
  }
  return U;
}

ShiftedHessian t_shift(const MetricField& g, const Field& N, double Lambda) {
  const MetricGeometry geo = MetricGeometry::build(g);
  const int n = geo.n;
  const SymField hess = geo.hessian(N);
  ShiftedHessian out{SymField(geo.grid, n), SymField(geo.grid, n)};
  for (std::size_t q = 0; q < N.size(); ++q) {
    const double lapN = detail::contract(gather(geo.ginv, q), gather(hess, q));
    const double R = geo.scal[q];
    const double t_coef = (R + 2.0 * Lambda) / (2.0 * (n - 1));
    const double l_coef = 0.5 * (R - 2.0 * Lambda);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double gij = geo.g(i, j)[q];
        const double ric = geo.ric(i, j)[q];
        out.T(i, j)[q] = hess(i, j)[q] - (ric - t_coef * gij) * N[q];
        out.L(i, j)[q] = hess(i, j)[q] - gij * lapN - (ric - l_coef * gij) * N[q];
      }
    }
  }
  return out;
}

SymField t_ring(const Field& N, double kappa) {
  SymField T = hessian(N);
  for (int i = 0; i < T.dim(); ++i) T(i, i).axpy(kappa, N);
  return T;
}

Field dr_linear(const MetricField& g, const Field& f, const SymField& h) {
  const Linearization lin({g, zero_momentum(g)}, 2.0 * f);
  return lin.apply({h, SymField(g.grid_ptr(), g.dim())}).phi0;
}

SymField dr_adjoint(const MetricField& g, const Field& f, const Field& N) {
  const Linearization lin({g, zero_momentum(g)}, 2.0 * f);
  return lin.adjoint({N, VectorField(g.grid_ptr(), g.dim())}).slot_h;
}

}  // namespace cforge
