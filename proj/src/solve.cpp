#include "cforge/solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

namespace cforge {

namespace {

using Complex = std::complex<double>;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<Complex> spectrum(const Grid& g, const double* values) {
  std::vector<Complex> s(g.complex_size());
  g.forward(values, s.data());
  return s;
}

void from_spectrum(const Grid& g, const std::vector<Complex>& s, double* values) { g.backward(s.data(), values); }

double wavenumber_sq(const Grid& g, std::size_t j, std::vector<double>* k = nullptr) {
  double K = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const double ka = g.derivative_wavenumbers(a)[j];
    if (k) (*k)[static_cast<std::size_t>(a)] = ka;
    K += ka * ka;
  }
  return K;
}

void copy_in(const Field& f, Vec& v, std::size_t offset) {
  std::copy(f.data(), f.data() + f.size(), v.data() + static_cast<Eigen::Index>(offset));
}

void copy_out(const Vec& v, std::size_t offset, Field& f) {
  const double* src = v.data() + static_cast<Eigen::Index>(offset);
  std::copy(src, src + f.size(), f.data());
}

// (y, Y) from a flat vector laid out as pack(y, Y).
void unpack_yY(const GridPtr& grid, int n, const Vec& v, Field& y, VectorField& Y) {
  const std::size_t P = grid->total_points();
  y = Field(grid);
  Y = VectorField(grid, n);
  copy_out(v, 0, y);
  for (int i = 0; i < n; ++i) copy_out(v, static_cast<std::size_t>(i + 1) * P, Y[i]);
}

// Orthonormalizes the columns of V (and applies the same map to AV when given)
// through the eigen-decomposition of the Gram matrix; nearly dependent columns
// are dropped.
void orthonormalize(Eigen::MatrixXd& V, Eigen::MatrixXd* AV = nullptr) {
  for (int pass = 0; pass < 2 && V.cols() > 0; ++pass) {
    const Eigen::MatrixXd G = V.transpose() * V;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev[i] > 1e-24 * std::max(top, 1e-300) && ev[i] > 0.0) keep.push_back(i);
    }
    Eigen::MatrixXd T(V.cols(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
      T.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]) / std::sqrt(ev[keep[c]]);
    }
    V = V * T;
    if (AV) *AV = (*AV) * T;
  }
}

}  // namespace

std::string to_string(Strategy s) {
  return s == Strategy::special_variations ? "special-variations" : "adjoint-composition";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "special-variations") return Strategy::special_variations;
  if (s == "adjoint-composition") return Strategy::adjoint_composition;
  throw std::invalid_argument("unknown strategy '" + s + "'");
}

// ---------------------------------------------------------------------------
// GMRES

KrylovResult gmres(const VecMap& A, const VecMap& precond, const Vec& b, Vec& x, double tol, int max_iters,
                   int restart) {
  KrylovResult out;
  const Eigen::Index N = b.size();
  if (x.size() != N) x = Vec::Zero(N);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    out.converged = true;
    return out;
  }
  restart = std::max(1, restart);

  Vec r(N), w(N), z(N);
  A(x, w);
  r = b - w;
  double beta = r.norm();
  out.relative_residual = beta / bnorm;
  if (out.relative_residual <= tol) {
    out.converged = true;
    return out;
  }

  while (out.iterations < max_iters) {
    std::vector<Vec> V{r / beta};
    std::vector<Vec> Z;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(restart + 1, restart);
    std::vector<double> cs, sn;
    Vec g = Vec::Zero(restart + 1);
    g[0] = beta;
    int k = 0;
    for (; k < restart && out.iterations < max_iters; ++k) {
      precond(V[static_cast<std::size_t>(k)], z);
      Z.push_back(z);
      A(z, w);
      for (int i = 0; i <= k; ++i) {
        H(i, k) = w.dot(V[static_cast<std::size_t>(i)]);
        w -= H(i, k) * V[static_cast<std::size_t>(i)];
      }
      H(k + 1, k) = w.norm();
      const bool breakdown = H(k + 1, k) <= 1e-14 * std::abs(H(0, 0)) + 1e-300;
      V.push_back(breakdown ? Vec::Zero(N) : Vec(w / H(k + 1, k)));

      // residual estimate from Givens rotations on a copy of the column
      Eigen::VectorXd col = H.col(k).head(k + 2);
      for (int i = 0; i < k; ++i) {
        const double t = cs[static_cast<std::size_t>(i)] * col[i] + sn[static_cast<std::size_t>(i)] * col[i + 1];
        col[i + 1] = -sn[static_cast<std::size_t>(i)] * col[i] + cs[static_cast<std::size_t>(i)] * col[i + 1];
        col[i] = t;
      }
      const double den = std::hypot(col[k], col[k + 1]);
      const double c = den > 0.0 ? col[k] / den : 1.0;
      const double s = den > 0.0 ? col[k + 1] / den : 0.0;
      cs.push_back(c);
      sn.push_back(s);
      g[k + 1] = -s * g[k];
      g[k] = c * g[k];
      ++out.iterations;
      out.history.push_back(std::abs(g[k + 1]) / bnorm);
      if (std::abs(g[k + 1]) / bnorm <= tol || breakdown) {
        ++k;
        break;
      }
    }
    // Least-squares solve of the small Hessenberg system (robust when singular).
    const Eigen::MatrixXd Hk = H.topLeftCorner(k + 1, k);
    Vec rhs = Vec::Zero(k + 1);
    rhs[0] = beta;
    const Vec y = Hk.completeOrthogonalDecomposition().solve(rhs);
    for (int i = 0; i < k; ++i) x += y[i] * Z[static_cast<std::size_t>(i)];

    A(x, w);
    r = b - w;
    const double new_beta = r.norm();
    out.relative_residual = new_beta / bnorm;
    if (out.relative_residual <= tol) {
      out.converged = true;
      break;
    }
    // A restart cycle that barely moves the residual means the least-squares
    // floor has been reached.
    if (new_beta > 0.999 * beta) break;
    beta = new_beta;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Packing

Vec pack(const ConstraintValue& c) { return pack(c.phi0, c.phii); }
Vec pack(const LapseShift& xi) { return pack(xi.N, xi.X); }

Vec pack(const Field& y, const VectorField& Y) {
  const std::size_t P = y.size();
  Vec v(static_cast<Eigen::Index>(P * static_cast<std::size_t>(Y.dim() + 1)));
  copy_in(y, v, 0);
  for (int i = 0; i < Y.dim(); ++i) copy_in(Y[i], v, static_cast<std::size_t>(i + 1) * P);
  return v;
}

ConstraintValue unpack_constraint(const GridPtr& grid, int n, const Vec& v) {
  ConstraintValue c;
  unpack_yY(grid, n, v, c.phi0, c.phii);
  return c;
}

LapseShift unpack_lapse_shift(const GridPtr& grid, int n, const Vec& v) {
  LapseShift xi;
  unpack_yY(grid, n, v, xi.N, xi.X);
  return xi;
}

// ---------------------------------------------------------------------------
// Preconditioners

void f_preconditioner(const GridPtr& grid, int n, double kappa, const Vec& in, Vec& out, double zero_mode_scale) {
  const Grid& g = *grid;
  const std::size_t P = g.total_points();
  const auto& nyq = g.nyquist_mask();
  out.resize(in.size());
  for (int c = 0; c <= n; ++c) {
    const std::size_t off = static_cast<std::size_t>(c) * P;
    auto s = spectrum(g, in.data() + off);
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double K = wavenumber_sq(g, j);
      // symbols of -2(n-1)(Lap + kappa n) and 2(Lap + kappa(n-1))
      const double sym = c == 0 ? 2.0 * (n - 1) * (K - kappa * n) : 2.0 * (-K + kappa * (n - 1));
      if (nyq[j]) {
        s[j] = 0.0;
      } else if (std::abs(sym) < 1e-12) {
        s[j] *= zero_mode_scale;
      } else {
        s[j] /= sym;
      }
    }
    from_spectrum(g, s, out.data() + off);
  }
}

void normal_preconditioner(const GridPtr& grid, int n, double tau, const Vec& in, Vec& out,
                           double zero_mode_scale) {
  const Grid& g = *grid;
  const std::size_t P = g.total_points();
  const auto& nyq = g.nyquist_mask();
  std::vector<std::vector<Complex>> s;
  for (int c = 0; c <= n; ++c) s.push_back(spectrum(g, in.data() + static_cast<std::size_t>(c) * P));

  const double cpi = tau * (1 - n);              // background pi = cpi delta
  const double mu = tau * tau * (n - 1) * (2 - n);  // background Pi - E = mu delta
  std::vector<double> k(static_cast<std::size_t>(n));
  std::vector<Complex> r(static_cast<std::size_t>(n));
  const Complex I(0.0, 1.0);
  for (std::size_t j = 0; j < g.complex_size(); ++j) {
    const double K = wavenumber_sq(g, j, &k);
    const double a = (n - 1) * K * K + 2.0 * (n - 1) * mu * K + n * (mu * mu + 4.0 * tau * tau);
    if (nyq[j]) {
      for (auto& sc : s) sc[j] = 0.0;
      continue;
    }
    if (K == 0.0) {
      s[0][j] = a > 1e-14 ? s[0][j] / a : s[0][j] * zero_mode_scale;
      for (int i = 1; i <= n; ++i) s[static_cast<std::size_t>(i)][j] *= zero_mode_scale;
      continue;
    }
    const double sq = std::sqrt(K);
    const double b = cpi * (n - 1) * K + mu * cpi * (n - 2) + 4.0 * tau;
    const double beta = (cpi * cpi * n + 4.0) * K;
    const double perp = (2.0 * cpi * cpi + 2.0) * K;
    Complex rpar = 0.0;
    for (int i = 0; i < n; ++i) {
      r[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i + 1)][j];
      rpar += k[static_cast<std::size_t>(i)] / sq * r[static_cast<std::size_t>(i)];
    }
    const double det = a * beta - b * b * K;
    const Complex r0 = s[0][j];
    const Complex N = (beta * r0 - I * b * sq * rpar) / det;
    const Complex xi = (I * b * sq * r0 + a * rpar) / det;
    s[0][j] = N;
    for (int i = 0; i < n; ++i) {
      const double kh = k[static_cast<std::size_t>(i)] / sq;
      const Complex rperp = r[static_cast<std::size_t>(i)] - kh * rpar;
      s[static_cast<std::size_t>(i + 1)][j] = kh * xi + rperp / perp;
    }
  }
  out.resize(in.size());
  for (int c = 0; c <= n; ++c) from_spectrum(g, s[static_cast<std::size_t>(c)], out.data() + static_cast<std::size_t>(c) * P);
}

// ---------------------------------------------------------------------------
// F solve

FSolution solve_f(const Linearization& lin, const ConstraintValue& target, double tau, double kappa,
                  const SolveOptions& opts) {
  const GridPtr& grid = lin.grid_ptr();
  const int n = lin.dim();
  if (target.phi0.grid_ptr() != grid) throw std::invalid_argument("solve_f: target lives on a different grid");

  // Solved on the Nyquist-free space, as in the normal map of the Newton step.
  const VecMap A = [&](const Vec& in, Vec& out) {
    Field y;
    VectorField Y;
    unpack_yY(grid, n, in, y, Y);
    y = drop_nyquist(y);
    for (int i = 0; i < n; ++i) Y[i] = drop_nyquist(Y[i]);
    out = pack(drop_nyquist(lin.f_op(y, Y, tau)));
  };
  const VecMap M = [&](const Vec& in, Vec& out) { f_preconditioner(grid, n, kappa, in, out, opts.zero_mode_scale); };

  const Vec b = pack(drop_nyquist(target));
  Vec x = Vec::Zero(b.size());
  FSolution sol;
  sol.krylov = gmres(A, M, b, x, opts.krylov_tol, opts.krylov_max_iters, opts.krylov_restart);
  unpack_yY(grid, n, x, sol.y, sol.Y);
  sol.residual = l2_norm(lin.f_op(sol.y, sol.Y, tau) - target);
  return sol;
}

FSolution solve_f(const PhasePoint& p, const ConstraintValue& target, double Lambda, double tau, double kappa,
                  const SolveOptions& opts) {
  return solve_f(Linearization(p, Lambda), target, tau, kappa, opts);
}

// ---------------------------------------------------------------------------
// Newton projection

namespace {

// The flat L2 pairing identifies an adjoint value with a variation.
Variation as_variation(AdjointValue a) { return {std::move(a.slot_h), std::move(a.slot_p)}; }

VecMap normal_map(const Linearization& lin) {
  const GridPtr grid = lin.grid_ptr();
  const int n = lin.dim();
  // Restricted to the Nyquist-free space on both sides, where the right-hand
  // sides live; otherwise product content on the Nyquist modes leaves an
  // unreachable least-squares floor.
  return [&lin, grid, n](const Vec& in, Vec& out) {
    LapseShift xi = unpack_lapse_shift(grid, n, in);
    xi.N = drop_nyquist(xi.N);
    for (int i = 0; i < n; ++i) xi.X[i] = drop_nyquist(xi.X[i]);
    out = pack(drop_nyquist(lin.apply(as_variation(lin.adjoint(xi)))));
  };
}

}  // namespace

NewtonReport newton_project(const PhasePoint& p, const ConstraintValue& epsilon, double Lambda, double tau,
                            const SolveOptions& opts) {
  const auto t0 = Clock::now();
  const GridPtr& grid = p.grid_ptr();
  const int n = p.dim();
  const double kappa = grid->spec().kappa;
  require_elliptic(p.g);

  NewtonReport rep;
  rep.result = p;
  const auto residual = [&](const PhasePoint& q) { return l2_norm(drop_nyquist(phi(q, Lambda) - epsilon)); };
  const auto raw_residual = [&](const PhasePoint& q) { return l2_norm(phi(q, Lambda) - epsilon); };
  const double r0 = residual(p);
  double r = r0;
  rep.residuals.push_back(r0);
  rep.raw_residuals.push_back(raw_residual(p));
  rep.status = "max-iterations";
  const double target = std::max(opts.newton_tol * r0, opts.newton_abs_tol);
  if (r0 <= target) {
    rep.converged = true;
    rep.status = "converged";
    rep.runtime_seconds = seconds_since(t0);
    return rep;
  }

  for (int it = 0; it < opts.max_newton_iters; ++it) {
    if (r <= target) break;
    const Linearization lin(rep.result, Lambda);
    const ConstraintValue rhs = drop_nyquist(epsilon - phi(rep.result, Lambda));

    Variation v;
    if (opts.strategy == Strategy::special_variations) {
      FSolution sol = solve_f(lin, rhs, tau, kappa, opts);
      rep.krylov_residuals.push_back(sol.krylov.relative_residual);
      rep.krylov_iterations.push_back(sol.krylov.iterations);
      v = lin.special_variation(sol.y, sol.Y, tau);
    } else {
      const VecMap A = normal_map(lin);
      const VecMap M = [&](const Vec& in, Vec& out) {
        normal_preconditioner(grid, n, tau, in, out, opts.zero_mode_scale);
      };
      Vec x;
      const KrylovResult kr = gmres(A, M, pack(rhs), x, opts.krylov_tol, opts.krylov_max_iters, opts.krylov_restart);
      rep.krylov_residuals.push_back(kr.relative_residual);
      rep.krylov_iterations.push_back(kr.iterations);
      v = as_variation(lin.adjoint(unpack_lapse_shift(grid, n, x)));
    }

    // Steps live in the Nyquist-free space: spectral derivatives cannot see
    // Nyquist content, so the linear model never controls it.
    for (auto& f : v.h.components()) f = drop_nyquist(f);
    for (auto& f : v.p.components()) f = drop_nyquist(f);

    double t = 1.0;
    bool accepted = false;
    bool elliptic_failure = false;
    for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
      PhasePoint cand = displaced(rep.result, v.h, v.p, t);
      if (!ellipticity(cand.g.g).positive()) {
        elliptic_failure = true;
        continue;
      }
      const double rc = residual(cand);
      if (rc < r) {
        rep.result = std::move(cand);
        r = rc;
        rep.halvings.push_back(h);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.status = elliptic_failure ? "ellipticity-lost" : "stalled";
      break;
    }
    const double previous = rep.residuals.back();
    rep.residuals.push_back(r);
    rep.raw_residuals.push_back(raw_residual(rep.result));
    if (r > 0.99 * previous && r > target) {
      rep.status = "stalled";
      break;
    }
  }
  if (r <= target) {
    rep.converged = true;
    rep.status = "converged";
  }
  if (rep.status == "stalled" || rep.status == "max-iterations") {
    rep.hint = "residual stalled at " + std::to_string(r / r0) +
               " of initial; a cokernel obstruction or KIDs are likely, inspect kid_kernel at this point";
  }
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

double newton_tail_order(const std::vector<double>& residuals, double tail) {
  double order = std::numeric_limits<double>::quiet_NaN();
  if (residuals.empty() || !(residuals.front() > 0.0)) return order;
  const double r0 = residuals.front();
  for (std::size_t k = 1; k + 1 < residuals.size(); ++k) {
    const double a = residuals[k] / r0, b = residuals[k + 1] / r0;
    if (a > tail || !(b > 0.0)) continue;
    const double q = std::log(b) / std::log(a);
    order = std::isnan(order) ? q : std::min(order, q);
  }
  return order;
}

// ---------------------------------------------------------------------------
// Singular values

Eigen::MatrixXd assemble_dense(const LinearOperator& op, std::size_t max_bytes) {
  return assemble_dense(op, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(op.cols),
                                                      static_cast<Eigen::Index>(op.cols)),
                        max_bytes);
}

Eigen::MatrixXd assemble_dense(const LinearOperator& op, const Eigen::MatrixXd& basis, std::size_t max_bytes) {
  if (static_cast<std::size_t>(basis.rows()) != op.cols) throw std::invalid_argument("assemble_dense: basis size mismatch");
  const std::size_t bytes = op.rows * static_cast<std::size_t>(basis.cols()) * sizeof(double);
  if (bytes > max_bytes) {
    throw std::length_error("assemble_dense: " + std::to_string(bytes) +
                            " bytes exceeds the memory budget; use the matrix-free path");
  }
  Eigen::MatrixXd A(static_cast<Eigen::Index>(op.rows), basis.cols());
  Vec out;
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    op.apply(basis.col(j), out);
    A.col(j) = out;
  }
  return A;
}

SingularTriplets smallest_singular_triplets(const Eigen::MatrixXd& A, int m) {
  const Eigen::Index cols = A.cols();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();  // descending, min(rows, cols) entries

  // All cols singular values, descending, padded with zeros for wide matrices.
  std::vector<double> all(static_cast<std::size_t>(cols), 0.0);
  for (Eigen::Index i = 0; i < s.size(); ++i) all[static_cast<std::size_t>(i)] = s[i];
  SingularTriplets t;
  t.sigma_max = cols > 0 ? all.front() : 0.0;
  const int keep = std::min<int>(m, static_cast<int>(cols));
  t.right.resize(cols, keep);
  for (int i = 0; i < keep; ++i) {
    const Eigen::Index src = cols - 1 - i;
    t.sigma.push_back(all[static_cast<std::size_t>(src)]);
    t.right.col(i) = svd.matrixV().col(src);
  }
  return t;
}

double largest_singular_value(const LinearOperator& op, int iters, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vec x(static_cast<Eigen::Index>(op.cols));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = nd(rng);
  Vec y, z;
  if (op.project) {
    op.project(x, z);
    x = z;
  }
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    op.apply(x, y);
    op.apply_transpose(y, z);
    if (op.project) {
      Vec w;
      op.project(z, w);
      z = w;
    }
    const double next = x.dot(z);
    const double nz = z.norm();
    if (nz == 0.0) return 0.0;
    x = z / nz;
    if (it > 10 && std::abs(next - lambda) <= 1e-12 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  op.apply(x, y);
  return y.norm();
}

SingularTriplets smallest_singular_triplets(const LinearOperator& op, int m, const LobpcgOptions& opts) {
  const Eigen::Index N = static_cast<Eigen::Index>(op.cols);
  const int block = static_cast<int>(std::min<Eigen::Index>(m + 2, N));
  const auto project = [&](Eigen::MatrixXd& V) {
    if (!op.project) return;
    Vec tmp;
    for (Eigen::Index c = 0; c < V.cols(); ++c) {
      op.project(V.col(c), tmp);
      V.col(c) = tmp;
    }
  };
  const auto normal = [&](const Eigen::MatrixXd& V) {
    Eigen::MatrixXd out(N, V.cols());
    Vec y, z;
    for (Eigen::Index c = 0; c < V.cols(); ++c) {
      op.apply(V.col(c), y);
      op.apply_transpose(y, z);
      out.col(c) = z;
    }
    project(out);
    return out;
  };

  SingularTriplets t;
  t.sigma_max = largest_singular_value(op);
  const double scale = t.sigma_max * t.sigma_max;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd X(N, block);
  for (Eigen::Index c = 0; c < X.cols(); ++c)
    for (Eigen::Index r = 0; r < N; ++r) X(r, c) = nd(rng);
  project(X);
  orthonormalize(X);
  Eigen::MatrixXd AX = normal(X);
  Eigen::MatrixXd P(N, 0), AP(N, 0);

  // initial Rayleigh-Ritz
  {
    Eigen::MatrixXd H = X.transpose() * AX;
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    X = X * es.eigenvectors();
    AX = AX * es.eigenvectors();
  }

  t.converged = false;
  Vec lambda(X.cols());
  std::vector<Vec> history;
  for (int it = 0; it < opts.max_iters; ++it) {
    t.iterations = it + 1;
    for (Eigen::Index c = 0; c < X.cols(); ++c) lambda[c] = X.col(c).dot(AX.col(c));
    Eigen::MatrixXd R = AX - X * lambda.asDiagonal();
    bool done = true;
    t.residual = 0.0;
    for (int c = 0; c < m && c < X.cols(); ++c) {
      const double rc = R.col(c).norm() / scale;
      t.residual = std::max(t.residual, rc);
      if (rc > opts.tol) done = false;
    }
    history.push_back(lambda.head(std::min<Eigen::Index>(m, lambda.size())));
    if (!done && static_cast<int>(history.size()) > opts.stall_window) {
      const Vec& old = history[history.size() - 1 - static_cast<std::size_t>(opts.stall_window)];
      double change = 0.0;
      for (Eigen::Index c = 0; c < old.size(); ++c) change = std::max(change, std::abs(lambda[c] - old[c]) / scale);
      done = change < opts.stall_tol;
    }
    if (done) {
      t.converged = true;
      break;
    }

    Eigen::MatrixXd W(N, R.cols());
    if (op.precondition) {
      Vec tmp;
      for (Eigen::Index c = 0; c < R.cols(); ++c) {
        op.precondition(R.col(c), tmp);
        W.col(c) = tmp;
      }
    } else {
      W = R;
    }
    project(W);
    for (int pass = 0; pass < 2; ++pass) {
      W -= X * (X.transpose() * W);
      if (P.cols() > 0) W -= P * (P.transpose() * W);
    }
    orthonormalize(W);
    if (W.cols() == 0) {
      t.converged = true;
      break;
    }
    Eigen::MatrixXd AW = normal(W);

    const Eigen::Index nx = X.cols(), nw = W.cols(), np = P.cols();
    Eigen::MatrixXd S(N, nx + nw + np), AS(N, nx + nw + np);
    S << X, W, P;
    AS << AX, AW, AP;
    Eigen::MatrixXd H = S.transpose() * AS;
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const Eigen::MatrixXd C = es.eigenvectors().leftCols(nx);

    Eigen::MatrixXd Xn = S * C;
    Eigen::MatrixXd AXn = AS * C;
    P = S.rightCols(nw + np) * C.bottomRows(nw + np);
    AP = AS.rightCols(nw + np) * C.bottomRows(nw + np);
    const Eigen::MatrixXd proj = Xn.transpose() * P;
    P -= Xn * proj;
    AP -= AXn * proj;
    orthonormalize(P, &AP);
    X = std::move(Xn);
    AX = std::move(AXn);
  }

  // sigma from ||A x|| for unit x, which stays accurate for tiny sigma.
  std::vector<std::pair<double, Eigen::Index>> order;
  Vec y;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    op.apply(X.col(c) / X.col(c).norm(), y);
    order.emplace_back(y.norm(), c);
  }
  std::sort(order.begin(), order.end());
  const int keep = std::min<int>(m, static_cast<int>(order.size()));
  t.right.resize(N, keep);
  for (int i = 0; i < keep; ++i) {
    t.sigma.push_back(order[static_cast<std::size_t>(i)].first);
    t.right.col(i) = X.col(order[static_cast<std::size_t>(i)].second).normalized();
  }
  return t;
}

// ---------------------------------------------------------------------------
// KID kernel

namespace {

double estimate_tau(const PhasePoint& p) {
  const int n = p.dim();
  double tr = 0.0;
  for (int i = 0; i < n; ++i) tr += integrate(p.pi.pi(i, i));
  return tr / (p.grid_ptr()->volume() * n * (1 - n));
}

}  // namespace

LinearOperator kid_operator(const Linearization& lin) {
  const GridPtr grid = lin.grid_ptr();
  const int n = lin.dim();
  const std::size_t P = grid->total_points();
  const int ns = sym_size(n);
  const double tau = estimate_tau(lin.point());

  LinearOperator op;
  op.cols = static_cast<std::size_t>(n + 1) * P;
  op.rows = static_cast<std::size_t>(2 * ns) * P;
  op.project = [grid, n](const Vec& in, Vec& out) {
    LapseShift xi = unpack_lapse_shift(grid, n, in);
    xi.N = drop_nyquist(xi.N);
    for (int i = 0; i < n; ++i) xi.X[i] = drop_nyquist(xi.X[i]);
    out = pack(xi);
  };
  const auto weight = [n](int c) {
    // packed component c of a symmetric field: off-diagonal entries count twice
    int idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++idx)
        if (idx == c) return i == j ? 1.0 : std::sqrt(2.0);
    return 1.0;
  };
  op.apply = [&lin, grid, n, P, ns, weight, project = op.project](const Vec& in, Vec& out) {
    Vec x;
    project(in, x);
    const AdjointValue a = lin.adjoint(unpack_lapse_shift(grid, n, x));
    out.resize(static_cast<Eigen::Index>(2 * static_cast<std::size_t>(ns) * P));
    for (int c = 0; c < ns; ++c) {
      const double w = weight(c);
      const auto& fh = a.slot_h.components()[static_cast<std::size_t>(c)];
      const auto& fp = a.slot_p.components()[static_cast<std::size_t>(c)];
      for (std::size_t q = 0; q < P; ++q) {
        out[static_cast<Eigen::Index>(static_cast<std::size_t>(c) * P + q)] = w * fh[q];
        out[static_cast<Eigen::Index>(static_cast<std::size_t>(ns + c) * P + q)] = w * fp[q];
      }
    }
  };
  op.apply_transpose = [&lin, grid, n, P, ns, weight, project = op.project](const Vec& in, Vec& out) {
    Variation v = Variation::zero(grid, n);
    for (int c = 0; c < ns; ++c) {
      const double w = weight(c);
      auto& fh = v.h.components()[static_cast<std::size_t>(c)];
      auto& fp = v.p.components()[static_cast<std::size_t>(c)];
      for (std::size_t q = 0; q < P; ++q) {
        fh[q] = in[static_cast<Eigen::Index>(static_cast<std::size_t>(c) * P + q)] / w;
        fp[q] = in[static_cast<Eigen::Index>(static_cast<std::size_t>(ns + c) * P + q)] / w;
      }
    }
    project(pack(lin.apply(v)), out);
  };
  // Constants pass through unscaled so the eigensolver can still resolve the
  // (near-)kernel directions living there.
  op.precondition = [grid, n, tau](const Vec& in, Vec& out) { normal_preconditioner(grid, n, tau, in, out, 1.0); };
  return op;
}

Eigen::MatrixXd fourier_basis(const GridPtr& grid, int components) {
  const Grid& g = *grid;
  const int n = g.dim();
  const std::size_t P = g.total_points();

  // Wavevectors with |k_a| < N_a / 2 on every axis, one of each +-k pair.
  std::vector<std::vector<int>> ks;
  std::vector<int> k(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) k[static_cast<std::size_t>(a)] = -(g.points(a) - 1) / 2;
  while (true) {
    int first = 0;
    for (int a = 0; a < n && first == 0; ++a) first = k[static_cast<std::size_t>(a)];
    if (first > 0 || std::all_of(k.begin(), k.end(), [](int x) { return x == 0; })) ks.push_back(k);
    int a = n - 1;
    for (; a >= 0; --a) {
      auto& ka = k[static_cast<std::size_t>(a)];
      if (ka < (g.points(a) - 1) / 2) {
        ++ka;
        break;
      }
      ka = -(g.points(a) - 1) / 2;
    }
    if (a < 0) break;
  }

  std::vector<Vec> funcs;
  const double two_pi_over_L = 2.0 * M_PI / g.spec().period;
  for (const auto& kv : ks) {
    Vec c(static_cast<Eigen::Index>(P)), s(static_cast<Eigen::Index>(P));
    const bool zero = std::all_of(kv.begin(), kv.end(), [](int x) { return x == 0; });
    for (std::size_t q = 0; q < P; ++q) {
      const auto idx = g.unravel(q);
      double phase = 0.0;
      for (int a = 0; a < n; ++a)
        phase += two_pi_over_L * kv[static_cast<std::size_t>(a)] * g.coordinate(a, idx[static_cast<std::size_t>(a)]);
      c[static_cast<Eigen::Index>(q)] = std::cos(phase);
      s[static_cast<Eigen::Index>(q)] = std::sin(phase);
    }
    funcs.push_back(c.normalized());
    if (!zero) funcs.push_back(s.normalized());
  }

  const Eigen::Index M = static_cast<Eigen::Index>(funcs.size());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(P) * components, M * components);
  for (int comp = 0; comp < components; ++comp)
    for (Eigen::Index f = 0; f < M; ++f)
      B.block(static_cast<Eigen::Index>(P) * comp, M * comp + f, static_cast<Eigen::Index>(P), 1) = funcs[static_cast<std::size_t>(f)];
  return B;
}

KernelReport kid_kernel(const PhasePoint& p, double Lambda, double threshold, const SolveOptions& opts, int m,
                        KernelPath path) {
  const auto t0 = Clock::now();
  require_elliptic(p.g);
  const GridPtr& grid = p.grid_ptr();
  const int n = p.dim();
  const Linearization lin(p, Lambda);
  const LinearOperator op = kid_operator(lin);

  KernelReport rep;
  rep.threshold = threshold;
  rep.dense = path == KernelPath::dense ||
              (path == KernelPath::automatic && grid->total_points() <= opts.dense_threshold);

  SingularTriplets trip;
  Eigen::MatrixXd vectors;
  if (rep.dense) {
    const Eigen::MatrixXd B = fourier_basis(grid, n + 1);
    trip = smallest_singular_triplets(assemble_dense(op, B), m);
    vectors = B * trip.right;
  } else {
    trip = smallest_singular_triplets(op, m);
    if (!trip.converged) throw std::runtime_error("kid_kernel: LOBPCG did not converge");
    vectors = trip.right;
  }
  rep.singular_values = trip.sigma;
  rep.sigma_max = trip.sigma_max;
  for (double s : trip.sigma) {
    if (s < threshold * trip.sigma_max) ++rep.kernel_dim;
  }
  const auto dim = static_cast<std::size_t>(rep.kernel_dim);
  if (dim > 0 && dim < trip.sigma.size() && trip.sigma[dim - 1] > 0.0) {
    rep.gap_ratio = trip.sigma[dim] / trip.sigma[dim - 1];
  }

  const double to_l2 = 1.0 / std::sqrt(grid->cell_volume());
  for (std::size_t i = 0; i < dim; ++i) {
    rep.basis.push_back(unpack_lapse_shift(grid, n, vectors.col(static_cast<Eigen::Index>(i)) * to_l2));
  }
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

}  // namespace cforge
