#include <algorithm>
#include <cmath>

#include "cforge/solve.hpp"
#include "cforge/verify.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cforge;
using testing::max_diff;
using testing::torus;

namespace {

Field mean_free(Field f) {
  f += -integrate(f) / f.grid().volume();
  return f;
}

LinearOperator diagonal(const Vec& d) {
  LinearOperator op;
  op.rows = op.cols = static_cast<std::size_t>(d.size());
  op.apply = [d](const Vec& in, Vec& out) { out = d.cwiseProduct(in); };
  op.apply_transpose = op.apply;
  return op;
}

}  // namespace

TEST_SUITE("solve") {
  TEST_CASE("strategy names") {
    CHECK(to_string(Strategy::special_variations) == "special-variations");
    CHECK(to_string(Strategy::adjoint_composition) == "adjoint-composition");
    CHECK(strategy_from_string("adjoint-composition") == Strategy::adjoint_composition);
    CHECK(strategy_from_string(to_string(Strategy::special_variations)) == Strategy::special_variations);
    CHECK_THROWS_AS(strategy_from_string("lsqr"), std::invalid_argument);
  }

  TEST_CASE("gmres on a small nonsymmetric system") {
    Eigen::MatrixXd A(4, 4);
    A << 4, 1, 0, 0, -1, 3, 1, 0, 0, 2, 5, 1, 1, 0, 0, 2;
    const Vec b = Vec::LinSpaced(4, 1.0, 4.0);
    Vec x;
    const KrylovResult r = gmres([&](const Vec& in, Vec& out) { out = A * in; },
                                 [](const Vec& in, Vec& out) { out = in; }, b, x, 1e-12, 50, 10);
    CHECK(r.converged);
    CHECK((A * x - b).norm() <= 1e-11 * b.norm());
    CHECK_FALSE(r.history.empty());
  }

  TEST_CASE("tail order of residual histories") {
    CHECK(newton_tail_order({1.0, 1e-1, 1e-3, 1e-4}, 1e-1) == doctest::Approx(4.0 / 3.0));
    CHECK(newton_tail_order({1.0, 1e-3, 1e-6}) == doctest::Approx(2.0));
    CHECK(std::isnan(newton_tail_order({1.0, 0.5, 0.25})));
    CHECK(std::isnan(newton_tail_order({})));
  }

  TEST_CASE("pack and unpack are inverse") {
    const GridPtr g = torus(8);
    const LapseShift xi = random_lapse_shift(g, 3, 1, 2);
    const LapseShift back = unpack_lapse_shift(g, 3, pack(xi));
    CHECK(max_diff(back.N, xi.N) == 0.0);
    CHECK(max_diff(back.X, xi.X) == 0.0);
    const ConstraintValue c{xi.N, xi.X};
    const ConstraintValue cb = unpack_constraint(g, 3, pack(c));
    CHECK(max_norm(cb - c) == 0.0);
  }

  TEST_CASE("F solve with zero target is zero") {
    const GridPtr g = torus(8);
    const FSolution s = solve_f(background(g), ConstraintValue::zero(g, 3), 0.0, 0.0, 0.0, SolveOptions{});
    CHECK(s.y.max_abs() == 0.0);
    CHECK(s.Y.max_abs() == 0.0);
    CHECK(s.residual == 0.0);
  }

  TEST_CASE("F solve recovers manufactured solutions") {
    const int n = 3;
    const GridPtr g = torus(16);
    const PhasePoint b = background(g);
    const SolveOptions opts;

    const Field y_star = mean_free(band_limited_random(g, 2, 4));
    ConstraintValue t0 = ConstraintValue::zero(g, n);
    t0.phi0 = -2.0 * (n - 1) * laplacian(y_star);
    const FSolution s0 = solve_f(b, t0, 0.0, 0.0, 0.0, opts);
    CHECK(l2_norm(mean_free(s0.y) - y_star) <= 1e-6 * l2_norm(y_star));
    CHECK(s0.residual <= 1e-6 * l2_norm(t0));

    const VectorField Y_star = [&] {
      VectorField Y = random_vector(g, n, 3, 4);
      for (int i = 0; i < n; ++i) Y[i] = mean_free(Y[i]);
      return Y;
    }();
    ConstraintValue t1 = ConstraintValue::zero(g, n);
    for (int i = 0; i < n; ++i) t1.phii[i] = 2.0 * laplacian(Y_star[i]);
    const FSolution s1 = solve_f(b, t1, 0.0, 0.0, 0.0, opts);
    VectorField Y = s1.Y;
    for (int i = 0; i < n; ++i) Y[i] = mean_free(Y[i]);
    CHECK(l2_norm(Y - Y_star) <= 1e-6 * l2_norm(Y_star));

    // The solution reproduces the target within the reported residual.
    const Linearization lin(b, 0.0);
    CHECK(l2_norm(lin.f_op(s1.y, s1.Y, 0.0) - t1) == doctest::Approx(s1.residual).epsilon(1e-12));
  }

  TEST_CASE("points on the fiber take a zero step") {
    const GridPtr g = torus(8, 0.3);
    const PhasePoint b = background(g);
    for (Strategy s : {Strategy::special_variations, Strategy::adjoint_composition}) {
      SolveOptions opts;
      opts.strategy = s;
      const NewtonReport r =
          newton_project(b, ConstraintValue::zero(g, 3), g->spec().cosmological_constant(), 0.3, opts);
      CHECK(r.converged);
      CHECK(r.halvings.empty());
      CHECK(max_diff(r.result.g.g, b.g.g) == 0.0);
      CHECK(max_diff(r.result.pi.pi, b.pi.pi) == 0.0);
    }
  }

  TEST_CASE("adjoint-composition Newton converges quadratically on resolved data") {
    const GridPtr g = torus(16, 0.3);
    const double Lambda = g->spec().cosmological_constant();
    const PhasePoint p = random_elliptic_point(g, 4, 1, 0.05, 0.05);
    SolveOptions opts;
    opts.strategy = Strategy::adjoint_composition;
    opts.newton_abs_tol = 0.0;
    opts.newton_tol = 1e-9;
    const NewtonReport r = newton_project(p, ConstraintValue::zero(g, 3), Lambda, 0.3, opts);
    REQUIRE(r.residuals.size() >= 3);
    CHECK(r.residuals.back() <= 1e-6 * r.residuals.front());
    CHECK(std::is_sorted(r.residuals.rbegin(), r.residuals.rend()));
    CHECK(ellipticity(r.result.g.g).positive());
    const double order = newton_tail_order(r.residuals);
    REQUIRE_FALSE(std::isnan(order));
    CHECK(order >= 1.8);
  }

  TEST_CASE("special-variation Newton decreases the residual monotonically") {
    const GridPtr g = torus(8, 0.3);
    const double Lambda = g->spec().cosmological_constant();
    const PhasePoint p = random_elliptic_point(g, 5, 1, 0.05, 0.05);
    SolveOptions opts;
    opts.max_newton_iters = 3;
    const NewtonReport r = newton_project(p, ConstraintValue::zero(g, 3), Lambda, 0.3, opts);
    REQUIRE(r.residuals.size() >= 2);
    CHECK(r.residuals.back() < r.residuals.front());
    CHECK(std::is_sorted(r.residuals.rbegin(), r.residuals.rend()));
    CHECK(r.krylov_residuals.size() == r.halvings.size());
  }

  TEST_CASE("dense singular values of simple operators") {
    const SingularTriplets id = smallest_singular_triplets(Eigen::MatrixXd::Identity(7, 7), 4);
    REQUIRE(id.sigma.size() == 4);
    for (double s : id.sigma) CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    Vec d(5);
    d << 3.0, -0.5, 2.0, 0.1, -4.0;
    const SingularTriplets ds = smallest_singular_triplets(Eigen::MatrixXd(d.asDiagonal()), 5);
    const std::vector<double> want{0.1, 0.5, 2.0, 3.0, 4.0};
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(ds.sigma[i] == doctest::Approx(want[i]).epsilon(1e-14));
    CHECK(ds.sigma_max == doctest::Approx(4.0).epsilon(1e-14));
  }

  TEST_CASE("matrix-free singular values of a diagonal operator") {
    Vec d = Vec::LinSpaced(60, 1.0, 60.0);
    d[7] = 0.02;
    d[30] = 0.3;
    const LinearOperator op = diagonal(d);
    const SingularTriplets t = smallest_singular_triplets(op, 3);
    REQUIRE(t.sigma.size() == 3);
    CHECK(t.sigma[0] == doctest::Approx(0.02).epsilon(1e-6));
    CHECK(t.sigma[1] == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(t.sigma[2] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(largest_singular_value(op) == doctest::Approx(60.0).epsilon(1e-6));
    CHECK(assemble_dense(op).isApprox(Eigen::MatrixXd(d.asDiagonal())));
  }

  TEST_CASE("dense assembly respects its memory budget") {
    const LinearOperator op = diagonal(Vec::Ones(100));
    CHECK_THROWS_AS(assemble_dense(op, 1000), std::length_error);
  }

  TEST_CASE("flat KIDs: dense and matrix-free") {
    const GridPtr g6 = torus(6), g8 = torus(8);
    const SolveOptions opts;
    const KernelReport dense = kid_kernel(background(g6), 0.0, 1e-8, opts, 6, KernelPath::dense);
    CHECK(dense.dense);
    CHECK(dense.kernel_dim == 4);
    CHECK(dense.gap_ratio >= 1e3);
    REQUIRE(dense.basis.size() == 4);
    const KernelReport mf = kid_kernel(background(g8), 0.0, 1e-8, opts, 6, KernelPath::matrix_free);
    CHECK_FALSE(mf.dense);
    CHECK(mf.kernel_dim == 4);
    CHECK(mf.gap_ratio >= 1e3);
    CHECK(std::is_sorted(mf.singular_values.begin(), mf.singular_values.end()));

    // Orthonormal kernel basis whose image under the adjoint stays below threshold.
    const Linearization lin(background(g6), 0.0);
    for (std::size_t i = 0; i < dense.basis.size(); ++i) {
      for (std::size_t j = 0; j < dense.basis.size(); ++j) {
        const double ip = inner(dense.basis[i].N, dense.basis[j].N) + inner(dense.basis[i].X, dense.basis[j].X);
        CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
      }
      CHECK(l2_norm(lin.adjoint(dense.basis[i])) <= 1e-8 * dense.sigma_max);
    }
  }

  TEST_CASE("perturbed point: no KIDs, paths agree, Rayleigh consistency") {
    const GridPtr g = torus(6);
    const PhasePoint p = random_elliptic_point(g, 3, 1, 0.1, 0.1);
    const SolveOptions opts;
    const KernelReport dense = kid_kernel(p, 0.0, 1e-8, opts, 6, KernelPath::dense);
    const KernelReport mf = kid_kernel(p, 0.0, 1e-8, opts, 6, KernelPath::matrix_free);
    CHECK(dense.kernel_dim == 0);
    CHECK(mf.kernel_dim == 0);
    CHECK(mf.singular_values[0] == doctest::Approx(dense.singular_values[0]).epsilon(1e-6));

    // With a threshold of one every returned vector is kept, so each can be re-applied.
    const KernelReport all = kid_kernel(p, 0.0, 1.0, opts, 4, KernelPath::dense);
    REQUIRE(all.basis.size() == 4);
    const Linearization lin(p, 0.0);
    for (std::size_t i = 0; i < all.basis.size(); ++i) {
      const double img = l2_norm(lin.adjoint(all.basis[i]));
      CHECK(img == doctest::Approx(all.singular_values[i] * l2_norm(all.basis[i])).epsilon(0.1));
    }
  }

  TEST_CASE("scalar-curvature adjoint kernel contains the constants") {
    const GridPtr g = torus(6);
    const MetricField id{SymField::identity(g, 3)};
    const std::size_t P = g->total_points();
    LinearOperator op;
    op.cols = P;
    op.rows = 6 * P;
    op.apply = [&](const Vec& in, Vec& out) {
      Field N(g);
      for (std::size_t q = 0; q < P; ++q) N[q] = in[static_cast<Eigen::Index>(q)];
      const SymField s = dr_adjoint(id, Field(g), N);
      out.resize(static_cast<Eigen::Index>(6 * P));
      for (std::size_t c = 0; c < 6; ++c)
        for (std::size_t q = 0; q < P; ++q) out[static_cast<Eigen::Index>(c * P + q)] = s.components()[c][q];
    };
    const Eigen::MatrixXd B = fourier_basis(g, 1);
    const SingularTriplets t = smallest_singular_triplets(assemble_dense(op, B), 3);
    int dim = 0;
    for (double s : t.sigma) dim += s < 1e-8 * t.sigma_max;
    CHECK(dim == 1);
  }
}
