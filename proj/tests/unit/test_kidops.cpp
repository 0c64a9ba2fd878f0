#include <cmath>

#include "cforge/kidops.hpp"
#include "cforge/verify.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cforge;
using testing::fn;
using testing::max_diff;
using testing::torus;

namespace {

double max_abs(const ConstraintValue& c) { return std::max(c.phi0.max_abs(), c.phii.max_abs()); }
double max_abs(const AdjointValue& a) { return std::max(a.slot_h.max_abs(), a.slot_p.max_abs()); }
double max_diff3(const Rank3Field& a, const Rank3Field& b) {
  Rank3Field d = a;
  d -= b;
  return d.max_abs();
}

LapseShift translation(const GridPtr& g, int axis) {
  LapseShift xi = LapseShift::zero(g, 3);
  xi.X[axis] = Field(g, 1.0);
  return xi;
}

}  // namespace

TEST_SUITE("kidops") {
  TEST_CASE("zero inputs give zero outputs") {
    const GridPtr g = torus(8, 0.3);
    const PhasePoint p = random_elliptic_point(g, 1, 1);
    const double Lambda = g->spec().cosmological_constant();
    CHECK(max_abs(dphi(p, Variation::zero(g, 3), Lambda)) == 0.0);
    CHECK(max_abs(dphi_adjoint(p, LapseShift::zero(g, 3), Lambda)) == 0.0);
    const PStarValue ps = p_star(p, LapseShift::zero(g, 3), Lambda);
    CHECK(ps.first.max_abs() == 0.0);
    for (const SymField& s : ps.second) CHECK(s.max_abs() == 0.0);
    const Variation sv = special_variation(p, Field(g), VectorField(g, 3), 0.3);
    CHECK(sv.h.max_abs() == 0.0);
    CHECK(sv.p.max_abs() == 0.0);
  }

  TEST_CASE("conformal direction at the flat background") {
    const int n = 3;
    const GridPtr g = torus(16);
    const Field y = band_limited_random(g, 3, 3);
    Variation v2 = Variation::zero(g, n);
    for (int a = 0; a < n; ++a) v2.h(a, a) = 2.0 * y;
    const ConstraintValue c = dphi(background(g), v2, 0.0);
    CHECK(max_diff(c.phi0, -2.0 * (n - 1) * laplacian(y)) <= 1e-10);
    CHECK(c.phii.max_abs() <= 1e-14);
  }

  TEST_CASE("dphi is linear") {
    const GridPtr g = torus(16, 0.3);
    const double Lambda = g->spec().cosmological_constant();
    const PhasePoint p = random_elliptic_point(g, 2, 1, 0.05, 0.05);
    const Linearization lin(p, Lambda);
    const Variation a = random_variation(g, 3, 3, 2), b = random_variation(g, 3, 4, 2);
    const Variation ab{2.0 * a.h - 0.5 * b.h, 2.0 * a.p - 0.5 * b.p};
    const ConstraintValue lhs = lin.apply(ab);
    const ConstraintValue ca = lin.apply(a), cb = lin.apply(b);
    const ConstraintValue rhs{2.0 * ca.phi0 - 0.5 * cb.phi0, 2.0 * ca.phii - 0.5 * cb.phii};
    CHECK(max_norm(lhs - rhs) <= 1e-11 * max_norm(lhs));
  }

  TEST_CASE("adjoint pairing identity") {
    const GridPtr g = torus(16, 0.3);
    const double Lambda = g->spec().cosmological_constant();
    const PhasePoint p = random_elliptic_point(g, 5, 1, 0.05, 0.05);
    const Linearization lin(p, Lambda);
    for (std::uint64_t s = 0; s < 3; ++s) {
      const Variation v = random_variation(g, 3, derive_seed(s, 1), 2);
      const LapseShift xi = random_lapse_shift(g, 3, derive_seed(s, 2), 2);
      const double a = pairing(lin.apply(v), xi), b = pairing(v, lin.adjoint(xi));
      CHECK(std::abs(a - b) <= 1e-8 * std::max(std::abs(a), std::abs(b)));
    }
    const Variation zero = Variation::zero(g, 3);
    const LapseShift xi = random_lapse_shift(g, 3, 9, 2);
    CHECK(pairing(lin.apply(zero), xi) == 0.0);
    CHECK(pairing(zero, lin.adjoint(xi)) == 0.0);
  }

  TEST_CASE("flat kernel elements") {
    const GridPtr g = torus(8);
    const PhasePoint b = background(g);
    LapseShift lapse = LapseShift::zero(g, 3);
    lapse.N = Field(g, 1.0);
    CHECK(max_abs(dphi_adjoint(b, lapse, 0.0)) <= 1e-10);
    for (int a = 0; a < 3; ++a) {
      CHECK(max_abs(dphi_adjoint(b, translation(g, a), 0.0)) <= 1e-10);
      const PStarValue ps = p_star(b, translation(g, a), 0.0);
      CHECK(ps.first.max_abs() <= 1e-10);
      for (const SymField& s : ps.second) CHECK(s.max_abs() <= 1e-10);
    }
  }

  TEST_CASE("p_star first slot is the reweighted adjoint") {
    const GridPtr g = torus(8, 0.3);
    const double Lambda = g->spec().cosmological_constant();
    const PhasePoint p = random_elliptic_point(g, 6, 1, 0.05, 0.05);
    const LapseShift xi = random_lapse_shift(g, 3, 7, 2);
    const AdjointValue a = dphi_adjoint(p, xi, Lambda);
    const PStarValue ps = p_star(p, xi, Lambda);
    const Field sg = sqrt_det(p.g);
    SymField want = a.slot_h;
    for (Field& c : want.components())
      for (std::size_t i = 0; i < c.size(); ++i) c[i] /= std::sqrt(sg[i]);
    CHECK(max_diff(ps.first, want) <= 1e-12 * std::max(1.0, want.max_abs()));
  }

  TEST_CASE("killing operator") {
    const GridPtr g = torus(16);
    CHECK(killing(VectorField(g, 3, 2.5)).max_abs() == 0.0);
    VectorField X(g, 3);
    X[0] = fn(g, [](double, double y, double) { return std::sin(y); });
    SymField want(g, 3);
    want(0, 1) = 0.5 * fn(g, [](double, double y, double) { return std::cos(y); });
    CHECK(max_diff(killing(X), want) <= 1e-12);
    const Field f = band_limited_random(g, 8, 3);
    CHECK(max_diff(killing(gradient_field(f)), hessian(f)) <= 1e-10);
  }

  TEST_CASE("rank-3 identity and the U operator") {
    const GridPtr g = torus(16);
    const VectorField X = random_vector(g, 3, 12, 3);
    const Rank3Pair r = u_second_derivative_identity(X);
    CHECK(max_diff3(r.lhs, r.rhs) <= 1e-11);
    const Rank3Pair c = u_second_derivative_identity(VectorField(g, 3, 1.5));
    CHECK(c.lhs.max_abs() == 0.0);
    CHECK(c.rhs.max_abs() == 0.0);
    const Rank3Pair gr = u_second_derivative_identity(gradient_field(band_limited_random(g, 13, 3)));
    CHECK(max_diff3(gr.lhs, gr.rhs) <= 1e-10);
    const Rank3Pair flipped = u_second_derivative_identity(X, true);
    CHECK(max_diff3(flipped.lhs, flipped.rhs) >= 1e-2);

    CHECK(max_diff3(u_ring(X, 0.0), r.lhs) <= 1e-12);
    CHECK(u_ring(VectorField(g, 3, 1.5), 0.0).max_abs() == 0.0);
    VectorField cst(g, 3);
    const double cv[3] = {1.0, -2.0, 0.5};
    for (int a = 0; a < 3; ++a) cst[a] = Field(g, cv[a]);
    const Rank3Field u = u_ring(cst, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
          const double want = (j == k ? cv[i] : 0.0) - (i == k ? cv[j] : 0.0);
          worst = std::max(worst, max_diff(u(k, j, i), Field(g, want)));
        }
    CHECK(worst == 0.0);
  }

  TEST_CASE("shifted hessian") {
    const int n = 3;
    const GridPtr g = torus(16);
    const MetricField id{SymField::identity(g, n)};
    const ShiftedHessian z = t_shift(id, Field(g), 0.0);
    CHECK(z.T.max_abs() == 0.0);
    CHECK(z.L.max_abs() == 0.0);
    const Field N = band_limited_random(g, 14, 3);
    const ShiftedHessian s = t_shift(id, N, 0.0);
    const SymField H = hessian(N);
    CHECK(max_diff(s.T, H) <= 1e-12);
    SymField L = H;
    for (int a = 0; a < n; ++a) L(a, a) -= laplacian(N);
    CHECK(max_diff(s.L, L) <= 1e-12);

    MetricField m = id;
    m.g.axpy(0.1, random_sym(g, n, 15, 1));
    const Field N2 = band_limited_random(g, 16, 2);
    const ShiftedHessian t = t_shift(m, N2, 0.4);
    const Field trT = trace(m, t.T, Variance::covariant), trL = trace(m, t.L, Variance::covariant);
    CHECK(max_diff(trL, (1.0 - n) * trT) <= 1e-10);
  }

  TEST_CASE("obata operator") {
    const GridPtr g = torus(16);
    CHECK(t_ring(Field(g, 2.0), 0.0).max_abs() == 0.0);
    CHECK(max_diff(t_ring(Field(g, 2.0), 1.0), SymField::identity(g, 3, 2.0)) == 0.0);
    const Field s = fn(g, [](double x, double, double) { return std::sin(x); });
    SymField want(g, 3);
    want(0, 0) = -1.0 * s;
    CHECK(max_diff(t_ring(s, 0.0), want) <= 1e-12);
  }

  TEST_CASE("scalar curvature map adjoint") {
    const int n = 3;
    const GridPtr g = torus(16);
    const MetricField id{SymField::identity(g, n)};
    CHECK(dr_adjoint(id, Field(g), Field(g, 1.0)).max_abs() <= 1e-14);
    const Field N = fn(g, [](double x, double, double) { return std::sin(x); });
    SymField want = hessian(N);
    for (int a = 0; a < n; ++a) want(a, a) -= laplacian(N);
    CHECK(max_diff(dr_adjoint(id, Field(g), N), want) <= 1e-12);

    MetricField m = id;
    m.g.axpy(0.05, random_sym(g, n, 17, 1));
    const Field f = 0.1 * band_limited_random(g, 18, 1);
    const SymField h = random_sym(g, n, 19, 2);
    const Field M = band_limited_random(g, 20, 2);
    const double a = inner(dr_linear(m, f, h), M);
    const double b = inner(h, dr_adjoint(m, f, M));
    CHECK(std::abs(a - b) <= 1e-8 * std::max(std::abs(a), std::abs(b)));
  }

  TEST_CASE("special variations") {
    const int n = 3;
    const GridPtr g0 = torus(16);
    const VectorField Y = random_vector(g0, n, 21, 3);
    const Variation v = special_variation(background(g0), Field(g0), Y, 0.0);
    CHECK(v.h.max_abs() == 0.0);
    Field div(g0);
    for (int a = 0; a < n; ++a) div += derivative(Y[a], a);
    SymField want = 2.0 * killing(Y);
    for (int a = 0; a < n; ++a) want(a, a) -= div;
    CHECK(max_diff(v.p, want) <= 1e-12);

    const GridPtr g1 = torus(8, 1.0);
    const Variation c = special_variation(background(g1), Field(g1, 1.0), VectorField(g1, n), 1.0);
    CHECK(max_diff(c.h, SymField::identity(g1, n, 2.0)) == 0.0);
    CHECK(max_diff(c.p, SymField::identity(g1, n, -2.0)) <= 1e-15);
  }

  TEST_CASE("F is the composition and reproduces its leading parts") {
    const GridPtr g = torus(16);
    const OperatorReport r = check_f_leading(g, 3);
    CHECK(r.pass);
    CHECK(r.residuals.size() >= 2);

    const GridPtr gc = torus(16, 0.3);
    const double Lambda = gc->spec().cosmological_constant();
    const PhasePoint p = random_elliptic_point(gc, 22, 1, 0.05, 0.05);
    const Field y = band_limited_random(gc, 23, 2);
    const VectorField Y = random_vector(gc, 3, 24, 2);
    const ConstraintValue direct = f_op(p, y, Y, Lambda, 0.3);
    const ConstraintValue composed = dphi(p, special_variation(p, y, Y, 0.3), Lambda);
    CHECK(max_norm(direct - composed) == 0.0);
    const ConstraintValue scaled = f_op(p, 3.0 * y, 3.0 * Y, Lambda, 0.3);
    CHECK(max_norm(scaled - ConstraintValue{3.0 * direct.phi0, 3.0 * direct.phii}) <= 1e-12 * max_norm(scaled));
  }

  TEST_CASE("sign-flip mutants break the adjoint identity") {
    const GridPtr g = torus(16, 0.3);
    const double Lambda = g->spec().cosmological_constant();
    const PhasePoint p = random_elliptic_point(g, 25, 1, 0.05, 0.05);
    for (Mutant m : {Mutant::flip_pi_hat, Mutant::flip_trace_laplacian, Mutant::flip_lie_density}) {
      const OperatorReport r = check_adjoint(p, Lambda, 3, 26, 2, m);
      CHECK_FALSE(r.pass);
      CHECK(r.statistics["max"].get<double>() >= 1e-2);
    }
  }
}
