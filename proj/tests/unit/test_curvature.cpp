#include <cmath>
#include <limits>

#include "cforge/curvature.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cforge;
using testing::fn;
using testing::max_diff;
using testing::torus;

namespace {

Field exp_of(const Field& u, double a) {
  Field r = u;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::exp(a * u[i]);
  return r;
}

MetricField conformal(const Field& u) {
  const GridPtr& g = u.grid_ptr();
  const Field e2u = exp_of(u, 2.0);
  SymField s(g, 3);
  for (int a = 0; a < 3; ++a) s(a, a) = e2u;
  return {s};
}

Field sample_u(const GridPtr& g) {
  return 0.1 * fn(g, [](double x, double y, double z) { return std::sin(x) + 0.5 * std::cos(y) * std::sin(z); });
}

MetricField random_metric(const GridPtr& g, std::uint64_t seed, double amp, int band) {
  MetricField m{SymField::identity(g, 3)};
  m.g.axpy(amp, random_sym(g, 3, seed, band));
  return m;
}

// Linearized Ricci at the flat metric.
SymField flat_ricci_linear(const SymField& h) {
  const int n = h.dim();
  const GridPtr& g = h.grid_ptr();
  Field tr(g);
  for (int a = 0; a < n; ++a) tr += h(a, a);
  SymField out(g, n);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      Field s(g);
      for (int i = 0; i < n; ++i) {
        s += second_derivative(h(i, k), i, j);
        s += second_derivative(h(i, j), i, k);
      }
      s -= second_derivative(tr, j, k);
      s -= laplacian(h(j, k));
      out(j, k) = 0.5 * s;
    }
  return out;
}

}  // namespace

TEST_SUITE("curvature") {
  TEST_CASE("christoffel differences") {
    const GridPtr g = torus(16);
    const ChristoffelDelta A0 = christoffel_delta({SymField::identity(g, 3)});
    for (int k = 0; k < 3; ++k) CHECK(A0[k].max_abs() == 0.0);
    const ChristoffelDelta Ac = christoffel_delta({SymField::identity(g, 3, 3.5)});
    for (int k = 0; k < 3; ++k) CHECK(Ac[k].max_abs() <= 1e-15);

    const Field u = sample_u(g);
    const std::vector<Field> du = gradient(u);
    const ChristoffelDelta A = christoffel_delta(conformal(u));
    double worst = 0.0;
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
          Field want(g);
          if (k == i) want += du[j];
          if (k == j) want += du[i];
          if (i == j) want -= du[k];
          worst = std::max(worst, max_diff(A[k](i, j), want));
        }
    CHECK(worst <= 1e-10);
  }

  TEST_CASE("ricci of flat metrics vanishes") {
    const GridPtr g = torus(8);
    CHECK(ricci({SymField::identity(g, 3)}).max_abs() == 0.0);
    SymField d(g, 3);
    d(0, 0) = Field(g, 4.0);
    d(1, 1) = Field(g, 0.25);
    d(2, 2) = Field(g, 9.0);
    CHECK(ricci({d}).max_abs() <= 1e-14);
    CHECK(scalar_curvature({d}).max_abs() <= 1e-14);
  }

  TEST_CASE("conformal ricci and scalar curvature") {
    const int n = 3;
    const GridPtr g = torus(16);
    const Field u = sample_u(g);
    const MetricField m = conformal(u);
    const std::vector<Field> du = gradient(u);
    Field grad_sq(g);
    for (int a = 0; a < n; ++a) grad_sq += du[a] * du[a];
    const Field lap = laplacian(u);

    SymField want(g, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Field v = -(n - 2.0) * (second_derivative(u, i, j) - du[i] * du[j]);
        if (i == j) v -= lap + (n - 2.0) * grad_sq;
        want(i, j) = v;
      }
    CHECK(max_diff(ricci(m), want) <= 1e-8);

    const Field R_want = exp_of(u, -2.0) * (-4.0 * lap - 2.0 * grad_sq);
    CHECK(max_diff(scalar_curvature(m), R_want) <= 1e-8);
    CHECK(max_diff(scalar_curvature_from_ricci(m), R_want) <= 1e-8);
  }

  TEST_CASE("scalar curvature paths agree on resolved metrics") {
    const GridPtr g16 = torus(16), g32 = torus(32);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const MetricField m16 = random_metric(g16, seed, 0.05, 1);
      CHECK(max_diff(scalar_curvature(m16), scalar_curvature_from_ricci(m16)) <= 1e-9);
    }
    const MetricField m32 = random_metric(g32, 0, 0.05, 2);
    CHECK(max_diff(scalar_curvature(m32), scalar_curvature_from_ricci(m32)) <= 1e-9);
  }

  TEST_CASE("unresolved products separate the two paths spectrally") {
    double prev = std::numeric_limits<double>::infinity();
    for (int points : {8, 16, 32}) {
      const MetricField m = random_metric(torus(points), 0, 0.05, 2);
      const double d = max_diff(scalar_curvature(m), scalar_curvature_from_ricci(m));
      CHECK(d < 1e-3 * prev);
      prev = d;
    }
  }

  TEST_CASE("ricci is first order at the flat metric with the linearized derivative") {
    const GridPtr g = torus(16);
    const SymField h = random_sym(g, 3, 21, 1);
    const SymField lin = flat_ricci_linear(h);
    std::vector<double> ts{1e-2, 3e-3, 1e-3, 3e-4}, errs;
    for (double t : ts) {
      MetricField plus{SymField::identity(g, 3)}, minus{SymField::identity(g, 3)};
      plus.g.axpy(t, h);
      minus.g.axpy(-t, h);
      const SymField fd = (0.5 / t) * (ricci(plus) - ricci(minus));
      errs.push_back(l2_norm(fd - lin));
    }
    const double slope = std::log(errs.front() / errs.back()) / std::log(ts.front() / ts.back());
    CHECK(slope >= 1.9);
    MetricField small{SymField::identity(g, 3)};
    small.g.axpy(1e-4, h);
    CHECK(l2_norm(ricci(small)) <= 1e-4 * l2_norm(lin) * 1.01);
  }

  TEST_CASE("background E and Pi") {
    const int n = 3;
    const double tau = 0.3;
    const GridPtr g = torus(8, tau);
    const PhasePoint b = background(g);
    const double Lambda = g->spec().cosmological_constant();
    const CurvaturePack c = e_and_pi(b.g, b.pi, Lambda);
    CHECK(max_diff(c.Pi, SymField::identity(g, n, -0.5 * (n - 1) * (n - 4) * tau * tau)) <= 1e-15);
    CHECK(max_diff(c.Pi, SymField::identity(g, n, tau * tau)) <= 1e-15);
    CHECK(max_diff(c.Pi - c.E, SymField::identity(g, n, -(n - 1.0) * (n - 2.0) * tau * tau)) <= 1e-14);
    const CurvaturePack z = e_and_pi(b.g, MomentumField{SymField(g, n)}, Lambda);
    CHECK(z.Pi.max_abs() == 0.0);
  }
}
