#include <cmath>

#include "cforge/fields.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cforge;
using testing::fn;
using testing::max_diff;
using testing::torus;

namespace {

SymField diag(const GridPtr& g, double a, double b, double c) {
  SymField s(g, 3);
  s(0, 0) = Field(g, a);
  s(1, 1) = Field(g, b);
  s(2, 2) = Field(g, c);
  return s;
}

MetricField conformal(const GridPtr& g, const Field& u) {
  Field e2u = u;
  for (std::size_t i = 0; i < e2u.size(); ++i) e2u[i] = std::exp(2 * u[i]);
  SymField s(g, 3);
  for (int a = 0; a < 3; ++a) s(a, a) = e2u;
  return {s};
}

MetricField random_metric(const GridPtr& g, std::uint64_t seed, double amp = 0.1) {
  MetricField m{SymField::identity(g, 3)};
  m.g.axpy(amp, random_sym(g, 3, seed, 2));
  return m;
}

}  // namespace

TEST_SUITE("fields") {
  TEST_CASE("metric inverse") {
    const GridPtr g = torus(8);
    CHECK(max_diff(metric_inverse({SymField::identity(g, 3)}), SymField::identity(g, 3)) == 0.0);
    CHECK(max_diff(metric_inverse({SymField::identity(g, 3, 2.0)}), SymField::identity(g, 3, 0.5)) <= 1e-15);
    const MetricField m = random_metric(g, 3);
    const SymField inv = metric_inverse(m);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Field s(g);
        for (int k = 0; k < 3; ++k) s += inv(i, k) * m.g(k, j);
        if (i == j) s += -1.0;
        worst = std::max(worst, s.max_abs());
      }
    CHECK(worst <= 1e-12);
    CHECK(max_diff(lower_inverse(inv), m.g) <= 1e-12);
  }

  TEST_CASE("degenerate metrics are hard errors naming the point") {
    const GridPtr g = torus(8);
    MetricField m{SymField::identity(g, 3)};
    m.g(1, 1)[77] = -0.5;
    CHECK_THROWS_AS(require_elliptic(m), NonEllipticMetric);
    try {
      require_elliptic(m);
    } catch (const NonEllipticMetric& e) {
      CHECK(e.point() == 77);
    }
    CHECK_FALSE(ellipticity(m.g).positive());
    const EllipticityInfo info = ellipticity(diag(g, 2.0, 0.5, 1.0));
    CHECK(info.lambda == doctest::Approx(0.5));
  }

  TEST_CASE("sqrt det") {
    const GridPtr g = torus(8);
    CHECK(max_diff(sqrt_det({SymField::identity(g, 3)}), Field(g, 1.0)) == 0.0);
    CHECK(max_diff(sqrt_det({diag(g, 4, 1, 1)}), Field(g, 2.0)) <= 1e-15);
    const Field u = 0.1 * fn(g, [](double x, double y, double) { return std::sin(x) * std::cos(y); });
    Field e3u = u;
    for (std::size_t i = 0; i < e3u.size(); ++i) e3u[i] = std::exp(3 * u[i]);
    CHECK(max_diff(sqrt_det(conformal(g, u)), e3u) <= 1e-12);
  }

  TEST_CASE("momentum from second fundamental form") {
    const GridPtr g = torus(8);
    const MetricField id{SymField::identity(g, 3)};
    const double tau = 0.7;
    const MomentumField pi = pi_from_K(id, SymField::identity(g, 3, tau));
    CHECK(max_diff(pi.pi, SymField::identity(g, 3, tau * (1 - 3))) <= 1e-15);
    CHECK(pi_from_K(id, SymField(g, 3)).pi.max_abs() == 0.0);
    const MetricField m = random_metric(g, 5);
    const SymField K = random_sym(g, 3, 6, 2);
    CHECK(max_diff(K_from_pi(m, pi_from_K(m, K)), K) <= 1e-10);
  }

  TEST_CASE("background data") {
    const GridPtr g0 = torus(8, 0.0);
    const PhasePoint b0 = background(g0);
    CHECK(b0.pi.pi.max_abs() == 0.0);
    CHECK(g0->spec().cosmological_constant() == 0.0);
    const GridPtr g1 = torus(8, 1.0);
    const PhasePoint b1 = background(g1);
    CHECK(max_diff(b1.pi.pi, SymField::identity(g1, 3, -2.0)) == 0.0);
    CHECK(g1->spec().cosmological_constant() == doctest::Approx(3.0));
  }

  TEST_CASE("norms and traces at the background") {
    const int n = 3;
    const double tau = 0.3;
    const GridPtr g = torus(8, tau);
    const PhasePoint b = background(g);
    CHECK(max_diff(tensor_norm_sq(b.g, b.g.g, Variance::covariant), Field(g, n)) <= 1e-15);
    CHECK(max_diff(trace(b.g, b.pi.pi, Variance::contravariant), Field(g, tau * (1 - n) * n)) <= 1e-15);
    const Field pn = tensor_norm_sq(b.g, b.pi.pi, Variance::contravariant);
    CHECK(max_diff(pn, Field(g, tau * tau * (1 - n) * (1 - n) * n)) <= 1e-14);
    const Field tr = trace(b.g, b.pi.pi, Variance::contravariant);
    CHECK(max_diff(pn - (1.0 / (n - 1)) * (tr * tr), Field(g, -tau * tau * n * (n - 1))) <= 1e-14);
  }

  TEST_CASE("raising and lowering are inverse") {
    const GridPtr g = torus(8);
    const MetricField m = random_metric(g, 9);
    const SymField T = random_sym(g, 3, 10, 2);
    CHECK(max_diff(lower(m.g, raise(metric_inverse(m), T)), T) <= 1e-12);
  }
}
