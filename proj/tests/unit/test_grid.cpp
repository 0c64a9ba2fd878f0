#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

using namespace cforge;
using testing::fn;
using testing::max_diff;
using testing::torus;

TEST_SUITE("grid") {
  TEST_CASE("spec validation and derived constants") {
    CHECK_THROWS_AS(Grid::make(GridSpec::uniform(2, 8)), std::invalid_argument);
    CHECK_THROWS_AS(Grid::make(GridSpec::uniform(3, 7)), std::invalid_argument);
    CHECK_THROWS_AS(Grid::make(GridSpec::uniform(3, 2)), std::invalid_argument);
    GridSpec s = GridSpec::uniform(3, 8, 1.0);
    CHECK(s.cosmological_constant() == doctest::Approx(3.0));
    s.lambda = 0.5;
    CHECK(s.cosmological_constant() == 0.5);
    const GridPtr g = torus(8);
    CHECK(g->total_points() == 512);
    CHECK(g->cell_volume() * g->total_points() == doctest::Approx(std::pow(kTwoPi, 3)).epsilon(1e-14));
  }

  TEST_CASE("spectral derivative examples") {
    const GridPtr g = torus(16);
    const Field s = fn(g, [](double x, double, double) { return std::sin(x); });
    CHECK(max_diff(derivative(s, 0), fn(g, [](double x, double, double) { return std::cos(x); })) <= 1e-12);
    CHECK(derivative(Field(g, 3.5), 2).max_abs() <= 1e-12);
    const Field f = fn(g, [](double x, double y, double) { return std::sin(3 * x) * std::cos(2 * y); });
    const Field expect = fn(g, [](double x, double y, double) { return -2 * std::sin(3 * x) * std::sin(2 * y); });
    CHECK(max_diff(derivative(f, 1), expect) <= 1e-12);
    CHECK_THROWS(derivative(f, 3));
    CHECK_THROWS(derivative(f, -1));
  }

  TEST_CASE("derivatives commute and integrate to zero") {
    const GridPtr g = torus(16);
    const Field f = band_limited_random(g, 4, 4);
    CHECK(max_diff(second_derivative(f, 0, 2), second_derivative(f, 2, 0)) <= 1e-12);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(integrate(derivative(f, a))) <= 1e-12);
  }

  TEST_CASE("quadrature oracles") {
    const GridPtr g = torus(16);
    CHECK(integrate(Field(g, 1.0)) == doctest::Approx(248.0502).epsilon(1e-6));
    CHECK(integrate(Field(g, 1.0)) == doctest::Approx(std::pow(kTwoPi, 3)).epsilon(1e-14));
    CHECK(std::abs(integrate(fn(g, [](double x, double, double) { return std::sin(x); }))) <= 1e-12);
    const Field s2 = fn(g, [](double x, double, double) { return std::sin(x) * std::sin(x); });
    CHECK(integrate(s2) == doctest::Approx(124.0251).epsilon(1e-6));
  }

  TEST_CASE("sobolev norm oracles") {
    const GridPtr g = torus(16);
    CHECK(sobolev_norm(Field(g, 1.0), 0) == doctest::Approx(15.7496).epsilon(1e-5));
    CHECK(sobolev_norm(Field(g, -2.0), 0) == doctest::Approx(2 * 15.7496).epsilon(1e-5));
    const Field s = fn(g, [](double x, double, double) { return std::sin(x); });
    CHECK(sobolev_norm(s, 1) == doctest::Approx(22.2733).epsilon(1e-5));
    for (int k = 0; k <= 3; ++k) CHECK(sobolev_norm(Field(g), k) == 0.0);
    CHECK_THROWS_AS(sobolev_norm(s, -1), std::invalid_argument);
  }

  TEST_CASE("sobolev norm is a norm on random samples") {
    const GridPtr g = torus(16);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Field u = band_limited_random(g, seed, 3);
      const Field v = band_limited_random(g, seed + 100, 3);
      for (int k : {0, 2}) {
        CHECK(sobolev_norm(-2.5 * u, k) == doctest::Approx(2.5 * sobolev_norm(u, k)).epsilon(1e-13));
        CHECK(sobolev_norm(u + v, k) <= sobolev_norm(u, k) + sobolev_norm(v, k) + 1e-12);
      }
    }
  }

  TEST_CASE("band-limited random data") {
    const GridPtr g = torus(16);
    const Field a = band_limited_random(g, 0, 2);
    const Field b = band_limited_random(g, 0, 2);
    CHECK(max_diff(a, b) == 0.0);
    CHECK(l2_norm(a - band_limited_random(g, 1, 2)) > 1e-3);
    CHECK(a.max_abs() == doctest::Approx(1.0));
    CHECK_THROWS_AS(band_limited_random(g, 0, 5), std::invalid_argument);

    std::vector<std::complex<double>> spec(g->complex_size());
    g->forward(a.data(), spec.data());
    double outside = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      bool beyond = false;
      for (int ax = 0; ax < 3; ++ax) beyond = beyond || std::abs(g->modes(ax)[i]) > 2;
      if (beyond) outside = std::max(outside, std::abs(spec[i]));
    }
    CHECK(outside <= 1e-10);
  }

  TEST_CASE("nyquist removal") {
    const GridPtr g = torus(8);
    const Field nyq = fn(g, [](double x, double, double) { return std::cos(4 * x); });
    CHECK(drop_nyquist(nyq).max_abs() <= 1e-14);
    const Field low = fn(g, [](double x, double y, double) { return std::sin(x) + std::cos(3 * y); });
    CHECK(max_diff(drop_nyquist(low), low) <= 1e-14);
  }
}
