#pragma once

#include <cmath>
#include <span>

#include "cforge/grid.hpp"
#include "cforge/tensor.hpp"

namespace testing {

inline cforge::GridPtr torus(int points, double tau = 0.0, double kappa = 0.0) {
  return cforge::Grid::make(cforge::GridSpec::uniform(3, points, tau, kappa));
}

inline cforge::Field fn(const cforge::GridPtr& g, double (*f)(double, double, double)) {
  return cforge::Field::from_function(g, [f](std::span<const double> x) { return f(x[0], x[1], x[2]); });
}

inline double max_diff(const cforge::Field& a, const cforge::Field& b) { return (a - b).max_abs(); }

inline double max_diff(const cforge::SymField& a, const cforge::SymField& b) { return (a - b).max_abs(); }

inline double max_diff(const cforge::VectorField& a, const cforge::VectorField& b) { return (a - b).max_abs(); }

}  // namespace testing
