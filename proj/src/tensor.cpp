#include "cforge/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cforge {
namespace {

template <class F>
void for_pairs(std::vector<Field>& a, const std::vector<Field>& b, F&& fn) {
  if (a.size() != b.size()) throw std::invalid_argument("tensor: component count mismatch");
  for (std::size_t c = 0; c < a.size(); ++c) fn(a[c], b[c]);
}

double max_abs_of(const std::vector<Field>& comps) {
  double m = 0.0;
  for (const auto& f : comps) m = std::max(m, f.max_abs());
  return m;
}

}  // namespace

// -- VectorField -------------------------------------------------------------

VectorField::VectorField(GridPtr grid, int n, double value) {
  c_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) c_.emplace_back(grid, value);
}

VectorField::VectorField(std::vector<Field> components) : c_(std::move(components)) {}

VectorField& VectorField::operator+=(const VectorField& o) {
  for_pairs(c_, o.c_, [](Field& x, const Field& y) { x += y; });
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  for_pairs(c_, o.c_, [](Field& x, const Field& y) { x -= y; });
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (auto& f : c_) f *= s;
  return *this;
}

VectorField& VectorField::axpy(double alpha, const VectorField& x) {
  for_pairs(c_, x.c_, [alpha](Field& a, const Field& b) { a.axpy(alpha, b); });
  return *this;
}

ComponentView VectorField::view() const {
  ComponentView v;
  for (const auto& f : c_) {
    v.components.push_back(&f);
    v.weights.push_back(1.0);
  }
  return v;
}

double VectorField::max_abs() const { return max_abs_of(c_); }

// -- SymField ----------------------------------------------------------------

SymField::SymField(GridPtr grid, int n, double value) : n_(n) {
  c_.reserve(static_cast<std::size_t>(sym_size(n)));
  for (int i = 0; i < sym_size(n); ++i) c_.emplace_back(grid, value);
}

SymField::SymField(int n, std::vector<Field> packed) : n_(n), c_(std::move(packed)) {
  if (c_.size() != static_cast<std::size_t>(sym_size(n))) {
    throw std::invalid_argument("SymField: expected " + std::to_string(sym_size(n)) + " packed components");
  }
}

SymField SymField::identity(const GridPtr& grid, int n, double scale) {
  SymField s(grid, n);
  for (int i = 0; i < n; ++i) s(i, i) = Field(grid, scale);
  return s;
}

SymField& SymField::operator+=(const SymField& o) {
  for_pairs(c_, o.c_, [](Field& x, const Field& y) { x += y; });
  return *this;
}

SymField& SymField::operator-=(const SymField& o) {
  for_pairs(c_, o.c_, [](Field& x, const Field& y) { x -= y; });
  return *this;
}

SymField& SymField::operator*=(double s) {
  for (auto& f : c_) f *= s;
  return *this;
}

SymField& SymField::axpy(double alpha, const SymField& x) {
  for_pairs(c_, x.c_, [alpha](Field& a, const Field& b) { a.axpy(alpha, b); });
  return *this;
}

ComponentView SymField::view() const {
  ComponentView v;
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) {
      v.components.push_back(&(*this)(i, j));
      v.weights.push_back(i == j ? 1.0 : 2.0);
    }
  }
  return v;
}

double SymField::max_abs() const { return max_abs_of(c_); }

// -- Rank3Field --------------------------------------------------------------

Rank3Field::Rank3Field(GridPtr grid, int n, double value) : n_(n) {
  c_.reserve(static_cast<std::size_t>(n * n * n));
  for (int i = 0; i < n * n * n; ++i) c_.emplace_back(grid, value);
}

Rank3Field& Rank3Field::operator-=(const Rank3Field& o) {
  for_pairs(c_, o.c_, [](Field& x, const Field& y) { x -= y; });
  return *this;
}

ComponentView Rank3Field::view() const {
  ComponentView v;
  for (const auto& f : c_) {
    v.components.push_back(&f);
    v.weights.push_back(1.0);
  }
  return v;
}

double Rank3Field::max_abs() const { return max_abs_of(c_); }

// -- free functions ----------------------------------------------------------

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }
SymField operator+(SymField a, const SymField& b) { return a += b; }
SymField operator-(SymField a, const SymField& b) { return a -= b; }
SymField operator*(double s, SymField a) { return a *= s; }

namespace {
double weighted_inner(const ComponentView& a, const ComponentView& b) {
  if (a.components.size() != b.components.size()) throw std::invalid_argument("inner: shape mismatch");
  double s = 0.0;
  for (std::size_t c = 0; c < a.components.size(); ++c) {
    s += a.weights[c] * inner(*a.components[c], *b.components[c]);
  }
  return s;
}
}  // namespace

double inner(const VectorField& a, const VectorField& b) { return weighted_inner(a.view(), b.view()); }
double inner(const SymField& a, const SymField& b) { return weighted_inner(a.view(), b.view()); }
double l2_norm(const VectorField& v) { return std::sqrt(inner(v, v)); }
double l2_norm(const SymField& s) { return std::sqrt(inner(s, s)); }
double l2_norm(const Rank3Field& t) {
  const auto v = t.view();
  return std::sqrt(weighted_inner(v, v));
}

double sobolev_norm(const VectorField& v, int k) { return sobolev_norm(v.view(), k); }
double sobolev_norm(const SymField& s, int k) { return sobolev_norm(s.view(), k); }

VectorField gradient_field(const Field& f) { return VectorField(gradient(f)); }

SymField hessian(const Field& f) {
  const int n = f.grid().dim();
  const auto grad = gradient(f);
  SymField h(f.grid_ptr(), n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) h(i, j) = derivative(grad[static_cast<std::size_t>(i)], j);
  }
  return h;
}

VectorField random_vector(const GridPtr& grid, int n, std::uint64_t seed, int band) {
  std::vector<Field> comps;
  for (int i = 0; i < n; ++i) comps.push_back(band_limited_random(grid, derive_seed(seed, static_cast<std::uint64_t>(i)), band));
  return VectorField(std::move(comps));
}

SymField random_sym(const GridPtr& grid, int n, std::uint64_t seed, int band) {
  std::vector<Field> comps;
  for (int c = 0; c < sym_size(n); ++c) {
    comps.push_back(band_limited_random(grid, derive_seed(seed, static_cast<std::uint64_t>(c)), band));
  }
  return SymField(n, std::move(comps));
}

}  // namespace cforge
