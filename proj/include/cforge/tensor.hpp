#pragma once

// Component containers for vector, symmetric rank-2 and rank-3 fields on a grid.
// Index variance is not stored here; the domain types in fields.hpp carry it.

#include <cstdint>
#include <vector>

#include "cforge/grid.hpp"

namespace cforge {

inline int sym_size(int n) { return n * (n + 1) / 2; }

/// Packed upper-triangular position of (i, j) in a symmetric n x n array.
inline int sym_index(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

class VectorField {
 public:
  VectorField() = default;
  VectorField(GridPtr grid, int n, double value = 0.0);
  explicit VectorField(std::vector<Field> components);

  int dim() const { return static_cast<int>(c_.size()); }
  Field& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  const Field& operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  std::vector<Field>& components() { return c_; }
  const std::vector<Field>& components() const { return c_; }
  const GridPtr& grid_ptr() const { return c_.front().grid_ptr(); }

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);
  VectorField& axpy(double alpha, const VectorField& x);

  ComponentView view() const;
  double max_abs() const;

 private:
  std::vector<Field> c_;
};

class SymField {
 public:
  SymField() = default;
  SymField(GridPtr grid, int n, double value = 0.0);
  SymField(int n, std::vector<Field> packed);

  static SymField identity(const GridPtr& grid, int n, double scale = 1.0);

  int dim() const { return n_; }
  Field& operator()(int i, int j) { return c_[static_cast<std::size_t>(sym_index(i, j, n_))]; }
  const Field& operator()(int i, int j) const { return c_[static_cast<std::size_t>(sym_index(i, j, n_))]; }
  std::vector<Field>& components() { return c_; }
  const std::vector<Field>& components() const { return c_; }
  const GridPtr& grid_ptr() const { return c_.front().grid_ptr(); }

  SymField& operator+=(const SymField& o);
  SymField& operator-=(const SymField& o);
  SymField& operator*=(double s);
  SymField& axpy(double alpha, const SymField& x);

  /// Off-diagonal components weighted twice: the full flat contraction.
  ComponentView view() const;
  double max_abs() const;

 private:
  int n_ = 0;
  std::vector<Field> c_;
};

/// Full rank-3 array T(a, b, c), a slowest.
class Rank3Field {
 public:
  Rank3Field() = default;
  Rank3Field(GridPtr grid, int n, double value = 0.0);

  int dim() const { return n_; }
  Field& operator()(int a, int b, int c) { return c_[flat(a, b, c)]; }
  const Field& operator()(int a, int b, int c) const { return c_[flat(a, b, c)]; }
  std::vector<Field>& components() { return c_; }
  const std::vector<Field>& components() const { return c_; }

  Rank3Field& operator-=(const Rank3Field& o);
  ComponentView view() const;
  double max_abs() const;

 private:
  std::size_t flat(int a, int b, int c) const {
    return static_cast<std::size_t>((a * n_ + b) * n_ + c);
  }
  int n_ = 0;
  std::vector<Field> c_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);
SymField operator+(SymField a, const SymField& b);
SymField operator-(SymField a, const SymField& b);
SymField operator*(double s, SymField a);

double inner(const VectorField& a, const VectorField& b);
double inner(const SymField& a, const SymField& b);  // full contraction
double l2_norm(const VectorField& v);
double l2_norm(const SymField& s);
double l2_norm(const Rank3Field& t);

double sobolev_norm(const VectorField& v, int k);
double sobolev_norm(const SymField& s, int k);

VectorField gradient_field(const Field& f);
/// Flat Hessian d_i d_j f.
SymField hessian(const Field& f);

VectorField random_vector(const GridPtr& grid, int n, std::uint64_t seed, int band);
SymField random_sym(const GridPtr& grid, int n, std::uint64_t seed, int band);

}  // namespace cforge
