#pragma once

// Periodic uniform lattice on the flat n-torus with Fourier differentiation,
// rectangle-rule quadrature and discrete Sobolev norms.

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cforge {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct GridSpec {
  int n = 3;
  std::vector<int> points;  // per axis, even, >= 4
  double period = kTwoPi;
  double tau = 0.0;
  double kappa = 0.0;
  std::optional<double> lambda;  // unset: 2 Lambda = n (n - 1) (tau^2 + kappa)

  static GridSpec uniform(int n, int points_per_axis, double tau = 0.0, double kappa = 0.0);

  double cosmological_constant() const;
  void validate() const;  // throws std::invalid_argument
};

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

class Grid {
 public:
  static GridPtr make(GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  int dim() const { return spec_.n; }
  int points(int axis) const { return spec_.points[static_cast<std::size_t>(axis)]; }
  std::size_t total_points() const { return total_; }
  double cell_volume() const { return cell_volume_; }
  double volume() const;
  double spacing(int axis) const { return spec_.period / points(axis); }

  // Row-major flat index, last axis fastest.
  std::vector<int> unravel(std::size_t flat) const;
  double coordinate(int axis, int index) const { return index * spacing(axis); }
  std::vector<double> coordinates(std::size_t flat) const;

  std::size_t complex_size() const { return complex_total_; }

  // Wavenumber of every half-spectrum entry along `axis`, as used for first
  // derivatives: the Nyquist wavenumber is zeroed.
  const std::vector<double>& derivative_wavenumbers(int axis) const {
    return deriv_k_[static_cast<std::size_t>(axis)];
  }
  // Integer mode number of every half-spectrum entry along `axis`.
  const std::vector<int>& modes(int axis) const { return modes_[static_cast<std::size_t>(axis)]; }
  // Multiplicity of each half-spectrum entry in the full spectrum (1 or 2).
  const std::vector<double>& hermitian_weight() const { return herm_weight_; }
  // True where some axis sits at its Nyquist mode.
  const std::vector<bool>& nyquist_mask() const { return nyquist_; }

  // Unnormalized forward real-to-complex transform.
  void forward(const double* in, std::complex<double>* out) const;
  // Normalized inverse; the input is left untouched.
  void backward(const std::complex<double>* in, double* out) const;

  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

 private:
  explicit Grid(GridSpec spec);

  GridSpec spec_;
  std::size_t total_ = 0;
  std::size_t complex_total_ = 0;
  double cell_volume_ = 0.0;
  std::vector<std::vector<double>> deriv_k_;
  std::vector<std::vector<int>> modes_;
  std::vector<double> herm_weight_;
  std::vector<bool> nyquist_;
  void* plan_forward_ = nullptr;
  void* plan_backward_ = nullptr;
};

/// Scalar field sampled on a grid. Tensor fields are built from these.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid, double value = 0.0);
  Field(GridPtr grid, std::vector<double> values);

  static Field from_function(GridPtr grid, const std::function<double(std::span<const double>)>& fn);

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(const Field& other);
  Field& operator*=(double s);
  Field& operator+=(double s);
  Field& axpy(double alpha, const Field& x);  // this += alpha * x

  double max_abs() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Field a, const Field& b);
Field operator*(double s, Field a);
Field operator*(Field a, double s);
Field operator-(Field a);

void require_same_grid(const Field& a, const Field& b);

// -- spectral calculus -------------------------------------------------------

/// Spectral partial derivative along `axis`; exact below Nyquist.
Field derivative(const Field& f, int axis);
std::vector<Field> gradient(const Field& f);
/// d_a d_b f as the composition of two first derivatives.
Field second_derivative(const Field& f, int a, int b);
/// Flat Laplacian sum_a d_a d_a f.
Field laplacian(const Field& f);
/// Removes every Fourier mode that sits on a Nyquist wavenumber.
Field drop_nyquist(const Field& f);

double integrate(const Field& f);
double inner(const Field& a, const Field& b);
double l2_norm(const Field& f);

// -- Sobolev norms -----------------------------------------------------------

/// A tensor field as a list of scalar components with contraction weights,
/// so that sum_c w_c |u_c|^2 is the pointwise flat norm squared.
struct ComponentView {
  std::vector<const Field*> components;
  std::vector<double> weights;
};

/// sum over multi-indices |alpha| <= k of the L2 norm of d^alpha u.
double sobolev_norm(const ComponentView& u, int k);
double sobolev_norm(const Field& u, int k);

// -- band-limited random data ------------------------------------------------

/// Deterministic pseudorandom field with Fourier support |m|_inf <= band and
/// maximum absolute value 1. Requires band <= min(points)/4.
Field band_limited_random(const GridPtr& grid, std::uint64_t seed, int band);

/// Mixes a base seed with a stream index into an independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace cforge
