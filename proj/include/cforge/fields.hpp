#pragma once

// Phase-space data on the flat torus: metrics, momentum densities, lapse-shift
// pairs, constraint values and the CMC background.
//
// The background metric is the identity, so relative and absolute densities
// coincide and sqrt(g) below is sqrt(det g).

#include <stdexcept>
#include <string>

#include "cforge/tensor.hpp"

namespace cforge {

enum class Variance { covariant, contravariant };

/// Covariant symmetric 2-tensor g_ij, expected uniformly positive definite.
struct MetricField {
  SymField g;
  int dim() const { return g.dim(); }
  const GridPtr& grid_ptr() const { return g.grid_ptr(); }
};

/// Contravariant symmetric 2-tensor density pi^ij (weight one).
struct MomentumField {
  SymField pi;
  int dim() const { return pi.dim(); }
  const GridPtr& grid_ptr() const { return pi.grid_ptr(); }
};

struct PhasePoint {
  MetricField g;
  MomentumField pi;
  int dim() const { return g.dim(); }
  const GridPtr& grid_ptr() const { return g.grid_ptr(); }
};

struct LapseShift {
  Field N;
  VectorField X;  // contravariant components X^i

  static LapseShift zero(const GridPtr& grid, int n) { return {Field(grid), VectorField(grid, n)}; }
  const GridPtr& grid_ptr() const { return N.grid_ptr(); }
};

struct ConstraintValue {
  Field phi0;        // scalar density
  VectorField phii;  // one-form density

  static ConstraintValue zero(const GridPtr& grid, int n) { return {Field(grid), VectorField(grid, n)}; }
};

/// Thrown when a metric is not positive definite somewhere on the grid.
class NonEllipticMetric : public std::domain_error {
 public:
  NonEllipticMetric(const std::string& what, std::size_t point) : std::domain_error(what), point_(point) {}
  std::size_t point() const { return point_; }

 private:
  std::size_t point_;
};

struct EllipticityInfo {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  std::size_t min_point = 0;
  /// Largest lambda with lambda * I <= g <= I / lambda pointwise; <= 0 if degenerate.
  double lambda = 0.0;
  bool positive() const { return min_eigenvalue > 0.0; }
};

EllipticityInfo ellipticity(const SymField& g);
/// Throws NonEllipticMetric naming the worst grid point.
EllipticityInfo require_elliptic(const MetricField& g);

SymField metric_inverse(const MetricField& g);
/// Inverse of a contravariant field, i.e. back to covariant components.
SymField lower_inverse(const SymField& ginv);
Field sqrt_det(const MetricField& g);

/// T^{ij} = g^{ia} g^{jb} T_ab
SymField raise(const SymField& ginv, const SymField& covariant);
/// T_{ij} = g_ia g_jb T^ab
SymField lower(const SymField& g, const SymField& contravariant);

/// pi^{ij} = (K^{ij} - tr_g K g^{ij}) sqrt(g)
MomentumField pi_from_K(const MetricField& g, const SymField& K);
/// Inverse of pi_from_K; returns covariant K_ij.
SymField K_from_pi(const MetricField& g, const MomentumField& pi);

/// Background data (identity metric, pi^{ij} = tau (1 - n) delta^{ij}).
PhasePoint background(const GridPtr& grid);

/// |T|_g^2 with every index contracted through g or g^{-1} according to variance.
Field tensor_norm_sq(const MetricField& g, const SymField& T, Variance variance);
Field trace(const MetricField& g, const SymField& T, Variance variance);

/// Adds amplitude * (band-limited random) to every component of g and pi.
PhasePoint perturbed(const PhasePoint& base, std::uint64_t seed, int band, double metric_amplitude,
                     double momentum_amplitude);

/// p + t v, componentwise.
PhasePoint displaced(const PhasePoint& p, const SymField& h, const SymField& q, double t);

}  // namespace cforge
