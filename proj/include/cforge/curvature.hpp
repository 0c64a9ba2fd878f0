#pragma once

// Curvature of a metric on the flat torus, expressed through the difference
// tensor A^k_ij = Gamma^k_ij - Gamma0^k_ij. The background Christoffels and
// Riemann tensor vanish, so every derivative here is a coordinate derivative.

#include <vector>

#include "cforge/fields.hpp"

namespace cforge {

/// A^k_ij stored as one symmetric field per upper index k.
struct ChristoffelDelta {
  std::vector<SymField> A;
  const SymField& operator[](int k) const { return A[static_cast<std::size_t>(k)]; }
  SymField& operator[](int k) { return A[static_cast<std::size_t>(k)]; }
  int dim() const { return static_cast<int>(A.size()); }
};

struct CurvaturePack {
  SymField ric;  // R_ij
  Field scal;    // R(g)
  SymField E;    // E^{ij} = R^{ij} - (R - 2 Lambda) g^{ij} / 2
  SymField Pi;   // momentum-quadratic tensor, contravariant
};

/// Cached metric quantities shared by the operators evaluated at one metric.
struct MetricGeometry {
  GridPtr grid;
  int n = 0;
  SymField g;
  SymField ginv;
  Field det;
  Field sqrt_g;
  std::vector<SymField> dg;  // dg[l](i,j) = d_l g_ij
  ChristoffelDelta A;
  SymField ric;
  Field scal;
  EllipticityInfo ellipticity;

  /// Validates ellipticity and fills every member.
  static MetricGeometry build(const MetricField& g);

  // Covariant calculus with the connection of g.
  /// d_i d_j N - A^k_ij d_k N
  SymField hessian(const Field& N) const;
  /// g^{ij} (d_i d_j u - A^k_ij d_k u)
  Field laplacian(const Field& u) const;
  /// (nabla_k h)_ij for covariant h; result indexed [k](i,j)
  std::vector<SymField> covariant_derivative(const SymField& h) const;
  /// nabla_k X^i = d_k X^i + A^i_kl X^l, stored as a full matrix [k][i]
  std::vector<VectorField> vector_gradient(const VectorField& X) const;
  /// nabla_i X_j for a one-form X_j; full matrix [i][j]
  std::vector<VectorField> covector_gradient(const VectorField& X) const;
  /// Divergence of a contravariant symmetric density: d_k P^{jk} + A^j_kl P^{kl}
  VectorField density_divergence(const SymField& P) const;
  /// Lowers a vector with g.
  VectorField lower(const VectorField& X) const;
};

ChristoffelDelta christoffel_delta(const MetricField& g);

/// Ricci tensor from the difference formula
/// R_jk = d_i A^i_jk - d_j A^i_ik + A^l_jk A^i_il - A^i_jl A^l_ki.
SymField ricci(const MetricField& g);

/// Scalar curvature through second derivatives of g plus the quadratic terms
/// in g^{-1} and dg (independent of the Ricci routine).
Field scalar_curvature(const MetricField& g);

/// g^{ij} R_ij using ricci().
Field scalar_curvature_from_ricci(const MetricField& g);

CurvaturePack e_and_pi(const MetricField& g, const MomentumField& pi, double Lambda);
CurvaturePack e_and_pi(const MetricGeometry& geo, const MomentumField& pi, const Field& two_lambda);

namespace detail {
SymField ricci_from(const GridPtr& grid, int n, const ChristoffelDelta& A);
Field scalar_curvature_direct(const MetricGeometry& geo);
}  // namespace detail

}  // namespace cforge
