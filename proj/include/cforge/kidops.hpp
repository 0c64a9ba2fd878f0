#pragma once

// Linearized constraint operator, its formal L2 adjoint (the KID operator) and
// the auxiliary operators built around them.
//
// The adjoint is written out from its own component formulas rather than by
// transposing the linearization, so the pairing identity
//   <DPhi(h,p), (N,X)> = <(h,p), DPhi*(N,X)>
// is an independent check of both.

#include <vector>

#include "cforge/constraint.hpp"

namespace cforge {

/// Direction (h_ij, p^ij) in phase space; p is a contravariant density.
struct Variation {
  SymField h;
  SymField p;

  static Variation zero(const GridPtr& grid, int n) { return {SymField(grid, n), SymField(grid, n)}; }
};

/// Image of the KID operator. slot_h^{ij} pairs with h_ij (a density),
/// slot_p_ij pairs with p^{ij}.
struct AdjointValue {
  SymField slot_h;
  SymField slot_p;
};

/// Reweighted adjoint: (g^{-1/4} DPhi*_1, g^{1/4} nabla DPhi*_2), second slot
/// indexed [l](i,j).
struct PStarValue {
  SymField first;
  std::vector<SymField> second;
};

/// Deliberate sign errors used to show that identity checks are not vacuous.
enum class Mutant {
  none,
  flip_pi_hat,           // sign of the pi-hat nabla h term in DPhi_i
  flip_trace_laplacian,  // sign of Laplacian(tr h) in DPhi_0
  flip_lie_density,      // sign of (div X) pi in the adjoint
};

/// Linear operators frozen at one phase point.
class Linearization {
 public:
  Linearization(const PhasePoint& p, double Lambda, Mutant mutant = Mutant::none);
  /// General form: two_lambda may vary in space (the scalar-curvature map uses 2 f).
  Linearization(const PhasePoint& p, const Field& two_lambda, Mutant mutant = Mutant::none);

  ConstraintValue apply(const Variation& v) const;
  AdjointValue adjoint(const LapseShift& xi) const;
  PStarValue p_star(const LapseShift& xi) const;

  /// h = 2 y g, p = (2 S(Y)^{ij} - g^{ij} tr S(Y) - (n-1)(n-2) tau y g^{ij}) sqrt(g)
  Variation special_variation(const Field& y, const VectorField& Y, double tau) const;
  /// F(y, Y) = DPhi(special_variation(y, Y))
  ConstraintValue f_op(const Field& y, const VectorField& Y, double tau) const;

  const PhasePoint& point() const { return point_; }
  const MetricGeometry& geometry() const { return geo_; }
  const CurvaturePack& curvature() const { return curv_; }
  int dim() const { return geo_.n; }
  const GridPtr& grid_ptr() const { return geo_.grid; }

 private:
  PhasePoint point_;
  Field two_lambda_;
  Mutant mutant_;
  MetricGeometry geo_;
  CurvaturePack curv_;
  SymField coeff_p_;               // (2/(n-1) tr pi g_ij - 2 pi_ij) / sqrt(g) = -2 K_ij
  VectorField div_pi_;             // nabla_k pi^{jk}
  std::vector<SymField> grad_pi_;  // nabla_k pi^{ij}, density
};

ConstraintValue dphi(const PhasePoint& p, const Variation& v, double Lambda);
AdjointValue dphi_adjoint(const PhasePoint& p, const LapseShift& xi, double Lambda);
PStarValue p_star(const PhasePoint& p, const LapseShift& xi, double Lambda);
Variation special_variation(const PhasePoint& p, const Field& y, const VectorField& Y, double tau);
ConstraintValue f_op(const PhasePoint& p, const Field& y, const VectorField& Y, double Lambda, double tau);

/// int Phi_0 N + Phi_i X^i
double pairing(const ConstraintValue& c, const LapseShift& xi);
/// int h_ij A^ij + p^ij B_ij with full contraction
double pairing(const Variation& v, const AdjointValue& a);

double l2_norm(const Variation& v);
double l2_norm(const LapseShift& xi);
double l2_norm(const AdjointValue& a);
double l2_norm(const PStarValue& a);

/// Flat Killing operator S0(X)_ij = (d_i X_j + d_j X_i) / 2 of a one-form.
SymField killing(const VectorField& X);

struct Rank3Pair {
  Rank3Field lhs;
  Rank3Field rhs;
};

/// Both sides of d_k d_j X_i = d_k S_ij + d_j S_ik - d_i S_jk on the flat torus
/// (the curvature term vanishes), indexed (k, j, i). lhs is also U0(X) at
/// kappa = 0. flip_last negates the last term on the right, for mutation tests.
Rank3Pair u_second_derivative_identity(const VectorField& X, bool flip_last = false);

/// U0_kji(X) = d_k d_j X_i + kappa (delta_jk X_i - delta_ik X_j)
Rank3Field u_ring(const VectorField& X, double kappa);

struct ShiftedHessian {
  SymField T;  // nabla nabla N - [Ric - (R + 2 Lambda) g / (2 (n-1))] N
  SymField L;  // nabla nabla N - g Lap N - [Ric - (R - 2 Lambda) g / 2] N
};

ShiftedHessian t_shift(const MetricField& g, const Field& N, double Lambda);

/// T0(N) = d d N + kappa delta N
SymField t_ring(const Field& N, double kappa);

/// Linearization of (R(g) - 2 f) sqrt(g) in direction h.
Field dr_linear(const MetricField& g, const Field& f, const SymField& h);
/// [nabla^i nabla^j N - g^{ij} Lap N - (R^{ij} - (R - 2 f) g^{ij} / 2) N] sqrt(g)
SymField dr_adjoint(const MetricField& g, const Field& f, const Field& N);

}  // namespace cforge
