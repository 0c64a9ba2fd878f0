#pragma once

// Vacuum constraint operator Phi = (Phi_0, Phi_i) and the scalar-curvature map
// (R(g) - 2 f) sqrt(g). Lambda enters only as an explicit argument.

#include "cforge/curvature.hpp"

namespace cforge {

/// Phi_0 = (R - 2 Lambda) sqrt(g) - (|pi|^2 - (tr pi)^2 / (n - 1)) / sqrt(g)
Field hamiltonian(const PhasePoint& p, double Lambda);
/// Phi_0 = (R - 2 Lambda - |K|^2 + (tr K)^2) sqrt(g), K recovered from pi.
Field hamiltonian_K_form(const PhasePoint& p, double Lambda);

/// Phi_i = 2 g_ij nabla_k pi^{jk}
VectorField momentum(const PhasePoint& p);

ConstraintValue phi(const PhasePoint& p, double Lambda);

/// (R(g) - 2 f) sqrt(g)
Field scalar_map(const MetricField& g, const Field& f);

double l2_norm(const ConstraintValue& c);
double max_norm(const ConstraintValue& c);
double sobolev_norm(const ConstraintValue& c, int k);
ConstraintValue operator-(ConstraintValue a, const ConstraintValue& b);
/// Removes Nyquist content, which spectral derivatives cannot resolve.
ConstraintValue drop_nyquist(ConstraintValue c);

namespace detail {
Field hamiltonian(const MetricGeometry& geo, const MomentumField& pi, const Field& two_lambda);
VectorField momentum(const MetricGeometry& geo, const MomentumField& pi);
}  // namespace detail

}  // namespace cforge
