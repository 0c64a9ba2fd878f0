#include "cforge/constraint.hpp"

#include <algorithm>
#include <cmath>

#include "pointwise.hpp"

namespace cforge {

using detail::gather;
using detail::Mat;

namespace detail {

Field hamiltonian(const MetricGeometry& geo, const MomentumField& pi, const Field& two_lambda) {
  const int n = geo.n;
  Field out(geo.grid);
  for (std::size_t p = 0; p < out.size(); ++p) {
    const Mat gm = gather(geo.g, p);
    const Mat pm = gather(pi.pi, p);
    const double trpi = contract(gm, pm);
    const double norm_sq = contract(sandwich(gm, pm), pm);
    const double sg = geo.sqrt_g[p];
    out[p] = (geo.scal[p] - two_lambda[p]) * sg - (norm_sq - trpi * trpi / (n - 1)) / sg;
  }
  return out;
}

VectorField momentum(const MetricGeometry& geo, const MomentumField& pi) {
  const VectorField div = geo.density_divergence(pi.pi);
  VectorField out = geo.lower(div);
  out *= 2.0;
  return out;
}

}  // namespace detail

Field hamiltonian(const PhasePoint& p, double Lambda) {
  const MetricGeometry geo = MetricGeometry::build(p.g);
  return detail::hamiltonian(geo, p.pi, Field(geo.grid, 2.0 * Lambda));
}

Field hamiltonian_K_form(const PhasePoint& p, double Lambda) {
  const MetricGeometry geo = MetricGeometry::build(p.g);
  const SymField K = K_from_pi(p.g, p.pi);
  Field out(geo.grid);
  for (std::size_t q = 0; q < out.size(); ++q) {
    const Mat gi = gather(geo.ginv, q);
    const Mat k = gather(K, q);
    const double trk = detail::contract(gi, k);
    const double norm_sq = detail::contract(detail::sandwich(gi, k), k);
    out[q] = (geo.scal[q] - 2.0 * Lambda - norm_sq + trk * trk) * geo.sqrt_g[q];
  }
  return out;
}

VectorField momentum(const PhasePoint& p) {
  const MetricGeometry geo = MetricGeometry::build(p.g);
  return detail::momentum(geo, p.pi);
}

ConstraintValue phi(const PhasePoint& p, double Lambda) {
  const MetricGeometry geo = MetricGeometry::build(p.g);
  return {detail::hamiltonian(geo, p.pi, Field(geo.grid, 2.0 * Lambda)), detail::momentum(geo, p.pi)};
}

Field scalar_map(const MetricField& g, const Field& f) {
  const MetricGeometry geo = MetricGeometry::build(g);
  return (geo.scal - 2.0 * f) * geo.sqrt_g;
}

double l2_norm(const ConstraintValue& c) {
  const double a = l2_norm(c.phi0);
  const double b = l2_norm(c.phii);
  return std::sqrt(a * a + b * b);
}

double max_norm(const ConstraintValue& c) { return std::max(c.phi0.max_abs(), c.phii.max_abs()); }

double sobolev_norm(const ConstraintValue& c, int k) {
  return sobolev_norm(c.phi0, k) + sobolev_norm(c.phii, k);
}

ConstraintValue operator-(ConstraintValue a, const ConstraintValue& b) {
  a.phi0 -= b.phi0;
  a.phii -= b.phii;
  return a;
}

ConstraintValue drop_nyquist(ConstraintValue c) {
  c.phi0 = drop_nyquist(c.phi0);
  for (auto& f : c.phii.components()) f = drop_nyquist(f);
  return c;
}

}  // namespace cforge
