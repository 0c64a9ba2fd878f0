#pragma once

// Reproducible checks of the operator identities and estimates. Every check is
// a pure function of its arguments and returns an OperatorReport; trials run
// in parallel and are aggregated by trial index.
//
// Estimates with unknown constants are tested as two-sample stability
// statements: a calibration sample fixes the largest observed ratio and an
// independent held-out sample must stay within twice that value.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "cforge/kidops.hpp"

namespace cforge {

struct OperatorReport {
  std::string check_name;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<double> residuals;  // per trial (or per sample point)
  nlohmann::json statistics = nlohmann::json::object();
  double tolerance = 0.0;
  bool pass = false;
  double runtime_seconds = 0.0;

  /// Wall-clock time goes under "timing" so the rest is reproducible bit for bit.
  nlohmann::json to_json() const;
};

/// Default band for random data: min(points) / 4.
int default_band(const GridPtr& grid);

/// Random direction (h, q) with both parts of sup-norm `amplitude`.
Variation random_variation(const GridPtr& grid, int n, std::uint64_t seed, int band, double amplitude = 1.0);
LapseShift random_lapse_shift(const GridPtr& grid, int n, std::uint64_t seed, int band);

/// Phase point near the background of `grid`: identity + metric_amplitude
/// noise, background momentum + momentum_amplitude noise.
PhasePoint random_elliptic_point(const GridPtr& grid, std::uint64_t seed, int band, double metric_amplitude = 0.1,
                                 double momentum_amplitude = 0.1);

// ---------------------------------------------------------------------------
// Identities

/// max |Phi(background)| for the grid's tau and kappa.
OperatorReport check_background(const GridPtr& grid, double tolerance = 1e-12);

/// Hamiltonian in pi form against the K form on random elliptic points.
OperatorReport check_dual_formula(const GridPtr& grid, int trials, std::uint64_t seed, double tolerance = 1e-10);

/// |<DPhi v, xi> - <v, DPhi* xi>| / max(|<DPhi v, xi>|, |<v, DPhi* xi>|) per trial.
OperatorReport check_adjoint(const PhasePoint& p, double Lambda, int trials, std::uint64_t seed, int band = 0,
                             Mutant mutant = Mutant::none, double tolerance = 1e-8);

struct LinearizationOptions {
  std::vector<double> steps{1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  bool one_sided = false;   // order-one control experiment
  bool zero_direction = false;
  double amplitude = 0.1;   // sup norm of the random direction
  int band = 1;             // Fourier band of the random direction
  double min_slope = 1.9;
};

/// Every injected sign flip (three in DPhi/DPhi*, one in the rank-3
/// identity) must produce a mismatch of at least `threshold`.
OperatorReport check_mutants(const PhasePoint& p, double Lambda, int trials, std::uint64_t seed,
                             double threshold = 1e-2);

/// Log-log slope of the difference-quotient error against t. A trial whose
/// slope falls short is refitted once without its two smallest steps.
OperatorReport check_linearization(const PhasePoint& p, double Lambda, int trials, std::uint64_t seed,
                                   const LinearizationOptions& opts = {});

/// d_k d_j X_i = d_k S_ij + d_j S_ik - d_i S_jk for random one-forms.
OperatorReport check_rank3_identity(const GridPtr& grid, int trials, std::uint64_t seed, bool flip_last = false,
                                 double tolerance = 1e-11);

/// L = T - tr_g(T) g for random elliptic metrics and lapses.
OperatorReport check_trace_identity(const GridPtr& grid, int trials, std::uint64_t seed, double tolerance = 1e-10);

/// F(y, 0) = -2 (n - 1) Lap y and F(0, Y) = 2 Lap Y at the flat tau = 0 background.
OperatorReport check_f_leading(const GridPtr& grid, std::uint64_t seed, double tolerance = 1e-10);

// ---------------------------------------------------------------------------
// Estimate stability (calibration `trials` + held-out `trials`)

/// |X|_{k+2} / (|S0(X)|_{k+1} + |X|_0)
OperatorReport korn_ratio(const GridPtr& grid, int trials, std::uint64_t seed, int k, int band = 0);

/// |N|_{k+2} / (|T0(N)|_k + |N|_0)
OperatorReport t_estimate_ratio(const GridPtr& grid, int trials, std::uint64_t seed, double kappa, int k,
                                int band = 0);

/// |xi|_2 / (|DPhi*_1 xi|_0 + |DPhi*_2 xi|_1 + |xi|_0)
OperatorReport check_elliptic_estimate(const PhasePoint& p, double Lambda, int trials, std::uint64_t seed,
                                       int band = 0);

struct LipschitzOptions {
  std::vector<double> scales{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  double max_spread = 10.0;  // max/min of the ratio across scales
  double slope_tolerance = 0.1;
};

/// |(P*_p - P*_{p + s delta}) xi| / (s |delta| |xi|) along delta = p_tilde - p.
OperatorReport lipschitz_probe(const PhasePoint& p, const PhasePoint& p_tilde, double Lambda, int trials,
                               std::uint64_t seed, const LipschitzOptions& opts = {});

// ---------------------------------------------------------------------------
// Suites

/// Named suites: "background", "dual", "adjoint", "linearization",
/// "identities", "leading", "korn", "obata", "elliptic", "lipschitz", or "all".
std::vector<OperatorReport> run_suite(const std::string& name, int points, std::uint64_t seed);
const std::vector<std::string>& suite_names();

}  // namespace cforge
