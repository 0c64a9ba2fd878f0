#pragma once

// Krylov solves for the special-variation operator F, Newton projection onto a
// constraint fiber, and KID-kernel detection through smallest singular values.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cforge/kidops.hpp"

namespace cforge {

enum class Strategy { special_variations, adjoint_composition };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);  // throws std::invalid_argument

struct SolveOptions {
  int max_newton_iters = 10;
  double newton_tol = 1e-6;  // relative to the initial residual
  // Absolute floor on the resolved residual: a point already this close to the
  // fiber is returned unchanged.
  double newton_abs_tol = 1e-7;
  double krylov_tol = 1e-10;
  int krylov_max_iters = 400;
  int krylov_restart = 80;
  int max_halvings = 8;
  Strategy strategy = Strategy::special_variations;
  std::size_t dense_threshold = 1000;  // grid points
  // Multiplier applied on the zero-symbol (constant) modes by the Fourier
  // preconditioners; 0 is the strict pseudo-inverse. A nonzero value keeps the
  // constants reachable by the Krylov space away from the background.
  double zero_mode_scale = 1.0;
};

// ---------------------------------------------------------------------------
// Krylov

using Vec = Eigen::VectorXd;
using VecMap = std::function<void(const Vec& in, Vec& out)>;

struct KrylovResult {
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> history;  // relative residual after each inner step
};

/// Restarted GMRES with right preconditioning. Minimizes ||b - A x|| over the
/// Krylov space, so an inconsistent system ends at its least-squares residual
/// instead of failing.
KrylovResult gmres(const VecMap& A, const VecMap& precond, const Vec& b, Vec& x, double tol, int max_iters,
                   int restart);

// Packing between fields and flat vectors (component-major).
Vec pack(const ConstraintValue& c);
Vec pack(const LapseShift& xi);
Vec pack(const Field& y, const VectorField& Y);
ConstraintValue unpack_constraint(const GridPtr& grid, int n, const Vec& v);
LapseShift unpack_lapse_shift(const GridPtr& grid, int n, const Vec& v);

/// Block-diagonal constant-coefficient inverse of the leading part of F:
/// y <- (-2(n-1)(Lap + kappa n))^+ w0, Y <- (2(Lap + kappa(n-1)))^+ wi.
/// Nyquist modes are dropped; zero symbols are multiplied by zero_mode_scale
/// (0 gives the pseudo-inverse).
void f_preconditioner(const GridPtr& grid, int n, double kappa, const Vec& in, Vec& out,
                      double zero_mode_scale = 0.0);

/// Exact inverse of DPhi DPhi* at the flat CMC background with mean curvature
/// tau (kappa = 0). Nyquist modes are dropped, zero symbols handled as in
/// f_preconditioner.
void normal_preconditioner(const GridPtr& grid, int n, double tau, const Vec& in, Vec& out,
                           double zero_mode_scale = 0.0);

// ---------------------------------------------------------------------------
// F solve and Newton projection

struct FSolution {
  Field y;
  VectorField Y;
  KrylovResult krylov;
  double residual = 0.0;  // ||F(y, Y) - target||, recomputed after the solve
};

FSolution solve_f(const Linearization& lin, const ConstraintValue& target, double tau, double kappa,
                  const SolveOptions& opts);
FSolution solve_f(const PhasePoint& p, const ConstraintValue& target, double Lambda, double tau, double kappa,
                  const SolveOptions& opts);

struct NewtonReport {
  PhasePoint result;
  bool converged = false;
  std::string status;              // "converged", "stalled", "ellipticity-lost", "max-iterations"
  // ||Phi - epsilon|| on the resolved (Nyquist-free) modes, before each step
  // and after the last; this is what the iteration drives to zero.
  std::vector<double> residuals;
  // Same, including the Nyquist modes of the pointwise products.
  std::vector<double> raw_residuals;
  std::vector<int> halvings;       // per accepted step
  std::vector<double> krylov_residuals;
  std::vector<int> krylov_iterations;
  double runtime_seconds = 0.0;
  std::string hint;  // set when the residual stalls
};

NewtonReport newton_project(const PhasePoint& p, const ConstraintValue& epsilon, double Lambda, double tau,
                            const SolveOptions& opts);

/// Smallest exponent q with r_{k+1}/r_0 <= (r_k/r_0)^q over the tail steps
/// (r_k <= tail * r_0); NaN if the history has no tail step.
double newton_tail_order(const std::vector<double>& residuals, double tail = 1e-2);

// ---------------------------------------------------------------------------
// Singular values

/// A linear map between Euclidean spaces, optionally restricted to a subspace
/// by `project` (applied to inputs and iterates).
struct LinearOperator {
  std::size_t rows = 0;
  std::size_t cols = 0;
  VecMap apply;
  VecMap apply_transpose;
  VecMap project;         // optional orthogonal projector on the domain
  VecMap precondition;    // optional approximation of (A^T A)^+
};

/// Columns A e_j, or A b_j for the columns of `basis`. Throws std::length_error
/// above max_bytes.
Eigen::MatrixXd assemble_dense(const LinearOperator& op, std::size_t max_bytes = std::size_t{1} << 31);
Eigen::MatrixXd assemble_dense(const LinearOperator& op, const Eigen::MatrixXd& basis,
                               std::size_t max_bytes = std::size_t{1} << 31);

struct SingularTriplets {
  std::vector<double> sigma;  // ascending
  Eigen::MatrixXd right;      // right singular vectors as columns
  double sigma_max = 0.0;
  int iterations = 0;
  bool converged = true;
  double residual = 0.0;  // final max ||A^T A x - lambda x|| / sigma_max^2 (matrix-free)
};

/// Full SVD (divide and conquer); keeps the m smallest.
SingularTriplets smallest_singular_triplets(const Eigen::MatrixXd& A, int m);

struct LobpcgOptions {
  int max_iters = 500;
  double tol = 1e-8;  // on ||A^T A x - lambda x|| relative to sigma_max^2
  // Also stop once the wanted Ritz values change by less than this (relative)
  // over `stall_window` iterations: at curved points the composed normal
  // operator is symmetric only up to aliasing, which floors the residual.
  double stall_tol = 1e-12;
  int stall_window = 10;
  std::uint64_t seed = 1;
};

/// Matrix-free: LOBPCG on A^T A; sigma reported as ||A x|| for unit x.
SingularTriplets smallest_singular_triplets(const LinearOperator& op, int m, const LobpcgOptions& opts = {});

/// Largest singular value by power iteration on A^T A.
double largest_singular_value(const LinearOperator& op, int iters = 200, std::uint64_t seed = 7);

// ---------------------------------------------------------------------------
// KID kernel

struct KernelReport {
  std::vector<double> singular_values;  // ascending, the m smallest
  int kernel_dim = 0;
  std::vector<LapseShift> basis;  // orthonormal in discrete L2
  double gap_ratio = std::numeric_limits<double>::infinity();
  double sigma_max = 0.0;
  double threshold = 0.0;
  bool dense = true;
  double runtime_seconds = 0.0;
};

enum class KernelPath { automatic, dense, matrix_free };

/// DPhi* on lapse-shift pairs without Nyquist content, scaled so Euclidean
/// norms are discrete L2 norms on both sides.
LinearOperator kid_operator(const Linearization& lin);

/// Orthonormal real Fourier basis (cos, sin and constant, Nyquist excluded)
/// for `components` scalar fields, in the coordinates of kid_operator.
Eigen::MatrixXd fourier_basis(const GridPtr& grid, int components);

KernelReport kid_kernel(const PhasePoint& p, double Lambda, double threshold, const SolveOptions& opts, int m = 6,
                        KernelPath path = KernelPath::automatic);

}  // namespace cforge
