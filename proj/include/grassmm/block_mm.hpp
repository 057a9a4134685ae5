#pragma once

/// Two-block majorization-minimization: one block G on the Grassmann
/// manifold, one block c in a closed convex set. Each sweep minimizes a
/// majorant of the cost in G with c fixed, then a majorant in c with the new
/// G fixed. The driver checks the descent chain on every step and records the
/// quantities used to judge convergence.

#include "grassmm/grassmann.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace grassmm {

/// A feasible point (G, c) of the product constraint set.
struct Anchor {
  GrassmannPoint G;
  Vector c;
};

using CostFunction = std::function<double(const GrassmannPoint &, const Vector &)>;

/// Majorant g(candidate | G, c) of the cost in one block, together with its
/// minimizer over that block.
template <class Block> struct SurrogateOracle {
  std::function<double(const Block &candidate, const GrassmannPoint &G,
                       const Vector &c)>
      evaluate;
  std::function<Block(const GrassmannPoint &G, const Vector &c)> minimize;
};

using GrassmannSurrogate = SurrogateOracle<GrassmannPoint>;
using ConvexSurrogate = SurrogateOracle<Vector>;

struct ProblemDims {
  Eigen::Index N = 0;
  Eigen::Index D = 0;
  Eigen::Index convex_len = 0;
};

struct BlockProblem {
  CostFunction cost;
  GrassmannSurrogate grassmann_surrogate;
  ConvexSurrogate convex_surrogate;
  /// Euclidean projection onto the convex set; empty means the whole space.
  std::function<Vector(const Vector &)> convex_constraint;
  /// Membership in the geodesically convex region of Gr(N, D); empty means
  /// the whole manifold.
  std::function<bool(const GrassmannPoint &)> grassmann_region;
  /// Ambient gradient of the cost in G. Optional; a finite-difference
  /// estimate is used when empty.
  std::function<Matrix(const GrassmannPoint &, const Vector &)> euclidean_grad_G;
  /// Gradient in c (for non-smooth costs, of the smooth part). Optional.
  std::function<Vector(const GrassmannPoint &, const Vector &)> grad_c;
  /// True when c + s*delta crosses a non-differentiable point of the cost for
  /// some |s| <= h. Used to skip finite-difference probes. Optional.
  std::function<bool(const Vector &c, const Vector &delta, double h)> convex_kink;
  ProblemDims dims;

  Vector project_convex(const Vector &c) const {
    return convex_constraint ? convex_constraint(c) : c;
  }
  bool in_region(const GrassmannPoint &G) const {
    return !grassmann_region || grassmann_region(G);
  }
};

struct SolverConfig {
  int max_iter = 5000;
  double dist_tol = 1e-6;
  double cost_tol = 1e-10;
  int audit_every = 0; // 0 disables in-loop audits
  int audit_samples = 20;
  std::uint64_t seed = 0;
  int stationarity_directions = 64;
  /// Largest tolerated cost increase per half-step before the run aborts.
  double monotonicity_slack = 1e-8;

  /// Throws InvalidArgument on non-positive tolerances or max_iter < 1.
  void validate() const;
};

/// Bits of IterationRecord::audit_flags, set when an in-loop audit fails.
enum AuditFlag : unsigned {
  kTightnessG = 1u << 0,
  kTightnessC = 1u << 1,
  kMajorizationG = 1u << 2,
  kMajorizationC = 1u << 3,
};

struct IterationRecord {
  int iter = 0;
  double f = 0.0;          // f(G_i, c_i)
  double f_after_G = 0.0;  // f(G_{i+1}, c_i)
  double dc_step = 0.0;    // d_c(G_{i+1}, G_i)
  double grad_norm_G = 0.0; // Riemannian gradient norm at (G_{i+1}, c_{i+1})
  double grad_norm_c = 0.0; // Euclidean gradient norm at (G_{i+1}, c_{i+1})
  unsigned audit_flags = 0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
};

struct AuditSummary {
  int runs = 0;
  int failures = 0;
};

struct ConvergenceReport {
  bool converged = false;
  int iterations = 0;
  double final_cost = 0.0;
  double final_distance = 0.0;
  /// Worst sampled one-sided slope at the final point; >= -1e-4 reads as
  /// stationary.
  double stationarity_score = 0.0;
  int stationarity_directions = 0;
  std::uint64_t stationarity_seed = 0;
  /// Iterates returned to the point two steps back while still moving, the
  /// signature of tied block minimizers.
  bool oscillation_detected = false;
  AuditSummary audits;
};

struct BlockMMResult {
  IterationTrace trace;
  ConvergenceReport report;
  GrassmannPoint G;
  Vector c;
};

/// Runs the cyclic updates until d_c(G_{i+1}, G_i) < dist_tol and the
/// relative cost change is below cost_tol, or max_iter sweeps.
///
/// Throws InfeasibleBlock if a surrogate minimizer leaves its constraint set
/// and MonotonicityViolation if either half-step raises the cost by more than
/// config.monotonicity_slack.
BlockMMResult run_block_mm(const BlockProblem &problem,
                           const GrassmannPoint &init_G, const Vector &init_c,
                           const SolverConfig &config);

/// Minimum over sampled unit directions of the forward-difference slope at
/// step h: geodesic probes in G, projected line probes in c.
double stationarity_check(const BlockProblem &problem, const GrassmannPoint &G,
                          const Vector &c, int directions, std::uint64_t seed,
                          double h = 1e-5);

/// Riemannian gradient of the cost in G; uses the problem's Euclidean
/// gradient when present, otherwise central differences through QR
/// re-orthonormalization (valid because the cost is rotation invariant).
TangentVector grassmann_gradient(const BlockProblem &problem,
                                 const GrassmannPoint &G, const Vector &c);

/// Gradient in c; central differences when the problem has none.
Vector convex_gradient(const BlockProblem &problem, const GrassmannPoint &G,
                       const Vector &c);

} // namespace grassmm
