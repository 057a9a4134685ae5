#pragma once

/// Sampled numerical checks of the surrogate assumptions. Each audit reports
/// the worst deviation it saw; a pass only means no counterexample was found.

#include "grassmm/block_mm.hpp"

#include <cstdint>
#include <numbers>
#include <span>
#include <string>

namespace grassmm {

struct AuditResult {
  std::string name;
  bool passed = true;
  double worst = 0.0;     // worst deviation (or most negative margin)
  double threshold = 0.0; // pass boundary for `worst`
  int evaluated = 0;
  int skipped = 0;
};

struct AuditTolerances {
  double tightness = 1e-9;
  double majorization = 1e-9;
  double derivative_rel = 1e-4;
  double quasiconvexity = 1e-8;
  double homogeneity = 1e-9;
};

inline constexpr AuditTolerances kDefaultAuditTolerances{};

/// |g(x | x) - f(x)| over the anchors.
AuditResult audit_tightness(const GrassmannSurrogate &oracle,
                            const BlockProblem &problem,
                            std::span<const Anchor> anchors,
                            double tol = kDefaultAuditTolerances.tightness);
AuditResult audit_tightness(const ConvexSurrogate &oracle,
                            const BlockProblem &problem,
                            std::span<const Anchor> anchors,
                            double tol = kDefaultAuditTolerances.tightness);

/// g(candidate | anchor) - f(candidate) >= -tol for random feasible
/// candidates, half of them near the anchor. `worst` is the smallest margin.
AuditResult audit_majorization(const GrassmannSurrogate &oracle,
                               const BlockProblem &problem,
                               std::span<const Anchor> anchors, int samples,
                               std::uint64_t seed,
                               double tol = kDefaultAuditTolerances.majorization);
AuditResult audit_majorization(const ConvexSurrogate &oracle,
                               const BlockProblem &problem,
                               std::span<const Anchor> anchors, int samples,
                               std::uint64_t seed,
                               double tol = kDefaultAuditTolerances.majorization);

/// Central differences of g(. | anchor) and f along geodesics (G block)
/// or straight lines (c block) at h = 1e-4 and 1e-5. The mismatch is
/// |dg - df| / max(1, |df|). Probes crossing a kink of the cost are
/// restricted to the smooth coordinates, or skipped when none remain. Fails
/// when no probe was evaluated.
AuditResult audit_derivative_match(const GrassmannSurrogate &oracle,
                                   const BlockProblem &problem,
                                   const Anchor &anchor, int directions,
                                   std::uint64_t seed,
                                   double tol = kDefaultAuditTolerances.derivative_rel);
AuditResult audit_derivative_match(const ConvexSurrogate &oracle,
                                   const BlockProblem &problem,
                                   const Anchor &anchor, int directions,
                                   std::uint64_t seed,
                                   double tol = kDefaultAuditTolerances.derivative_rel);

/// g(Gamma(t)) <= max(g(X), g(Y)) + tol along the aligned geodesic between
/// sampled endpoints within `radius` of the anchor, at `t_samples` interior
/// grid points. Pairs with a principal angle at pi/2 are skipped.
AuditResult audit_quasiconvexity(const GrassmannSurrogate &oracle,
                                 const BlockProblem &problem,
                                 const Anchor &anchor, int pairs, int t_samples,
                                 std::uint64_t seed,
                                 double radius = std::numbers::pi / 4,
                                 double tol = kDefaultAuditTolerances.quasiconvexity);
/// Convex-block version along straight segments; `radius` scales the
/// Gaussian endpoint offsets.
AuditResult audit_quasiconvexity(const ConvexSurrogate &oracle,
                                 const BlockProblem &problem,
                                 const Anchor &anchor, int pairs, int t_samples,
                                 std::uint64_t seed, double radius = 1.0,
                                 double tol = kDefaultAuditTolerances.quasiconvexity);

/// |f(G R, c) - f(G, c)| for random R in O(D).
AuditResult audit_homogeneity(const BlockProblem &problem,
                              std::span<const Anchor> anchors, int rotations,
                              std::uint64_t seed,
                              double tol = kDefaultAuditTolerances.homogeneity);

/// Uniformly random unit-Frobenius tangent direction at G.
TangentVector random_unit_tangent(const GrassmannPoint &G, std::uint64_t seed);

} // namespace grassmm
