#include "grassmm/audits.hpp"

#include "grassmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace grassmm {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kFdSteps[] = {1e-4, 1e-5};

double cost_at(const BlockProblem &p, const GrassmannPoint &cand,
               const Anchor &a) {
  return p.cost(cand, a.c);
}
double cost_at(const BlockProblem &p, const Vector &cand, const Anchor &a) {
  return p.cost(a.G, cand);
}

const GrassmannPoint &own_block(const Anchor &a, const GrassmannPoint *) {
  return a.G;
}
const Vector &own_block(const Anchor &a, const Vector *) { return a.c; }

template <class Block>
double surrogate_at(const SurrogateOracle<Block> &oracle, const Block &cand,
                    const Anchor &a) {
  return oracle.evaluate(cand, a.G, a.c);
}

double uniform01(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

Vector gaussian_vector(std::uint64_t seed, Eigen::Index n) {
  return random_gaussian(seed, n, 1).col(0);
}

GrassmannPoint step_from(const GrassmannPoint &G, std::uint64_t seed,
                         double length) {
  const TangentVector dir = random_unit_tangent(G, seed);
  return exp_map(G, TangentVector(G, dir.delta() * length), 1.0);
}

// Feasible candidates for the majorization audit. Even draws are global,
// odd draws local to the anchor.
GrassmannPoint majorization_candidate(const BlockProblem &p, const Anchor &a,
                                      std::uint64_t seed, int k,
                                      const GrassmannPoint *) {
  if (k % 2 == 0)
    return random_point(seed, p.dims.N, p.dims.D);
  const double u = uniform01(derive_seed(seed, 1));
  return step_from(a.G, derive_seed(seed, 2), kHalfPi * u * u);
}

Vector majorization_candidate(const BlockProblem &p, const Anchor &a,
                              std::uint64_t seed, int k, const Vector *) {
  static constexpr double kScales[] = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
  const double base =
      1.0 + a.c.norm() / std::sqrt(static_cast<double>(a.c.size()));
  const double scale = kScales[k % 5] * base;
  return p.project_convex(a.c + scale * gaussian_vector(seed, a.c.size()));
}

std::string block_name(const GrassmannPoint *) { return "grassmann"; }
std::string block_name(const Vector *) { return "convex"; }

template <class Block>
AuditResult tightness_impl(const SurrogateOracle<Block> &oracle,
                           const BlockProblem &problem,
                           std::span<const Anchor> anchors, double tol) {
  const Block *tag = nullptr;
  AuditResult r{"tightness/" + block_name(tag), true, 0.0, tol, 0, 0};
  for (const Anchor &a : anchors) {
    const Block &x = own_block(a, tag);
    const double dev =
        std::abs(surrogate_at(oracle, x, a) - cost_at(problem, x, a));
    r.worst = std::isfinite(dev) ? std::max(r.worst, dev)
                                 : std::numeric_limits<double>::infinity();
    ++r.evaluated;
  }
  r.passed = r.worst <= tol;
  return r;
}

template <class Block>
AuditResult majorization_impl(const SurrogateOracle<Block> &oracle,
                              const BlockProblem &problem,
                              std::span<const Anchor> anchors, int samples,
                              std::uint64_t seed, double tol) {
  if (samples < 1)
    throw InvalidArgument("audit_majorization: samples must be >= 1");
  const Block *tag = nullptr;
  AuditResult r{"majorization/" + block_name(tag), true,
                std::numeric_limits<double>::infinity(), -tol, 0, 0};
  std::uint64_t stream = 0;
  for (const Anchor &a : anchors) {
    for (int k = 0; k < samples; ++k) {
      const Block cand = majorization_candidate(
          problem, a, derive_seed(seed, stream++), k, tag);
      const double margin =
          surrogate_at(oracle, cand, a) - cost_at(problem, cand, a);
      r.worst = std::isfinite(margin) ? std::min(r.worst, margin)
                                      : -std::numeric_limits<double>::infinity();
      ++r.evaluated;
    }
  }
  r.passed = r.worst >= -tol;
  return r;
}

struct DerivativePair {
  double surrogate;
  double cost;
};

DerivativePair central_difference(const GrassmannSurrogate &oracle,
                                  const BlockProblem &problem, const Anchor &a,
                                  const TangentVector &dir, double h) {
  const GrassmannPoint plus = exp_map(a.G, dir, h);
  const GrassmannPoint minus = exp_map(a.G, dir, -h);
  return {(surrogate_at(oracle, plus, a) - surrogate_at(oracle, minus, a)) /
              (2 * h),
          (cost_at(problem, plus, a) - cost_at(problem, minus, a)) / (2 * h)};
}

DerivativePair central_difference(const ConvexSurrogate &oracle,
                                  const BlockProblem &problem, const Anchor &a,
                                  const Vector &dir, double h) {
  const Vector plus = a.c + h * dir;
  const Vector minus = a.c - h * dir;
  return {(surrogate_at(oracle, plus, a) - surrogate_at(oracle, minus, a)) /
              (2 * h),
          (cost_at(problem, plus, a) - cost_at(problem, minus, a)) / (2 * h)};
}

bool crosses_kink(const BlockProblem &, const Anchor &, const TangentVector &,
                  double) {
  return false;
}

bool crosses_kink(const BlockProblem &p, const Anchor &a, const Vector &dir,
                  double h) {
  if (p.convex_kink && p.convex_kink(a.c, dir, h))
    return true;
  // Leaving the convex set also invalidates a two-sided difference.
  const Vector plus = a.c + h * dir;
  const Vector minus = a.c - h * dir;
  return (p.project_convex(plus) - plus).norm() > 0.0 ||
         (p.project_convex(minus) - minus).norm() > 0.0;
}

TangentVector probe_direction(const Anchor &a, std::uint64_t seed,
                              const GrassmannSurrogate &) {
  return random_unit_tangent(a.G, seed);
}

Vector probe_direction(const Anchor &a, std::uint64_t seed,
                       const ConvexSurrogate &) {
  return gaussian_vector(seed, a.c.size()).normalized();
}

TangentVector restrict_to_smooth(const BlockProblem &, const Anchor &,
                                 const TangentVector &dir, double) {
  return dir;
}

// Drops the coordinates along which the cost has a kink within h of the
// anchor. Assumes the kinks are coordinate-separable, as for an l1 penalty.
Vector restrict_to_smooth(const BlockProblem &p, const Anchor &a, const Vector &dir,
                          double h) {
  if (!p.convex_kink || !p.convex_kink(a.c, dir, h))
    return dir;
  Vector out = dir;
  for (Eigen::Index i = 0; i < dir.size(); ++i) {
    Vector e = Vector::Zero(dir.size());
    e(i) = dir(i);
    if (dir(i) != 0.0 && p.convex_kink(a.c, e, h))
      out(i) = 0.0;
  }
  const double n = out.norm();
  return n > 0.0 ? Vector(out / n) : out;
}

template <class Block>
AuditResult derivative_impl(const SurrogateOracle<Block> &oracle,
                            const BlockProblem &problem, const Anchor &anchor,
                            int directions, std::uint64_t seed, double tol) {
  const Block *tag = nullptr;
  AuditResult r{"derivative_match/" + block_name(tag), true, 0.0, tol, 0, 0};
  for (int k = 0; k < directions; ++k) {
    const auto dir = restrict_to_smooth(
        problem, anchor,
        probe_direction(anchor, derive_seed(seed, static_cast<std::uint64_t>(k)),
                        oracle),
        kFdSteps[0]);
    if (dir.norm() == 0.0 || crosses_kink(problem, anchor, dir, kFdSteps[0])) {
      ++r.skipped;
      continue;
    }
    for (double h : kFdSteps) {
      const DerivativePair d = central_difference(oracle, problem, anchor, dir, h);
      const double mismatch =
          std::abs(d.surrogate - d.cost) / std::max(1.0, std::abs(d.cost));
      r.worst = std::isfinite(mismatch) ? std::max(r.worst, mismatch)
                                        : std::numeric_limits<double>::infinity();
    }
    ++r.evaluated;
  }
  // A run in which every probe was skipped has checked nothing.
  r.passed = r.evaluated > 0 && r.worst <= tol;
  return r;
}

} // namespace

TangentVector random_unit_tangent(const GrassmannPoint &G, std::uint64_t seed) {
  for (std::uint64_t k = 0;; ++k) {
    const TangentVector t = tangent_project(
        G, random_gaussian(derive_seed(seed, k), G.ambient_dim(),
                           G.subspace_dim()));
    const double n = t.norm();
    if (n > 1e-8)
      return TangentVector(G, t.delta() / n);
  }
}

AuditResult audit_tightness(const GrassmannSurrogate &oracle,
                            const BlockProblem &problem,
                            std::span<const Anchor> anchors, double tol) {
  return tightness_impl(oracle, problem, anchors, tol);
}

AuditResult audit_tightness(const ConvexSurrogate &oracle,
                            const BlockProblem &problem,
                            std::span<const Anchor> anchors, double tol) {
  return tightness_impl(oracle, problem, anchors, tol);
}

AuditResult audit_majorization(const GrassmannSurrogate &oracle,
                               const BlockProblem &problem,
                               std::span<const Anchor> anchors, int samples,
                               std::uint64_t seed, double tol) {
  return majorization_impl(oracle, problem, anchors, samples, seed, tol);
}

AuditResult audit_majorization(const ConvexSurrogate &oracle,
                               const BlockProblem &problem,
                               std::span<const Anchor> anchors, int samples,
                               std::uint64_t seed, double tol) {
  return majorization_impl(oracle, problem, anchors, samples, seed, tol);
}

AuditResult audit_derivative_match(const GrassmannSurrogate &oracle,
                                   const BlockProblem &problem,
                                   const Anchor &anchor, int directions,
                                   std::uint64_t seed, double tol) {
  return derivative_impl(oracle, problem, anchor, directions, seed, tol);
}

AuditResult audit_derivative_match(const ConvexSurrogate &oracle,
                                   const BlockProblem &problem,
                                   const Anchor &anchor, int directions,
                                   std::uint64_t seed, double tol) {
  return derivative_impl(oracle, problem, anchor, directions, seed, tol);
}

AuditResult audit_quasiconvexity(const GrassmannSurrogate &oracle,
                                 const BlockProblem &, const Anchor &anchor,
                                 int pairs, int t_samples, std::uint64_t seed,
                                 double radius, double tol) {
  if (pairs < 1 || t_samples < 1)
    throw InvalidArgument("audit_quasiconvexity: pairs and t_samples must be "
                          ">= 1");
  if (!(radius > 0.0 && radius <= kHalfPi))
    throw InvalidArgument("audit_quasiconvexity: radius must be in (0, pi/2]");
  AuditResult r{"quasiconvexity/grassmann", true,
                -std::numeric_limits<double>::infinity(), tol, 0, 0};
  for (int k = 0; k < pairs; ++k) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(k));
    const GrassmannPoint X = step_from(
        anchor.G, derive_seed(s, 0), radius * uniform01(derive_seed(s, 1)));
    const GrassmannPoint Y = step_from(
        anchor.G, derive_seed(s, 2), radius * uniform01(derive_seed(s, 3)));
    if (principal_angles(X, Y).max() >= kHalfPi - kUniquenessCutoff) {
      ++r.skipped;
      continue;
    }
    const GeodesicSpec spec = build_aligned_spec(X, Y);
    const double ends = std::max(surrogate_at(oracle, X, anchor),
                                 surrogate_at(oracle, Y, anchor));
    for (int j = 1; j <= t_samples; ++j) {
      const double t = static_cast<double>(j) / (t_samples + 1);
      const double v =
          surrogate_at(oracle, aligned_geodesic_at(spec, t), anchor) - ends;
      r.worst = std::max(r.worst, v);
    }
    ++r.evaluated;
  }
  if (r.evaluated == 0)
    r.worst = 0.0;
  r.passed = r.worst <= tol;
  return r;
}

AuditResult audit_quasiconvexity(const ConvexSurrogate &oracle,
                                 const BlockProblem &problem,
                                 const Anchor &anchor, int pairs, int t_samples,
                                 std::uint64_t seed, double radius,
                                 double tol) {
  if (pairs < 1 || t_samples < 1)
    throw InvalidArgument("audit_quasiconvexity: pairs and t_samples must be "
                          ">= 1");
  AuditResult r{"quasiconvexity/convex", true,
                -std::numeric_limits<double>::infinity(), tol, 0, 0};
  const Eigen::Index n = anchor.c.size();
  for (int k = 0; k < pairs; ++k) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(k));
    const Vector X =
        problem.project_convex(anchor.c + radius * gaussian_vector(derive_seed(s, 0), n));
    const Vector Y =
        problem.project_convex(anchor.c + radius * gaussian_vector(derive_seed(s, 1), n));
    const double ends = std::max(surrogate_at(oracle, X, anchor),
                                 surrogate_at(oracle, Y, anchor));
    for (int j = 1; j <= t_samples; ++j) {
      const double t = static_cast<double>(j) / (t_samples + 1);
      const Vector P = (1.0 - t) * X + t * Y;
      r.worst = std::max(r.worst, surrogate_at(oracle, P, anchor) - ends);
    }
    ++r.evaluated;
  }
  r.passed = r.worst <= tol;
  return r;
}

AuditResult audit_homogeneity(const BlockProblem &problem,
                              std::span<const Anchor> anchors, int rotations,
                              std::uint64_t seed, double tol) {
  AuditResult r{"homogeneity", true, 0.0, tol, 0, 0};
  std::uint64_t stream = 0;
  for (const Anchor &a : anchors) {
    const double f0 = problem.cost(a.G, a.c);
    const Eigen::Index d = a.G.subspace_dim();
    for (int k = 0; k < rotations; ++k) {
      Matrix R = random_orthonormal(derive_seed(seed, stream++), d, d);
      // QR with a positive diagonal never yields a reflection for d = 1;
      // alternate orientations to cover all of O(D).
      if (k % 2 == 1)
        R.col(0) = -R.col(0);
      const GrassmannPoint GR = GrassmannPoint::from_orthonormal(a.G.basis() * R);
      const double dev = std::abs(problem.cost(GR, a.c) - f0);
      r.worst = std::isfinite(dev) ? std::max(r.worst, dev)
                                   : std::numeric_limits<double>::infinity();
      ++r.evaluated;
    }
  }
  r.passed = r.worst <= tol;
  return r;
}

} // namespace grassmm
