#include "grassmm/block_mm.hpp"

#include "grassmm/audits.hpp"
#include "grassmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace grassmm {

namespace {

constexpr double kFeasibilityTol = 1e-9;

void require_dims(const BlockProblem &p, const GrassmannPoint &G,
                  const Vector &c) {
  if (G.ambient_dim() != p.dims.N || G.subspace_dim() != p.dims.D)
    throw DimensionError("run_block_mm: initial G does not match problem dims");
  if (c.size() != p.dims.convex_len)
    throw DimensionError("run_block_mm: initial c has length " +
                         std::to_string(c.size()) + ", expected " +
                         std::to_string(p.dims.convex_len));
}

void check_grassmann_block(const BlockProblem &p, const GrassmannPoint &G) {
  if (G.ambient_dim() != p.dims.N || G.subspace_dim() != p.dims.D ||
      orthonormality_error(G.basis()) > kFeasibilityTol || !p.in_region(G))
    throw InfeasibleBlock("grassmann block: surrogate minimizer is outside "
                          "the feasible region");
}

void check_convex_block(const BlockProblem &p, const Vector &c) {
  if (c.size() != p.dims.convex_len || !c.allFinite())
    throw InfeasibleBlock("convex block: surrogate minimizer has wrong size "
                          "or non-finite entries");
  const Vector proj = p.project_convex(c);
  if ((proj - c).norm() > kFeasibilityTol * std::max(1.0, c.norm()))
    throw InfeasibleBlock("convex block: surrogate minimizer is outside the "
                          "convex set");
}

void check_descent(double before, double after, double slack,
                   const char *block, int iter) {
  if (!std::isfinite(after) || after > before + slack)
    throw MonotonicityViolation(
        std::string("cost increased in the ") + block + " update at iteration " +
        std::to_string(iter) + " (" + std::to_string(before) + " -> " +
        std::to_string(after) + "); the surrogate is not a majorant");
}

} // namespace

void SolverConfig::validate() const {
  if (max_iter < 1)
    throw InvalidArgument("SolverConfig: max_iter must be >= 1");
  if (!(dist_tol > 0.0) || !(cost_tol > 0.0))
    throw InvalidArgument("SolverConfig: tolerances must be positive");
  if (audit_every < 0 || audit_samples < 1)
    throw InvalidArgument("SolverConfig: audit_every >= 0, audit_samples >= 1");
  if (stationarity_directions < 1)
    throw InvalidArgument("SolverConfig: stationarity_directions must be >= 1");
  if (!(monotonicity_slack >= 0.0))
    throw InvalidArgument("SolverConfig: monotonicity_slack must be >= 0");
}

TangentVector grassmann_gradient(const BlockProblem &problem,
                                 const GrassmannPoint &G, const Vector &c) {
  if (problem.euclidean_grad_G)
    return riemannian_gradient(G, problem.euclidean_grad_G(G, c));

  // d/dh f(qf(G + hE)) = <grad, (I - GG^T) E> since the rotation part of the
  // QR perturbation leaves the cost unchanged.
  const double h = 1e-6;
  Matrix g(G.ambient_dim(), G.subspace_dim());
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      Matrix P = G.basis();
      P(i, j) += h;
      const double fp = problem.cost(make_point(P), c);
      P(i, j) -= 2 * h;
      const double fm = problem.cost(make_point(P), c);
      g(i, j) = (fp - fm) / (2 * h);
    }
  }
  return tangent_project(G, g);
}

Vector convex_gradient(const BlockProblem &problem, const GrassmannPoint &G,
                       const Vector &c) {
  if (problem.grad_c)
    return problem.grad_c(G, c);
  const double h = 1e-6;
  Vector g(c.size());
  Vector x = c;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    x(i) = c(i) + h;
    const double fp = problem.cost(G, x);
    x(i) = c(i) - h;
    const double fm = problem.cost(G, x);
    x(i) = c(i);
    g(i) = (fp - fm) / (2 * h);
  }
  return g;
}

double stationarity_check(const BlockProblem &problem, const GrassmannPoint &G,
                          const Vector &c, int directions, std::uint64_t seed,
                          double h) {
  const double f0 = problem.cost(G, c);
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < directions; ++k) {
    const TangentVector dir =
        random_unit_tangent(G, derive_seed(seed, 2 * static_cast<std::uint64_t>(k)));
    const double slope = (problem.cost(exp_map(G, dir, h), c) - f0) / h;
    worst = std::min(worst, slope);
  }
  if (c.size() > 0) {
    for (int k = 0; k < directions; ++k) {
      Vector delta = random_gaussian(
                         derive_seed(seed, 2 * static_cast<std::uint64_t>(k) + 1),
                         c.size(), 1)
                         .col(0);
      delta.normalize();
      const Vector probe = problem.project_convex(c + h * delta);
      const double slope = (problem.cost(G, probe) - f0) / h;
      worst = std::min(worst, slope);
    }
  }
  return worst;
}

BlockMMResult run_block_mm(const BlockProblem &problem,
                           const GrassmannPoint &init_G, const Vector &init_c,
                           const SolverConfig &config) {
  config.validate();
  require_dims(problem, init_G, init_c);
  if (!problem.in_region(init_G))
    throw InfeasibleBlock("grassmann block: initial point is outside the "
                          "feasible region");

  GrassmannPoint G = init_G;
  Vector c = problem.project_convex(init_c);
  GrassmannPoint G_prev = G;
  bool have_prev = false;

  BlockMMResult out{IterationTrace{}, ConvergenceReport{}, G, c};
  out.trace.records.reserve(static_cast<std::size_t>(
      std::min(config.max_iter, 100000)));
  ConvergenceReport &report = out.report;

  double f = problem.cost(G, c);
  if (!std::isfinite(f))
    throw InvalidArgument("run_block_mm: cost is not finite at the initial "
                          "point");

  for (int i = 0; i < config.max_iter; ++i) {
    IterationRecord rec;
    rec.iter = i;
    rec.f = f;

    if (config.audit_every > 0 && i % config.audit_every == 0) {
      const Anchor anchor{G, c};
      const std::span<const Anchor> one(&anchor, 1);
      const std::uint64_t s = derive_seed(config.seed, static_cast<std::uint64_t>(i));
      if (!audit_tightness(problem.grassmann_surrogate, problem, one).passed)
        rec.audit_flags |= kTightnessG;
      if (!audit_tightness(problem.convex_surrogate, problem, one).passed)
        rec.audit_flags |= kTightnessC;
      if (!audit_majorization(problem.grassmann_surrogate, problem, one,
                              config.audit_samples, s)
               .passed)
        rec.audit_flags |= kMajorizationG;
      if (!audit_majorization(problem.convex_surrogate, problem, one,
                              config.audit_samples, s + 1)
               .passed)
        rec.audit_flags |= kMajorizationC;
      ++report.audits.runs;
      if (rec.audit_flags != 0)
        ++report.audits.failures;
    }

    GrassmannPoint G_next = problem.grassmann_surrogate.minimize(G, c);
    check_grassmann_block(problem, G_next);
    const double f_mid = problem.cost(G_next, c);
    check_descent(f, f_mid, config.monotonicity_slack, "grassmann", i);

    Vector c_next = problem.convex_surrogate.minimize(G_next, c);
    check_convex_block(problem, c_next);
    const double f_next = problem.cost(G_next, c_next);
    check_descent(f_mid, f_next, config.monotonicity_slack, "convex", i);

    rec.f_after_G = f_mid;
    rec.dc_step = canonical_distance(G_next, G);
    rec.grad_norm_G = grassmann_gradient(problem, G_next, c_next).norm();
    rec.grad_norm_c = convex_gradient(problem, G_next, c_next).norm();

    if (have_prev && rec.dc_step >= config.dist_tol &&
        canonical_distance(G_next, G_prev) < config.dist_tol)
      report.oscillation_detected = true;

    const double rel_change =
        std::abs(f - f_next) /
        std::max(std::abs(f), std::numeric_limits<double>::min());

    G_prev = std::move(G);
    have_prev = true;
    G = std::move(G_next);
    c = std::move(c_next);
    f = f_next;
    out.trace.records.push_back(rec);
    report.iterations = i + 1;
    report.final_distance = rec.dc_step;

    if (rec.dc_step < config.dist_tol && rel_change < config.cost_tol) {
      report.converged = true;
      break;
    }
  }

  report.final_cost = f;
  report.stationarity_directions = config.stationarity_directions;
  report.stationarity_seed = config.seed;
  report.stationarity_score = stationarity_check(
      problem, G, c, config.stationarity_directions, config.seed);
  out.G = std::move(G);
  out.c = std::move(c);
  return out;
}

} // namespace grassmm
