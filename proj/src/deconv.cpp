#include "grassmm/deconv.hpp"

#include "grassmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace grassmm {

namespace {

constexpr double kZeroGradient = 1e-14;

void require_same_length(Eigen::Index a, Eigen::Index b, const char *op) {
  if (a != b)
    throw DimensionError(std::string(op) + ": length mismatch (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
}

void require_state(const DeconvProblem &p, const DeconvState &s,
                   const char *op) {
  require_same_length(p.size(), s.a.ambient_dim(), op);
  require_same_length(p.size(), s.x.size(), op);
  if (s.a.subspace_dim() != 1)
    throw DimensionError(std::string(op) + ": kernel must lie on Gr(N, 1)");
}

Vector kernel(const GrassmannPoint &a) { return a.basis().col(0); }

GrassmannPoint as_point(const Vector &a) {
  return GrassmannPoint::from_orthonormal(Matrix(a));
}

// Representative of [a] attaining the minimum in deconv_cost at x.
Vector active_kernel(const DeconvProblem &p, const Vector &a, const Vector &x) {
  return active_sign(p, a, x) > 0 ? a : Vector(-a);
}

} // namespace

void DeconvProblem::validate() const {
  if (y.size() < 1 || !y.allFinite())
    throw InvalidArgument("DeconvProblem: y must be non-empty and finite");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("DeconvProblem: lambda must be >= 0");
}

Vector circular_convolution(const Vector &a, const Vector &x) {
  require_same_length(a.size(), x.size(), "circular_convolution");
  const Eigen::Index n = a.size();
  Vector out = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::Index j = i - k;
      if (j < 0)
        j += n;
      acc += a(k) * x(j);
    }
    out(i) = acc;
  }
  return out;
}

Vector circular_correlation(const Vector &v, const Vector &r) {
  require_same_length(v.size(), r.size(), "circular_correlation");
  const Eigen::Index n = v.size();
  Vector out = Vector::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double acc = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      Eigen::Index j = m + k;
      if (j >= n)
        j -= n;
      acc += v(m) * r(j);
    }
    out(k) = acc;
  }
  return out;
}

double data_term(const DeconvProblem &p, const Vector &a, const Vector &x) {
  require_same_length(p.size(), a.size(), "data_term");
  return (p.y - circular_convolution(a, x)).squaredNorm();
}

int active_sign(const DeconvProblem &p, const Vector &a, const Vector &x) {
  const Vector v = circular_convolution(a, x);
  return (p.y - v).squaredNorm() <= (p.y + v).squaredNorm() ? 1 : -1;
}

double deconv_cost(const DeconvProblem &p, const DeconvState &s) {
  require_state(p, s, "deconv_cost");
  const Vector v = circular_convolution(kernel(s.a), s.x);
  const double fit = std::min((p.y - v).squaredNorm(), (p.y + v).squaredNorm());
  return fit + p.lambda * s.x.lpNorm<1>();
}

Vector grad_x(const DeconvProblem &p, const DeconvState &s) {
  require_state(p, s, "grad_x");
  const Vector a = kernel(s.a);
  return -2.0 * circular_correlation(a, p.y - circular_convolution(a, s.x));
}

Vector grad_a(const DeconvProblem &p, const DeconvState &s) {
  require_state(p, s, "grad_a");
  const Vector a = kernel(s.a);
  return -2.0 * circular_correlation(s.x, p.y - circular_convolution(a, s.x));
}

Vector soft_threshold(const Vector &v, double tau) {
  return v.unaryExpr([tau](double e) {
    const double m = std::abs(e) - tau;
    return m > 0.0 ? std::copysign(m, e) : 0.0;
  });
}

Vector prox_step_x(const DeconvProblem &p, const DeconvState &s, double step) {
  if (!(step > 0.0))
    throw InvalidArgument("prox_step_x: step must be positive");
  return soft_threshold(s.x - step * grad_x(p, s), step * p.lambda);
}

double lipschitz_bound(const Vector &v) {
  const Eigen::Index n = v.size();
  if (n < 1)
    throw InvalidArgument("lipschitz_bound: empty vector");
  double peak = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      // Reduce k*m mod n first so the twiddle angle stays accurate.
      const double angle = -2.0 * std::numbers::pi *
                           static_cast<double>((k * m) % n) /
                           static_cast<double>(n);
      acc += v(m) * std::polar(1.0, angle);
    }
    peak = std::max(peak, std::norm(acc));
  }
  return 2.0 * peak;
}

GrassmannPoint riemannian_step_a(const DeconvProblem &p, const DeconvState &s,
                                 double step) {
  if (!(step > 0.0))
    throw InvalidArgument("riemannian_step_a: step must be positive");
  const Vector egrad = grad_a(p, s);
  const TangentVector g = riemannian_gradient(s.a, Matrix(egrad));
  const double gnorm = g.norm();
  if (gnorm <= kZeroGradient)
    return s.a;
  const Vector a = kernel(s.a);
  const Vector h = -step * g.delta().col(0);
  const double theta = h.norm();
  Vector next = a * std::cos(theta) + (h / theta) * std::sin(theta);
  next.normalize();
  return as_point(next);
}

double majorant_step_a(const DeconvProblem &p, const DeconvState &s,
                       double step_scale) {
  const Vector egrad = grad_a(p, s);
  const Vector a = kernel(s.a);
  const Vector rgrad = egrad - a * a.dot(egrad);
  const double gnorm = rgrad.norm();
  const double L = lipschitz_bound(s.x) / step_scale;
  if (gnorm <= kZeroGradient || !(L > 0.0))
    return 0.0;
  // The majorant restricted to the unit sphere is linear in the candidate;
  // its minimizer is the normalized L a - grad, reached along the geodesic
  // through -rgrad at angle atan2(|rgrad|, L - <grad, a>).
  const double kappa = L - egrad.dot(a);
  return std::atan2(gnorm, kappa) / gnorm;
}

BlockProblem make_deconv_problem(const DeconvProblem &p,
                                 const DeconvOptions &opts) {
  p.validate();
  if (!(opts.step_scale > 0.0))
    throw InvalidArgument("make_deconv_problem: step_scale must be positive");
  const Eigen::Index n = p.size();
  const double scale = opts.step_scale;

  BlockProblem bp;
  bp.dims = ProblemDims{n, 1, n};
  bp.cost = [p](const GrassmannPoint &G, const Vector &x) {
    return deconv_cost(p, DeconvState{G, x});
  };

  // Kernel block: min over sign of the quadratic model of the data term
  // around the active representative, curvature lipschitz_bound(x) / scale.
  bp.grassmann_surrogate.evaluate = [p, scale](const GrassmannPoint &cand,
                                               const GrassmannPoint &G,
                                               const Vector &x) {
    const Vector a = active_kernel(p, kernel(G), x);
    const double f0 = data_term(p, a, x);
    const Vector g = grad_a(p, DeconvState{as_point(a), x});
    const double L = lipschitz_bound(x) / scale;
    const Vector z = kernel(cand);
    auto model = [&](const Vector &w) {
      const Vector d = w - a;
      return f0 + g.dot(d) + 0.5 * L * d.squaredNorm();
    };
    return std::min(model(z), model(-z)) + p.lambda * x.lpNorm<1>();
  };
  bp.grassmann_surrogate.minimize = [p, scale](const GrassmannPoint &G,
                                               const Vector &x) {
    const DeconvState s{as_point(active_kernel(p, kernel(G), x)), x};
    const double step = majorant_step_a(p, s, scale);
    if (!(step > 0.0))
      return G;
    return riemannian_step_a(p, s, step);
  };

  // Signal block: proximal majorant, curvature lipschitz_bound(a) / scale.
  bp.convex_surrogate.evaluate = [p, scale](const Vector &cand,
                                            const GrassmannPoint &G,
                                            const Vector &x) {
    const Vector a = active_kernel(p, kernel(G), x);
    const double f0 = data_term(p, a, x);
    const Vector g = grad_x(p, DeconvState{as_point(a), x});
    const double L = lipschitz_bound(a) / scale;
    const Vector d = cand - x;
    return f0 + g.dot(d) + 0.5 * L * d.squaredNorm() +
           p.lambda * cand.lpNorm<1>();
  };
  bp.convex_surrogate.minimize = [p, scale](const GrassmannPoint &G,
                                            const Vector &x) {
    const Vector a = active_kernel(p, kernel(G), x);
    return prox_step_x(p, DeconvState{as_point(a), x}, scale / lipschitz_bound(a));
  };

  bp.euclidean_grad_G = [p](const GrassmannPoint &G, const Vector &x) {
    const int sign = active_sign(p, kernel(G), x);
    const Vector a = sign > 0 ? kernel(G) : Vector(-kernel(G));
    return Matrix(sign * grad_a(p, DeconvState{as_point(a), x}));
  };
  bp.grad_c = [p](const GrassmannPoint &G, const Vector &x) {
    const Vector a = active_kernel(p, kernel(G), x);
    return grad_x(p, DeconvState{as_point(a), x});
  };
  bp.convex_kink = [](const Vector &x, const Vector &delta, double h) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (delta(i) != 0.0 && std::abs(x(i)) <= h * std::abs(delta(i)))
        return true;
    return false;
  };
  return bp;
}

DeconvResult solve_deconv(const DeconvProblem &p, const DeconvState &init,
                          const SolverConfig &config,
                          const DeconvOptions &opts) {
  require_state(p, init, "solve_deconv");
  const BlockProblem bp = make_deconv_problem(p, opts);
  BlockMMResult mm = run_block_mm(bp, init.a, init.x, config);
  Vector a = active_kernel(p, kernel(mm.G), mm.c);
  DeconvState state{as_point(a), mm.c};
  return DeconvResult{std::move(mm), std::move(state)};
}

namespace {

void check_instance_args(Eigen::Index N, Eigen::Index kernel_support,
                         double noise_sigma) {
  if (N < 2)
    throw InvalidArgument("generate_instance: N must be >= 2");
  if (kernel_support < 1 || kernel_support > N)
    throw InvalidArgument("generate_instance: kernel_support must be in [1, N]");
  if (!(noise_sigma >= 0.0))
    throw InvalidArgument("generate_instance: noise_sigma must be >= 0");
}

void finish_instance(SyntheticInstance &inst, std::mt19937_64 &rng,
                     Eigen::Index N, Eigen::Index kernel_support) {
  std::normal_distribution<double> normal(0.0, 1.0);
  inst.true_a = Vector::Zero(N);
  do {
    for (Eigen::Index k = 0; k < kernel_support; ++k)
      inst.true_a(k) = normal(rng);
  } while (inst.true_a.norm() == 0.0);
  inst.true_a.normalize();

  inst.y = circular_convolution(inst.true_a, inst.true_x);
  if (inst.noise_sigma > 0.0)
    for (Eigen::Index i = 0; i < N; ++i)
      inst.y(i) += inst.noise_sigma * normal(rng);
  inst.kernel_support = kernel_support;
  inst.nonzeros = static_cast<Eigen::Index>((inst.true_x.array() != 0.0).count());
}

} // namespace

SyntheticInstance generate_instance(std::uint64_t seed, Eigen::Index N,
                                    double sparsity, Eigen::Index kernel_support,
                                    double noise_sigma) {
  check_instance_args(N, kernel_support, noise_sigma);
  if (!(sparsity > 0.0 && sparsity < 1.0))
    throw InvalidArgument("generate_instance: sparsity must be in (0, 1)");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution on(sparsity);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticInstance inst;
  inst.seed = seed;
  inst.sparsity = sparsity;
  inst.noise_sigma = noise_sigma;
  inst.true_x = Vector::Zero(N);
  for (Eigen::Index i = 0; i < N; ++i)
    if (on(rng))
      inst.true_x(i) = normal(rng);
  finish_instance(inst, rng, N, kernel_support);
  return inst;
}

SyntheticInstance generate_spike_instance(std::uint64_t seed, Eigen::Index N,
                                          Eigen::Index spikes,
                                          Eigen::Index kernel_support,
                                          double noise_sigma) {
  check_instance_args(N, kernel_support, noise_sigma);
  if (spikes < 1 || spikes > N)
    throw InvalidArgument("generate_spike_instance: spikes must be in [1, N]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Eigen::Index> positions(static_cast<std::size_t>(N));
  std::iota(positions.begin(), positions.end(), Eigen::Index{0});
  // Partial Fisher-Yates with explicit draws (std::shuffle is not portable
  // across standard libraries).
  for (Eigen::Index i = 0; i < spikes; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, N - 1);
    std::swap(positions[static_cast<std::size_t>(i)],
              positions[static_cast<std::size_t>(pick(rng))]);
  }

  SyntheticInstance inst;
  inst.seed = seed;
  inst.sparsity = static_cast<double>(spikes) / static_cast<double>(N);
  inst.noise_sigma = noise_sigma;
  inst.true_x = Vector::Zero(N);
  for (Eigen::Index i = 0; i < spikes; ++i) {
    double amp = 0.0;
    while (amp == 0.0)
      amp = normal(rng);
    inst.true_x(positions[static_cast<std::size_t>(i)]) = amp;
  }
  finish_instance(inst, rng, N, kernel_support);
  return inst;
}

DeconvState default_initial_state(const DeconvProblem &p, Eigen::Index window) {
  p.validate();
  const Eigen::Index n = p.size();
  if (window < 1 || window > n)
    throw InvalidArgument("default_initial_state: window must be in [1, N]");
  Vector a = Vector::Zero(n);
  Eigen::Index peak = 0;
  p.y.cwiseAbs().maxCoeff(&peak);
  const Eigen::Index start = peak - window / 2;
  for (Eigen::Index k = 0; k < window; ++k) {
    const double w = std::sin(std::numbers::pi * static_cast<double>(k + 1) /
                              static_cast<double>(window + 1));
    const Eigen::Index idx = ((start + k) % n + n) % n;
    a(k) = w * w * p.y(idx);
  }
  if (a.norm() == 0.0)
    a(0) = 1.0;
  a.normalize();
  return DeconvState{as_point(a), Vector::Zero(n)};
}

DeconvState random_initial_state(std::uint64_t seed, Eigen::Index N) {
  return DeconvState{random_point(seed, N, 1), Vector::Zero(N)};
}

double default_lambda(const Vector &y, const Vector &a0) {
  return 0.1 * circular_correlation(a0, y).cwiseAbs().maxCoeff();
}

double recovery_score(const DeconvState &estimate,
                      const SyntheticInstance &truth) {
  const Vector a = kernel(estimate.a);
  require_same_length(a.size(), truth.true_a.size(), "recovery_score");
  const Eigen::Index n = a.size();
  // <shift(a, s), t> = sum_n a[(n - s) mod N] t[n] = corr(a, t)[s].
  const Vector corr = circular_correlation(a, truth.true_a);
  const double tnorm = truth.true_a.norm();
  double best = 0.0;
  for (Eigen::Index s = 0; s < n; ++s)
    best = std::max(best, std::abs(corr(s)));
  return std::min(1.0, best / (tnorm > 0.0 ? tnorm : 1.0));
}

} // namespace grassmm
