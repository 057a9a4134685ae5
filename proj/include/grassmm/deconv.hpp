#pragma once

/// Blind sparse deconvolution with a unit-norm kernel on Gr(N, 1):
///
///   min_{a, x} ||y - a (*) x||_2^2 + lambda ||x||_1,   a in Gr(N, 1)
///
/// where (*) is circular convolution. The kernel block is updated by a
/// geodesic gradient step that exactly minimizes a Lipschitz quadratic
/// majorant; the signal block by a proximal-gradient (soft-thresholding) step.
///
/// The data term changes under a -> -a with x fixed; only (a, x) -> (-a, -x)
/// leaves it unchanged. To make the cost a function of the subspace [a] the
/// kernel representative is chosen per evaluation: deconv_cost takes the
/// minimum of the data term over a and -a.

#include "grassmm/block_mm.hpp"

#include <cstdint>

namespace grassmm {

struct DeconvProblem {
  Vector y;
  double lambda = 0.0;

  Eigen::Index size() const noexcept { return y.size(); }
  /// Throws InvalidArgument on empty/non-finite y or negative lambda.
  void validate() const;
};

struct DeconvState {
  GrassmannPoint a; // Gr(N, 1)
  Vector x;
};

struct SyntheticInstance {
  Vector true_a;
  Vector true_x;
  Vector y;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  double sparsity = 0.0;
  Eigen::Index kernel_support = 0;
  Eigen::Index nonzeros = 0;
};

/// Knobs for the block surrogates. step_scale multiplies both 1/L step sizes;
/// values above 1 break the majorization property (used as a negative
/// control).
struct DeconvOptions {
  double step_scale = 1.0;
};

/// out[n] = sum_k a[k] x[(n - k) mod N], direct double sum.
Vector circular_convolution(const Vector &a, const Vector &x);

/// out[k] = sum_m v[m] r[(m + k) mod N]; the adjoint of v (*) . applied to r.
Vector circular_correlation(const Vector &v, const Vector &r);

/// ||y - a (*) x||^2 for the given kernel representative.
double data_term(const DeconvProblem &p, const Vector &a, const Vector &x);

/// min(||y - a (*) x||^2, ||y + a (*) x||^2) + lambda ||x||_1.
double deconv_cost(const DeconvProblem &p, const DeconvState &s);

/// +1 if the representative a attains the minimum in deconv_cost, else -1.
int active_sign(const DeconvProblem &p, const Vector &a, const Vector &x);

/// Gradient of ||y - a (*) x||^2 in x at the given representative.
Vector grad_x(const DeconvProblem &p, const DeconvState &s);

/// Euclidean gradient of ||y - a (*) x||^2 in a at the given representative.
Vector grad_a(const DeconvProblem &p, const DeconvState &s);

/// sign(v) max(|v| - tau, 0), elementwise.
Vector soft_threshold(const Vector &v, double tau);

/// soft_threshold(x - step grad_x, step lambda).
Vector prox_step_x(const DeconvProblem &p, const DeconvState &s, double step);

/// 2 max_k |DFT(v)[k]|^2: curvature bound of the data term in the other block.
double lipschitz_bound(const Vector &v);

/// Geodesic step a cos(|h|) + (h/|h|) sin(|h|) with h = -step * (Riemannian
/// gradient of the data term in a). Returns a unchanged if the gradient norm is
/// at most 1e-14.
GrassmannPoint riemannian_step_a(const DeconvProblem &p, const DeconvState &s,
                                 double step);

/// Step length for riemannian_step_a that lands on the minimizer of the
/// quadratic majorant with curvature L_a / step_scale. Zero when the gradient
/// vanishes.
double majorant_step_a(const DeconvProblem &p, const DeconvState &s,
                       double step_scale = 1.0);

/// Wraps the cost and both surrogates into a BlockProblem (D = 1, convex block
/// x in R^N).
BlockProblem make_deconv_problem(const DeconvProblem &p,
                                 const DeconvOptions &opts = {});

struct DeconvResult {
  BlockMMResult mm;
  DeconvState state; // final iterate, kernel at its active representative
};

DeconvResult solve_deconv(const DeconvProblem &p, const DeconvState &init,
                          const SolverConfig &config,
                          const DeconvOptions &opts = {});

/// Bernoulli(sparsity)-Gaussian signal, Gaussian kernel on the first
/// kernel_support entries normalized to unit norm, y = a (*) x + noise.
SyntheticInstance generate_instance(std::uint64_t seed, Eigen::Index N,
                                    double sparsity, Eigen::Index kernel_support,
                                    double noise_sigma);

/// Same as generate_instance but with exactly `spikes` nonzeros at distinct
/// uniformly drawn positions.
SyntheticInstance generate_spike_instance(std::uint64_t seed, Eigen::Index N,
                                          Eigen::Index spikes,
                                          Eigen::Index kernel_support,
                                          double noise_sigma);

/// Hann-windowed segment of y of length `window` centred on the largest |y|,
/// normalized; x = 0.
DeconvState default_initial_state(const DeconvProblem &p, Eigen::Index window);

/// Random unit kernel from the seed; x = 0.
DeconvState random_initial_state(std::uint64_t seed, Eigen::Index N);

/// 0.1 ||corr(a0, y)||_inf.
double default_lambda(const Vector &y, const Vector &a0);

/// max over circular shifts and signs of |<shift(a, s), true_a>|, in [0, 1].
double recovery_score(const DeconvState &estimate,
                      const SyntheticInstance &truth);

} // namespace grassmm
