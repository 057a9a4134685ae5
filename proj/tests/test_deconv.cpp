#include "grassmm/audits.hpp"
#include "grassmm/deconv.hpp"
#include "grassmm/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

using namespace grassmm;

namespace {

GrassmannPoint unit(const Vector &v) {
  return GrassmannPoint::from_orthonormal(Matrix(v.normalized()));
}

Vector delta(Eigen::Index n, Eigen::Index at) {
  Vector v = Vector::Zero(n);
  v(at) = 1.0;
  return v;
}

Vector gaussian(std::uint64_t seed, Eigen::Index n) {
  return random_gaussian(seed, n, 1).col(0);
}

std::vector<std::complex<double>> naive_dft(const Vector &v) {
  const auto n = static_cast<std::size_t>(v.size());
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t m = 0; m < n; ++m)
      out[k] += v(static_cast<Eigen::Index>(m)) *
                std::exp(std::complex<double>(
                    0.0, -2.0 * std::numbers::pi * static_cast<double>(k * m) /
                             static_cast<double>(n)));
  return out;
}

// Random state with x having some exact zeros and a at its active sign.
struct RandomState {
  DeconvProblem p;
  DeconvState s;
};

RandomState random_state(std::uint64_t seed, Eigen::Index n = 32,
                         double lambda = 0.3) {
  DeconvProblem p{gaussian(derive_seed(seed, 0), n), lambda};
  Vector a = gaussian(derive_seed(seed, 1), n).normalized();
  Vector x = gaussian(derive_seed(seed, 2), n);
  for (Eigen::Index i = 0; i < n; i += 3)
    x(i) = 0.0;
  if (active_sign(p, a, x) < 0)
    a = -a;
  return {p, DeconvState{unit(a), x}};
}

double smooth_term_x(const DeconvProblem &p, const Vector &a, const Vector &x) {
  return data_term(p, a, x);
}

Matrix circulant(const Vector &v) {
  const Eigen::Index n = v.size();
  Matrix C(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      C(i, j) = v(((i - j) % n + n) % n);
  return C;
}

} // namespace

TEST(Convolution, TwoByTwoExample) {
  Vector a(2), x(2);
  a << 1, 2;
  x << 3, 4;
  const Vector out = circular_convolution(a, x);
  EXPECT_DOUBLE_EQ(out(0), 11.0);
  EXPECT_DOUBLE_EQ(out(1), 10.0);
}

TEST(Convolution, DeltaIsIdentityAndShift) {
  const Vector x = gaussian(7, 10);
  EXPECT_EQ(circular_convolution(delta(10, 0), x), x);
  const Vector shifted = circular_convolution(delta(10, 3), x);
  for (Eigen::Index n = 0; n < 10; ++n)
    EXPECT_EQ(shifted(n), x((n - 3 + 10) % 10));
}

TEST(Convolution, LengthMismatchThrows) {
  EXPECT_THROW(circular_convolution(Vector::Ones(3), Vector::Ones(4)),
               DimensionError);
}

TEST(Convolution, CommutativeAndBilinear) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(s % 20);
    const Vector a = gaussian(derive_seed(s, 0), n);
    const Vector b = gaussian(derive_seed(s, 1), n);
    const Vector x = gaussian(derive_seed(s, 2), n);
    const double alpha = 0.7, beta = -1.3;
    EXPECT_LE((circular_convolution(a, x) - circular_convolution(x, a)).norm(), 1e-10);
    const Vector lhs = circular_convolution(alpha * a + beta * b, x);
    const Vector rhs =
        alpha * circular_convolution(a, x) + beta * circular_convolution(b, x);
    EXPECT_LE((lhs - rhs).norm(), 1e-10);
    const Vector lhs2 = circular_convolution(x, alpha * a + beta * b);
    EXPECT_LE((lhs2 - rhs).norm(), 1e-10);
  }
}

TEST(Convolution, MatchesConvolutionTheorem) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Vector a = gaussian(derive_seed(s, 0), 17);
    const Vector x = gaussian(derive_seed(s, 1), 17);
    const auto A = naive_dft(a), X = naive_dft(x);
    const auto C = naive_dft(circular_convolution(a, x));
    for (std::size_t k = 0; k < C.size(); ++k)
      EXPECT_LE(std::abs(C[k] - A[k] * X[k]), 1e-8);
  }
}

TEST(Correlation, IsAdjointOfConvolution) {
  const Vector v = gaussian(1, 12), x = gaussian(2, 12), r = gaussian(3, 12);
  EXPECT_NEAR(circular_convolution(v, x).dot(r), x.dot(circular_correlation(v, r)),
              1e-12);
}

TEST(DeconvCost, ZeroSignalGivesSquaredNorm) {
  DeconvProblem p{gaussian(4, 9), 0.5};
  DeconvState s{unit(gaussian(5, 9)), Vector::Zero(9)};
  EXPECT_DOUBLE_EQ(deconv_cost(p, s), p.y.squaredNorm());
}

TEST(DeconvCost, NoiselessTruthWithZeroLambdaIsZero) {
  const SyntheticInstance inst = generate_instance(3, 32, 0.2, 5, 0.0);
  DeconvProblem p{inst.y, 0.0};
  EXPECT_NEAR(deconv_cost(p, DeconvState{unit(inst.true_a), inst.true_x}), 0.0,
              1e-24);
}

TEST(DeconvCost, PenaltyOnlyAtZeroResidual) {
  Vector x(3);
  x << 1, -2, 0;
  DeconvProblem p{x, 2.0};
  EXPECT_DOUBLE_EQ(deconv_cost(p, DeconvState{unit(delta(3, 0)), x}), 6.0);
}

TEST(DeconvCost, SignHomogeneityIsExact) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const RandomState r = random_state(s);
    const Vector a = r.s.a.basis().col(0);
    DeconvState flipped{GrassmannPoint::from_orthonormal(Matrix(-a)), r.s.x};
    EXPECT_EQ(deconv_cost(r.p, r.s), deconv_cost(r.p, flipped));
  }
}

TEST(DeconvCost, DimensionMismatchThrows) {
  DeconvProblem p{Vector::Ones(4), 0.1};
  EXPECT_THROW(deconv_cost(p, DeconvState{unit(delta(5, 0)), Vector::Zero(5)}),
               DimensionError);
  EXPECT_THROW(deconv_cost(p, DeconvState{unit(delta(4, 0)), Vector::Zero(5)}),
               DimensionError);
}

TEST(DeconvProblemValidate, RejectsNegativeLambdaAndNaN) {
  EXPECT_THROW((DeconvProblem{Vector::Ones(3), -1.0}.validate()), InvalidArgument);
  Vector y = Vector::Ones(3);
  y(1) = std::nan("");
  EXPECT_THROW((DeconvProblem{y, 0.1}.validate()), InvalidArgument);
}

TEST(GradX, ZeroResidualGivesZero) {
  const SyntheticInstance inst = generate_instance(8, 16, 0.3, 4, 0.0);
  DeconvProblem p{inst.y, 0.2};
  EXPECT_LE(grad_x(p, DeconvState{unit(inst.true_a), inst.true_x}).norm(), 1e-12);
}

TEST(GradX, DeltaKernelGivesResidual) {
  DeconvProblem p{gaussian(9, 8), 0.0};
  const Vector x = gaussian(10, 8);
  const Vector g = grad_x(p, DeconvState{unit(delta(8, 0)), x});
  EXPECT_LE((g + 2.0 * (p.y - x)).norm(), 1e-12);
}

TEST(GradX, MatchesCentralDifferences) {
  const double h = 1e-5;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const RandomState r = random_state(s, 16);
    const Vector a = r.s.a.basis().col(0);
    const Vector g = grad_x(r.p, r.s);
    Vector fd(16);
    for (Eigen::Index i = 0; i < 16; ++i) {
      Vector xp = r.s.x, xm = r.s.x;
      xp(i) += h;
      xm(i) -= h;
      fd(i) = (smooth_term_x(r.p, a, xp) - smooth_term_x(r.p, a, xm)) / (2 * h);
    }
    EXPECT_LE((g - fd).norm() / std::max(1.0, fd.norm()), 1e-6) << "seed " << s;
  }
}

TEST(GradA, MatchesCentralDifferences) {
  const double h = 1e-5;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const RandomState r = random_state(s + 500, 16);
    const Vector a = r.s.a.basis().col(0);
    const Vector g = grad_a(r.p, r.s);
    Vector fd(16);
    for (Eigen::Index i = 0; i < 16; ++i) {
      Vector ap = a, am = a;
      ap(i) += h;
      am(i) -= h;
      fd(i) = (data_term(r.p, ap, r.s.x) - data_term(r.p, am, r.s.x)) / (2 * h);
    }
    EXPECT_LE((g - fd).norm() / std::max(1.0, fd.norm()), 1e-6) << "seed " << s;
  }
}

TEST(SoftThreshold, ScalarExamples) {
  Vector v(4);
  v << 3, -3, 0.5, -0.5;
  const Vector out = soft_threshold(v, 1.0);
  EXPECT_EQ(out(0), 2.0);
  EXPECT_EQ(out(1), -2.0);
  EXPECT_EQ(out(2), 0.0);
  EXPECT_EQ(out(3), 0.0);
}

TEST(ProxStep, RejectsNonPositiveStep) {
  const RandomState r = random_state(1);
  EXPECT_THROW(prox_step_x(r.p, r.s, 0.0), InvalidArgument);
  EXPECT_THROW(prox_step_x(r.p, r.s, -1.0), InvalidArgument);
}

TEST(ProxStep, InverseLipschitzStepNeverIncreasesCost) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const RandomState r = random_state(s + 100);
    const double L = lipschitz_bound(r.s.a.basis().col(0));
    const Vector next = prox_step_x(r.p, r.s, 1.0 / L);
    EXPECT_LE(deconv_cost(r.p, DeconvState{r.s.a, next}),
              deconv_cost(r.p, r.s) + 1e-12)
        << "seed " << s;
  }
}

TEST(Lipschitz, DeltaGivesTwo) {
  EXPECT_NEAR(lipschitz_bound(delta(7, 0)), 2.0, 1e-14);
  EXPECT_NEAR(lipschitz_bound(delta(7, 4)), 2.0, 1e-12);
}

TEST(Lipschitz, OnesOfLengthTwoGivesEight) {
  EXPECT_NEAR(lipschitz_bound(Vector::Ones(2)), 8.0, 1e-12);
}

TEST(Lipschitz, BoundsPowerIterationEstimate) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Vector v = gaussian(s, 24);
    const Matrix C = circulant(v);
    const Matrix gram = C.transpose() * C;
    Vector u = gaussian(s + 99, 24).normalized();
    double est = 0.0;
    for (int it = 0; it < 2000; ++it) {
      const Vector w = gram * u;
      est = u.dot(w);
      u = w.normalized();
    }
    const double L = lipschitz_bound(v);
    EXPECT_LE(2.0 * est, L + 1e-8);
    EXPECT_NEAR(2.0 * est, L, 1e-6 * L);
  }
}

TEST(RiemannianStep, ZeroGradientLeavesKernelUnchanged) {
  DeconvProblem p{gaussian(1, 8), 0.1};
  const GrassmannPoint a = unit(gaussian(2, 8));
  const GrassmannPoint next = riemannian_step_a(p, DeconvState{a, Vector::Zero(8)}, 0.5);
  EXPECT_EQ(next.basis(), a.basis());
}

TEST(RiemannianStep, RejectsNonPositiveStep) {
  const RandomState r = random_state(2);
  EXPECT_THROW(riemannian_step_a(r.p, r.s, 0.0), InvalidArgument);
}

TEST(RiemannianStep, PreservesUnitNorm) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const RandomState r = random_state(s + 200);
    const double step = 0.01 * static_cast<double>(s % 10 + 1);
    const GrassmannPoint next = riemannian_step_a(r.p, r.s, step);
    EXPECT_NEAR(next.basis().col(0).norm(), 1.0, 1e-12);
  }
}

TEST(RiemannianStep, InverseLipschitzStepNeverIncreasesCost) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const RandomState r = random_state(s + 300);
    const double L = lipschitz_bound(r.s.x);
    const GrassmannPoint next = riemannian_step_a(r.p, r.s, 1.0 / L);
    EXPECT_LE(deconv_cost(r.p, DeconvState{next, r.s.x}),
              deconv_cost(r.p, r.s) + 1e-12)
        << "seed " << s;
  }
}

TEST(RiemannianStep, MajorantStepMinimizesKernelSurrogate) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const RandomState r = random_state(s + 400);
    const BlockProblem bp = make_deconv_problem(r.p);
    const GrassmannPoint best = bp.grassmann_surrogate.minimize(r.s.a, r.s.x);
    const double g_best = bp.grassmann_surrogate.evaluate(best, r.s.a, r.s.x);
    for (std::uint64_t k = 0; k < 50; ++k) {
      const GrassmannPoint cand = random_point(derive_seed(s, k), 32, 1);
      EXPECT_LE(g_best, bp.grassmann_surrogate.evaluate(cand, r.s.a, r.s.x) + 1e-10);
    }
    EXPECT_LE(g_best, deconv_cost(r.p, r.s) + 1e-12);
  }
}

TEST(DeconvSurrogates, PassTightnessAndMajorization) {
  std::vector<Anchor> anchors;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const RandomState r = random_state(s + 600);
    anchors.push_back(Anchor{r.s.a, r.s.x});
  }
  const BlockProblem bp = make_deconv_problem(random_state(600).p);
  const AuditResult tg = audit_tightness(bp.grassmann_surrogate, bp, anchors, 1e-10);
  const AuditResult tc = audit_tightness(bp.convex_surrogate, bp, anchors, 1e-10);
  EXPECT_TRUE(tg.passed) << tg.worst;
  EXPECT_TRUE(tc.passed) << tc.worst;
  EXPECT_LE(tg.worst, 1e-10);

  const std::span<const Anchor> first(anchors.data(), 1);
  const AuditResult mg = audit_majorization(bp.grassmann_surrogate, bp, first, 200, 1);
  const AuditResult mc = audit_majorization(bp.convex_surrogate, bp, first, 200, 2);
  EXPECT_TRUE(mg.passed) << mg.worst;
  EXPECT_TRUE(mc.passed) << mc.worst;
}

TEST(DeconvSurrogates, OversizedStepFailsMajorization) {
  const RandomState r = random_state(700);
  const BlockProblem bp = make_deconv_problem(r.p, DeconvOptions{10.0});
  const Anchor anchor{r.s.a, r.s.x};
  const std::span<const Anchor> one(&anchor, 1);
  EXPECT_FALSE(audit_majorization(bp.grassmann_surrogate, bp, one, 200, 3).passed);
  EXPECT_FALSE(audit_majorization(bp.convex_surrogate, bp, one, 200, 4).passed);
}

TEST(DeconvSurrogates, DerivativesMatchAwayFromKinks) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const RandomState r = random_state(s + 800);
    const BlockProblem bp = make_deconv_problem(r.p);
    const Anchor anchor{r.s.a, r.s.x};
    const AuditResult dg = audit_derivative_match(bp.grassmann_surrogate, bp, anchor, 20, s);
    const AuditResult dc = audit_derivative_match(bp.convex_surrogate, bp, anchor, 20, s);
    EXPECT_TRUE(dg.passed) << dg.worst;
    EXPECT_TRUE(dc.passed) << dc.worst;
    // random_state zeroes every third entry, so random directions cross kinks
    // and are evaluated on the remaining coordinates.
    EXPECT_EQ(dc.evaluated, 20);
    EXPECT_EQ(dc.skipped, 0);
  }
}

TEST(DeconvSurrogates, CostIsSignHomogeneous) {
  std::vector<Anchor> anchors;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const RandomState r = random_state(s + 900);
    anchors.push_back(Anchor{r.s.a, r.s.x});
  }
  const BlockProblem bp = make_deconv_problem(random_state(900).p);
  const AuditResult h = audit_homogeneity(bp, anchors, 10, 5);
  EXPECT_TRUE(h.passed);
  EXPECT_EQ(h.worst, 0.0);
}

TEST(SolveDeconv, TruthWithZeroLambdaIsImmediatelyStationary) {
  const SyntheticInstance inst = generate_spike_instance(4, 32, 3, 6, 0.0);
  DeconvProblem p{inst.y, 0.0};
  const DeconvResult r =
      solve_deconv(p, DeconvState{unit(inst.true_a), inst.true_x}, SolverConfig{});
  EXPECT_TRUE(r.mm.report.converged);
  EXPECT_EQ(r.mm.report.iterations, 1);
  EXPECT_NEAR(r.mm.report.final_cost, 0.0, 1e-20);
  EXPECT_GE(r.mm.report.stationarity_score, -1e-4);
}

TEST(SolveDeconv, TraceIsMonotoneOnSpikeInstances) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const SyntheticInstance inst = generate_spike_instance(s, 64, 4, 8, 0.0);
    DeconvProblem p{inst.y, 0.1};
    const DeconvResult r = solve_deconv(p, default_initial_state(p, 8), SolverConfig{});
    const auto &rec = r.mm.trace.records;
    for (std::size_t i = 0; i < rec.size(); ++i) {
      EXPECT_LE(rec[i].f_after_G, rec[i].f + 1e-10);
      if (i + 1 < rec.size())
        EXPECT_LE(rec[i + 1].f, rec[i].f_after_G + 1e-10);
    }
    EXPECT_NEAR(r.mm.report.final_cost, deconv_cost(p, r.state), 1e-12);
  }
}

TEST(GenerateInstance, NoiselessObservationIsExactConvolution) {
  const SyntheticInstance inst = generate_instance(11, 40, 0.1, 6, 0.0);
  EXPECT_EQ(inst.y, circular_convolution(inst.true_a, inst.true_x));
  EXPECT_NEAR(inst.true_a.norm(), 1.0, 1e-15);
  EXPECT_EQ(inst.true_a.tail(34), Vector::Zero(34));
}

TEST(GenerateInstance, SameSeedSameInstance) {
  const SyntheticInstance a = generate_instance(5, 30, 0.2, 4, 0.1);
  const SyntheticInstance b = generate_instance(5, 30, 0.2, 4, 0.1);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.true_x, b.true_x);
  EXPECT_EQ(a.true_a, b.true_a);
}

TEST(GenerateInstance, SparsityOneOverNGivesAboutOneNonzero) {
  const Eigen::Index n = 50;
  double total = 0.0;
  const int trials = 4000;
  for (int s = 0; s < trials; ++s)
    total += static_cast<double>(
        generate_instance(static_cast<std::uint64_t>(s), n, 1.0 / n, 5, 0.0).nonzeros);
  // Binomial(50, 1/50): mean 1, standard error of the mean ~0.016.
  EXPECT_NEAR(total / trials, 1.0, 0.08);
}

TEST(GenerateInstance, RejectsBadParameters) {
  EXPECT_THROW(generate_instance(0, 10, 0.0, 3, 0.0), InvalidArgument);
  EXPECT_THROW(generate_instance(0, 10, 1.0, 3, 0.0), InvalidArgument);
  EXPECT_THROW(generate_instance(0, 10, 0.5, 11, 0.0), InvalidArgument);
  EXPECT_THROW(generate_instance(0, 10, 0.5, 3, -1.0), InvalidArgument);
}

TEST(GenerateSpikeInstance, HasExactSpikeCount) {
  for (std::uint64_t s = 0; s < 20; ++s)
    EXPECT_EQ(generate_spike_instance(s, 64, 4, 8, 0.0).nonzeros, 4);
}

TEST(RecoveryScore, TruthScoresOne) {
  const SyntheticInstance inst = generate_instance(1, 32, 0.1, 6, 0.0);
  EXPECT_NEAR(recovery_score(DeconvState{unit(inst.true_a), inst.true_x}, inst),
              1.0, 1e-14);
}

TEST(RecoveryScore, InvariantToSignAndShift) {
  const SyntheticInstance inst = generate_instance(2, 32, 0.1, 6, 0.0);
  const Vector shifted = -circular_convolution(delta(32, 3), inst.true_a);
  EXPECT_NEAR(recovery_score(DeconvState{unit(shifted), inst.true_x}, inst), 1.0,
              1e-14);
}

TEST(RecoveryScore, RandomKernelScoresLow) {
  const SyntheticInstance inst = generate_instance(3, 64, 0.05, 8, 0.0);
  for (std::uint64_t s = 0; s < 100; ++s)
    EXPECT_LT(recovery_score(random_initial_state(s, 64), inst), 0.5);
}

TEST(Initialization, DefaultKernelIsUnitAndSignalZero) {
  const SyntheticInstance inst = generate_instance(6, 64, 0.05, 8, 0.0);
  DeconvProblem p{inst.y, 0.1};
  const DeconvState s = default_initial_state(p, 8);
  EXPECT_NEAR(s.a.basis().col(0).norm(), 1.0, 1e-14);
  EXPECT_EQ(s.x, Vector::Zero(64));
  EXPECT_GT(default_lambda(p.y, s.a.basis().col(0)), 0.0);
}
