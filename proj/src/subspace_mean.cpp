#include "grassmm/subspace_mean.hpp"

#include "grassmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace grassmm {

namespace {

Matrix centered(const Matrix &A, const Vector &c) {
  return A.colwise() - c;
}

} // namespace

double subspace_mean_cost(const Matrix &A, const GrassmannPoint &G,
                          const Vector &c) {
  if (G.ambient_dim() != A.rows() || c.size() != A.rows())
    throw DimensionError("subspace_mean_cost: dimension mismatch");
  const Matrix R = centered(A, c);
  const Matrix &B = G.basis();
  return (R - B * (B.transpose() * R)).squaredNorm();
}

BlockProblem builtin_subspace_plus_mean(const Matrix &A, Eigen::Index D) {
  require_finite(A, "builtin_subspace_plus_mean");
  if (D < 1 || D >= std::min(A.rows(), A.cols()))
    throw DimensionError("builtin_subspace_plus_mean: need 1 <= D < min(N, M), "
                         "got D=" + std::to_string(D) + " for " +
                         std::to_string(A.rows()) + "x" +
                         std::to_string(A.cols()));

  BlockProblem p;
  p.dims = ProblemDims{A.rows(), D, A.rows()};
  p.cost = [A](const GrassmannPoint &G, const Vector &c) {
    return subspace_mean_cost(A, G, c);
  };

  p.grassmann_surrogate.evaluate = [A](const GrassmannPoint &cand,
                                       const GrassmannPoint &,
                                       const Vector &c) {
    return subspace_mean_cost(A, cand, c);
  };
  p.grassmann_surrogate.minimize = [A, D](const GrassmannPoint &G,
                                          const Vector &c) {
    const Matrix R = centered(A, c);
    GrassmannPoint top =
        GrassmannPoint::from_orthonormal(thin_svd(R).U.leftCols(D));
    const double f_top = subspace_mean_cost(A, top, c);
    const double f_cur = subspace_mean_cost(A, G, c);
    if (f_cur <= f_top + 1e-12 * std::max(1.0, std::abs(f_top)))
      return G;
    return top;
  };

  const Vector mean = A.rowwise().mean();
  p.convex_surrogate.evaluate = [A](const Vector &cand, const GrassmannPoint &G,
                                    const Vector &) {
    return subspace_mean_cost(A, G, cand);
  };
  p.convex_surrogate.minimize = [mean](const GrassmannPoint &, const Vector &) {
    return mean;
  };

  // On the manifold f = ||R||^2 - ||G^T R||^2, whose ambient gradient is
  // -2 R R^T G.
  p.euclidean_grad_G = [A](const GrassmannPoint &G, const Vector &c) {
    const Matrix R = centered(A, c);
    return Matrix(-2.0 * R * (R.transpose() * G.basis()));
  };
  p.grad_c = [A](const GrassmannPoint &G, const Vector &c) {
    const Matrix R = centered(A, c);
    const Matrix &B = G.basis();
    const Vector s = R.rowwise().sum();
    return Vector(-2.0 * (s - B * (B.transpose() * s)));
  };
  return p;
}

} // namespace grassmm
