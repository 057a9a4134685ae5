#include "grassmm/linalg.hpp"

#include "grassmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace grassmm {

namespace {

std::string shape(const Matrix &A) {
  return std::to_string(A.rows()) + "x" + std::to_string(A.cols());
}

// Completes the first `filled` orthonormal columns of Q to a full orthonormal
// set by projecting standard basis vectors, in index order.
void complete_orthonormal(Matrix &Q, Eigen::Index filled) {
  const Eigen::Index m = Q.rows();
  Eigen::Index next = filled;
  for (Eigen::Index e = 0; e < m && next < Q.cols(); ++e) {
    Vector v = Vector::Unit(m, e);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < next; ++j)
        v -= Q.col(j).dot(v) * Q.col(j);
    const double nrm = v.norm();
    if (nrm > 0.5) {
      Q.col(next++) = v / nrm;
    }
  }
}

// One-sided Jacobi on a tall (m >= n) matrix.
ThinSVD jacobi_tall(const Matrix &A, const Tolerances &tol) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  Matrix W = A;
  Matrix V = Matrix::Identity(n, n);
  const double eps = std::numeric_limits<double>::epsilon();
  // Columns below this norm are round-off; rotating them further only
  // drives them towards underflow.
  const double negligible = eps * A.norm();

  bool converged = (n == 1);
  for (int sweep = 0; sweep < tol.svd_max_sweeps && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = W.col(p).squaredNorm();
        const double beta = W.col(q).squaredNorm();
        const double gamma = W.col(p).dot(W.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta) ||
            std::sqrt(std::min(alpha, beta)) <= negligible)
          continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < m; ++i) {
          const double wp = W(i, p);
          const double wq = W(i, q);
          W(i, p) = c * wp - s * wq;
          W(i, q) = s * wp + c * wq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vp = V(i, p);
          const double vq = V(i, q);
          V(i, p) = c * vp - s * vq;
          V(i, q) = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged)
    throw NumericError("thin_svd: Jacobi sweeps did not converge for " +
                       shape(A) + " matrix");

  Vector norms(n);
  for (Eigen::Index j = 0; j < n; ++j)
    norms(j) = W.col(j).norm();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return norms(a) > norms(b);
                   });

  ThinSVD out{Matrix::Zero(m, n), Vector::Zero(n), Matrix::Zero(n, n)};
  Eigen::Index filled = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index j = order[static_cast<std::size_t>(k)];
    out.S(k) = norms(j);
    out.V.col(k) = V.col(j);
    // Zero and round-off columns get their U column from completion.
    if (norms(j) > negligible) {
      out.U.col(k) = W.col(j) / norms(j);
      ++filled;
    }
  }
  if (filled < n) {
    // Zero singular values sit at the tail; re-orthogonalize the completion
    // against the meaningful columns.
    complete_orthonormal(out.U, filled);
  }

  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index imax = 0;
    out.U.col(k).cwiseAbs().maxCoeff(&imax);
    if (out.U(imax, k) < 0.0) {
      out.U.col(k) = -out.U.col(k);
      out.V.col(k) = -out.V.col(k);
    }
  }
  return out;
}

} // namespace

void require_finite(const Matrix &M, const char *what) {
  if (M.rows() < 1 || M.cols() < 1)
    throw InvalidArgument(std::string(what) + ": empty matrix");
  if (!M.allFinite())
    throw InvalidArgument(std::string(what) + ": non-finite entry in " +
                          shape(M) + " matrix");
}

ThinSVD thin_svd(const Matrix &A, const Tolerances &tol) {
  require_finite(A, "thin_svd");
  if (A.rows() >= A.cols())
    return jacobi_tall(A, tol);

  // Wide input: decompose the transpose and swap the roles of U and V, then
  // re-apply the sign convention on the new U.
  ThinSVD t = jacobi_tall(A.transpose(), tol);
  ThinSVD out{std::move(t.V), std::move(t.S), std::move(t.U)};
  for (Eigen::Index k = 0; k < out.U.cols(); ++k) {
    Eigen::Index imax = 0;
    out.U.col(k).cwiseAbs().maxCoeff(&imax);
    if (out.U(imax, k) < 0.0) {
      out.U.col(k) = -out.U.col(k);
      out.V.col(k) = -out.V.col(k);
    }
  }
  return out;
}

QRFactors qr_orthonormalize(const Matrix &A, const Tolerances &tol) {
  require_finite(A, "qr_orthonormalize");
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (n > m)
    throw RankDeficientError(static_cast<std::size_t>(m),
                             "qr_orthonormalize: " + shape(A) +
                                 " matrix has more columns than rows");

  const double scale = A.colwise().norm().maxCoeff();
  QRFactors out{Matrix::Zero(m, n), Matrix::Zero(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector v = A.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double r = out.Q.col(i).dot(v);
        out.R_upper(i, j) += r;
        v -= r * out.Q.col(i);
      }
    }
    const double nrm = v.norm();
    if (!(nrm > tol.rank_cutoff * scale))
      throw RankDeficientError(
          static_cast<std::size_t>(j),
          "qr_orthonormalize: column " + std::to_string(j) + " of " +
              shape(A) + " matrix is linearly dependent on earlier columns");
    out.R_upper(j, j) = nrm;
    out.Q.col(j) = v / nrm;
  }
  return out;
}

Matrix random_gaussian(std::uint64_t seed, Eigen::Index n, Eigen::Index d) {
  if (n < 1 || d < 1)
    throw DimensionError("random_gaussian: dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(n, d);
  // Fill column by column so the stream order does not depend on Eigen's
  // storage order.
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      M(i, j) = normal(rng);
  return M;
}

Matrix random_orthonormal(std::uint64_t seed, Eigen::Index n, Eigen::Index d) {
  if (d > n)
    throw DimensionError("random_orthonormal: d=" + std::to_string(d) +
                         " exceeds n=" + std::to_string(n));
  return qr_orthonormalize(random_gaussian(seed, n, d)).Q;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double orthonormality_error(const Matrix &M) {
  return (M.transpose() * M - Matrix::Identity(M.cols(), M.cols()))
      .cwiseAbs()
      .maxCoeff();
}

} // namespace grassmm
