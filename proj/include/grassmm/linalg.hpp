#pragma once

/// Dense linear-algebra kernels used by the Grassmann geometry: a thin SVD
/// with a deterministic sign convention, Gram-Schmidt QR and seeded random
/// matrices. Everything here is a pure function of its inputs.

#include <Eigen/Dense>

#include <cstdint>

namespace grassmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Shared numerical tolerances. Tests and audits read these instead of
/// hard-coding their own copies.
struct Tolerances {
  double orthonormality = 1e-10;
  double reconstruction = 1e-9;
  double rank_cutoff = 1e-12;
  int svd_max_sweeps = 80;
};

inline constexpr Tolerances kDefaultTolerances{};

struct ThinSVD {
  Matrix U;  // m x k
  Vector S;  // k, descending, non-negative
  Matrix V;  // n x k
};

struct QRFactors {
  Matrix Q;       // m x k, orthonormal columns
  Matrix R_upper; // k x k, upper triangular, non-negative diagonal
};

/// Throws InvalidArgument if M is empty or holds a NaN/Inf entry.
void require_finite(const Matrix &M, const char *what);

/// Thin SVD by one-sided Jacobi rotations. Singular values are sorted in
/// descending order and every column of U has its largest-magnitude entry
/// (first index on ties) non-negative; V is flipped to match.
ThinSVD thin_svd(const Matrix &A, const Tolerances &tol = kDefaultTolerances);

/// Modified Gram-Schmidt with one re-orthogonalization pass. Throws
/// RankDeficientError naming the first column that is numerically dependent
/// on its predecessors.
QRFactors qr_orthonormalize(const Matrix &A,
                            const Tolerances &tol = kDefaultTolerances);

/// n x d matrix of i.i.d. standard normal entries, reproducible per seed.
Matrix random_gaussian(std::uint64_t seed, Eigen::Index n, Eigen::Index d);

/// Q factor of a seeded Gaussian n x d matrix.
Matrix random_orthonormal(std::uint64_t seed, Eigen::Index n, Eigen::Index d);

/// Independent seed for sub-stream `stream` of `base` (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// max |M^T M - I| over all entries.
double orthonormality_error(const Matrix &M);

} // namespace grassmm
