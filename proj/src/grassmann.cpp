#include "grassmm/grassmann.hpp"

#include "grassmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace grassmm {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr std::uint64_t kCompletionSeed = 0x6a09e667f3bcc908ULL;

std::string dims(const GrassmannPoint &X) {
  return "Gr(" + std::to_string(X.ambient_dim()) + "," +
         std::to_string(X.subspace_dim()) + ")";
}

void require_same_manifold(const GrassmannPoint &X, const GrassmannPoint &Y,
                           const char *op) {
  if (X.ambient_dim() != Y.ambient_dim() ||
      X.subspace_dim() != Y.subspace_dim())
    throw DimensionError(std::string(op) + ": points live on " + dims(X) +
                         " and " + dims(Y));
}

void require_shape(const GrassmannPoint &X, const Matrix &A, const char *op) {
  if (A.rows() != X.ambient_dim() || A.cols() != X.subspace_dim())
    throw DimensionError(std::string(op) + ": expected " +
                         std::to_string(X.ambient_dim()) + "x" +
                         std::to_string(X.subspace_dim()) + " matrix, got " +
                         std::to_string(A.rows()) + "x" +
                         std::to_string(A.cols()));
}

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

// Strict lexicographic order on basis entries, used to evaluate symmetric
// quantities with a fixed argument order.
bool basis_less(const Matrix &A, const Matrix &B) {
  return std::lexicographical_compare(A.data(), A.data() + A.size(), B.data(),
                                      B.data() + B.size());
}

// Removes the components of v along the columns of B (twice, for accuracy).
void orthogonalize_against(Vector &v, const Matrix &B, Eigen::Index cols) {
  for (int pass = 0; pass < 2; ++pass)
    for (Eigen::Index j = 0; j < cols; ++j)
      v -= B.col(j).dot(v) * B.col(j);
}

} // namespace

GrassmannPoint GrassmannPoint::from_orthonormal(Matrix basis, double tol) {
  require_finite(basis, "GrassmannPoint");
  if (basis.cols() < 1 || basis.cols() >= basis.rows())
    throw DimensionError("GrassmannPoint: need 1 <= D < N, got N=" +
                         std::to_string(basis.rows()) +
                         " D=" + std::to_string(basis.cols()));
  const double err = orthonormality_error(basis);
  if (!(err <= tol))
    throw InvalidArgument("GrassmannPoint: basis is not orthonormal (error " +
                          std::to_string(err) + ")");
  return GrassmannPoint(std::move(basis));
}

TangentVector::TangentVector(GrassmannPoint base, Matrix delta)
    : base_(std::move(base)), delta_(std::move(delta)) {
  require_shape(base_, delta_, "TangentVector");
  require_finite(delta_, "TangentVector");
  const double leak =
      (base_.basis().transpose() * delta_).cwiseAbs().maxCoeff();
  if (!(leak <= 1e-9 * std::max(1.0, delta_.norm())))
    throw InvalidArgument("TangentVector: X^T delta = " +
                          std::to_string(leak) + " is not zero");
}

GrassmannPoint make_point(const Matrix &M) {
  if (M.cols() >= M.rows())
    throw DimensionError("make_point: need D < N, got " +
                         std::to_string(M.rows()) + "x" +
                         std::to_string(M.cols()));
  return GrassmannPoint::from_orthonormal(qr_orthonormalize(M).Q);
}

GrassmannPoint random_point(std::uint64_t seed, Eigen::Index n,
                            Eigen::Index d) {
  if (d >= n)
    throw DimensionError("random_point: need d < n, got n=" +
                         std::to_string(n) + " d=" + std::to_string(d));
  return make_point(random_gaussian(seed, n, d));
}

TangentVector tangent_project(const GrassmannPoint &X, const Matrix &A) {
  require_shape(X, A, "tangent_project");
  const Matrix &B = X.basis();
  Matrix delta = A - B * (B.transpose() * A);
  return TangentVector(X, std::move(delta));
}

TangentVector riemannian_gradient(const GrassmannPoint &X,
                                  const Matrix &euclidean_grad) {
  return tangent_project(X, euclidean_grad);
}

PrincipalAngles principal_angles(const GrassmannPoint &X,
                                 const GrassmannPoint &Y) {
  require_same_manifold(X, Y, "principal_angles");
  if (X.basis() == Y.basis())
    return PrincipalAngles{Vector::Zero(X.subspace_dim())};
  // Angles are symmetric in (X, Y); fixing the order makes them bitwise so.
  const bool swap = basis_less(Y.basis(), X.basis());
  const Matrix &A = swap ? Y.basis() : X.basis();
  const Matrix &B = swap ? X.basis() : Y.basis();
  const Matrix C = A.transpose() * B;
  const Vector cosines = thin_svd(C).S; // descending -> angles ascending
  const Vector sines = thin_svd(B - A * C).S; // descending -> angles descending

  // acos is ill-conditioned near 0 and asin near pi/2; take each angle from
  // whichever side is accurate.
  const Eigen::Index d = cosines.size();
  Vector angles(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double c = cosines(i);
    if (c >= std::numbers::sqrt2 / 2.0)
      angles(i) = std::asin(clamp_unit(sines(d - 1 - i)));
    else
      angles(i) = std::acos(clamp_unit(c));
  }
  std::sort(angles.begin(), angles.end());
  return PrincipalAngles{std::move(angles)};
}

double canonical_distance(const GrassmannPoint &X, const GrassmannPoint &Y) {
  return principal_angles(X, Y).frobenius_norm();
}

AlignedPair align(const GrassmannPoint &X, const GrassmannPoint &Y) {
  require_same_manifold(X, Y, "align");
  const ThinSVD svd = thin_svd(X.basis().transpose() * Y.basis());
  return AlignedPair{
      GrassmannPoint::from_orthonormal(X.basis() * svd.U),
      GrassmannPoint::from_orthonormal(Y.basis() * svd.V),
      principal_angles(X, Y)};
}

TangentVector log_map(const GrassmannPoint &X, const GrassmannPoint &Y) {
  require_same_manifold(X, Y, "log_map");
  const Matrix &A = X.basis();
  const Matrix &B = Y.basis();
  const Matrix C = A.transpose() * B;
  const ThinSVD csvd = thin_svd(C);
  const double smallest = csvd.S(csvd.S.size() - 1);
  if (!(smallest > kUniquenessCutoff))
    throw GeodesicNotUnique(
        "log_map: a principal angle reaches pi/2 (smallest cosine " +
        std::to_string(smallest) + "); the geodesic is not unique");

  // L = (I - AA^T) B C^{-1}, with C^{-1} = V diag(1/s) U^T.
  const Matrix Cinv = csvd.V * csvd.S.cwiseInverse().asDiagonal() *
                      csvd.U.transpose();
  Matrix L = (B - A * C) * Cinv;
  const ThinSVD lsvd = thin_svd(L);
  const Vector theta = lsvd.S.unaryExpr([](double s) { return std::atan(s); });
  Matrix H = lsvd.U * theta.asDiagonal() * lsvd.V.transpose();
  // Strip the rounding-level component along X.
  H -= A * (A.transpose() * H);
  return TangentVector(X, std::move(H));
}

GrassmannPoint exp_map(const GrassmannPoint &X, const TangentVector &H,
                       double t) {
  if (!same_representative(X, H.base()))
    throw InvalidArgument("exp_map: tangent vector is based at a different "
                          "representative");
  if (!std::isfinite(t))
    throw InvalidArgument("exp_map: non-finite t");
  const ThinSVD svd = thin_svd(H.delta());
  if (svd.S(0) > kHalfPi + 1e-9)
    throw InvalidArgument("exp_map: tangent norm " + std::to_string(svd.S(0)) +
                          " exceeds pi/2");
  const Vector st = svd.S * t;
  const Vector c = st.array().cos();
  const Vector s = st.array().sin();
  Matrix G = X.basis() * svd.V * c.asDiagonal() * svd.V.transpose() +
             svd.U * s.asDiagonal() * svd.V.transpose();
  return GrassmannPoint::from_orthonormal(std::move(G));
}

GeodesicSpec build_aligned_spec(const GrassmannPoint &X,
                                const GrassmannPoint &Y) {
  require_same_manifold(X, Y, "build_aligned_spec");
  const ThinSVD svd = thin_svd(X.basis().transpose() * Y.basis());
  const Matrix Xa = X.basis() * svd.U;
  const Matrix Ya = Y.basis() * svd.V;
  const Eigen::Index n = Xa.rows();
  const Eigen::Index d = Xa.cols();

  // Column d of the tangent part of Y_a has norm sin(theta_d) and points
  // along Delta_a e_d.
  const Matrix M = Ya - Xa * (Xa.transpose() * Ya);
  Vector sines(d);
  Vector theta(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    sines(j) = M.col(j).norm();
    theta(j) = std::atan2(sines(j), Xa.col(j).dot(Ya.col(j)));
  }
  for (Eigen::Index j = 1; j < d; ++j)
    theta(j) = std::max(theta(j), theta(j - 1));

  // Orthonormalize well-conditioned columns first (largest sine), then fill
  // the zero-angle columns from a fixed-seed Gaussian projected onto the
  // complement of span(X_a) and the columns chosen so far.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return sines(a) > sines(b);
                   });

  Matrix basis(n, 2 * d); // X_a followed by accepted Delta columns
  basis.leftCols(d) = Xa;
  Eigen::Index accepted = d;
  Matrix Delta = Matrix::Zero(n, d);
  std::uint64_t draw = 0;
  for (const Eigen::Index j : order) {
    Vector v;
    bool have = false;
    if (theta(j) > kZeroAngle) {
      v = M.col(j) / sines(j);
      orthogonalize_against(v, basis, accepted);
      const double nrm = v.norm();
      if (nrm > 0.5) {
        v /= nrm;
        have = true;
      }
    }
    for (int attempt = 0; !have && attempt < 8 && accepted < n; ++attempt) {
      v = random_gaussian(kCompletionSeed + draw++, n, 1).col(0);
      orthogonalize_against(v, basis, accepted);
      const double nrm = v.norm();
      if (nrm > 1e-6) {
        v /= nrm;
        have = true;
      }
    }
    // When N < 2D the complement is too small and the remaining zero-angle
    // columns stay zero; they are multiplied by sin(0) anyway.
    if (!have)
      continue;
    Delta.col(j) = v;
    basis.col(accepted++) = v;
  }

  GrassmannPoint Xa_point = GrassmannPoint::from_orthonormal(Xa);
  TangentVector Delta_a(Xa_point, std::move(Delta));
  GeodesicSpec spec{Xa_point, std::move(Delta_a),
                    PrincipalAngles{std::move(theta)}};
  return spec;
}

void validate(const GeodesicSpec &spec) {
  const Matrix &Xa = spec.X_a.basis();
  const Matrix &Delta = spec.Delta_a.delta();
  const Vector &theta = spec.theta.angles;
  if (Delta.rows() != Xa.rows() || Delta.cols() != Xa.cols() ||
      theta.size() != Xa.cols())
    throw DimensionError("GeodesicSpec: inconsistent shapes");
  if (!same_representative(spec.X_a, spec.Delta_a.base()))
    throw InvalidArgument("GeodesicSpec: Delta_a is not based at X_a");
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (!(theta(j) >= 0.0 && theta(j) <= kHalfPi + 1e-12))
      throw InvalidArgument("GeodesicSpec: angle out of [0, pi/2]");
    if (j > 0 && theta(j) < theta(j - 1))
      throw InvalidArgument("GeodesicSpec: angles not ascending");
  }
  const Matrix gram = Delta.transpose() * Delta;
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.cols(); ++j) {
      double expected = (i == j) ? 1.0 : 0.0;
      // A zero column is allowed only for a zero angle (no room in the
      // complement of span(X_a)).
      if (i == j && gram(i, i) == 0.0 && theta(i) <= kZeroAngle)
        expected = 0.0;
      if (std::abs(gram(i, j) - expected) > 1e-8)
        throw InvalidArgument("GeodesicSpec: Delta_a is not orthonormal");
    }
  }
  if ((Xa.transpose() * Delta).cwiseAbs().maxCoeff() > 1e-9)
    throw InvalidArgument("GeodesicSpec: X_a^T Delta_a is not zero");
}

GrassmannPoint aligned_geodesic_at(const GeodesicSpec &spec, double t) {
  validate(spec);
  if (!std::isfinite(t))
    throw InvalidArgument("aligned_geodesic_at: non-finite t");
  const Vector st = spec.theta.angles * t;
  const Vector c = st.array().cos();
  const Vector s = st.array().sin();
  Matrix G = spec.X_a.basis() * c.asDiagonal() +
             spec.Delta_a.delta() * s.asDiagonal();
  return GrassmannPoint::from_orthonormal(std::move(G));
}

bool same_representative(const GrassmannPoint &X, const GrassmannPoint &Y,
                         double tol) {
  if (X.ambient_dim() != Y.ambient_dim() ||
      X.subspace_dim() != Y.subspace_dim())
    return false;
  return (X.basis() - Y.basis()).cwiseAbs().maxCoeff() <= tol;
}

} // namespace grassmm
