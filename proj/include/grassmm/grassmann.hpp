#pragma once

/// Geometry of the Grassmann manifold Gr(N, D): points are represented by an
/// N x D matrix with orthonormal columns, and two representatives that differ
/// by a right D x D rotation denote the same subspace. Subspace equality is
/// therefore always tested through canonical_distance, never by comparing
/// matrices.

#include "grassmm/linalg.hpp"

#include <cstdint>

namespace grassmm {

class GrassmannPoint {
public:
  /// Wraps an already orthonormal basis. Throws InvalidArgument if
  /// |basis^T basis - I| exceeds `tol` or the shape violates 1 <= D < N.
  static GrassmannPoint from_orthonormal(Matrix basis, double tol = 1e-9);

  const Matrix &basis() const noexcept { return basis_; }
  Eigen::Index ambient_dim() const noexcept { return basis_.rows(); }
  Eigen::Index subspace_dim() const noexcept { return basis_.cols(); }

private:
  explicit GrassmannPoint(Matrix basis) : basis_(std::move(basis)) {}
  Matrix basis_;
};

/// A direction at a specific representative X, with X^T delta = 0.
class TangentVector {
public:
  TangentVector(GrassmannPoint base, Matrix delta);

  const GrassmannPoint &base() const noexcept { return base_; }
  const Matrix &delta() const noexcept { return delta_; }
  double norm() const { return delta_.norm(); }

private:
  GrassmannPoint base_;
  Matrix delta_;
};

/// D angles in [0, pi/2], ascending.
struct PrincipalAngles {
  Vector angles;

  double frobenius_norm() const { return angles.norm(); }
  double max() const { return angles.maxCoeff(); }
};

/// Representatives with X_a^T Y_a = diag(cos theta).
struct AlignedPair {
  GrassmannPoint X_a;
  GrassmannPoint Y_a;
  PrincipalAngles theta;
};

/// Geodesic t -> X_a cos(theta t) + Delta_a sin(theta t).
struct GeodesicSpec {
  GrassmannPoint X_a;
  TangentVector Delta_a;
  PrincipalAngles theta;
};

/// Angles below this are treated as zero when building aligned geodesics.
inline constexpr double kZeroAngle = 1e-8;

/// log_map refuses pairs whose smallest cosine is at or below this.
inline constexpr double kUniquenessCutoff = 1e-8;

GrassmannPoint make_point(const Matrix &M);

GrassmannPoint random_point(std::uint64_t seed, Eigen::Index n,
                            Eigen::Index d);

/// (I - X X^T) A.
TangentVector tangent_project(const GrassmannPoint &X, const Matrix &A);

/// Projection of an ambient (Euclidean) gradient onto the tangent space.
TangentVector riemannian_gradient(const GrassmannPoint &X,
                                  const Matrix &euclidean_grad);

PrincipalAngles principal_angles(const GrassmannPoint &X,
                                 const GrassmannPoint &Y);

AlignedPair align(const GrassmannPoint &X, const GrassmannPoint &Y);

double canonical_distance(const GrassmannPoint &X, const GrassmannPoint &Y);

/// Tangent H at X with exp_map(X, H, 1) = [Y]. Throws GeodesicNotUnique when
/// some principal angle is (numerically) pi/2.
TangentVector log_map(const GrassmannPoint &X, const GrassmannPoint &Y);

/// Gamma(t) = X V cos(S t) V^T + U sin(S t) V^T with H = U S V^T.
GrassmannPoint exp_map(const GrassmannPoint &X, const TangentVector &H,
                       double t);

GeodesicSpec build_aligned_spec(const GrassmannPoint &X,
                                const GrassmannPoint &Y);

GrassmannPoint aligned_geodesic_at(const GeodesicSpec &spec, double t);

/// Throws InvalidArgument if the spec's orthonormality or tangency invariants
/// are broken.
void validate(const GeodesicSpec &spec);

/// Same basis matrix up to `tol` (representative-level equality).
bool same_representative(const GrassmannPoint &X, const GrassmannPoint &Y,
                         double tol = 1e-12);

} // namespace grassmm
