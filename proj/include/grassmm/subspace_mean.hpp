#pragma once

#include "grassmm/block_mm.hpp"

namespace grassmm {

/// Fits a D-dimensional subspace plus an offset to the columns of A (N x M):
///
///   f(G, c) = || (A - c 1^T) - G G^T (A - c 1^T) ||_F^2.
///
/// Both surrogates are the exact cost restricted to one block. The G update is
/// the top-D left singular subspace of A - c 1^T (the current G is kept when it
/// already attains the minimum); the c update is the row mean of A, which
/// minimizes the cost for every G.
BlockProblem builtin_subspace_plus_mean(const Matrix &A, Eigen::Index D);

/// f(G, c) for the problem above, without building the problem.
double subspace_mean_cost(const Matrix &A, const GrassmannPoint &G,
                          const Vector &c);

} // namespace grassmm
