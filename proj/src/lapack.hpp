#pragma once

#include "common.hpp"

namespace lw::lapack {

/// All eigenvalues of a general complex matrix (zgeev, eigenvalues only).
/// Throws NumericalError on non-convergence; `tag` names the offending
/// operator in the message.
Vec eigvals(const Mat& a, const std::string& tag = "");

/// Eigenvalues and unit-normalized right eigenvectors of a general complex
/// matrix (zgeev). Columns of the returned matrix pair with the values.
struct EigPairs {
  Vec values;
  Mat vectors;
};
EigPairs eig(const Mat& a, const std::string& tag = "");

/// Eigenvalues of a Hermitian matrix (zheevd), ascending.
RVec eigvalsh(const Mat& a, const std::string& tag = "");

/// Eigenvalues and orthonormal eigenvectors of a Hermitian matrix (zheevd).
struct EighPairs {
  RVec values;
  Mat vectors;
};
EighPairs eigh(const Mat& a, const std::string& tag = "");

/// Solve (a - shift I) x = b repeatedly to refine one eigenvector near
/// `shift` (inverse iteration on a prefactored LU). Returns a unit vector;
/// the matching eigenvalue estimate is v^dagger a v.
Vec inverse_iteration(const Mat& a, cxd shift, int iters = 3,
                      const std::string& tag = "");

}  // namespace lw::lapack
