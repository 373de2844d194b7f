#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lw {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

constexpr double kHbar = 1.0;  // code units, hbar = m = 1

/// Configuration / input errors (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A hard numerical failure: eigensolver breakdown, step instability,
/// trace drift beyond abort threshold (CLI exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A physics/consistency assertion failed (CLI exit code 1).
struct AssertionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Memory-budget violation when building bases or dense operators.
struct BudgetError : ConfigError {
  using ConfigError::ConfigError;
};

/// Tolerances used across modules. Defaults are the shipped values; the
/// experiment config may override any of them.
struct Tolerances {
  double herm = 1e-12;        // relative Hermiticity check
  double sym = 1e-12;         // two-body tensor symmetry
  double psd = 1e-10;         // relative PSD slack for gamma / h_I
  double match = 1e-12;       // dissipator reconstruction
  double bound = 1e-8;        // |Im eps| for a channel state
  double capov_rel = 1e-8;    // channel CAP-overlap ceiling, relative to |Hah| scale
  double orth = 1e-8;         // channel Gram deviation
  double stability = 1e-4;    // resonance scan: max |d eps| / |eps|
  double trace = 1e-6;        // propagation abort threshold on |trace-1|
  double positivity = 1e-8;   // min block eigenvalue floor
  double im_resonance = 1e-9; // Im eps < -tol*max(1,|eps|) to count as decaying
};

inline double rel_diff(double a, double b) {
  double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

/// Max elementwise deviation from Hermiticity, relative to the matrix scale.
inline double hermiticity_defect(const Mat& a) {
  double scale = std::max(1e-300, a.cwiseAbs().maxCoeff());
  return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

/// Split m = h - i*ah with h, ah Hermitian.
inline void hermitian_split(const Mat& m, Mat& h, Mat& ah) {
  h = 0.5 * (m + m.adjoint());
  ah = cxd(0, 0.5) * (m - m.adjoint());
}

}  // namespace lw
