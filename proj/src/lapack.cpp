#include "lapack.hpp"

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include <Eigen/LU>

namespace lw::lapack {

namespace {
lapack_complex_double* ptr(Mat& m) {
  return reinterpret_cast<lapack_complex_double*>(m.data());
}
lapack_complex_double* ptr(Vec& v) {
  return reinterpret_cast<lapack_complex_double*>(v.data());
}
[[noreturn]] void fail(const std::string& fn, int info, const std::string& tag) {
  throw NumericalError(fn + " failed with info=" + std::to_string(info) +
                       (tag.empty() ? "" : " (" + tag + ")"));
}
}  // namespace

Vec eigvals(const Mat& a, const std::string& tag) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Mat work = a;
  Vec w(n);
  lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, ptr(work), n,
                                  ptr(w), nullptr, 1, nullptr, 1);
  if (info != 0) fail("zgeev", info, tag);
  return w;
}

EigPairs eig(const Mat& a, const std::string& tag) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Mat work = a;
  EigPairs out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, ptr(work), n,
                                  ptr(out.values), nullptr, 1, ptr(out.vectors), n);
  if (info != 0) fail("zgeev", info, tag);
  for (lapack_int j = 0; j < n; ++j) out.vectors.col(j).normalize();
  return out;
}

RVec eigvalsh(const Mat& a, const std::string& tag) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Mat work = a;
  RVec w(n);
  lapack_int info =
      LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, ptr(work), n, w.data());
  if (info != 0) fail("zheevd", info, tag);
  return w;
}

EighPairs eigh(const Mat& a, const std::string& tag) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  EighPairs out;
  out.vectors = a;
  out.values.resize(n);
  lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                   ptr(out.vectors), n, out.values.data());
  if (info != 0) fail("zheevd", info, tag);
  return out;
}

Vec inverse_iteration(const Mat& a, cxd shift, int iters, const std::string& tag) {
  const Eigen::Index n = a.rows();
  Mat shifted = a;
  shifted.diagonal().array() -= shift;
  Eigen::PartialPivLU<Mat> lu(shifted);
  // deterministic start vector with nonzero overlap against anything
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = cxd(std::cos(0.7 * static_cast<double>(i + 1)),
               std::sin(1.3 * static_cast<double>(i + 1)));
  v.normalize();
  for (int it = 0; it < iters; ++it) {
    Vec w = lu.solve(v);
    double nrm = w.norm();
    if (!std::isfinite(nrm) || nrm == 0.0)
      fail("inverse_iteration", it, tag + ": singular solve");
    v = w / nrm;
  }
  // fix the global phase: largest-magnitude component real positive
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  cxd ph = v[imax] / std::abs(v[imax]);
  v /= ph;
  return v;
}

}  // namespace lw::lapack
