#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lapack.hpp"
#include "model.hpp"
#include "spectral.hpp"

using namespace lw;
using namespace lw::spectral;

TEST_CASE("Hermitian input gives real eigenvalues and small residuals") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 24;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cxd(u(rng), u(rng));
  a = 0.5 * (a + a.adjoint()).eval();
  auto es = diagonalize_sector(a, "hermitian test");
  const double scale = a.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    CHECK(std::abs(es.values[i].imag()) <= 1e-10 * scale);
    CHECK((a * es.vectors.col(i) - es.values[i] * es.vectors.col(i)).norm() <=
          1e-10 * scale);
  }
  // deterministic ordering
  for (Eigen::Index i = 1; i < es.values.size(); ++i)
    CHECK(es.values[i].real() >= es.values[i - 1].real());
}

TEST_CASE("closed-form 2x2 eigenvalues") {
  Mat a(2, 2);
  a << cxd(0, 0), cxd(1, 0), cxd(0, 0), cxd(0, -1);
  auto es = diagonalize_sector(a);
  CHECK(std::abs(es.values[0] - cxd(0, -1)) <= 1e-14);
  CHECK(std::abs(es.values[1] - cxd(0, 0)) <= 1e-14);
}

TEST_CASE("resonance identification picks the stationary decaying eigenvalue") {
  // synthetic scan: one constant eigenvalue among movers
  std::vector<ScanPoint> scan;
  for (int s = 0; s < 3; ++s) {
    Vec ev(4);
    ev[0] = cxd(0.5 + 0.1 * s, -0.3 - 0.05 * s);
    ev[1] = cxd(1.0, -0.05);  // the resonance
    ev[2] = cxd(2.0 - 0.1 * s, -0.8 + 0.1 * s);
    ev[3] = cxd(3.0, 0.0);    // bound state, Im = 0
    scan.push_back({0.5 * (s + 1), ev});
  }
  auto res = identify_resonance(scan);
  CHECK(res.energy == cxd(1.0, -0.05));
  CHECK(res.eps_I == doctest::Approx(0.05));
  CHECK(res.stability.max_delta == 0.0);
  CHECK(res.stability.parameter_values.size() == 3);
}

TEST_CASE("no decaying eigenvalue raises the no-stable-resonance error") {
  std::vector<ScanPoint> scan;
  for (int s = 0; s < 3; ++s) {
    Vec ev(3);
    ev[0] = cxd(0.5, 0);
    ev[1] = cxd(1.5, 0);
    ev[2] = cxd(2.5, 0);
    scan.push_back({1.0 + s, ev});
  }
  CHECK_THROWS_WITH_AS(identify_resonance(scan), doctest::Contains("no stable"),
                       NumericalError);
}

TEST_CASE("unstable trajectories are rejected with diagnostics") {
  std::vector<ScanPoint> scan;
  for (int s = 0; s < 3; ++s) {
    Vec ev(2);
    ev[0] = cxd(1.0 + 0.2 * s, -0.3);  // drifts far beyond tolerance
    ev[1] = cxd(4.0, -0.9 + 0.3 * s);
    scan.push_back({1.0 + s, ev});
  }
  CHECK_THROWS_WITH_AS(identify_resonance(scan), doctest::Contains("max |d eps|"),
                       NumericalError);
}

TEST_CASE("scan needs at least three points from one sector") {
  std::vector<ScanPoint> scan(2);
  scan[0].eigenvalues = Vec::Zero(2);
  scan[1].eigenvalues = Vec::Zero(2);
  CHECK_THROWS_AS(identify_resonance(scan), ConfigError);
}

TEST_CASE("attached eigenvector satisfies the eigenpair residual bound") {
  // non-normal matrix with one known decaying eigenvalue
  const int n = 30;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  Mat p(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i, j) = (i == j ? 1.0 : u(rng) / (1 + std::abs(i - j)));
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = cxd(0.3 * i, 0.0);
  const cxd target(1.0, -0.05);
  d[10] = target;
  Mat a = p * d.asDiagonal() * p.inverse();

  std::vector<ScanPoint> scan;
  for (int s = 0; s < 3; ++s) {
    Vec ev = sector_eigenvalues(a);
    scan.push_back({1.0 + s, ev});  // eigenvalues identical across the scan
  }
  auto res = identify_resonance(scan);
  CHECK(std::abs(res.energy - target) <= 1e-10);
  attach_vector(res, a);
  CHECK(res.vector.size() == n);
  CHECK(std::abs(res.vector.norm() - 1.0) <= 1e-12);
  const double resid = (a * res.vector - res.energy * res.vector).norm();
  CHECK(resid <= 1e-8 * a.cwiseAbs().maxCoeff());
  // phase convention: largest component real positive
  Eigen::Index imax = 0;
  res.vector.cwiseAbs().maxCoeff(&imax);
  CHECK(res.vector[imax].imag() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(res.vector[imax].real() > 0.0);
}

TEST_CASE("channel states in the Hermitian limit are the bound spectrum") {
  auto well = [](cxd x) { return -5.0 * std::exp(-(x * x) / 4.0); };
  auto m = model::make_grid(0.0, 20.0, 60, 4, well, nullptr);
  auto ops0 = model::mode_operators(m, model::CapSpec{10.0, 0.0, 2});
  auto chans = channel_states(ops0.h_eff, ops0.h_I);
  CHECK(chans.size() >= 2);
  // all returned energies negative, matching the Hermitian bound spectrum
  RVec herm = lapack::eigvalsh(ops0.h_eff);
  int bound_count = 0;
  while (bound_count < herm.size() && herm[bound_count] < 0) ++bound_count;
  CHECK(static_cast<int>(chans.size()) == bound_count);
  for (std::size_t p = 0; p < chans.size(); ++p) {
    CHECK(chans[p].energy < 0);
    CHECK(chans[p].energy == doctest::Approx(herm[p]).epsilon(1e-10));
    CHECK(chans[p].cap_overlap == 0.0);
  }
}

TEST_CASE("channels under a live CAP match the Hermitian bound energies") {
  auto well = [](cxd x) { return -5.0 * std::exp(-(x * x) / 4.0); };
  auto m = model::make_grid(0.0, 24.0, 72, 4, well, nullptr);
  auto ops0 = model::mode_operators(m, model::CapSpec{12.0, 0.0, 2});
  auto ops1 = model::mode_operators(m, model::CapSpec{12.0, 1.0, 2});
  ChannelOptions copts;
  copts.tol_capov = 1e-8;
  auto c0 = channel_states(ops0.h_eff, ops0.h_I);
  auto c1 = channel_states(ops1.h_eff, ops1.h_I, copts);
  REQUIRE(c1.size() >= 2);
  for (std::size_t p = 0; p < std::min(c0.size(), c1.size()); ++p)
    CHECK(std::abs(c1[p].energy - c0[p].energy) <= 1e-6);
  // orthonormality after any re-orthonormalization
  for (std::size_t p = 0; p < c1.size(); ++p)
    for (std::size_t q = 0; q < c1.size(); ++q) {
      const cxd g = c1[p].vector.dot(c1[q].vector);
      CHECK(std::abs(g - (p == q ? cxd(1, 0) : cxd(0, 0))) <= 1e-8);
    }
}

TEST_CASE("cap-overlap filter excludes contaminated states") {
  // synthetic: Hermitian block diag(-2, -1) plus one state sitting on the CAP
  Mat h = Mat::Zero(3, 3);
  h(0, 0) = -2.0;
  h(1, 1) = -1.0;
  h(2, 2) = cxd(-0.5, -1e-9);  // formally bound but CAP-contaminated
  Mat hah = Mat::Zero(3, 3);
  hah(2, 2) = 1e-3;  // overlap far above the ceiling
  ChannelOptions opts;
  opts.tol_capov = 1e-8;
  auto chans = channel_states(h, hah, opts);
  CHECK(chans.size() == 2);
  for (const auto& c : chans) CHECK(c.cap_overlap <= 1e-8);
}
