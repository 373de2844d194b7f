#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracle_models.hpp"
#include "widths.hpp"

using namespace lw;
using namespace lw::widths;

namespace {

spectral::ResonanceState fake_resonance(cxd energy, const Vec& v) {
  spectral::ResonanceState r;
  r.energy = energy;
  r.eps_I = -energy.imag();
  r.vector = v;
  return r;
}

Mat random_unitary(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cxd(g(rng), g(rng));
  Eigen::HouseholderQR<Mat> qr(a);
  return qr.householderQ();
}

}  // namespace

TEST_CASE("total width definition") {
  Vec v = Vec::Ones(1);
  CHECK(total_width(fake_resonance(cxd(1.0, -0.005), v)) == doctest::Approx(0.01));
  CHECK(total_width(fake_resonance(cxd(2.0, 0.0), v)) == 0.0);
}

TEST_CASE("zero CAP gives zero partial widths") {
  auto tm = oracle::make_tiny_model(1);
  auto res = oracle::tiny_resonance(tm);
  auto chans = oracle::tiny_channels(tm);
  auto ann = oracle::annihilators_from(tm.basis, 2);
  auto rep = partial_width_cap_grid(res, chans, RVec::Zero(4), ann);
  for (const auto& p : rep.partials) CHECK(p.gamma == 0.0);
}

TEST_CASE("grid partials are nonnegative and obey the exact sum rule") {
  for (unsigned seed : {2u, 3u, 4u}) {
    auto tm = oracle::make_tiny_model(seed);
    auto res = oracle::tiny_resonance(tm);
    auto chans = oracle::tiny_channels(tm);
    REQUIRE(chans.size() == 3);
    auto ann = oracle::annihilators_from(tm.basis, 2);
    auto rep = partial_width_cap_grid(res, chans, tm.cap, ann);
    CHECK(rep.gamma_total > 0.0);
    for (const auto& p : rep.partials) CHECK(p.gamma >= -1e-12);
    // every annihilated amplitude lands inside the channel span, so the
    // residual is pure roundoff for this construction
    CHECK(std::abs(rep.sum_residual) <= 1e-12 * rep.gamma_total);
  }
}

TEST_CASE("diagonal orbital coefficients reproduce the grid formula") {
  auto tm = oracle::make_tiny_model(5);
  auto res = oracle::tiny_resonance(tm);
  auto chans = oracle::tiny_channels(tm);
  auto ann = oracle::annihilators_from(tm.basis, 2);
  auto grid = partial_width_cap_grid(res, chans, tm.cap, ann);
  auto orb = partial_width_cap_orbital(res, chans,
                                       Mat(tm.cap.cast<cxd>().asDiagonal()), ann);
  for (std::size_t p = 0; p < grid.partials.size(); ++p)
    CHECK(std::abs(grid.partials[p].gamma - orb.partials[p].gamma) <= 1e-12);
  CHECK(orb.max_im_residue <= 1e-12 * orb.gamma_total);

  auto zeros = partial_width_cap_orbital(res, chans, Mat::Zero(4, 4), ann);
  for (const auto& p : zeros.partials) CHECK(p.gamma == 0.0);
}

TEST_CASE("orbital formula is invariant under unitary mode rotations") {
  auto tm = oracle::make_tiny_model(6);
  auto res = oracle::tiny_resonance(tm);
  auto chans = oracle::tiny_channels(tm);
  auto ann = oracle::annihilators_from(tm.basis, 2);
  const Mat g = Mat(tm.cap.cast<cxd>().asDiagonal());
  auto ref = partial_width_cap_orbital(res, chans, g, ann);
  const Mat a = channel_amplitudes(res.vector, chans, ann);
  for (unsigned seed : {11u, 12u, 13u}) {
    const Mat u = random_unitary(4, seed);
    auto rot = partial_widths_from_amplitudes(res, chans, u.adjoint() * g * u,
                                              u.adjoint() * a, "cap-orbital");
    for (std::size_t p = 0; p < ref.partials.size(); ++p)
      CHECK(std::abs(ref.partials[p].gamma - rot.partials[p].gamma) <=
            1e-10 * ref.gamma_total);
    CHECK(std::abs(ref.sum_partials - rot.sum_partials) <= 1e-10 * ref.gamma_total);
  }
}

TEST_CASE("non-Hermitian or indefinite orbital coefficients are rejected") {
  auto tm = oracle::make_tiny_model(7);
  auto res = oracle::tiny_resonance(tm);
  auto chans = oracle::tiny_channels(tm);
  auto ann = oracle::annihilators_from(tm.basis, 2);
  Mat bad = Mat::Zero(4, 4);
  bad(0, 1) = 1.0;  // not Hermitian
  CHECK_THROWS_AS(partial_width_cap_orbital(res, chans, bad, ann), AssertionError);
  Mat indef = -Mat::Identity(4, 4);
  CHECK_THROWS_AS(partial_width_cap_orbital(res, chans, indef, ann), AssertionError);
}

TEST_CASE("kappa is Hermitian with the partial widths on the diagonal") {
  auto tm = oracle::make_tiny_model(8);
  auto res = oracle::tiny_resonance(tm);
  auto chans = oracle::tiny_channels(tm);
  auto ann = oracle::annihilators_from(tm.basis, 2);
  auto rep = partial_width_cap_grid(res, chans, tm.cap, ann);
  const Mat k = kappa_matrix(res, chans, Mat(tm.cap.cast<cxd>().asDiagonal()), ann);
  CHECK(hermiticity_defect(k) <= 1e-12);
  for (std::size_t p = 0; p < rep.partials.size(); ++p)
    CHECK(std::abs(k(p, p).real() - rep.partials[p].gamma) <=
          1e-10 * rep.gamma_total);
}

TEST_CASE("ECS partials vanish when theta = 0") {
  auto tm = oracle::make_tiny_model(9);
  auto res = oracle::tiny_resonance(tm);
  auto chans = oracle::tiny_channels(tm);
  auto ann = oracle::annihilators_from(tm.basis, 2);
  auto rep = partial_width_ecs(res, chans, Mat::Zero(4, 4), ann);
  for (const auto& p : rep.partials) CHECK(p.gamma == 0.0);
  CHECK(rep.method == "ecs");
}

TEST_CASE("population closed form") {
  WidthReport rep;
  rep.gamma_total = 0.25;
  rep.partials = {{0, -1.0, 0.15, 0.6}, {1, -0.5, 0.1, 0.4}};
  RVec times(3);
  times << 0.0, std::log(2.0) / 0.25, 40.0;
  auto c = population_closed_form(rep, times);
  CHECK(c.p_res[0] == 1.0);
  CHECK(c.p_channels.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(c.p_res[1] == doctest::Approx(0.5));
  CHECK(c.p_channels(2, 0) == doctest::Approx(0.6).epsilon(1e-4));
  // unit total when the partials sum to the width
  for (int i = 0; i < 3; ++i)
    CHECK(c.p_res[i] + c.p_channels.row(i).sum() == doctest::Approx(1.0));
}

TEST_CASE("single-channel purity asymptotes to one") {
  Mat kappa(1, 1);
  kappa(0, 0) = 0.3;  // kappa_11 = Gamma
  RVec e(1);
  e << -1.7;
  RVec times(3);
  times << 0.0, 5.0, 400.0;
  auto c = purity_closed_form(kappa, e, 0.3, times);
  CHECK(c.asymptote == doctest::Approx(1.0));
  CHECK(c.value[0] == doctest::Approx(1.0));
  CHECK(c.value[2] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("purity closed form starts at one and respects the bound") {
  auto tm = oracle::make_tiny_model(10);
  auto res = oracle::tiny_resonance(tm);
  auto chans = oracle::tiny_channels(tm);
  auto ann = oracle::annihilators_from(tm.basis, 2);
  auto rep = partial_width_cap_grid(res, chans, tm.cap, ann);
  RVec e(chans.size());
  for (std::size_t p = 0; p < chans.size(); ++p) e[p] = chans[p].energy;
  RVec times = RVec::LinSpaced(60, 0.0, 30.0 / rep.gamma_total);
  auto c = purity_closed_form(rep.kappa, e, rep.gamma_total, times);
  CHECK(c.value[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (Eigen::Index i = 0; i < times.size(); ++i)
    CHECK(c.value[i] <= 1.0 + 1e-10);
  CHECK(c.asymptote <= 1.0 + 1e-10);
  CHECK(std::abs(c.value[times.size() - 1] - c.asymptote) <= 1e-8);
}
