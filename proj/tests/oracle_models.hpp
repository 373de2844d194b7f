#pragma once

// Small randomized Fock-space models with exactly stable decay channels:
// a random Hermitian one-body block on the "bound" modes, one absorbed mode
// carrying a diagonal CAP, no one-body coupling between the two groups, and
// a random two-body interaction mixing everything. The channel states then
// stay strictly bound while the two-particle eigenstates decay, so the
// rate-equation picture holds exactly and propagation is an independent
// oracle for the width formulas.

#include <random>

#include "fock.hpp"
#include "lindblad.hpp"
#include "model.hpp"
#include "spectral.hpp"

namespace oracle {

using namespace lw;

struct TinyModel {
  fock::FockBasis basis;
  Mat h;         // one-body coefficients (block: bound modes + absorbed mode)
  RVec cap;      // CAP diagonal, nonzero on the absorbed mode only
  fock::DenseTensor V;
  std::vector<Mat> H;    // effective sector Hamiltonians 0..2
  std::vector<Mat> Hah;  // anti-Hermitian parts
};

inline TinyModel make_tiny_model(unsigned seed, int modes = 4,
                                 int bound_modes = 3, double g = 0.6,
                                 double vstrength = 0.35) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  TinyModel tm;
  tm.basis = fock::build_basis(modes, 2);
  tm.h = Mat::Zero(modes, modes);
  for (int i = 0; i < bound_modes; ++i) {
    for (int j = i; j < bound_modes; ++j) {
      const cxd v = (i == j) ? cxd(-2.0 + u(rng), 0) : cxd(0.4 * u(rng), 0.4 * u(rng));
      tm.h(i, j) = v;
      tm.h(j, i) = std::conj(v);
    }
  }
  for (int i = bound_modes; i < modes; ++i) tm.h(i, i) = 1.0 + 0.5 * u(rng);

  tm.cap = RVec::Zero(modes);
  for (int i = bound_modes; i < modes; ++i) tm.cap[i] = g;

  tm.V.modes = modes;
  tm.V.v.assign(static_cast<std::size_t>(modes) * modes * modes * modes, cxd(0, 0));
  auto idx = [modes](int p, int q, int r, int s) {
    return ((static_cast<std::size_t>(p) * modes + q) * modes + r) * modes + s;
  };
  for (int p = 0; p < modes; ++p)
    for (int q = 0; q < modes; ++q)
      for (int r = 0; r < modes; ++r)
        for (int s = 0; s < modes; ++s)
          tm.V.v[idx(p, q, r, s)] = vstrength * u(rng);
  // impose V_{pq,rs} = V_{qp,sr} (pair exchange) and V_{pq,rs} = V_{rs,pq}
  // (Hermiticity, real tensor)
  for (int p = 0; p < modes; ++p)
    for (int q = 0; q < modes; ++q)
      for (int r = 0; r < modes; ++r)
        for (int s = 0; s < modes; ++s) {
          const cxd m = 0.25 * (tm.V.v[idx(p, q, r, s)] + tm.V.v[idx(q, p, s, r)] +
                                tm.V.v[idx(r, s, p, q)] + tm.V.v[idx(s, r, q, p)]);
          tm.V.v[idx(p, q, r, s)] = m;
          tm.V.v[idx(q, p, s, r)] = m;
          tm.V.v[idx(r, s, p, q)] = m;
          tm.V.v[idx(s, r, q, p)] = m;
        }

  const Mat h_eff = tm.h - cxd(0, 1) * Mat(tm.cap.cast<cxd>().asDiagonal());
  for (int n = 0; n <= 2; ++n) {
    Mat hn = fock::one_body_operator(tm.basis, h_eff, n);
    if (n == 2) hn += fock::two_body_operator(tm.basis, tm.V, n);
    tm.H.push_back(hn);
    tm.Hah.push_back(fock::one_body_operator(
        tm.basis, Mat(tm.cap.cast<cxd>().asDiagonal()), n));
  }
  return tm;
}

inline lindblad::SystemOperators tiny_system(const TinyModel& tm) {
  return lindblad::make_system(tm.basis, tm.H, tm.Hah,
                               Mat(tm.cap.cast<cxd>().asDiagonal()), Mat());
}

/// Channels of the tiny model: the exactly stable sector-1 eigenstates.
inline std::vector<spectral::ChannelState> tiny_channels(const TinyModel& tm) {
  spectral::ChannelOptions copts;
  copts.energy_max.reset();  // abstract model, no continuum threshold
  copts.tol_bound = 1e-10;
  copts.tol_capov = 1e-10;
  return spectral::channel_states(tm.H[1], tm.Hah[1], copts);
}

/// Fastest-decaying two-particle eigenstate, as resonance stand-in.
inline spectral::ResonanceState tiny_resonance(const TinyModel& tm) {
  auto es = spectral::diagonalize_sector(tm.H[2], "tiny sector 2");
  int pick = -1;
  double best = 0.0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const double eps_i = -es.values[i].imag();
    if (eps_i > best) {
      best = eps_i;
      pick = static_cast<int>(i);
    }
  }
  if (pick < 0) throw NumericalError("tiny model: no decaying eigenvalue");
  spectral::ResonanceState res;
  res.energy = es.values[pick];
  res.eps_I = best;
  res.vector = es.vectors.col(pick);
  res.sector = 2;
  return res;
}

inline std::vector<fock::SectorMap> annihilators_from(const fock::FockBasis& b,
                                                      int sector) {
  std::vector<fock::SectorMap> maps;
  for (int k = 0; k < b.num_modes; ++k)
    maps.push_back(fock::annihilator(b, k, sector));
  return maps;
}

}  // namespace oracle
