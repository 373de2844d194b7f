#pragma once

#include <map>
#include <memory>
#include <vector>

#include "common.hpp"
#include "fock.hpp"
#include "spectral.hpp"

namespace lw::lindblad {

/// Particle-number-block density matrix. Cross-sector coherences are
/// representationally impossible: the blocks are the only storage.
struct BlockDensity {
  std::map<int, Mat> blocks;  // sector -> dense Hermitian block
  double time = 0.0;

  double total_trace() const;
};

/// Matrix-free application of a sector Hamiltonian built from one-body
/// coefficients plus a pair-diagonal interaction; used for the top sector
/// where the dense matrix-vector product would dominate the runtime.
struct SectorApply {
  int dim = 0;
  Vec diagonal;  // one-body diagonal + pair-diagonal interaction
  struct Hop {
    int src;
    int dst;
    cxd amp;
  };
  std::vector<Hop> hops;

  void apply(const Vec& x, Vec& y) const;
  /// Gershgorin-style bound on the spectral radius, for step-size choice.
  double norm_bound() const;
};

SectorApply make_sector_apply(const fock::FockBasis& basis, int sector,
                              const Mat& h_modes, const Mat& pair_modes);

/// Operators defining the master equation on sectors 0..top.
struct SystemOperators {
  int top = 0;
  int modes = 0;
  std::vector<Mat> H;    // effective Hamiltonian per sector (H^h - i H^ah)
  std::vector<Mat> Hah;  // anti-Hermitian part per sector
  std::vector<std::vector<fock::SectorMap>> ann;  // ann[n][k]: sector n -> n-1
  Mat g1;  // one-body source coefficients (CAP diagonal or h_I), modes x modes
  Mat vI;  // pair-diagonal two-body source coefficients; 0x0 when absent
  std::shared_ptr<SectorApply> top_apply;  // optional matrix-free top sector
};

SystemOperators make_system(const fock::FockBasis& basis, std::vector<Mat> h_sectors,
                            std::vector<Mat> hah_sectors, const Mat& g1, const Mat& vI);

/// S[rho_{n+1}] = (2/hbar) sum_k Gamma(x_k) c_k rho c_k^dagger.
Mat source_cap(const Mat& rho_next, const RVec& cap,
               const std::vector<fock::SectorMap>& ann_next);

/// S1[rho_{n+1}] = (2/hbar) sum_kl g_{k,l} c_l rho c_k^dagger.
Mat source_one_body(const Mat& rho_next, const Mat& g1,
                    const std::vector<fock::SectorMap>& ann_next);

/// S2[rho_{n+2}] = (2/hbar) sum_{p<q} v^I(p,q) (c_q c_p) rho (c_q c_p)^dagger.
Mat source_two_body(const Mat& rho_next2, const Mat& vI,
                    const std::vector<fock::SectorMap>& ann_next2,
                    const std::vector<fock::SectorMap>& ann_next);

/// Full ECS source S1[rho_{n+1}] + S2[rho_{n+2}]; rho_next2 of size zero is
/// treated as an absent sector.
Mat source_ecs(const Mat& rho_next, const Mat& rho_next2, const Mat& h_I,
               const Mat& vI, const std::vector<fock::SectorMap>& ann_next,
               const std::vector<fock::SectorMap>& ann_next2);

/// d rho_n/dt = -i (H rho_n - rho_n H^dagger) + S[..] for every stored block.
std::map<int, Mat> rhs(const SystemOperators& ops, const std::map<int, Mat>& blocks);

struct Observables {
  Vec psi_res;  // projector for P_res (top sector)
  std::vector<spectral::ChannelState> channels;
  bool record_coefficients = false;  // store <phi_r|rho_{N-1}|phi_s> per sample
  bool record_entropy = true;
};

struct Trajectory {
  RVec times;
  RVec p_res;
  RMat p_channels;
  RMat sector_traces;  // one column per sector, ascending
  RVec trace;
  RVec purity;
  RVec entropy;
  RVec min_block_eig;
  std::vector<Mat> channel_coeffs;
  double max_trace_drift = 0.0;
  double min_eig_seen = 0.0;
};

struct PropagateOptions {
  double t_end = 1.0;
  double dt = 0.0;  // <= 0: use 0.1 / norm-bound heuristic
  int samples = 200;
  bool adaptive = false;
  double adaptive_tol = 1e-10;
  double tol_trace = 1e-6;  // abort threshold on |trace - 1|
};

/// Dense fixed-step (or step-doubling adaptive) 4th-order propagation of
/// all blocks. Aborts with NumericalError on trace drift or instability.
Trajectory propagate(const SystemOperators& ops, const BlockDensity& initial,
                     const Observables& obs, const PropagateOptions& opt);

/// Same dynamics for an initially pure top sector: the top block stays
/// rank-one, so its amplitude vector is propagated instead of the full
/// matrix. Lower sectors remain dense.
Trajectory propagate_pure_top(const SystemOperators& ops, const Vec& psi0,
                              const Observables& obs, const PropagateOptions& opt);

/// Classical rate equations integrated numerically (independent of the
/// closed-form solution): dP_res = -Gamma P_res, dP_p = +Gamma_p P_res.
struct RateCurves {
  RVec times;
  RVec p_res;
  RMat p_channels;
};
RateCurves rate_oracle(double gamma_total, const std::vector<double>& partials,
                       const RVec& times);

}  // namespace lw::lindblad
