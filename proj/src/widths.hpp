#pragma once

#include <string>
#include <vector>

#include "common.hpp"
#include "fock.hpp"
#include "spectral.hpp"

namespace lw::widths {

/// Total width Gamma = 2 eps_I; with hbar = 1 the rate equals the width.
double total_width(const spectral::ResonanceState& res);

struct PartialWidth {
  int channel = 0;
  double energy = 0.0;
  double gamma = 0.0;
  double branching = 0.0;  // gamma / gamma_total
};

struct WidthReport {
  std::string method;  // "cap-grid" | "cap-orbital" | "ecs"
  cxd eps_res;
  double gamma_total = 0.0;
  std::vector<PartialWidth> partials;
  double sum_partials = 0.0;
  double sum_residual = 0.0;     // gamma_total - sum_partials, never hidden
  Mat kappa;                     // kappa_rs over channels, kappa_pp = Gamma_p
  double max_im_residue = 0.0;   // |Im| left over by the orbital/ECS formulas
  std::vector<std::string> warnings;
};

/// Amplitudes A(k, p) = <phi_p | c_k | psi_res>; the annihilators map the
/// resonance sector down to the channel sector.
Mat channel_amplitudes(const Vec& psi_res,
                       const std::vector<spectral::ChannelState>& channels,
                       const std::vector<fock::SectorMap>& annihilators);

/// Gamma_p = 2 sum_k Gamma(x_k) |<phi_p| c_k |psi_res>|^2 (grid CAP;
/// manifestly nonnegative).
WidthReport partial_width_cap_grid(const spectral::ResonanceState& res,
                                   const std::vector<spectral::ChannelState>& channels,
                                   const RVec& cap,
                                   const std::vector<fock::SectorMap>& annihilators);

/// Gamma_p = 2 sum_kl <chi_k|Gamma|chi_l> <phi_p|c_l|psi><psi|c_k^+|phi_p>
/// for a general Hermitian PSD coefficient matrix.
WidthReport partial_width_cap_orbital(const spectral::ResonanceState& res,
                                      const std::vector<spectral::ChannelState>& channels,
                                      const Mat& gamma_orb,
                                      const std::vector<fock::SectorMap>& annihilators,
                                      double tol_psd = 1e-10);

/// Same contraction with the ECS one-body coefficients h_I; nonnegativity
/// is not structural, so negative partials beyond -1e-6*Gamma are reported
/// as convergence warnings.
WidthReport partial_width_ecs(const spectral::ResonanceState& res,
                              const std::vector<spectral::ChannelState>& channels,
                              const Mat& h_I,
                              const std::vector<fock::SectorMap>& annihilators);

/// kappa_rs = 2 sum_kl G_kl <phi_r|c_l|psi> <psi|c_k^+|phi_s>.
Mat kappa_matrix(const spectral::ResonanceState& res,
                 const std::vector<spectral::ChannelState>& channels,
                 const Mat& coefficients,
                 const std::vector<fock::SectorMap>& annihilators);

/// The same contraction from precomputed amplitudes A(k, p) =
/// <phi_p|c_k|psi>; lets callers work in a rotated mode basis, where the
/// annihilators are linear combinations of the structural maps.
WidthReport partial_widths_from_amplitudes(const spectral::ResonanceState& res,
                                           const std::vector<spectral::ChannelState>& channels,
                                           const Mat& coefficients,
                                           const Mat& amplitudes,
                                           const std::string& method);

/// P_res = e^{-Gamma t}, P_p = (Gamma_p/Gamma)(1 - e^{-Gamma t}).
struct PopulationCurves {
  RVec times;
  RVec p_res;
  RMat p_channels;  // one column per channel
};
PopulationCurves population_closed_form(const WidthReport& report, const RVec& times);

/// Off-diagonal channel coefficients p_rs(t) = kappa_rs/(Gamma - i d_eps) *
/// (e^{-i d_eps t} - e^{-Gamma t}).
Mat coefficients_closed_form(const Mat& kappa, const RVec& channel_energies,
                             double gamma_total, double t);

/// Purity curve: e^{-2 Gamma t} plus the channel coherence terms; the
/// asymptote sum_rs |kappa_rs|^2/(Gamma^2 + d_eps^2) is returned separately.
struct PurityCurve {
  RVec times;
  RVec value;
  double asymptote = 0.0;
};
PurityCurve purity_closed_form(const Mat& kappa, const RVec& channel_energies,
                               double gamma_total, const RVec& times);

}  // namespace lw::widths
