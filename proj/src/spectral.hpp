#pragma once

#include <optional>
#include <vector>

#include "common.hpp"

namespace lw::spectral {

/// All eigenpairs of a dense sector Hamiltonian, ordered by (Re, Im).
/// Right eigenvectors, unit norm, phase fixed (largest component real
/// positive). Residuals ||Hv - ev|| are checked against tol_residual*||H||.
struct EigenSystem {
  Vec values;
  Mat vectors;
};
EigenSystem diagonalize_sector(const Mat& h, const std::string& tag = "",
                               double tol_residual = 1e-8);

/// Eigenvalues only, ordered by (Re, Im); for scan points where vectors
/// are not needed.
Vec sector_eigenvalues(const Mat& h, const std::string& tag = "");

/// One absorber-parameter scan entry.
struct ScanPoint {
  double parameter = 0.0;
  Vec eigenvalues;
};

struct StabilityRecord {
  std::string parameter_name;
  std::vector<double> parameter_values;
  std::vector<cxd> energies;     // trajectory of the selected eigenvalue
  std::vector<double> deltas;    // |energy_{i+1} - energy_i|
  double max_delta = 0.0;
  double stability_tol = 0.0;    // the absolute threshold that was applied
};

struct ResonanceState {
  cxd energy;        // at the middle scan point
  double eps_I = 0;  // -Im energy
  Vec vector;        // empty until attach_vector
  int sector = 0;
  StabilityRecord stability;
};

struct ResonanceOptions {
  double stability_rel = 1e-4;   // max |d eps| <= stability_rel * |eps|
  double im_floor_rel = 1e-9;    // Im eps < -im_floor_rel * max(1, |eps|)
  std::string parameter_name = "parameter";
};

/// Track every decaying eigenvalue across the scan by nearest-neighbor
/// matching and return the trajectory with the smallest maximal step. The
/// returned state carries the middle-point eigenvalue and no vector yet.
/// Throws NumericalError (no stable resonance / ambiguous matching) with
/// the best trajectory found described in the message.
ResonanceState identify_resonance(const std::vector<ScanPoint>& scans,
                                  const ResonanceOptions& opts = {});

/// Compute the eigenvector for a previously identified resonance from the
/// dense middle-point Hamiltonian (inverse iteration), verify the residual,
/// and store it on the state.
void attach_vector(ResonanceState& res, const Mat& h_middle,
                   double tol_residual = 1e-8);

struct ChannelState {
  int index = 0;
  double energy = 0.0;
  Vec vector;
  double cap_overlap = 0.0;  // <phi| H^ah |phi>
};

struct ChannelOptions {
  double tol_bound = 1e-8;       // |Im eps| ceiling
  double tol_capov = 1e-8;       // absolute ceiling on <phi|H^ah|phi>
  double tol_orth = 1e-8;        // Gram deviation triggering re-orthonormalization
  std::optional<double> energy_max = 0.0;  // keep states below the continuum
};

/// Bound eigenstates of the (N-1)-sector Hamiltonian: real energy within
/// tol_bound, absorber overlap below tol_capov, energy below energy_max.
/// Orthonormality is restored by symmetric (Loewdin) re-orthonormalization
/// when the Gram defect lies in (tol_orth, 10 tol_orth]; a larger defect is
/// a hard error. Throws AssertionError when no channel survives.
std::vector<ChannelState> channel_states(const Mat& h_sector, const Mat& hah_sector,
                                         const ChannelOptions& opts = {});

}  // namespace lw::spectral
