#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "common.hpp"

namespace lw::fock {

/// Occupation bit-string; 128 bits cover desk-scale grids (M <= 127).
using Word = unsigned __int128;

inline int popcount(Word w) {
  return std::popcount(static_cast<std::uint64_t>(w)) +
         std::popcount(static_cast<std::uint64_t>(w >> 64));
}
inline int popcount_below(Word bits, int mode) {
  return popcount(bits & ((Word{1} << mode) - 1));
}
inline int countr_zero(Word w) {
  const auto lo = static_cast<std::uint64_t>(w);
  if (lo) return std::countr_zero(lo);
  return 64 + std::countr_zero(static_cast<std::uint64_t>(w >> 64));
}

/// Occupation-number basis for spinless fermions on `num_modes` modes,
/// partitioned into particle-number sectors. Bit k of a state word is the
/// occupation of mode k; states within a sector are sorted ascending by
/// integer value, which fixes a reproducible ordering everywhere.
struct FockBasis {
  int num_modes = 0;
  int max_particles = 0;
  std::vector<std::vector<Word>> sectors;  // sectors[n] = states with n bits set

  int sector_dim(int n) const {
    return (n < 0 || n > max_particles) ? 0 : static_cast<int>(sectors[n].size());
  }
  /// Position of a state word within its sector, or -1 if absent.
  long index_of(int n, Word bits) const;
  /// FNV-1a over (num_modes, sector contents); identifies the basis in
  /// serialized operators.
  std::uint64_t hash() const;
};

/// Default ceiling on a single sector dimension (dense desk-scale storage).
inline constexpr long kDefaultSectorBudget = 200000;

FockBasis build_basis(int num_modes, int max_particles,
                      long sector_budget = kDefaultSectorBudget);

/// Matrix of one annihilator c_k from sector n to sector n-1. Each column
/// holds at most one entry, +1 or -1: sign (-1)^(number of occupied modes
/// below k). Stored structurally; dense() materializes on demand.
struct SectorMap {
  int mode = 0;
  int sector_from = 0;  // acts on sector_from, lands in sector_from-1
  int rows = 0;
  int cols = 0;
  std::vector<long> row_of_col;   // -1 where the column vanishes
  std::vector<double> sign_of_col;

  Mat dense() const;
  /// y = c_k x  (x lives in sector_from)
  Vec apply(const Vec& x) const;
  /// y = c_k^dagger x  (x lives in sector_from-1)
  Vec apply_adjoint(const Vec& x) const;
  /// c_k rho c_k^dagger for a dense block rho of sector_from.
  Mat congruence(const Mat& rho) const;
};

SectorMap annihilator(const FockBasis& basis, int mode, int sector);

/// Two-body coefficients. The grid representation is pair-diagonal,
/// V_{pq,rs} = v(p,q) delta_pr delta_qs with v symmetric (operator
/// sum_{p<q} v(p,q) n_p n_q); the orbital representation is a dense
/// tensor with the symmetry V_{pq,rs} = V_{qp,sr}.
struct PairDiagonal {
  Mat v;  // symmetric; complex entries allowed (ECS-scaled interaction)
};
struct DenseTensor {
  int modes = 0;
  std::vector<cxd> v;  // V_{pq,rs} at ((p*M+q)*M+r)*M+s
  cxd at(int p, int q, int r, int s) const {
    return v[((static_cast<std::size_t>(p) * modes + q) * modes + r) * modes + s];
  }
};
using TwoBody = std::variant<PairDiagonal, DenseTensor>;

/// sum_{kl} h_{k,l} c_k^dagger c_l restricted to one sector.
Mat one_body_operator(const FockBasis& basis, const Mat& h, int sector);

/// (1/2) sum_{pqrs} V_{pq,rs} c_p^dagger c_q^dagger c_s c_r restricted to
/// one sector; identically zero for sectors with fewer than two particles.
Mat two_body_operator(const FockBasis& basis, const TwoBody& V, int sector,
                      double tol_sym = 1e-12);

/// Diagonal of the pair-diagonal two-body operator (the full sector matrix
/// is diagonal in the occupation basis).
Vec pair_diagonal_values(const FockBasis& basis, const Mat& v, int sector);

/// Lindblad dissipator with jump operators fixed to the annihilators:
/// sum_{kl} gamma_{k,l} c_k^dagger c_l must reproduce the one-body
/// anti-Hermitian Hamiltonian part on every sector.
struct LindbladDissipator {
  Mat gamma;

  /// Throws AssertionError unless gamma is Hermitian and PSD within tol.
  void validate(double tol_psd) const;
  /// Max elementwise deviation of sum_{kl} gamma_{k,l} c_k^dagger c_l,
  /// assembled per sector, from the given H^ah sector matrices.
  double reconstruction_defect(const FockBasis& basis,
                               const std::vector<Mat>& h_ah_sectors) const;
};

}  // namespace lw::fock
