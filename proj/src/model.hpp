#pragma once

#include <functional>
#include <optional>
#include <variant>

#include "common.hpp"
#include "fock.hpp"

namespace lw::model {

/// Analytic one-body potential, evaluable at complex coordinates so that
/// exterior complex scaling can continue it off the real axis.
using Potential1 = std::function<cxd(cxd)>;
/// Analytic pair interaction v(x, x').
using Potential2 = std::function<cxd(cxd, cxd)>;

/// 1D grid between two hard walls. Interior points x_i = xmin + (i+1)*dx,
/// i = 0..M-1; the walls sit at xmin and xmin + (M+1)*dx. Code units
/// hbar = m = 1.
struct GridModel {
  RVec points;
  double dx = 0.0;
  double mass = 1.0;
  int fd_order = 4;  // 2 or 4
  double wall_left = 0.0;
  double wall_right = 0.0;
  RVec V1;   // V1(x_i) on the grid
  RMat V2;   // v(x_i, x_j), symmetric
  Potential1 v1_fn;  // null for tabulated potentials (CAP-only models)
  Potential2 v2_fn;

  int size() const { return static_cast<int>(points.size()); }
};

GridModel make_grid(double xmin, double xmax, int points, int fd_order,
                    const Potential1& v1, const Potential2& v2);

/// Monomial complex absorbing potential: Gamma(x) = eta * ((|x| - onset) /
/// (|x|_max - onset))^exponent beyond the onset, zero inside.
struct CapSpec {
  double onset = 0.0;
  double eta = 0.0;   // >= 0
  int exponent = 2;   // >= 2
};

/// Exterior complex scaling: coordinate rotated by theta beyond R0.
struct EcsSpec {
  double R0 = 0.0;
  double theta = 0.0;  // in (0, pi/4); theta = 0 degenerates to no scaling
};

using AbsorberSpec = std::variant<CapSpec, EcsSpec>;

/// -1/(2m) d^2/dx^2 with Dirichlet walls (odd-image ghost points), order 2
/// or 4. Real symmetric.
RMat kinetic_matrix(const GridModel& m);

/// CAP values on the grid; zero where |x| <= onset.
RVec cap_diagonal(const GridModel& m, const CapSpec& cap);

/// Anti-Hermitian coefficients produced by an absorber, H^ah = one-body(h_I)
/// + two-body(V_I). For a CAP, h_I = diag(Gamma) and V_I = 0. For ECS the
/// one-body part comes from the Hermitian split of the contour operator
/// (complex Hermitian in a stencil-wide band at the cusp, real symmetric
/// elsewhere) and V_I(x_i, x_j) = -Im v(R(x_i), R(x_j)) where both points
/// lie beyond R0.
struct AntiHermitianParts {
  Mat h_I;
  Mat V_I;  // pair-diagonal coefficients; zero matrix when absent
  bool grid_representation = true;
};

struct EcsResult {
  Mat h_full;                // contour kinetic + V1(R(x)), complex
  AntiHermitianParts parts;
  Mat v_scaled;              // pair coefficients v(R(x_i), R(x_j)), complex
                             // symmetric, mixed interior/exterior pairs kept
                             // only through their real part
};

EcsResult ecs_parts(const GridModel& m, const EcsSpec& spec);

/// Full and anti-Hermitian sector operators: H = H^h - i H^ah.
struct SectorHamiltonians {
  Mat H;
  Mat Hah;
};

SectorHamiltonians assemble_hamiltonian(const fock::FockBasis& basis,
                                        const GridModel& m,
                                        const AbsorberSpec& spec, int sector);

/// One-body mode matrices backing assemble_hamiltonian, exposed for
/// matrix-free propagation and the width formulas.
struct ModeOperators {
  Mat h_eff;      // complex one-body coefficients incl. -i*CAP or contour
  Mat pair_eff;   // complex pair-diagonal interaction coefficients
  Mat h_I;        // one-body anti-Hermitian coefficients
  Mat V_I;        // pair-diagonal anti-Hermitian coefficients
  RVec cap;       // CAP diagonal (empty for ECS)
};

ModeOperators mode_operators(const GridModel& m, const AbsorberSpec& spec);

/// Finite-difference weights for the m-th derivative at z0 given stencil
/// nodes z (Fornberg's recurrence, valid for complex nodes).
std::vector<cxd> fd_weights(cxd z0, const std::vector<cxd>& z, int order);

}  // namespace lw::model
