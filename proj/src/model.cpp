#include "model.hpp"

#include <cmath>

namespace lw::model {

namespace {

/// Contour map R(x) for ECS with scaling radius R0 on both half-axes.
cxd contour_point(double x, double R0, double theta) {
  if (std::abs(x) <= R0) return cxd(x, 0);
  const cxd rot = std::polar(1.0, theta);
  return x > 0 ? cxd(R0, 0) + rot * (x - R0) : cxd(-R0, 0) + rot * (x + R0);
}

}  // namespace

std::vector<cxd> fd_weights(cxd z0, const std::vector<cxd>& z, int order) {
  const int n = static_cast<int>(z.size());
  std::vector<std::vector<cxd>> c(n, std::vector<cxd>(order + 1, cxd(0, 0)));
  cxd c1 = 1.0, c4 = z[0] - z0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    cxd c2 = 1.0, c5 = c4;
    c4 = z[i] - z0;
    for (int j = 0; j < i; ++j) {
      const cxd c3 = z[i] - z[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<cxd> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

GridModel make_grid(double xmin, double xmax, int points, int fd_order,
                    const Potential1& v1, const Potential2& v2) {
  if (points < 3) throw ConfigError("make_grid: need at least 3 points");
  if (!(xmax > xmin)) throw ConfigError("make_grid: xmax must exceed xmin");
  if (fd_order != 2 && fd_order != 4)
    throw ConfigError("make_grid: fd_order must be 2 or 4");
  GridModel m;
  m.fd_order = fd_order;
  m.wall_left = xmin;
  m.wall_right = xmax;
  m.dx = (xmax - xmin) / (points + 1);
  m.points.resize(points);
  for (int i = 0; i < points; ++i) m.points[i] = xmin + (i + 1) * m.dx;
  m.V1 = RVec::Zero(points);
  m.V2 = RMat::Zero(points, points);
  m.v1_fn = v1;
  m.v2_fn = v2;
  if (v1)
    for (int i = 0; i < points; ++i) m.V1[i] = v1(cxd(m.points[i], 0)).real();
  if (v2)
    for (int i = 0; i < points; ++i)
      for (int j = 0; j < points; ++j)
        m.V2(i, j) = v2(cxd(m.points[i], 0), cxd(m.points[j], 0)).real();
  return m;
}

/// Assemble -1/(2m) d^2/dR^2 on a (possibly complex) contour. Stencil nodes
/// near a wall are folded back by the odd-image rule psi(wall+d) =
/// -psi(wall-d), which keeps the hard-wall operator consistent at the
/// boundary rows.
static Mat contour_kinetic(const GridModel& m, double R0, double theta) {
  const int M = m.size();
  const int w = m.fd_order / 2;
  // extended index -> contour node; grid index i lives at ext i
  auto ext_pos = [&](int j) -> cxd {
    double x = m.wall_left + (j + 1) * m.dx;
    return contour_point(x, R0, theta);
  };
  // extended index -> (column, amplitude sign); column -1 means zero value
  auto ext_src = [&](int j, int& col, double& sgn) {
    col = -1;
    sgn = 1.0;
    if (j >= 0 && j < M) {
      col = j;
      return;
    }
    if (j == -1 || j == M) return;  // wall nodes, value 0
    if (j < -1) {
      int mirror = -2 - j;  // odd image about the left wall (ext -1)
      if (mirror >= 0 && mirror < M) {
        col = mirror;
        sgn = -1.0;
      }
      return;
    }
    int mirror = 2 * M - j;  // odd image about the right wall (ext M)
    if (mirror >= 0 && mirror < M) {
      col = mirror;
      sgn = -1.0;
    }
  };
  Mat kin = Mat::Zero(M, M);
  std::vector<cxd> nodes(2 * w + 1);
  for (int i = 0; i < M; ++i) {
    for (int s = -w; s <= w; ++s) nodes[s + w] = ext_pos(i + s);
    auto wt = fd_weights(ext_pos(i), nodes, 2);
    for (int s = -w; s <= w; ++s) {
      int col;
      double sgn;
      ext_src(i + s, col, sgn);
      if (col >= 0) kin(i, col) += -0.5 / m.mass * sgn * wt[s + w];
    }
  }
  return kin;
}

RMat kinetic_matrix(const GridModel& m) {
  if (m.fd_order != 2 && m.fd_order != 4)
    throw ConfigError("kinetic_matrix: unsupported fd_order " +
                      std::to_string(m.fd_order));
  // no scaling: R0 beyond the grid
  Mat k = contour_kinetic(m, std::abs(m.wall_right) + std::abs(m.wall_left) + 1.0, 0.0);
  return k.real();
}

RVec cap_diagonal(const GridModel& m, const CapSpec& cap) {
  if (cap.eta < 0) throw ConfigError("cap_diagonal: eta must be nonnegative");
  if (cap.exponent < 2) throw ConfigError("cap_diagonal: exponent must be >= 2");
  const double xmax = m.points.cwiseAbs().maxCoeff();
  if (cap.onset < 0 || cap.onset >= xmax)
    throw ConfigError("cap_diagonal: onset " + std::to_string(cap.onset) +
                      " outside the grid");
  RVec g = RVec::Zero(m.size());
  for (int i = 0; i < m.size(); ++i) {
    const double r = std::abs(m.points[i]);
    if (r > cap.onset)
      g[i] = cap.eta * std::pow((r - cap.onset) / (xmax - cap.onset), cap.exponent);
  }
  return g;
}

EcsResult ecs_parts(const GridModel& m, const EcsSpec& spec) {
  const int M = m.size();
  if (spec.theta < 0 || spec.theta >= M_PI / 4)
    throw ConfigError("ecs_parts: theta must lie in [0, pi/4)");
  const double outer = std::max(std::abs(m.wall_left), std::abs(m.wall_right));
  if (spec.R0 <= 0 || spec.R0 >= outer)
    throw ConfigError("ecs_parts: R0 must lie strictly inside the grid");
  int beyond = 0;
  for (int i = 0; i < M; ++i)
    if (std::abs(m.points[i]) > spec.R0) ++beyond;
  if (beyond < 10)
    throw ConfigError("ecs_parts: fewer than 10 grid points beyond R0; "
                      "no room for the absorbing region");

  EcsResult out;
  out.h_full = contour_kinetic(m, spec.R0, spec.theta);
  if (m.v1_fn) {
    for (int i = 0; i < M; ++i)
      out.h_full(i, i) += m.v1_fn(contour_point(m.points[i], spec.R0, spec.theta));
  } else if (m.V1.size() == M) {
    // tabulated potential: only valid if it vanishes in the scaled region
    for (int i = 0; i < M; ++i) {
      if (std::abs(m.points[i]) > spec.R0 && m.V1[i] != 0.0)
        throw ConfigError("ecs_parts: tabulated V1 cannot be continued beyond R0");
      out.h_full(i, i) += m.V1[i];
    }
  }

  Mat h_h;
  hermitian_split(out.h_full, h_h, out.parts.h_I);
  out.parts.grid_representation = true;

  out.parts.V_I = Mat::Zero(M, M);
  out.v_scaled = Mat::Zero(M, M);
  if (m.v2_fn) {
    for (int i = 0; i < M; ++i) {
      const bool oi = std::abs(m.points[i]) > spec.R0;
      const cxd ri = contour_point(m.points[i], spec.R0, spec.theta);
      for (int j = 0; j < M; ++j) {
        const bool oj = std::abs(m.points[j]) > spec.R0;
        const cxd rj = contour_point(m.points[j], spec.R0, spec.theta);
        const cxd v = m.v2_fn(ri, rj);
        if (oi && oj) {
          out.parts.V_I(i, j) = -v.imag();
          out.v_scaled(i, j) = v;
        } else {
          out.v_scaled(i, j) = v.real();
        }
      }
    }
  } else if (m.V2.size() > 0 && m.V2.cwiseAbs().maxCoeff() > 0) {
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        if ((std::abs(m.points[i]) > spec.R0 || std::abs(m.points[j]) > spec.R0) &&
            m.V2(i, j) != 0.0)
          throw ConfigError("ecs_parts: tabulated V2 cannot be continued beyond R0");
        out.v_scaled(i, j) = m.V2(i, j);
      }
  }
  return out;
}

ModeOperators mode_operators(const GridModel& m, const AbsorberSpec& spec) {
  const int M = m.size();
  ModeOperators ops;
  if (const auto* cap = std::get_if<CapSpec>(&spec)) {
    ops.cap = cap_diagonal(m, *cap);
    Mat h = kinetic_matrix(m).cast<cxd>();
    h.diagonal() += m.V1.cast<cxd>();
    ops.h_I = ops.cap.cast<cxd>().asDiagonal();
    ops.h_eff = h - cxd(0, 1) * ops.h_I;
    ops.pair_eff = m.V2.cast<cxd>();
    ops.V_I = Mat::Zero(M, M);
  } else {
    const auto& ecs = std::get<EcsSpec>(spec);
    EcsResult r = ecs_parts(m, ecs);
    ops.h_eff = r.h_full;
    ops.h_I = r.parts.h_I;
    ops.V_I = r.parts.V_I;
    ops.pair_eff = r.v_scaled;
    ops.cap = RVec();
  }
  return ops;
}

SectorHamiltonians assemble_hamiltonian(const fock::FockBasis& basis,
                                        const GridModel& m,
                                        const AbsorberSpec& spec, int sector) {
  if (basis.num_modes != m.size())
    throw ConfigError("assemble_hamiltonian: basis mode count differs from grid size");
  ModeOperators ops = mode_operators(m, spec);
  SectorHamiltonians out;
  out.H = fock::one_body_operator(basis, ops.h_eff, sector);
  if (ops.pair_eff.cwiseAbs().maxCoeff() > 0)
    out.H += fock::two_body_operator(basis, fock::PairDiagonal{ops.pair_eff}, sector);
  out.Hah = fock::one_body_operator(basis, ops.h_I, sector);
  if (ops.V_I.cwiseAbs().maxCoeff() > 0)
    out.Hah += fock::two_body_operator(basis, fock::PairDiagonal{ops.V_I}, sector);
  return out;
}

}  // namespace lw::model
