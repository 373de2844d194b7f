#include "fock.hpp"

#include <algorithm>
#include <bit>

#include "lapack.hpp"

namespace lw::fock {

namespace {

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

long FockBasis::index_of(int n, Word bits) const {
  if (n < 0 || n > max_particles) return -1;
  const auto& sec = sectors[n];
  auto it = std::lower_bound(sec.begin(), sec.end(), bits);
  if (it == sec.end() || *it != bits) return -1;
  return it - sec.begin();
}

std::uint64_t FockBasis::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 0x100000001b3ull;
    }
  };
  mix(static_cast<std::uint64_t>(num_modes));
  for (const auto& sec : sectors)
    for (auto s : sec) {
      mix(static_cast<std::uint64_t>(s));
      mix(static_cast<std::uint64_t>(s >> 64));
    }
  return h;
}

FockBasis build_basis(int num_modes, int max_particles, long sector_budget) {
  if (num_modes < 1 || num_modes > 127)
    throw ConfigError("build_basis: num_modes must be in [1, 127], got " +
                      std::to_string(num_modes));
  if (max_particles < 0 || max_particles > num_modes)
    throw ConfigError("build_basis: max_particles out of range [0, num_modes]");
  for (int n = 0; n <= max_particles; ++n) {
    long dim = binomial(num_modes, n);
    if (dim > sector_budget)
      throw BudgetError("build_basis: sector " + std::to_string(n) + " has dimension " +
                        std::to_string(dim) + ", exceeding the budget of " +
                        std::to_string(sector_budget));
  }
  FockBasis b;
  b.num_modes = num_modes;
  b.max_particles = max_particles;
  b.sectors.resize(max_particles + 1);
  for (int n = 0; n <= max_particles; ++n) {
    const long dim = binomial(num_modes, n);
    auto& sec = b.sectors[n];
    sec.reserve(dim);
    if (n == 0) {
      sec.push_back(Word{0});
      continue;
    }
    Word v = (Word{1} << n) - 1;  // lowest n-bit state; Gosper's hack ascends
    for (long i = 0; i < dim; ++i) {
      sec.push_back(v);
      const Word t = v | (v - 1);
      v = (t + 1) | (((~t & (t + 1)) - 1) >> (countr_zero(v) + 1));
    }
  }
  return b;
}

SectorMap annihilator(const FockBasis& basis, int mode, int sector) {
  if (mode < 0 || mode >= basis.num_modes)
    throw ConfigError("annihilator: mode " + std::to_string(mode) + " out of range");
  if (sector < 1 || sector > basis.max_particles)
    throw ConfigError("annihilator: sector " + std::to_string(sector) + " out of range");
  const auto& src = basis.sectors[sector];
  SectorMap m;
  m.mode = mode;
  m.sector_from = sector;
  m.rows = basis.sector_dim(sector - 1);
  m.cols = static_cast<int>(src.size());
  m.row_of_col.assign(m.cols, -1);
  m.sign_of_col.assign(m.cols, 0.0);
  const Word bit = Word{1} << mode;
  for (int c = 0; c < m.cols; ++c) {
    if (!(src[c] & bit)) continue;
    m.row_of_col[c] = basis.index_of(sector - 1, src[c] ^ bit);
    m.sign_of_col[c] = (popcount_below(src[c], mode) % 2 == 0) ? 1.0 : -1.0;
  }
  return m;
}

Mat SectorMap::dense() const {
  Mat d = Mat::Zero(rows, cols);
  for (int c = 0; c < cols; ++c)
    if (row_of_col[c] >= 0) d(row_of_col[c], c) = sign_of_col[c];
  return d;
}

Vec SectorMap::apply(const Vec& x) const {
  Vec y = Vec::Zero(rows);
  for (int c = 0; c < cols; ++c)
    if (row_of_col[c] >= 0) y[row_of_col[c]] += sign_of_col[c] * x[c];
  return y;
}

Vec SectorMap::apply_adjoint(const Vec& x) const {
  Vec y = Vec::Zero(cols);
  for (int c = 0; c < cols; ++c)
    if (row_of_col[c] >= 0) y[c] = sign_of_col[c] * x[row_of_col[c]];
  return y;
}

Mat SectorMap::congruence(const Mat& rho) const {
  Mat out = Mat::Zero(rows, rows);
  for (int c2 = 0; c2 < cols; ++c2) {
    if (row_of_col[c2] < 0) continue;
    for (int c1 = 0; c1 < cols; ++c1) {
      if (row_of_col[c1] < 0) continue;
      out(row_of_col[c1], row_of_col[c2]) +=
          sign_of_col[c1] * sign_of_col[c2] * rho(c1, c2);
    }
  }
  return out;
}

Mat one_body_operator(const FockBasis& basis, const Mat& h, int sector) {
  const int M = basis.num_modes;
  if (h.rows() != M || h.cols() != M)
    throw ConfigError("one_body_operator: coefficient matrix must be M x M");
  if (sector < 0 || sector > basis.max_particles)
    throw ConfigError("one_body_operator: sector out of range");
  const auto& states = basis.sectors[sector];
  const int dim = static_cast<int>(states.size());
  Mat op = Mat::Zero(dim, dim);
  for (int c = 0; c < dim; ++c) {
    const Word s = states[c];
    for (int l = 0; l < M; ++l) {
      const Word lbit = Word{1} << l;
      if (!(s & lbit)) continue;
      const double sgn_l = (popcount_below(s, l) % 2 == 0) ? 1.0 : -1.0;
      const Word mid = s ^ lbit;
      for (int k = 0; k < M; ++k) {
        if (h(k, l) == cxd(0, 0)) continue;
        const Word kbit = Word{1} << k;
        if (mid & kbit) continue;
        const double sgn_k = (popcount_below(mid, k) % 2 == 0) ? 1.0 : -1.0;
        const long r = basis.index_of(sector, mid | kbit);
        op(r, c) += sgn_l * sgn_k * h(k, l);
      }
    }
  }
  return op;
}

Vec pair_diagonal_values(const FockBasis& basis, const Mat& v, int sector) {
  const int M = basis.num_modes;
  if (v.rows() != M || v.cols() != M)
    throw ConfigError("pair_diagonal_values: coefficient matrix must be M x M");
  const auto& states = basis.sectors[sector];
  Vec d = Vec::Zero(states.size());
  for (std::size_t c = 0; c < states.size(); ++c) {
    Word s = states[c];
    cxd sum = 0;
    for (int p = 0; p < M; ++p) {
      if (!(s & (Word{1} << p))) continue;
      for (int q = p + 1; q < M; ++q)
        if (s & (Word{1} << q)) sum += v(p, q);
    }
    d[c] = sum;
  }
  return d;
}

Mat two_body_operator(const FockBasis& basis, const TwoBody& V, int sector,
                      double tol_sym) {
  const int M = basis.num_modes;
  if (sector < 0 || sector > basis.max_particles)
    throw ConfigError("two_body_operator: sector out of range");
  const int dim = basis.sector_dim(sector);
  if (sector < 2) return Mat::Zero(dim, dim);

  if (const auto* pd = std::get_if<PairDiagonal>(&V)) {
    if (pd->v.rows() != M || pd->v.cols() != M)
      throw ConfigError("two_body_operator: pair-diagonal matrix must be M x M");
    double defect = (pd->v - pd->v.transpose()).cwiseAbs().maxCoeff();
    double scale = std::max(1.0, pd->v.cwiseAbs().maxCoeff());
    if (defect > tol_sym * scale)
      throw AssertionError("two_body_operator: pair-diagonal coefficients not symmetric");
    return pair_diagonal_values(basis, pd->v, sector).asDiagonal();
  }

  const auto& t = std::get<DenseTensor>(V);
  if (t.modes != M)
    throw ConfigError("two_body_operator: tensor mode count mismatch");
  double scale = 1.0;
  for (const auto& x : t.v) scale = std::max(scale, std::abs(x));
  for (int p = 0; p < M; ++p)
    for (int q = 0; q < M; ++q)
      for (int r = 0; r < M; ++r)
        for (int s = 0; s < M; ++s)
          if (std::abs(t.at(p, q, r, s) - t.at(q, p, s, r)) > tol_sym * scale)
            throw AssertionError(
                "two_body_operator: tensor violates V_{pq,rs} = V_{qp,sr}");

  const auto& states = basis.sectors[sector];
  const int dim2 = static_cast<int>(states.size());
  Mat op = Mat::Zero(dim2, dim2);
  // (1/2) sum V_{pq,rs} c_p+ c_q+ c_s c_r applied column by column
  for (int c = 0; c < dim2; ++c) {
    const Word st = states[c];
    for (int r = 0; r < M; ++r) {
      const Word rbit = Word{1} << r;
      if (!(st & rbit)) continue;
      const double sgn_r = (popcount_below(st, r) % 2 == 0) ? 1.0 : -1.0;
      const Word st1 = st ^ rbit;
      for (int s = 0; s < M; ++s) {
        const Word sbit = Word{1} << s;
        if (!(st1 & sbit)) continue;
        const double sgn_s = (popcount_below(st1, s) % 2 == 0) ? 1.0 : -1.0;
        const Word st2 = st1 ^ sbit;
        for (int q = 0; q < M; ++q) {
          const Word qbit = Word{1} << q;
          if (st2 & qbit) continue;
          const double sgn_q = (popcount_below(st2, q) % 2 == 0) ? 1.0 : -1.0;
          const Word st3 = st2 | qbit;
          for (int p = 0; p < M; ++p) {
            const Word pbit = Word{1} << p;
            if (st3 & pbit) continue;
            const cxd coeff = t.at(p, q, r, s);
            if (coeff == cxd(0, 0)) continue;
            const double sgn_p = (popcount_below(st3, p) % 2 == 0) ? 1.0 : -1.0;
            const long row = basis.index_of(sector, st3 | pbit);
            op(row, c) += 0.5 * sgn_r * sgn_s * sgn_q * sgn_p * coeff;
          }
        }
      }
    }
  }
  return op;
}

void LindbladDissipator::validate(double tol_psd) const {
  double scale = std::max(1e-300, gamma.cwiseAbs().maxCoeff());
  if (hermiticity_defect(gamma) > 1e-12)
    throw AssertionError("LindbladDissipator: gamma is not Hermitian");
  RVec ev = lapack::eigvalsh(gamma);
  if (ev.minCoeff() < -tol_psd * scale)
    throw AssertionError("LindbladDissipator: gamma has eigenvalue " +
                         std::to_string(ev.minCoeff()) + " below the PSD tolerance");
}

double LindbladDissipator::reconstruction_defect(
    const FockBasis& basis, const std::vector<Mat>& h_ah_sectors) const {
  double worst = 0.0;
  for (std::size_t n = 0; n < h_ah_sectors.size(); ++n) {
    Mat built = one_body_operator(basis, gamma, static_cast<int>(n));
    const Mat& expect = h_ah_sectors[n];
    if (built.rows() == 0) continue;
    double scale = std::max(1.0, expect.cwiseAbs().maxCoeff());
    worst = std::max(worst, (built - expect).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

}  // namespace lw::fock
