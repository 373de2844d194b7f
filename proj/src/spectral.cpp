#include "spectral.hpp"

#include <algorithm>
#include <numeric>

#include "lapack.hpp"

namespace lw::spectral {

namespace {

std::vector<int> sorted_order(const Vec& w) {
  std::vector<int> idx(w.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (w[a].real() != w[b].real()) return w[a].real() < w[b].real();
    return w[a].imag() < w[b].imag();
  });
  return idx;
}

void fix_phase(Vec& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const cxd a = v[imax];
  if (std::abs(a) > 0) v /= a / std::abs(a);
}

}  // namespace

Vec sector_eigenvalues(const Mat& h, const std::string& tag) {
  Vec w = lapack::eigvals(h, tag);
  auto idx = sorted_order(w);
  Vec out(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) out[i] = w[idx[i]];
  return out;
}

EigenSystem diagonalize_sector(const Mat& h, const std::string& tag,
                               double tol_residual) {
  auto pairs = lapack::eig(h, tag);
  auto idx = sorted_order(pairs.values);
  EigenSystem out;
  out.values.resize(pairs.values.size());
  out.vectors.resize(pairs.vectors.rows(), pairs.vectors.cols());
  for (Eigen::Index i = 0; i < pairs.values.size(); ++i) {
    out.values[i] = pairs.values[idx[i]];
    out.vectors.col(i) = pairs.vectors.col(idx[i]);
    Vec col = out.vectors.col(i);
    fix_phase(col);
    out.vectors.col(i) = col;
  }
  const double hnorm = std::max(1e-300, h.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    double res = (h * out.vectors.col(i) - out.values[i] * out.vectors.col(i)).norm();
    if (res > tol_residual * hnorm)
      throw NumericalError("diagonalize_sector: eigenpair residual " +
                           std::to_string(res) + " exceeds tolerance" +
                           (tag.empty() ? "" : " (" + tag + ")"));
  }
  return out;
}

ResonanceState identify_resonance(const std::vector<ScanPoint>& scans,
                                  const ResonanceOptions& opts) {
  if (scans.size() < 3)
    throw ConfigError("identify_resonance: need at least 3 scan points");
  const Eigen::Index dim = scans.front().eigenvalues.size();
  for (const auto& s : scans)
    if (s.eigenvalues.size() != dim)
      throw ConfigError("identify_resonance: scan points from different sectors");

  // candidate seeds: decaying eigenvalues of the first scan point
  struct Trajectory {
    std::vector<cxd> energies;
    double max_delta = 0.0;
    bool ambiguous = false;
  };
  std::vector<Trajectory> trajectories;
  const Vec& first = scans.front().eigenvalues;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const cxd e0 = first[i];
    if (e0.imag() >= -opts.im_floor_rel * std::max(1.0, std::abs(e0))) continue;
    Trajectory t;
    t.energies.push_back(e0);
    for (std::size_t s = 1; s < scans.size(); ++s) {
      const Vec& set = scans[s].eigenvalues;
      const cxd prev = t.energies.back();
      Eigen::Index best = 0;
      double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
      for (Eigen::Index j = 0; j < set.size(); ++j) {
        double d = std::abs(set[j] - prev);
        if (d < d1) {
          d2 = d1;
          d1 = d;
          best = j;
        } else if (d < d2) {
          d2 = d;
        }
      }
      // collision check: a second candidate within twice the admitted step
      const double tol_abs = opts.stability_rel * std::abs(prev);
      if (d1 <= tol_abs && d2 <= 2.0 * tol_abs) t.ambiguous = true;
      t.energies.push_back(set[best]);
      t.max_delta = std::max(t.max_delta, d1);
    }
    trajectories.push_back(std::move(t));
  }
  if (trajectories.empty())
    throw NumericalError(
        "identify_resonance: no stable resonance (no eigenvalue with Im < 0)");

  auto best_it = std::min_element(
      trajectories.begin(), trajectories.end(),
      [](const Trajectory& a, const Trajectory& b) { return a.max_delta < b.max_delta; });

  const std::size_t mid = scans.size() / 2;
  const cxd e_mid = best_it->energies[mid];
  const double tol_abs = opts.stability_rel * std::abs(e_mid);
  if (best_it->ambiguous)
    throw NumericalError(
        "identify_resonance: ambiguous trajectory matching near eps = (" +
        std::to_string(e_mid.real()) + ", " + std::to_string(e_mid.imag()) + ")");
  if (best_it->max_delta > tol_abs)
    throw NumericalError(
        "identify_resonance: no stable resonance; best trajectory ends at eps = (" +
        std::to_string(e_mid.real()) + ", " + std::to_string(e_mid.imag()) +
        ") with max |d eps| = " + std::to_string(best_it->max_delta) +
        " > " + std::to_string(tol_abs));

  ResonanceState res;
  res.energy = e_mid;
  res.eps_I = -e_mid.imag();
  res.stability.parameter_name = opts.parameter_name;
  for (const auto& s : scans) res.stability.parameter_values.push_back(s.parameter);
  res.stability.energies = best_it->energies;
  for (std::size_t i = 0; i + 1 < best_it->energies.size(); ++i)
    res.stability.deltas.push_back(
        std::abs(best_it->energies[i + 1] - best_it->energies[i]));
  res.stability.max_delta = best_it->max_delta;
  res.stability.stability_tol = tol_abs;
  return res;
}

void attach_vector(ResonanceState& res, const Mat& h_middle, double tol_residual) {
  Vec v = lapack::inverse_iteration(h_middle, res.energy, 3, "resonance vector");
  const cxd rayleigh = v.dot(h_middle * v);  // v^dagger H v, v unit
  const double hnorm = std::max(1e-300, h_middle.cwiseAbs().maxCoeff());
  const double resid = (h_middle * v - rayleigh * v).norm();
  if (resid > tol_residual * hnorm)
    throw NumericalError("attach_vector: residual " + std::to_string(resid) +
                         " exceeds tolerance; eigenvalue may be defective");
  if (std::abs(rayleigh - res.energy) > 1e-6 * std::max(1.0, std::abs(res.energy)))
    throw NumericalError("attach_vector: inverse iteration drifted to eps = (" +
                         std::to_string(rayleigh.real()) + ", " +
                         std::to_string(rayleigh.imag()) + ")");
  res.energy = rayleigh;
  res.eps_I = -rayleigh.imag();
  res.vector = v;
}

std::vector<ChannelState> channel_states(const Mat& h_sector, const Mat& hah_sector,
                                         const ChannelOptions& opts) {
  EigenSystem es = diagonalize_sector(h_sector, "channel sector");
  std::vector<ChannelState> channels;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const cxd e = es.values[i];
    if (std::abs(e.imag()) > opts.tol_bound) continue;
    if (opts.energy_max && e.real() >= *opts.energy_max) continue;
    const Vec v = es.vectors.col(i);
    const double capov = std::real(v.dot(hah_sector * v));
    if (capov > opts.tol_capov) continue;
    ChannelState c;
    c.energy = e.real();
    c.vector = v;
    c.cap_overlap = capov;
    channels.push_back(std::move(c));
  }
  if (channels.empty())
    throw AssertionError(
        "channel_states: no bound final states pass the filters; "
        "the model supports no decay channels");

  std::sort(channels.begin(), channels.end(),
            [](const ChannelState& a, const ChannelState& b) { return a.energy < b.energy; });
  for (std::size_t i = 0; i < channels.size(); ++i)
    channels[i].index = static_cast<int>(i);

  // Gram defect and, when moderate, symmetric re-orthonormalization
  const int nc = static_cast<int>(channels.size());
  Mat g(nc, nc);
  for (int p = 0; p < nc; ++p)
    for (int q = 0; q < nc; ++q) g(p, q) = channels[p].vector.dot(channels[q].vector);
  const double defect = (g - Mat::Identity(nc, nc)).cwiseAbs().maxCoeff();
  if (defect > 10.0 * opts.tol_orth)
    throw AssertionError("channel_states: channel Gram defect " +
                         std::to_string(defect) + " too large to repair");
  if (defect > opts.tol_orth) {
    auto gd = lapack::eigh(g, "channel Gram");
    Mat ginvsqrt = gd.vectors *
                   gd.values.cwiseSqrt().cwiseInverse().asDiagonal() *
                   gd.vectors.adjoint();
    Mat vs(channels.front().vector.size(), nc);
    for (int p = 0; p < nc; ++p) vs.col(p) = channels[p].vector;
    vs = vs * ginvsqrt;
    for (int p = 0; p < nc; ++p) {
      Vec col = vs.col(p);
      fix_phase(col);
      channels[p].vector = col;
      channels[p].cap_overlap = std::real(col.dot(hah_sector * col));
    }
  }
  return channels;
}

}  // namespace lw::spectral
