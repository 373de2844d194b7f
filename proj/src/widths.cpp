#include "widths.hpp"

#include "lapack.hpp"

namespace lw::widths {

double total_width(const spectral::ResonanceState& res) { return 2.0 * res.eps_I; }

Mat channel_amplitudes(const Vec& psi_res,
                       const std::vector<spectral::ChannelState>& channels,
                       const std::vector<fock::SectorMap>& annihilators) {
  const int modes = static_cast<int>(annihilators.size());
  const int nc = static_cast<int>(channels.size());
  Mat a(modes, nc);
  for (int k = 0; k < modes; ++k) {
    const Vec w = annihilators[k].apply(psi_res);
    for (int p = 0; p < nc; ++p) a(k, p) = channels[p].vector.dot(w);
  }
  return a;
}

namespace {

WidthReport contract(const spectral::ResonanceState& res,
                     const std::vector<spectral::ChannelState>& channels,
                     const Mat& coeff,
                     const std::vector<fock::SectorMap>& annihilators,
                     const std::string& method) {
  for (const auto& c : channels)
    if (c.vector.size() != annihilators.front().rows)
      throw ConfigError("partial widths: channel states are not one sector below "
                        "the resonance");
  if (res.vector.size() != annihilators.front().cols)
    throw ConfigError("partial widths: resonance vector dimension mismatch");
  const Mat a = channel_amplitudes(res.vector, channels, annihilators);
  return partial_widths_from_amplitudes(res, channels, coeff, a, method);
}

}  // namespace

WidthReport partial_widths_from_amplitudes(
    const spectral::ResonanceState& res,
    const std::vector<spectral::ChannelState>& channels, const Mat& coeff,
    const Mat& amplitudes, const std::string& method) {
  WidthReport rep;
  rep.method = method;
  rep.eps_res = res.energy;
  rep.gamma_total = total_width(res);

  const Mat b = amplitudes.adjoint() * coeff * amplitudes;  // B_sr; kappa = 2 B^T
  rep.kappa = 2.0 * b.transpose();

  const int nc = static_cast<int>(channels.size());
  rep.partials.resize(nc);
  for (int p = 0; p < nc; ++p) {
    const cxd g = rep.kappa(p, p);
    rep.partials[p].channel = channels[p].index;
    rep.partials[p].energy = channels[p].energy;
    rep.partials[p].gamma = g.real();
    rep.max_im_residue = std::max(rep.max_im_residue, std::abs(g.imag()));
    rep.sum_partials += g.real();
  }
  if (rep.gamma_total != 0.0)
    for (auto& p : rep.partials) p.branching = p.gamma / rep.gamma_total;
  rep.sum_residual = rep.gamma_total - rep.sum_partials;
  return rep;
}

WidthReport partial_width_cap_grid(const spectral::ResonanceState& res,
                                   const std::vector<spectral::ChannelState>& channels,
                                   const RVec& cap,
                                   const std::vector<fock::SectorMap>& annihilators) {
  if (cap.size() != static_cast<Eigen::Index>(annihilators.size()))
    throw ConfigError("partial_width_cap_grid: CAP array length mismatch");
  Mat g = cap.cast<cxd>().asDiagonal();
  WidthReport rep = contract(res, channels, g, annihilators, "cap-grid");
  // recompute the partials as explicit squares so nonnegativity is manifest
  const Mat a = channel_amplitudes(res.vector, channels, annihilators);
  for (std::size_t p = 0; p < rep.partials.size(); ++p) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < cap.size(); ++k)
      s += cap[k] * std::norm(a(k, static_cast<int>(p)));
    rep.partials[p].gamma = 2.0 * s;
  }
  rep.sum_partials = 0.0;
  for (const auto& p : rep.partials) rep.sum_partials += p.gamma;
  rep.sum_residual = rep.gamma_total - rep.sum_partials;
  rep.max_im_residue = 0.0;
  return rep;
}

WidthReport partial_width_cap_orbital(const spectral::ResonanceState& res,
                                      const std::vector<spectral::ChannelState>& channels,
                                      const Mat& gamma_orb,
                                      const std::vector<fock::SectorMap>& annihilators,
                                      double tol_psd) {
  const double scale = std::max(1e-300, gamma_orb.cwiseAbs().maxCoeff());
  if (hermiticity_defect(gamma_orb) > 1e-10)
    throw AssertionError("partial_width_cap_orbital: gamma_orb is not Hermitian");
  if (scale > 1e-300) {
    RVec ev = lapack::eigvalsh(gamma_orb, "gamma_orb");
    if (ev.minCoeff() < -tol_psd * scale)
      throw AssertionError("partial_width_cap_orbital: gamma_orb not PSD (min ev " +
                           std::to_string(ev.minCoeff()) + ")");
  }
  return contract(res, channels, gamma_orb, annihilators, "cap-orbital");
}

WidthReport partial_width_ecs(const spectral::ResonanceState& res,
                              const std::vector<spectral::ChannelState>& channels,
                              const Mat& h_I,
                              const std::vector<fock::SectorMap>& annihilators) {
  if (hermiticity_defect(h_I) > 1e-10)
    throw AssertionError("partial_width_ecs: h_I is not Hermitian");
  WidthReport rep = contract(res, channels, h_I, annihilators, "ecs");
  for (const auto& p : rep.partials)
    if (p.gamma < -1e-6 * rep.gamma_total)
      rep.warnings.push_back("channel " + std::to_string(p.channel) +
                             " has negative partial width " + std::to_string(p.gamma) +
                             "; the ECS representation is not converged");
  return rep;
}

Mat kappa_matrix(const spectral::ResonanceState& res,
                 const std::vector<spectral::ChannelState>& channels,
                 const Mat& coefficients,
                 const std::vector<fock::SectorMap>& annihilators) {
  const Mat a = channel_amplitudes(res.vector, channels, annihilators);
  return 2.0 * (a.adjoint() * coefficients * a).transpose();
}

PopulationCurves population_closed_form(const WidthReport& report, const RVec& times) {
  if (report.gamma_total <= 0)
    throw ConfigError("population_closed_form: Gamma must be positive");
  PopulationCurves c;
  c.times = times;
  c.p_res.resize(times.size());
  c.p_channels.resize(times.size(), report.partials.size());
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    const double decay = std::exp(-report.gamma_total * times[i] / kHbar);
    c.p_res[i] = decay;
    for (std::size_t p = 0; p < report.partials.size(); ++p)
      c.p_channels(i, p) = report.partials[p].branching * (1.0 - decay);
  }
  return c;
}

Mat coefficients_closed_form(const Mat& kappa, const RVec& channel_energies,
                             double gamma_total, double t) {
  const int nc = static_cast<int>(channel_energies.size());
  Mat p(nc, nc);
  for (int r = 0; r < nc; ++r)
    for (int s = 0; s < nc; ++s) {
      const double de = channel_energies[r] - channel_energies[s];
      const cxd osc = std::exp(cxd(0, -de * t / kHbar)) -
                      std::exp(cxd(-gamma_total * t / kHbar, 0));
      p(r, s) = kappa(r, s) / cxd(gamma_total, -de) * osc;
    }
  return p;
}

PurityCurve purity_closed_form(const Mat& kappa, const RVec& channel_energies,
                               double gamma_total, const RVec& times) {
  if (hermiticity_defect(kappa) > 1e-8)
    throw AssertionError("purity_closed_form: kappa must be Hermitian");
  const int nc = static_cast<int>(channel_energies.size());
  PurityCurve out;
  out.times = times;
  out.value.resize(times.size());
  for (int r = 0; r < nc; ++r)
    for (int s = 0; s < nc; ++s) {
      const double de = channel_energies[r] - channel_energies[s];
      out.asymptote += std::norm(kappa(r, s)) / (gamma_total * gamma_total + de * de);
    }
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    const double t = times[i];
    const double e1 = std::exp(-gamma_total * t / kHbar);
    double v = e1 * e1;  // Tr rho_N^2 of the decaying pure block
    for (int r = 0; r < nc; ++r)
      for (int s = 0; s < nc; ++s) {
        const double de = channel_energies[r] - channel_energies[s];
        const double w = std::norm(kappa(r, s)) / (gamma_total * gamma_total + de * de);
        v += w * (1.0 + e1 * e1 - 2.0 * std::cos(de * t / kHbar) * e1);
      }
    out.value[i] = v;
  }
  return out;
}

}  // namespace lw::widths
