#include "jrsim/dispersive.hpp"

#include <cmath>

namespace jrsim {

SWCouplings sw_couplings(const CircuitParams& p, const BasisSpec& spec, int n_levels,
                         ElementBasis basis) {
  if (n_levels > 8) throw ConfigError("sw_couplings supports n_levels <= 8");
  if (n_levels < 2) throw ConfigError("sw_couplings needs at least 2 levels");
  validate(spec);

  Mat href = basis == ElementBasis::dressed_reference
                 ? transmon_reference_hamiltonian(p, spec)
                 : transmon_hamiltonian(p, spec);
  Eigen::SelfAdjointEigenSolver<Mat> es(href);
  Mat tb = es.eigenvectors();
  fix_phases(tb);
  RVec w = es.eigenvalues();

  ResonatorEnergies re = impedance_to_energies(p.Z_r, p.omega_r_bare);
  auto [cos_t, sin_t] = cos_sin_phi_t(spec.charge_cutoff);
  Real th = squid_phase(p.E_J_sigma, p.d, p.phi_ext_t);
  Mat sin_tilt = std::cos(th) * sin_t - std::sin(th) * cos_t;
  Mat nt = charge_number_t(spec.charge_cutoff);

  Mat b = -p.E_Jc * re.phi_zpf * sin_tilt + Complex(0, 1) * p.J * re.n_zpf * nt;

  SWCouplings sw;
  Mat tb_n = tb.leftCols(n_levels);
  sw.g = tb_n.adjoint() * b * tb_n;
  sw.omega.resize(n_levels);
  for (int i = 0; i < n_levels; ++i) sw.omega[i] = w(i) - w(0);

  // Dressed resonator reference at this flux.
  FluxObservables o = observables_at_flux(p, spec, p.phi_ext_t);
  sw.omega_r = 0.5 * (o.omega_res_g + o.omega_res_e);
  return sw;
}

Real chi_ij(const SWCouplings& sw, int i, int j) {
  int n = static_cast<int>(sw.omega.size());
  if (i < 0 || j < 0 || i >= n || j >= n)
    throw ConfigError("chi_ij index out of range");
  Real den = sw.omega[j] - sw.omega[i] - sw.omega_r;
  if (std::abs(den) < 1e6)
    throw NumericalError("dispersive breakdown: |omega_j - omega_i - omega_r| < 1 MHz");
  return std::norm(sw.g(i, j)) / den;
}

Real chi_x_approx(const SWCouplings& sw) {
  if (sw.omega.size() < 3)
    throw ConfigError("chi_x_approx needs at least 3 levels");
  Real co = chi_ij(sw, 0, 1) - 0.5 * chi_ij(sw, 1, 2);
  Real counter = chi_ij(sw, 1, 0) - 0.5 * chi_ij(sw, 2, 1);
  return co - counter;
}

Real purcell_bracket(const FluxObservables& o) {
  Real wr = 0.5 * (o.omega_res_g + o.omega_res_e);
  return o.g_exchange / (wr - o.omega_q) + o.g_tms / (wr + o.omega_q);
}

Real purcell_rate_analytic(const CircuitParams& p, const BasisSpec& spec, Real kappa) {
  FluxObservables o = observables_at_flux(p, spec, p.phi_ext_t);
  Real wr = 0.5 * (o.omega_res_g + o.omega_res_e);
  Real det = std::abs(wr - o.omega_q);
  if (det < 10.0 * std::abs(o.g_exchange) || wr + o.omega_q < 10.0 * std::abs(o.g_tms))
    throw NumericalError("nondispersive regime: detuning within 10x of a coupling element");
  Real b = purcell_bracket(o);
  return k_2pi * kappa * b * b;
}

NotchResult notch_frequency(const CircuitParams& p, const BasisSpec& spec,
                            Real lo, Real hi, Real tol) {
  auto bracket_at = [&](Real phi) {
    return purcell_bracket(observables_at_flux(p, spec, phi));
  };
  Real flo = bracket_at(lo), fhi = bracket_at(hi);
  if ((flo > 0) == (fhi > 0))
    throw NumericalError("no bracket zero in the given flux band");
  while (hi - lo > tol) {
    Real mid = 0.5 * (lo + hi);
    Real fm = bracket_at(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  NotchResult r;
  r.phi = 0.5 * (lo + hi);
  r.omega = observables_at_flux(p, spec, r.phi).omega_q;
  return r;
}

Real notch_frequency_lc(Real E_Jc, Real C_c) {
  if (E_Jc <= 0 || C_c <= 0) throw ConfigError("notch_frequency_lc requires positive inputs");
  Real l_jc = (k_Phi0 / k_2pi) * (k_Phi0 / k_2pi) / (k_h * E_Jc);
  return 1.0 / (k_2pi * std::sqrt(l_jc * C_c));
}

Real coupling_capacitance_from_J(Real J, Real C_t, Real C_r) {
  Real jh = J * k_h;
  Real den = 4.0 * k_e * k_e - jh * (C_t + C_r);
  if (den <= 0) throw ConfigError("J too large for this capacitor pair");
  return jh * C_t * C_r / den;
}

LumpedNetwork lumped_network(const CircuitParams& p, Real kappa) {
  LumpedNetwork net;
  net.L_Jc = (k_Phi0 / k_2pi) * (k_Phi0 / k_2pi) / (k_h * p.E_Jc);
  Real w_ang = k_2pi * p.omega_r_bare;
  net.C_r = 1.0 / (w_ang * p.Z_r);
  net.L_r = p.Z_r / w_ang;
  net.R_load = 1.0 / (k_2pi * kappa * net.C_r);

  // The island capacitance is the full shunt e^2/(2 h E_C) minus the series
  // C_r-C_c path, which itself depends on C_c; iterate the pair to its fixed
  // point so the forward map capacitances_to_couplings returns exactly p.J.
  Real c_sigma = k_e * k_e / (2.0 * k_h * p.E_C);
  Real c_c = 0;
  for (int it = 0; it < 80; ++it) {
    Real c_island = c_sigma - (c_c > 0 ? 1.0 / (1.0 / net.C_r + 1.0 / c_c) : 0.0);
    if (c_island <= 0) throw ConfigError("coupling capacitor exhausts the transmon shunt");
    Real next = coupling_capacitance_from_J(p.J, c_island, net.C_r);
    bool done = std::abs(next - c_c) <= 1e-13 * next;
    c_c = next;
    if (done) break;
  }
  net.C_c = c_c;
  return net;
}

Real purcell_rate_admittance(const LumpedNetwork& net, Real omega_q, Real C_t_sigma) {
  if (net.L_Jc <= 0 || net.C_c <= 0 || net.L_r <= 0 || net.C_r <= 0 || net.R_load <= 0)
    throw ConfigError("purcell_rate_admittance requires positive elements");
  Real w = k_2pi * omega_q;
  Complex jw(0, w);
  // Coupling branch: C_c parallel L_Jc.
  Complex y_c = jw * net.C_c + 1.0 / (jw * net.L_Jc);
  // Loaded tank.
  Complex y_t = jw * net.C_r + 1.0 / (jw * net.L_r) + 1.0 / net.R_load;
  Complex z_in = 1.0 / y_c + 1.0 / y_t;
  Real re_y = (1.0 / z_in).real();
  return std::max<Real>(re_y, 0.0) / C_t_sigma;
}

}  // namespace jrsim
