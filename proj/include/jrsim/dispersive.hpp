#pragma once

#include "jrsim/spectrum.hpp"

namespace jrsim {

// Ladder of transmon matrix elements of B = -E_Jc*phi_zpf*sin(phi_t - theta)
// + i*J*n_zpf*n_t, the coefficient of a^dag in the interaction linearized in
// the resonator quadratures. Not Hermitian: |g_ij| != |g_ji| in general.
struct SWCouplings {
  Mat g;                       // (i, j) over transmon levels
  std::vector<Real> omega;     // transmon level energies relative to ground
  Real omega_r;                // dressed resonator reference
};

SWCouplings sw_couplings(const CircuitParams& p, const BasisSpec& spec, int n_levels,
                         ElementBasis basis = ElementBasis::dressed_reference);

// chi_ij = |g_ij|^2 / (omega_j - omega_i - omega_r). Throws on a denominator
// within 1 MHz of zero (dispersive breakdown).
Real chi_ij(const SWCouplings& sw, int i, int j);

// Two-level-pair approximation to the exact cross-Kerr:
// chi_x = (chi_01 - chi_12/2) - (chi_10 - chi_21/2).
Real chi_x_approx(const SWCouplings& sw);

// First-order decay bracket from the signed coupling elements:
// g_ex/(omega_r - omega_q) + g_tms/(omega_r + omega_q), with omega_r the
// dressed state-averaged resonator frequency.
Real purcell_bracket(const FluxObservables& o);

// 1/T1 = kappa_ang * bracket^2 at p.phi_ext_t; kappa is linear Hz. Throws if
// the exchange detuning is within 10x of either coupling element.
Real purcell_rate_analytic(const CircuitParams& p, const BasisSpec& spec, Real kappa);

struct NotchResult {
  Real omega;   // qubit frequency at which the bracket cancels
  Real phi;     // flux where that happens
};

// Operational notch: the flux zero of the decay bracket within [lo, hi],
// reported with the qubit frequency there. Throws if no sign change in band.
NotchResult notch_frequency(const CircuitParams& p, const BasisSpec& spec,
                            Real lo = 0.02, Real hi = 0.3, Real tol = 1e-4);

// LC estimate 1/(2 pi sqrt(L_Jc C_c)) from the coupler inductance and an
// explicit coupling capacitance.
Real notch_frequency_lc(Real E_Jc, Real C_c);

struct LumpedNetwork {
  Real L_Jc;     // H
  Real C_c;      // F
  Real L_r;      // H
  Real C_r;      // F
  Real R_load;   // Ohm
};

// Network seen from the qubit node: (C_c || L_Jc) in series with
// (L_r || C_r || R_load), evaluated from CircuitParams with kappa setting the
// load. C_c is recovered from J by inverting the capacitance forward map.
LumpedNetwork lumped_network(const CircuitParams& p, Real kappa);

// Inverse of capacitances_to_couplings for the coupling capacitor.
Real coupling_capacitance_from_J(Real J, Real C_t, Real C_r);

// 1/T1 = Re[Y_in(omega_q)] / C_t_sigma; omega_q linear Hz, result 1/s.
Real purcell_rate_admittance(const LumpedNetwork& net, Real omega_q, Real C_t_sigma);

}  // namespace jrsim
