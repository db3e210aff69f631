#pragma once

#include "jrsim/hilbert.hpp"
#include "jrsim/types.hpp"

namespace jrsim {

// Single source of truth for the device Hamiltonian. All energies are linear
// frequencies in Hz (E/h); fluxes phi_ext_t, phi_ext_b in units of Phi0.
struct CircuitParams {
  Real E_C = 210e6;            // transmon charging energy
  Real E_J_sigma = 21.56e9;    // SQUID total Josephson energy
  Real d = 0.346;              // SQUID junction asymmetry
  Real E_Jc = 4.01e9;          // coupler junction energy
  Real J = 83e6;               // charge-charge coupling
  Real omega_r_bare = 7.557099515652852e9;  // bare readout mode
  Real Z_r = 68.8;             // readout mode impedance, Ohm
  Real n_g = 0.0;              // offset charge
  Real phi_ext_t = 0.0;        // SQUID loop flux
  Real phi_ext_b = 0.0;        // bottom-loop flux (phase across the coupler)
};

// E_C and omega_r_bare are not independently measured; this pair is tuned so
// that omega_q(0) = 6.45 GHz and the dressed resonator sits at 7.659 GHz at
// the 0.107 operating flux, with the measured couplings below.
CircuitParams calibrated_params();

struct ResonatorEnergies {
  Real E_Cr;      // e^2/2C_r / h
  Real E_Lr;      // (Phi0/2pi)^2/L_r / h
  Real phi_zpf;
  Real n_zpf;
};

// Flux-tunable Josephson energy of the asymmetric SQUID, positive branch.
Real squid_ej(Real E_J_sigma, Real d, Real phi);

// Phase offset the SQUID reduction leaves on every other junction attached to
// the transmon node: arg[(1+d)/2 + (1-d)/2 * e^{-2 pi i phi}]. Zero at
// integer flux.
Real squid_phase(Real E_J_sigma, Real d, Real phi);

// (Z_r, omega_r_bare) <-> (E_Cr, E_Lr) with omega_r_bare = sqrt(8 E_Cr E_Lr)
// and phi_zpf * n_zpf = 1/2.
ResonatorEnergies impedance_to_energies(Real Z_r, Real omega_r_bare);

struct CouplingEnergies {
  Real J;         // 4 e^2 C_c / beta, as a frequency
  Real E_Ct;      // transmon charging energy from the full network
  Real C_t_sigma;
};

// Forward map from a three-capacitor network (transmon island C_t, resonator
// C_r, coupling C_c, all in farad) to the Hamiltonian couplings.
CouplingEnergies capacitances_to_couplings(Real C_t, Real C_r, Real C_c);

// Full device Hamiltonian on the product basis, Hz units.
Mat assemble_hamiltonian(const CircuitParams& p, const BasisSpec& spec);

// Transmon-only part (includes the SQUID cosine, excludes everything with a
// resonator factor) and the bare resonator part, for decompositions.
Mat transmon_hamiltonian(const CircuitParams& p, const BasisSpec& spec);
Mat resonator_hamiltonian(const CircuitParams& p, const BasisSpec& spec);

// Transmon reference problem used for coupling matrix elements: the transmon
// Hamiltonian plus the coupler cosine with the resonator frozen in its ground
// state, -E_Jc <0_r|cos phi_r|0_r> cos(phi_t - theta). Matrix elements of the
// interaction between eigenstates of this operator vanish at the balanced
// flux, which the plain transmon basis does not reproduce.
Mat transmon_reference_hamiltonian(const CircuitParams& p, const BasisSpec& spec);

struct InteractionPieces {
  Mat cos_cos;   // -E_Jc cos(phi_t - theta) cos(phi_r)
  Mat sin_sin;   // -E_Jc sin(phi_t - theta) sin(phi_r)
  Mat n_n;       // J n_t n_r
};

// Requires phi_ext_b = 0 (the decomposition below assumes no static phase on
// the coupler beyond theta).
InteractionPieces interaction_pieces(const CircuitParams& p, const BasisSpec& spec);

// Resonator zero-point operators for the given params.
ResonatorOps resonator_ops(const CircuitParams& p, const BasisSpec& spec);

}  // namespace jrsim
