#include "jrsim/circuit.hpp"

#include <cmath>

namespace jrsim {

CircuitParams calibrated_params() {
  CircuitParams p;
  p.E_C = 0.22007906780383707e9;
  p.omega_r_bare = 7.557266348423329e9;
  return p;
}

Real squid_ej(Real E_J_sigma, Real d, Real phi) {
  Real x = k_pi * phi;
  Real c = std::cos(x), s = std::sin(x);
  return E_J_sigma * std::sqrt(c * c + d * d * s * s);
}

Real squid_phase(Real E_J_sigma, Real d, Real phi) {
  Real ej1 = E_J_sigma * (1.0 + d) / 2.0;
  Real ej2 = E_J_sigma * (1.0 - d) / 2.0;
  Complex a = ej1 + ej2 * std::exp(Complex(0, -k_2pi * phi));
  return std::arg(a);
}

ResonatorEnergies impedance_to_energies(Real Z_r, Real omega_r_bare) {
  if (Z_r <= 0 || omega_r_bare <= 0)
    throw ConfigError("impedance_to_energies requires positive Z_r and omega_r_bare");
  Real w_ang = k_2pi * omega_r_bare;
  Real C = 1.0 / (w_ang * Z_r);
  Real L = Z_r / w_ang;
  ResonatorEnergies e;
  e.E_Cr = k_e * k_e / (2.0 * C) / k_h;
  e.E_Lr = (k_Phi0 / k_2pi) * (k_Phi0 / k_2pi) / L / k_h;
  e.phi_zpf = std::pow(2.0 * e.E_Cr / e.E_Lr, 0.25);
  e.n_zpf = 0.5 / e.phi_zpf;
  return e;
}

CouplingEnergies capacitances_to_couplings(Real C_t, Real C_r, Real C_c) {
  if (C_t <= 0 || C_r <= 0 || C_c <= 0)
    throw ConfigError("capacitances_to_couplings requires positive capacitances");
  Real beta = C_t * (C_r + C_c) + C_r * C_c;
  CouplingEnergies out;
  out.J = 4.0 * k_e * k_e * C_c / beta / k_h;
  out.C_t_sigma = C_t + 1.0 / (1.0 / C_r + 1.0 / C_c);
  out.E_Ct = k_e * k_e / (2.0 * out.C_t_sigma) / k_h;
  return out;
}

ResonatorOps resonator_ops(const CircuitParams& p, const BasisSpec& spec) {
  ResonatorEnergies e = impedance_to_energies(p.Z_r, p.omega_r_bare);
  return resonator_quadratures(spec, e.phi_zpf, e.n_zpf);
}

namespace {

// cos/sin of (phi_t - theta) from the zero-flux operators.
std::pair<Mat, Mat> tilted_trig(const CircuitParams& p, int charge_cutoff) {
  auto [cos_t, sin_t] = cos_sin_phi_t(charge_cutoff);
  Real th = squid_phase(p.E_J_sigma, p.d, p.phi_ext_t);
  Mat c = std::cos(th) * cos_t + std::sin(th) * sin_t;
  Mat s = std::cos(th) * sin_t - std::sin(th) * cos_t;
  return {c, s};
}

}  // namespace

Mat transmon_hamiltonian(const CircuitParams& p, const BasisSpec& spec) {
  validate(spec);
  Mat n = charge_number_t(spec.charge_cutoff);
  auto [cos_t, sin_t] = cos_sin_phi_t(spec.charge_cutoff);
  (void)sin_t;
  Mat shifted = n - p.n_g * Mat::Identity(n.rows(), n.cols());
  Real ej = squid_ej(p.E_J_sigma, p.d, p.phi_ext_t);
  return 4.0 * p.E_C * shifted * shifted - ej * cos_t;
}

Mat transmon_reference_hamiltonian(const CircuitParams& p, const BasisSpec& spec) {
  ResonatorOps r = resonator_ops(p, spec);
  Real eta = r.cos_phi(0, 0).real();
  auto [cos_tilt, sin_tilt] = tilted_trig(p, spec.charge_cutoff);
  (void)sin_tilt;
  return transmon_hamiltonian(p, spec) - p.E_Jc * eta * cos_tilt;
}

Mat resonator_hamiltonian(const CircuitParams& p, const BasisSpec& spec) {
  validate(spec);
  Mat num = fock_ladder(spec.fock_cutoff).adjoint() * fock_ladder(spec.fock_cutoff);
  return p.omega_r_bare * num;
}

Mat assemble_hamiltonian(const CircuitParams& p, const BasisSpec& spec) {
  validate(spec);
  int dt = spec.dim_t(), dr = spec.dim_r();
  Mat it = Mat::Identity(dt, dt), ir = Mat::Identity(dr, dr);
  ResonatorOps r = resonator_ops(p, spec);
  auto [cos_tilt, sin_tilt] = tilted_trig(p, spec.charge_cutoff);

  Mat h = kron(transmon_hamiltonian(p, spec), ir) +
          kron(it, resonator_hamiltonian(p, spec));

  // Coupler junction: -E_Jc cos(phi_t - theta - phi_r - 2*pi*phi_ext_b).
  Real pb = k_2pi * p.phi_ext_b;
  Mat cos_rb = std::cos(pb) * r.cos_phi - std::sin(pb) * r.sin_phi;
  Mat sin_rb = std::cos(pb) * r.sin_phi + std::sin(pb) * r.cos_phi;
  h -= p.E_Jc * (kron(cos_tilt, cos_rb) + kron(sin_tilt, sin_rb));

  Mat nt = charge_number_t(spec.charge_cutoff);
  h += p.J * kron(nt, r.n);
  return h;
}

InteractionPieces interaction_pieces(const CircuitParams& p, const BasisSpec& spec) {
  if (p.phi_ext_b != 0.0)
    throw ConfigError("interaction_pieces requires phi_ext_b = 0");
  validate(spec);
  ResonatorOps r = resonator_ops(p, spec);
  auto [cos_tilt, sin_tilt] = tilted_trig(p, spec.charge_cutoff);
  Mat nt = charge_number_t(spec.charge_cutoff);
  InteractionPieces out;
  out.cos_cos = -p.E_Jc * kron(cos_tilt, r.cos_phi);
  out.sin_sin = -p.E_Jc * kron(sin_tilt, r.sin_phi);
  out.n_n = p.J * kron(nt, r.n);
  return out;
}

}  // namespace jrsim
