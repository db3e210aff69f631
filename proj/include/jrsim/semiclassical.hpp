#pragma once

#include "jrsim/spectrum.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace jrsim {

// Feedline seen through the input capacitor. All rates and frequencies are
// linear Hz; the reflection coefficient Gamma = 1/(1 + 2i*w*Z0*C_in) takes the
// angular frequency internally.
struct LineModel {
  Real kappa_prime = 0;       // bare resonator-feedline rate
  Real omega_r_prime = 0;     // bare resonator frequency
  Real Z0 = 50.0;             // feedline impedance, Ohm
  Real C_in = 0;              // input coupling capacitance, F
  Real attenuation_A = 1.0;   // input-line power attenuation (>= 1)
};

struct EffectiveLine {
  Real kappa_eff;     // (kappa'/2) (1 + Re Gamma), in [kappa'/2, kappa']
  Real omega_eff;     // omega_r' + kappa' Im(Gamma)/4
  Complex Gamma;
};

EffectiveLine effective_line(const LineModel& line, Real omega_probe);

// |F|^2 = (kappa'/4) |1-Gamma|^2 P / (A hbar w), converted to the linear-Hz
// amplitude convention used by KerrSystem. Returns |F| >= 0.
Real drive_amplitude(const LineModel& line, Real omega_probe, Real power_watts);

enum class QubitState { g, e };

// Driven Kerr resonator conditioned on the qubit state:
// i (w_{g/e} - w_d) alpha + i K |alpha|^2 alpha + (kappa/2) alpha = F.
// Everything linear Hz; photon numbers are convention-free.
struct KerrSystem {
  Real omega_g = 0;
  Real omega_e = 0;
  Real kappa = 0;
  Real K = 0;        // self-Kerr per photon, signed
};

KerrSystem kerr_system(const FluxObservables& o, Real kappa);

struct SteadyRoot {
  Real n = 0;          // photons
  Complex alpha = 0;   // intracavity amplitude, |alpha|^2 = n
  bool stable = false;
};

// Roots ascending in n. One or three entries away from the fold boundary;
// with three, the middle one is the unstable branch.
struct SteadyStateSolution {
  std::vector<SteadyRoot> roots;
};

SteadyStateSolution steady_states(const KerrSystem& sys, QubitState qs, Real omega_d,
                                  Complex F);

struct BifurcationPoint {
  Real delta_bif;   // detuning omega_res - omega_d at the cusp, signed
  Real n_bif;       // photons at the cusp, positive
};

// Closed form: delta_bif = -sgn(K) sqrt(3) kappa / 2, n_bif = kappa/(sqrt(3)|K|).
// Throws ConfigError when K = 0 (no fold exists).
BifurcationPoint bifurcation_threshold(const KerrSystem& sys);

struct BistabilityMap {
  RVec omega_d;       // drive frequency grid
  RVec F;             // drive amplitude grid
  MatX<int> mask;     // (i over omega_d, j over F); 1 where three roots coexist
};

BistabilityMap bistability_map(const KerrSystem& sys, QubitState qs,
                               const RVec& omega_d, const RVec& F);

// Calibration envelope (A0 + A_w * w) * exp(-i (alpha0 + tau * w)) applied on
// top of the physical transmission.
struct S21Prefactor {
  Real A0 = 1;
  Real A_w = 0;       // per Hz
  Real alpha0 = 0;    // radians
  Real tau = 0;       // radians per Hz
};

// S21(w) = (1 - Gamma) [1 - ((1+Gamma)/(1+Re Gamma)) kappa/(2i(w-w_eff)+kappa)]
// times the prefactor, with Gamma evaluated at each probe point.
Vec s21(const LineModel& line, Real kappa_eff, Real omega_eff, const RVec& omega_probe,
        const S21Prefactor& pre = {});

// Integrate the driven-Kerr amplitude from alpha0 across t_grid (seconds).
// Deterministic fixed-substep RK4; with noise, Euler-Maruyama with additive
// complex white noise of variance kappa/2 per unit time split over the two
// quadratures (half-photon vacuum convention). Same inputs and seed give the
// same trajectory. oversample sets the substep count per characteristic
// period of the fastest rotation in play.
Vec integrate_transient(const KerrSystem& sys, QubitState qs, Real omega_d,
                        const std::function<Complex(Real)>& drive, const RVec& t_grid,
                        Complex alpha0 = 0, bool noise = false,
                        std::uint64_t seed = 0, int oversample = 200);

std::string transient_csv(const RVec& t_grid, const Vec& trajectory);
std::string bistability_csv(const BistabilityMap& map);

}  // namespace jrsim
