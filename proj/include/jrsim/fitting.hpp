#pragma once

#include "jrsim/circuit.hpp"
#include "jrsim/semiclassical.hpp"
#include "jrsim/spectrum.hpp"

#include <functional>
#include <string>
#include <vector>

namespace jrsim {

// Bounded nonlinear least squares: residual_fn maps a parameter vector to a
// residual vector with at least as many entries as parameters, and the box
// [lower, upper] must contain the guess. threads caps the residual-entry
// parallelism inside one objective or Jacobian evaluation; iterations are
// always sequential.
struct FitProblem {
  std::function<RVec(const RVec&)> residual_fn;
  RVec initial_guess;
  RVec lower;
  RVec upper;
  Real tol = 1e-10;
  int max_iters = 200;
  int threads = 0;
};

// covariance_estimate rows/cols follow the parameter order; directions the
// data does not constrain carry +inf on the diagonal. converged means the
// step and gradient tests both fired before the iteration cap; otherwise the
// best point seen is reported as-is.
struct FitResult {
  RVec params;
  Real rms = 0;
  RMat covariance_estimate;
  int n_evals = 0;
  bool converged = false;
};

// Levenberg-Marquardt with forward-difference Jacobians, falling back to
// Nelder-Mead when a Jacobian comes back non-finite. Deterministic for fixed
// inputs regardless of thread count.
FitResult minimize(const FitProblem& problem);

struct FluxDataPoint {
  Real phi = 0;
  Real omega_q = 0;
  Real alpha = 0;
};

// Selects which CircuitParams entries a flux-sweep fit may move; the fixed
// parameter vector order is [E_Jc, J, Z_r, E_J_sigma, d, E_C, omega_r_bare]
// restricted to the enabled entries.
struct HamiltonianFree {
  bool E_Jc = true;
  bool J = true;
  bool Z_r = true;
  bool E_J_sigma = true;
  bool d = true;
  bool E_C = false;
  bool omega_r_bare = false;
};

// Least squares of (omega_q, alpha) over a flux sweep against the full-model
// spectrum, both targets in relative units so the GHz frequency and the MHz
// anharmonicity pull with equal weight. Bounds span [0.25, 2.5] times the
// guess for energies and [0.02, 0.98] for the asymmetry d. The reduced
// default basis keeps one objective evaluation cheap; synthetic round trips
// stay self-consistent by generating and fitting at the same spec.
FitResult fit_hamiltonian_to_flux_data(const std::vector<FluxDataPoint>& data,
                                       const CircuitParams& guess,
                                       const HamiltonianFree& free = {},
                                       const BasisSpec& spec = {12, 4}, int threads = 0);

// Rebuilds full CircuitParams from a fit_hamiltonian_to_flux_data result.
CircuitParams params_from_fit(const CircuitParams& guess, const HamiltonianFree& free,
                              const RVec& fitted);

// Transmission-trace fit. Parameter order: [kappa_eff, omega_eff, C_in, A0,
// A_w, alpha0, tau]. A flat trace leaves kappa_eff and omega_eff
// unconstrained, which shows up as +inf variance rather than an error.
FitResult fit_s21(const RVec& omega_probe, const Vec& trace, const LineModel& line_guess,
                  Real kappa_guess, Real omega_guess, const S21Prefactor& pre_guess = {});

struct PhotonCurve {
  RVec omega_d;
  RVec n;
};

// Single-amplitude fit of steady-state photon curves for both qubit states.
// Model branch selection walks each curve from its most-detuned end and stays
// on the stable root nearest the previous point, so sweeps cross the bistable
// window without hysteresis. Throws NumericalError when the final model
// cannot track the data on either branch.
FitResult fit_drive_amplitude(const PhotonCurve& curve_g, const PhotonCurve& curve_e,
                              const KerrSystem& sys);

std::string fit_text(const FitResult& r);
std::string fit_csv(const FitResult& r);

}  // namespace jrsim
