#pragma once

#include "jrsim/spectrum.hpp"

namespace jrsim {

// One master-equation problem: drho/dt = -2 pi i [h, rho]
// + 2 pi kappa (c rho c^dag - {c^dag c, rho}/2), h and kappa in linear Hz,
// times in seconds.
struct LindbladRun {
  Mat h;
  Mat c_op;
  Mat rho0;
  RVec t_grid;     // ascending, t_grid(0) >= 0
  Real kappa = 0;  // linear Hz
};

// Dressed-basis loss operator: <i|a + a^dag|j> kept only where energy is
// released (E_j >= E_i, indices in the energy-sorted eigenbasis). Non-normal
// in general.
Mat dressed_collapse_operator(const LabeledSpectrum& ls);

// Adaptive Dormand-Prince integration of the run; one density matrix per
// t_grid entry. Trace is checked to 1e-8 and positivity to -1e-8 at every
// snapshot; violations and step-size underflow throw with the failure time.
std::vector<Mat> evolve(const LindbladRun& run);

// The same dynamics as one dense superoperator acting on vec(rho),
// column-major. Exact-propagator route for small dimensions.
Mat liouvillian(const Mat& h, const Mat& c_op, Real kappa);
std::vector<Mat> evolve_exact(const Mat& h, const Mat& c_op, Real kappa, const Mat& rho0,
                              const RVec& t_grid);

struct DecayFit {
  Real T1_pl = 0;      // seconds; +inf when no decay channel exists
  Real residual = 0;   // RMS misfit in population units; > 0.05 means not exponential
  std::vector<std::pair<Real, Real>> population_trace;
};

// Decay of the dressed excited state at p.phi_ext_t: evolve |e0><e0| with the
// loss operator, fit the e0 population to a single exponential. Pure loss
// cannot repopulate from above, so the dynamics is closed on the states at or
// below e0 and is propagated exactly there.
DecayFit purcell_T1(const CircuitParams& p, const BasisSpec& spec, Real kappa);

}  // namespace jrsim
