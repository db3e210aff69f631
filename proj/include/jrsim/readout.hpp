#pragma once

#include "jrsim/semiclassical.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace jrsim {

// Monte Carlo single-shot readout: two square measurement pulses of length
// tau_m separated by a wait tau_w, heterodyne record collected during the
// pulses. All frequencies and rates linear Hz.
struct ReadoutConfig {
  KerrSystem sys;
  LineModel line;          // carried for power/frequency conversions upstream
  Real omega_d = 0;        // drive frequency
  Real F = 0;              // drive amplitude during the pulses
  Real tau_m = 68e-9;      // integration window per pulse
  Real tau_w = 150e-9;     // wait between the pulses
  Real eta = 0.04;         // measurement efficiency, in (0, 1/2]
  Real T1 = 27e-6;         // qubit energy relaxation time (inf allowed)
  int n_shots = 2000;
  std::uint64_t seed = 1;
  int n_bins = 68;         // heterodyne bins per measurement window
  int oversample = 40;     // integrator substeps per characteristic period
  Real boost_factor = 1;   // pulse shaping: drive multiplier at the window start
  Real boost_fraction = 0; // fraction of the window the boost lasts (0 = square)
  Real prep_error = 0;     // probability the initial state lands flipped
  Real up_rate = 0;        // thermal g->e excitation rate, 1/s
  bool cavity_noise = true;   // vacuum-noise kicks on the resonator amplitude
  bool record_noise = true;   // white noise on the heterodyne record
  int threads = 0;         // 0 = resolve from JRSIM_THREADS / hardware
};

enum class Protocol { assign, qnd };

struct ShotRecord {
  Complex iq = 0;          // weighted integral of the measured (second) window
  Complex iq_pre = 0;      // weighted integral of the first window
  QubitState prep = QubitState::g;         // intended state for the measured window
  QubitState truth_final = QubitState::g;  // actual state when that window ends
  bool jumped = false;             // any stochastic qubit transition in the shot
  bool switched_branch = false;    // cavity crossed between attractor basins
  Real mean_n = 0;         // time-averaged photon number over the measured window
};

// Perpendicular-bisector discriminant in the IQ plane: a point is called e
// when Re(conj(axis) * (iq - midpoint)) > 0.
struct Discriminant {
  Complex midpoint = 0;
  Complex axis = 1;        // unit vector from the g centroid toward e
};

struct FidelityReport {
  Real F_assign = 0;
  Real F_QND = 0;
  Real eps_sep = 0;        // half the overlap of the fitted iq densities
  Real eps_g = 0;          // P(assigned e | prepared g)
  Real eps_e = 0;          // P(assigned g | prepared e)
  Real eps_cl = 0;         // tau_m / (2 T1)
  Real eps_r_qnd = 0;      // tau_w / (2 T1) + tau_m / T1
  Discriminant threshold;
};

// Two-component 1-D Gaussian mixture; weight is the mass of component 1 and
// components are ordered mu1 <= mu2.
struct DoubleGaussian {
  Real mu1 = 0, sigma1 = 0;
  Real mu2 = 0, sigma2 = 0;
  Real weight = 0.5;
};

struct RingdownFit {
  Real kappa = 0;          // linear Hz
  Real sigma = 0;          // standard error of kappa from the fit residuals
};

struct EfficiencyFit {
  Real eta = 0;
  bool in_range = false;   // eta in (0, 1/2]
};

// Simulate n_shots single-shot records. Preparation alternates with shot
// parity; relaxation jumps are sampled as a Poisson process over the whole
// sequence and the cavity is re-conditioned on the qubit state at each jump.
// Per-shot randomness comes from stream_for(seed, shot_offset + shot), so
// batches are reproducible for any thread count and shot_offset selects
// disjoint batches.
std::vector<ShotRecord> simulate_shots(const ReadoutConfig& cfg, Protocol protocol,
                                       std::uint64_t shot_offset = 0);

// w = conj(mean_e - mean_g) normalized to unit energy; a record integrates as
// sum_k w_k s_k, which puts the g-to-e separation on the positive real axis.
Vec optimal_weights(const Vec& mean_g, const Vec& mean_e);

// Nearest-centroid labels (2-class = perpendicular bisector of the class
// means). Training labels must cover every class with at least two points.
std::vector<int> classify(const std::vector<Complex>& iqs,
                          const std::vector<std::pair<Complex, int>>& training,
                          int n_classes);

// Maximum-likelihood two-component mixture with deterministic histogram-peak
// initialization. Falls back to a single component (weight 1) when the extra
// component is not supported by the data at the usual BIC margin.
DoubleGaussian double_gaussian_fit(const std::vector<Real>& values);

// Epsilons and assignment fidelity for an already-classified batch: counting
// errors against the discriminant, overlap of the fitted densities, and the
// closed-form relaxation contributions. F_QND is left at 0 here; it needs the
// two-pulse correlation that fidelity_protocols measures.
FidelityReport error_budget(const std::vector<ShotRecord>& shots, const Discriminant& disc,
                            const DoubleGaussian& fit_g, const DoubleGaussian& fit_e,
                            const ReadoutConfig& cfg);

// Full pipeline: a calibration batch trains the window classifiers, held-out
// batches measure F_assign (preselected on the first window reading g) and
// F_QND (second outcome conditioned on the first).
FidelityReport fidelity_protocols(const ReadoutConfig& cfg);

// n = delta_q / (2 chi). Negative return means the measured shift and chi
// disagree in sign.
Real stark_photon_number(Real delta_q, Real chi);

// Log-linear fit of n(t) = n0 exp(-2 pi kappa t) over (time, photons) samples.
RingdownFit kappa_from_ringdown(const std::vector<std::pair<Real, Real>>& n_of_t);

// Joint calibration: sqrt(SNR) = c * amp from the first sweep, measurement
// dephasing |contrast| = contrast0 * exp(-amp^2 / (2 sigma_m^2)) from the
// second, eta = sigma_m^2 c^2 / 2.
EfficiencyFit efficiency_from_sweeps(const std::vector<std::pair<Real, Real>>& snr_vs_amp,
                                     const std::vector<std::pair<Real, Real>>& contrast_vs_amp);

// T1 limit implied by a drive of power P producing a Rabi rate Omega on a
// qubit at omega_q (all linear Hz, P in watts).
Real purcell_from_rabi(Real power_watts, Real Omega, Real omega_q);

struct FidelitySweep {
  RVec omega_d;
  RVec F;
  RMat F_assign;    // (i over omega_d, j over F)
  RMat F_QND;
};

// fidelity_protocols over a drive-frequency/amplitude grid; cells run in
// parallel with the per-cell shot loops serialized.
FidelitySweep fidelity_sweep(const ReadoutConfig& base, const RVec& omega_d,
                             const RVec& F, int threads = 0);

std::string shots_csv(const std::vector<ShotRecord>& shots);
std::string report_text(const FidelityReport& r);
std::string report_csv(const FidelityReport& r);

}  // namespace jrsim
