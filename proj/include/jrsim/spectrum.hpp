#pragma once

#include "jrsim/circuit.hpp"

#include <optional>
#include <vector>

namespace jrsim {

// Deterministic eigenvector gauge: the largest-magnitude component of each
// column is made real positive.
void fix_phases(Mat& v);

// Eigenpairs of the full Hamiltonian with bare product labels (transmon
// index, photon number) assigned by greedy descending overlap against the
// reference-transmon x Fock product basis. labels[k] = {-1,-1} when state k
// matched nothing; ambiguous[k] marks a best overlap <= 1/2.
struct LabeledSpectrum {
  RVec energies;
  Mat states;
  std::vector<std::pair<int, int>> labels;
  std::vector<char> ambiguous;
  Real min_overlap = 1.0;   // over the labels actually assigned
  int dim_t = 0, dim_r = 0;

  // Eigenstate index carrying label (s, m); throws if absent or ambiguous.
  int index_of(int s, int m) const;
  Real energy_of(int s, int m) const { return energies(index_of(s, m)); }
};

LabeledSpectrum labeled_spectrum(const CircuitParams& p, const BasisSpec& spec);

// Same labeling machinery for a caller-supplied Hamiltonian on the same
// product space (used for interaction-piece subsets).
LabeledSpectrum labeled_spectrum_of(const Mat& h, const CircuitParams& p,
                                    const BasisSpec& spec);

// Basis in which single-particle coupling elements are evaluated. `bare` is
// the plain transmon eigenbasis; `dressed_reference` additionally folds the
// coupler's resonator-ground mean field into the transmon problem, which is
// what makes the exchange element vanish at the balanced flux.
enum class ElementBasis { bare, dressed_reference };

struct CouplingElements {
  Complex exchange;   // <0_t,1_r| H_int |1_t,0_r>
  Complex tms;        // <0_t,0_r| H_int |1_t,1_r>
};

CouplingElements coupling_elements(const CircuitParams& p, const BasisSpec& spec,
                                   ElementBasis basis = ElementBasis::dressed_reference);

// Phase-free signed scalars: tms is reported as |tms|, exchange as its
// projection on the tms ray, so both are invariant under eigenvector gauge.
struct SignedElements {
  Real exchange;
  Real tms;
};

SignedElements signed_elements(const CouplingElements& e);

struct FluxObservables {
  Real phi = 0;
  Real omega_q = 0;
  Real alpha = 0;
  Real chi = 0;          // (omega_res_e - omega_res_g)/2
  Real K_g = 0, K_e = 0, K_avg = 0;
  Real g_exchange = 0;   // signed, see signed_elements
  Real g_tms = 0;
  Real omega_res_g = 0, omega_res_e = 0;
  Real min_overlap = 0;
  bool ok = false;       // false marks a failed sweep point (gap)
};

FluxObservables observables_at_flux(const CircuitParams& p, const BasisSpec& spec,
                                    Real phi);

std::vector<FluxObservables> flux_sweep(const CircuitParams& p, const BasisSpec& spec,
                                        const std::vector<Real>& phis, int threads = 0);

struct BalanceResult {
  Real phi = 0;
  bool found = false;
  Real element = 0;      // signed exchange element at the returned flux
};

// Bisection on the signed exchange element over [lo, hi]; tol in flux
// quanta. No sign change across the bracket reports found = false.
BalanceResult find_balanced_flux(const CircuitParams& p, const BasisSpec& spec,
                                 Real lo, Real hi, Real tol = 1e-4,
                                 ElementBasis basis = ElementBasis::dressed_reference);

struct KerrDecomposition {
  Real chi_total;
  Real chi_cos_cos;      // chi with only the cos*cos piece active
  Real chi_transverse;   // chi with only sin*sin + n*n active
};

KerrDecomposition cross_kerr_decomposition(const CircuitParams& p, const BasisSpec& spec);

// CSV with the pinned column set, one row per sweep point; failed points are
// skipped.
std::string sweep_csv(const std::vector<FluxObservables>& rows);

}  // namespace jrsim
