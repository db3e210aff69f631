#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "jrsim/dispersive.hpp"
#include "jrsim/lindblad.hpp"

#include <cmath>
#include <limits>

using namespace jrsim;

namespace {

const BasisSpec kSmall{5, 3};     // smallest basis the validator accepts
const BasisSpec kSweep{12, 4};    // reduced cutoffs used for decay sweeps
const Real kKappa = 10.6e6;

CircuitParams decoupled() {
  CircuitParams p = calibrated_params();
  p.E_Jc = 0;
  p.J = 0;
  return p;
}

Mat diag_hamiltonian(const LabeledSpectrum& ls, int w) {
  return RVec(ls.energies.head(w)).asDiagonal().toDenseMatrix().cast<Complex>();
}

// Total excitation count (transmon level + photon number) per dressed index.
RVec excitation_counts(const LabeledSpectrum& ls, int w) {
  RVec n(w);
  for (int i = 0; i < w; ++i) n(i) = ls.labels[i].first + ls.labels[i].second;
  return n;
}

Real total_excitation(const Mat& rho, const RVec& counts) {
  Real s = 0;
  for (int i = 0; i < counts.size(); ++i) s += counts(i) * rho(i, i).real();
  return s;
}

}  // namespace

TEST_CASE("decoupled collapse operator is the bare photon ladder") {
  LabeledSpectrum ls = labeled_spectrum(decoupled(), kSmall);
  Mat c = dressed_collapse_operator(ls);

  int g0 = ls.index_of(0, 0), g1 = ls.index_of(0, 1), g2 = ls.index_of(0, 2);
  int e0 = ls.index_of(1, 0), e1 = ls.index_of(1, 1);
  // Eigenvector sign conventions can flip level by level, so compare moduli.
  CHECK(std::abs(std::abs(c(g0, g1)) - 1.0) < 1e-9);
  CHECK(std::abs(std::abs(c(g1, g2)) - std::sqrt(2.0)) < 1e-9);
  CHECK(std::abs(std::abs(c(e0, e1)) - 1.0) < 1e-9);

  // No qubit leak without coupling, and no energy-gain elements ever.
  CHECK(std::abs(c(g0, e0)) < 1e-12);
  CHECK(Mat(c.triangularView<Eigen::StrictlyLower>()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coupling opens a qubit leak and makes the operator non-normal") {
  LabeledSpectrum ls = labeled_spectrum(calibrated_params(), kSweep);
  Mat c = dressed_collapse_operator(ls);

  int g0 = ls.index_of(0, 0), e0 = ls.index_of(1, 0), g1 = ls.index_of(0, 1);
  CHECK(std::abs(c(g0, e0)) == doctest::Approx(1.220804e-2).epsilon(1e-4));
  CHECK(std::abs(c(g0, g1)) == doctest::Approx(0.99311105).epsilon(1e-6));
  CHECK(std::abs(c(g0, g1)) < 1.0);

  Mat comm = c * c.adjoint() - c.adjoint() * c;
  CHECK(comm.cwiseAbs().maxCoeff() > 1.0);
  CHECK(Mat(c.triangularView<Eigen::StrictlyLower>()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero loss keeps populations and coherence magnitude") {
  // Six lowest dressed states, energies referenced to the ground level so the
  // integrator only has to track the physical phase differences.
  LabeledSpectrum ls = labeled_spectrum(calibrated_params(), kSmall);
  int w = 6;
  Mat h = ((ls.energies.head(w).array() - ls.energies(0)).matrix())
              .asDiagonal()
              .toDenseMatrix()
              .cast<Complex>();
  Mat c = dressed_collapse_operator(ls).topLeftCorner(w, w);

  int g0 = ls.index_of(0, 0), e0 = ls.index_of(1, 0);
  Mat rho0 = Mat::Zero(w, w);
  rho0(g0, g0) = 0.5;
  rho0(e0, e0) = 0.5;
  rho0(g0, e0) = 0.3;
  rho0(e0, g0) = 0.3;

  RVec ts(3);
  ts << 0, 1e-9, 2e-9;
  std::vector<Mat> snaps = evolve({h, c, rho0, ts, 0.0});

  REQUIRE(snaps.size() == 3);
  const Mat& last = snaps.back();
  CHECK(std::abs(last(g0, g0).real() - 0.5) < 1e-12);
  CHECK(std::abs(last(e0, e0).real() - 0.5) < 1e-12);
  CHECK(std::abs(std::abs(last(g0, e0)) - 0.3) < 1e-6);
}

TEST_CASE("dressed ground state is stationary under loss") {
  LabeledSpectrum ls = labeled_spectrum(calibrated_params(), kSmall);
  Mat cfull = dressed_collapse_operator(ls);
  int g0 = ls.index_of(0, 0);
  REQUIRE(g0 == 0);

  SUBCASE("long horizon, exact propagator on a six-state window") {
    int w = 6;
    Mat h = diag_hamiltonian(ls, w);
    Mat c = cfull.topLeftCorner(w, w);
    Mat rho0 = Mat::Zero(w, w);
    rho0(0, 0) = 1;
    RVec ts(2);
    ts << 0, 1e-6;
    std::vector<Mat> snaps = evolve_exact(h, c, kKappa, rho0, ts);
    CHECK((snaps.back() - rho0).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("short horizon, adaptive integrator on the full basis") {
    Mat h = diag_hamiltonian(ls, ls.energies.size());
    Mat rho0 = Mat::Zero(h.rows(), h.cols());
    rho0(0, 0) = 1;
    RVec ts(2);
    ts << 0, 1e-9;
    std::vector<Mat> snaps = evolve({h, cfull, rho0, ts, kKappa});
    CHECK((snaps.back() - rho0).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("decoupled photon population decays as exp(-2 pi kappa t)") {
  LabeledSpectrum ls = labeled_spectrum(decoupled(), kSmall);
  Mat h = diag_hamiltonian(ls, ls.energies.size());
  Mat c = dressed_collapse_operator(ls);
  int g1 = ls.index_of(0, 1);
  Mat rho0 = Mat::Zero(h.rows(), h.cols());
  rho0(g1, g1) = 1;

  Real kappa = 100e6;
  RVec ts(5);
  ts << 0, 1e-9, 2e-9, 4e-9, 8e-9;
  std::vector<Mat> snaps = evolve({h, c, rho0, ts, kappa});

  RVec counts = excitation_counts(ls, (int)ls.energies.size());
  Real prev = total_excitation(snaps[0], counts);
  for (int k = 0; k < 5; ++k) {
    Real pop = snaps[k](g1, g1).real();
    CHECK(std::abs(pop - std::exp(-k_2pi * kappa * ts(k))) < 1e-9);
    Real n_tot = total_excitation(snaps[k], counts);
    CHECK(n_tot <= prev + 1e-12);
    prev = n_tot;
  }
}

TEST_CASE("adaptive integrator matches the exact propagator") {
  // Inflated loss on an eight-state window so both routes finish quickly.
  CircuitParams p = calibrated_params();
  p.phi_ext_t = 0.2;
  LabeledSpectrum ls = labeled_spectrum(p, kSmall);
  int w = 8;
  Mat h = diag_hamiltonian(ls, w);
  Mat c = dressed_collapse_operator(ls).topLeftCorner(w, w);
  Mat rho0 = Mat::Zero(w, w);
  int e0 = ls.index_of(1, 0);
  rho0(e0, e0) = 1;

  Real kappa = 2e9;
  RVec ts(4);
  ts << 0, 4e-10, 1.2e-9, 3e-9;
  std::vector<Mat> rk = evolve({h, c, rho0, ts, kappa});
  std::vector<Mat> ex = evolve_exact(h, c, kappa, rho0, ts);

  REQUIRE(rk.size() == 4);
  Real dmax = 0;
  for (size_t k = 0; k < rk.size(); ++k)
    dmax = std::max(dmax, (rk[k] - ex[k]).cwiseAbs().maxCoeff());
  CHECK(dmax < 2e-6);
  CHECK(std::abs(rk.back().trace().real() - 1.0) < 1e-8);

  RVec counts = excitation_counts(ls, w);
  Real prev = total_excitation(rk[0], counts);
  for (size_t k = 1; k < rk.size(); ++k) {
    Real n_tot = total_excitation(rk[k], counts);
    CHECK(n_tot <= prev + 1e-9);
    prev = n_tot;
  }
}

TEST_CASE("decay time tracks the analytic rate when far detuned") {
  for (Real phi : {0.3, 0.45}) {
    CircuitParams p = calibrated_params();
    p.phi_ext_t = phi;
    DecayFit f = purcell_T1(p, kSweep, kKappa);
    CHECK(f.residual < 1e-6);

    Real ana_rate = purcell_rate_analytic(p, BasisSpec{20, 7}, kKappa);
    Real ratio = f.T1_pl * ana_rate;
    CHECK(ratio > 1.0 / 1.5);
    CHECK(ratio < 1.5);
  }

  CircuitParams p = calibrated_params();
  p.phi_ext_t = 0.45;
  DecayFit f = purcell_T1(p, kSweep, kKappa);
  CHECK(f.T1_pl == doctest::Approx(5.001712e-6).epsilon(1e-5));
  REQUIRE(f.population_trace.size() == 60);
  CHECK(f.population_trace.front().first == 0.0);
  CHECK(f.population_trace.front().second == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("loss cancellation carves a deep notch in the decay time") {
  auto t1_at = [](Real phi) {
    CircuitParams p = calibrated_params();
    p.phi_ext_t = phi;
    return purcell_T1(p, kSweep, kKappa);
  };

  DecayFit peak = t1_at(0.141);
  DecayFit sweet_spot = t1_at(0.0);
  DecayFit edge = t1_at(0.5);

  CHECK(peak.T1_pl == doctest::Approx(5.3211636436e-1).epsilon(1e-6));
  CHECK(edge.T1_pl == doctest::Approx(4.409581e-6).epsilon(1e-5));
  CHECK(peak.T1_pl / edge.T1_pl > 1e4);
  CHECK(peak.T1_pl / sweet_spot.T1_pl > 1e3);

  // Mirror flux and the next flux quantum reproduce the peak: two per period.
  CHECK(t1_at(-0.141).T1_pl == doctest::Approx(peak.T1_pl).epsilon(1e-8));
  CHECK(t1_at(1.0 - 0.141).T1_pl == doctest::Approx(peak.T1_pl).epsilon(1e-8));
}

TEST_CASE("no decay channel reports an infinite decay time") {
  DecayFit f = purcell_T1(decoupled(), kSweep, kKappa);
  CHECK(std::isinf(f.T1_pl));
  REQUIRE(f.population_trace.size() == 1);
  CHECK(f.population_trace[0].first == 0.0);
  CHECK(f.population_trace[0].second == 1.0);

  DecayFit f0 = purcell_T1(calibrated_params(), kSweep, 0.0);
  CHECK(std::isinf(f0.T1_pl));
}

TEST_CASE("evolve rejects malformed runs") {
  LabeledSpectrum ls = labeled_spectrum(decoupled(), kSmall);
  Mat h = diag_hamiltonian(ls, ls.energies.size());
  Mat c = dressed_collapse_operator(ls);
  Mat rho0 = Mat::Zero(h.rows(), h.cols());
  rho0(0, 0) = 1;
  RVec ts(2);
  ts << 0, 1e-9;

  Mat c_bad = c.topLeftCorner(4, 4);
  CHECK_THROWS_AS((void)evolve({h, c_bad, rho0, ts, kKappa}), ConfigError);

  RVec ts_desc(2);
  ts_desc << 1e-9, 0;
  CHECK_THROWS_AS((void)evolve({h, c, rho0, ts_desc, kKappa}), ConfigError);

  RVec ts_neg(2);
  ts_neg << -1e-9, 1e-9;
  CHECK_THROWS_AS((void)evolve({h, c, rho0, ts_neg, kKappa}), ConfigError);
}
