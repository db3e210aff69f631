#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "jrsim/semiclassical.hpp"

#include <cmath>
#include <random>

using namespace jrsim;

namespace {

// Paper-scale readout constants used across the cases.
const KerrSystem kSys{7.65e9, 7.636e9, 10.6e6, -0.963e6};

Real cubic_value(Real n, Real delta, Real kappa, Real K, Real f2) {
  Real u = delta + K * n;
  return (u * u + kappa * kappa / 4.0) * n - f2;
}

// Independent root finder: bisection on the monotone segments between the
// critical points of the response cubic.
std::vector<Real> scan_roots(Real delta, Real kappa, Real K, Real F) {
  Real f2 = F * F, c2 = delta * delta + kappa * kappa / 4.0;
  auto g = [&](Real n) { return cubic_value(n, delta, kappa, K, f2); };
  if (K == 0) return {f2 / c2};

  Real nmax = 1 + std::max({std::abs(2 * K * delta), c2, f2}) / (K * K);
  std::vector<Real> knots{0.0};
  Real qa = 3 * K * K, qb = 4 * K * delta;
  Real disc = qb * qb - 4 * qa * c2;
  if (disc > 0) {
    Real r1 = (-qb - std::sqrt(disc)) / (2 * qa);
    Real r2 = (-qb + std::sqrt(disc)) / (2 * qa);
    for (Real r : {std::min(r1, r2), std::max(r1, r2)})
      if (r > 0 && r < nmax) knots.push_back(r);
  }
  knots.push_back(nmax);

  std::vector<Real> out;
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    Real a = knots[s], b = knots[s + 1];
    Real ga = g(a);
    if (ga == 0 && s == 0) { out.push_back(a); continue; }
    if ((ga < 0) == (g(b) < 0)) continue;
    for (int it = 0; it < 200; ++it) {
      Real m = 0.5 * (a + b);
      if ((g(m) < 0) == (ga < 0)) {
        a = m;
        ga = g(m);
      } else {
        b = m;
      }
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

}  // namespace

TEST_CASE("input capacitor renormalizes the line as its reflection dictates") {
  LineModel line{10.6e6, 7.65e9, 50.0, 0.0, 1.0};

  SUBCASE("no capacitor: full reflection, bare parameters") {
    EffectiveLine el = effective_line(line, 7.65e9);
    CHECK(el.Gamma == Complex(1.0, 0.0));
    CHECK(el.kappa_eff == doctest::Approx(line.kappa_prime).epsilon(1e-12));
    CHECK(el.omega_eff == doctest::Approx(line.omega_r_prime).epsilon(1e-12));
  }

  SUBCASE("large capacitor: reflection dies, half the linewidth survives") {
    line.C_in = 1e-6;
    EffectiveLine el = effective_line(line, 7.65e9);
    CHECK(std::abs(el.Gamma) < 1e-6);
    CHECK(el.kappa_eff == doctest::Approx(line.kappa_prime / 2).epsilon(1e-6));
  }

  SUBCASE("finite capacitor pulls the frequency down, monotonically in Re Gamma") {
    Real prev_k = line.kappa_prime + 1;
    for (Real c : {1e-15, 5e-15, 2e-14, 1e-13}) {
      line.C_in = c;
      EffectiveLine el = effective_line(line, 7.65e9);
      CHECK(el.Gamma.imag() < 0);
      CHECK(el.omega_eff < line.omega_r_prime);
      CHECK(el.kappa_eff > line.kappa_prime / 2);
      CHECK(el.kappa_eff < prev_k);
      prev_k = el.kappa_eff;
    }
  }

  SUBCASE("rejects meaningless lines") {
    CHECK_THROWS_AS(effective_line({0.0, 7.65e9, 50.0, 0.0, 1.0}, 7.65e9), ConfigError);
    CHECK_THROWS_AS(effective_line({10.6e6, 7.65e9, 50.0, 0.0, 0.5}, 7.65e9),
                    ConfigError);
    CHECK_THROWS_AS(effective_line({10.6e6, 7.65e9, 50.0, -1e-15, 1.0}, 7.65e9),
                    ConfigError);
  }
}

TEST_CASE("drive amplitude follows the square root of applied power") {
  LineModel line{10.6e6, 7.65e9, 50.0, 40e-15, 1e8};
  Real f1 = drive_amplitude(line, 7.65e9, 1e-12);
  Real f4 = drive_amplitude(line, 7.65e9, 4e-12);
  CHECK(f1 > 0);
  CHECK(f4 == doctest::Approx(2 * f1).epsilon(1e-12));

  // Full reflection means nothing enters the resonator.
  line.C_in = 0;
  CHECK(drive_amplitude(line, 7.65e9, 1e-12) == 0.0);

  CHECK_THROWS_AS(drive_amplitude(line, -1.0, 1e-12), ConfigError);
  CHECK_THROWS_AS(drive_amplitude(line, 7.65e9, -1e-12), ConfigError);
}

TEST_CASE("steady states solve the response cubic branch by branch") {
  SUBCASE("no Kerr: single Lorentzian root") {
    KerrSystem lin{7.65e9, 7.636e9, 10.6e6, 0.0};
    Real delta = 4e6, F = 2e6;
    SteadyStateSolution sol = steady_states(lin, QubitState::g, lin.omega_g - delta, F);
    REQUIRE(sol.roots.size() == 1);
    Real want = F * F / (delta * delta + lin.kappa * lin.kappa / 4);
    CHECK(sol.roots[0].n == doctest::Approx(want).epsilon(1e-12));
    CHECK(sol.roots[0].stable);
  }

  SUBCASE("no drive: empty resonator") {
    SteadyStateSolution sol = steady_states(kSys, QubitState::g, kSys.omega_g, 0.0);
    REQUIRE(sol.roots.size() == 1);
    CHECK(sol.roots[0].n == 0.0);
    CHECK(sol.roots[0].stable);
  }

  SUBCASE("bistable point: three ordered roots, middle one unstable") {
    Real wd = kSys.omega_g - 11e6;
    SteadyStateSolution sol = steady_states(kSys, QubitState::g, wd, 1.78e7);
    REQUIRE(sol.roots.size() == 3);
    CHECK(sol.roots[0].n == doctest::Approx(4.0043363033).epsilon(1e-8));
    CHECK(sol.roots[1].n == doctest::Approx(7.5700484003).epsilon(1e-8));
    CHECK(sol.roots[2].n == doctest::Approx(11.2708904781).epsilon(1e-8));
    CHECK(sol.roots[0].stable);
    CHECK(!sol.roots[1].stable);
    CHECK(sol.roots[2].stable);
    for (const SteadyRoot& r : sol.roots) {
      // re-substitution and amplitude consistency
      Real res = cubic_value(r.n, 11e6, kSys.kappa, kSys.K, 1.78e7 * 1.78e7);
      CHECK(std::abs(res) < 1e-10 * 1.78e7 * 1.78e7);
      CHECK(std::norm(r.alpha) == doctest::Approx(r.n).epsilon(1e-9));
    }
  }

  SUBCASE("excited-state column uses the shifted resonance") {
    // Same detuning from omega_e as the g case had from omega_g: same roots.
    Real delta = 11e6;
    auto g = steady_states(kSys, QubitState::g, kSys.omega_g - delta, 1.78e7);
    auto e = steady_states(kSys, QubitState::e, kSys.omega_e - delta, 1.78e7);
    REQUIRE(g.roots.size() == e.roots.size());
    for (std::size_t k = 0; k < g.roots.size(); ++k)
      CHECK(g.roots[k].n == doctest::Approx(e.roots[k].n).epsilon(1e-12));
  }

  SUBCASE("kappa must be positive") {
    KerrSystem bad = kSys;
    bad.kappa = 0;
    CHECK_THROWS_AS(steady_states(bad, QubitState::g, bad.omega_g, 1e6), ConfigError);
  }
}

TEST_CASE("root sets match an independent sign-scan over random systems") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<Real> ud(-1, 1);
  int three_root_cases = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Real delta = 5e7 * ud(gen);
    Real kappa = 1e6 + 1.9e7 * std::abs(ud(gen));
    Real K = (ud(gen) > 0 ? 1 : -1) * (2e5 + 4.8e6 * std::abs(ud(gen)));
    Real F = 3e7 * std::abs(ud(gen));
    KerrSystem s{7.65e9, 7.65e9, kappa, K};
    SteadyStateSolution sol = steady_states(s, QubitState::g, s.omega_g - delta, F);
    std::vector<Real> want = scan_roots(delta, kappa, K, F);

    REQUIRE(sol.roots.size() == want.size());
    CHECK((sol.roots.size() == 1 || sol.roots.size() == 3));
    for (std::size_t k = 0; k < want.size(); ++k) {
      Real rel = std::abs(sol.roots[k].n - want[k]) /
                 std::max<Real>(1e-300, std::abs(want[k]));
      CHECK(rel < 1e-8);
    }
    if (sol.roots.size() == 3) {
      ++three_root_cases;
      CHECK(sol.roots[0].stable);
      CHECK(!sol.roots[1].stable);
      CHECK(sol.roots[2].stable);
      CHECK(sol.roots[0].n < sol.roots[1].n);
      CHECK(sol.roots[1].n < sol.roots[2].n);
    }
  }
  CHECK(three_root_cases > 10);
}

TEST_CASE("fold point comes out in closed form") {
  BifurcationPoint bif = bifurcation_threshold(kSys);
  CHECK(bif.delta_bif == doctest::Approx(9.179869e6).epsilon(1e-6));
  CHECK(bif.n_bif == doctest::Approx(6.355050).epsilon(1e-6));
  CHECK(bif.delta_bif > 0);   // softening Kerr folds below resonance

  KerrSystem hard = kSys;
  hard.K = +0.963e6;
  CHECK(bifurcation_threshold(hard).delta_bif < 0);
  CHECK(bifurcation_threshold(hard).n_bif == doctest::Approx(bif.n_bif).epsilon(1e-12));

  KerrSystem flat = kSys;
  flat.K = 0;
  CHECK_THROWS_AS(bifurcation_threshold(flat), ConfigError);
  KerrSystem lossless = kSys;
  lossless.kappa = 0;
  CHECK_THROWS_AS(bifurcation_threshold(lossless), ConfigError);
}

TEST_CASE("bistability mask shape and qubit-state translation") {
  SUBCASE("no Kerr, no fold anywhere") {
    KerrSystem lin = kSys;
    lin.K = 0;
    RVec wd = RVec::LinSpaced(21, kSys.omega_g - 3e7, kSys.omega_g + 1e7);
    RVec fg = RVec::LinSpaced(11, 1e6, 5e7);
    CHECK(bistability_map(lin, QubitState::g, wd, fg).mask.sum() == 0);
  }

  SUBCASE("excited mask is the ground mask shifted by 2 chi") {
    Real two_chi = kSys.omega_e - kSys.omega_g;
    RVec wd_g = RVec::LinSpaced(61, kSys.omega_g - 2e7, kSys.omega_g - 8e6);
    RVec wd_e = wd_g.array() + two_chi;
    RVec fg = RVec::LinSpaced(31, 1.4e7, 2.6e7);
    BistabilityMap mg = bistability_map(kSys, QubitState::g, wd_g, fg);
    BistabilityMap me = bistability_map(kSys, QubitState::e, wd_e, fg);
    CHECK(mg.mask.sum() > 0);
    CHECK((mg.mask - me.mask).cwiseAbs().sum() == 0);
  }

  SUBCASE("grids must ascend") {
    RVec bad(2), fg(2);
    bad << 7.65e9, 7.64e9;
    fg << 1e6, 2e6;
    CHECK_THROWS_AS(bistability_map(kSys, QubitState::g, bad, fg), ConfigError);
  }
}

TEST_CASE("mask cusp converges to the closed-form fold on grid refinement") {
  BifurcationPoint bif = bifurcation_threshold(kSys);
  Real u = bif.delta_bif + kSys.K * bif.n_bif;
  Real f_cusp = std::sqrt((u * u + kSys.kappa * kSys.kappa / 4) * bif.n_bif);

  Real prev_f_err = std::numeric_limits<Real>::infinity();
  Real prev_d_err = std::numeric_limits<Real>::infinity();
  for (Real h : {4e4, 1e4}) {
    int nw = (int)std::ceil(2.4e6 / h) + 1;
    int nf = (int)std::ceil(1.2e6 / h) + 1;
    RVec wd(nw), fg(nf);
    for (int i = 0; i < nw; ++i)
      wd(i) = kSys.omega_g - (bif.delta_bif + 1.2e6) + i * h;
    for (int j = 0; j < nf; ++j) fg(j) = f_cusp - 2e5 + j * h;
    BistabilityMap map = bistability_map(kSys, QubitState::g, wd, fg);

    // lowest drive row with any fold, and its detuning midpoint
    int j_first = -1;
    for (int j = 0; j < nf && j_first < 0; ++j)
      for (int i = 0; i < nw; ++i)
        if (map.mask(i, j)) { j_first = j; break; }
    REQUIRE(j_first >= 0);
    Real dsum = 0;
    int cnt = 0;
    int i_any = -1;
    for (int i = 0; i < nw; ++i)
      if (map.mask(i, j_first)) {
        dsum += kSys.omega_g - wd(i);
        ++cnt;
        if (i_any < 0) i_any = i;
      }

    Real f_err = std::abs(fg(j_first) - f_cusp);
    Real d_err = std::abs(dsum / cnt - bif.delta_bif);
    CHECK(f_err <= 6 * h);
    CHECK(d_err <= 5 * h);
    CHECK(f_err <= prev_f_err);
    CHECK(d_err <= prev_d_err);
    prev_f_err = f_err;
    prev_d_err = d_err;

    SteadyStateSolution sol =
        steady_states(kSys, QubitState::g, wd(i_any), fg(j_first));
    REQUIRE(sol.roots.size() == 3);
    CHECK(std::abs(sol.roots[1].n - bif.n_bif) < 0.2);
  }
}

TEST_CASE("transmission dips to zero on resonance and releases off it") {
  LineModel line{10.6e6, 7.65e9, 50.0, 0.0, 1.0};

  SUBCASE("real reflection: full extinction at zero detuning") {
    RVec w(1);
    w << 7.65e9;
    Vec tr = s21(line, 10.6e6, 7.65e9, w);
    CHECK(std::abs(tr(0)) < 1e-12);
  }

  SUBCASE("far detuned the dip disappears") {
    line.C_in = 40e-15;
    EffectiveLine el = effective_line(line, 7.65e9);
    RVec w(2);
    w << 7.65e9 - 5e9, 7.65e9 + 5e9;
    Vec tr = s21(line, el.kappa_eff, el.omega_eff, w);
    for (int k = 0; k < 2; ++k) {
      Complex gamma = 1.0 / Complex(1.0, 2.0 * k_2pi * w(k) * line.Z0 * line.C_in);
      CHECK(std::abs(tr(k) - (1.0 - gamma)) < 1e-2 * std::abs(1.0 - gamma));
    }
  }

  SUBCASE("calibration envelope multiplies straight through") {
    line.C_in = 40e-15;
    S21Prefactor pre{2.0, 1e-10, 0.3, 2e-9};
    RVec w(1);
    w << 7.6e9;
    Vec plain = s21(line, 10.6e6, 7.65e9, w);
    Vec dressed = s21(line, 10.6e6, 7.65e9, w, pre);
    Complex cal = (pre.A0 + pre.A_w * w(0)) *
                  std::exp(Complex(0, -(pre.alpha0 + pre.tau * w(0))));
    CHECK(std::abs(dressed(0) - plain(0) * cal) < 1e-12 * std::abs(dressed(0)));
  }

  CHECK_THROWS_AS(s21(line, 0.0, 7.65e9, RVec::Zero(1)), ConfigError);
}

TEST_CASE("transient integrator reproduces the linear decay exactly") {
  KerrSystem lin{7.65e9, 7.65e9, 10e6, 0.0};
  Real delta = 5e6;
  RVec ts(3);
  ts << 0, 5e-8, 1e-7;
  auto off = [](Real) { return Complex(0, 0); };
  Vec tr = integrate_transient(lin, QubitState::g, lin.omega_g - delta, off, ts,
                               Complex(2, 0));
  CHECK(tr(0) == Complex(2, 0));
  for (int k = 1; k < 3; ++k) {
    Complex want = 2.0 * std::exp(Complex(0, -k_2pi * delta * ts(k)) -
                                  k_2pi * lin.kappa / 2 * ts(k));
    CHECK(std::abs(tr(k) - want) < 1e-10);
  }

  RVec bad(2);
  bad << 1e-9, 0;
  CHECK_THROWS_AS(
      integrate_transient(lin, QubitState::g, lin.omega_g, off, bad, 0.0),
      ConfigError);
}

TEST_CASE("stable roots attract the dynamics, the unstable root repels") {
  Real wd = kSys.omega_g - 11e6;
  Real F = 1.78e7;
  SteadyStateSolution sol = steady_states(kSys, QubitState::g, wd, F);
  REQUIRE(sol.roots.size() == 3);
  RVec ts(2);
  ts << 0, 4e-6;
  auto cf = [F](Real) { return Complex(F, 0); };

  Vec vac = integrate_transient(kSys, QubitState::g, wd, cf, ts, 0.0);
  CHECK(std::norm(vac(1)) == doctest::Approx(sol.roots[0].n).epsilon(1e-6));

  Vec hi = integrate_transient(kSys, QubitState::g, wd, cf, ts,
                               sol.roots[2].alpha * 1.1);
  CHECK(std::norm(hi(1)) == doctest::Approx(sol.roots[2].n).epsilon(1e-6));

  // A nudge off the unstable branch falls to one attractor or the other.
  Vec up = integrate_transient(kSys, QubitState::g, wd, cf, ts,
                               sol.roots[1].alpha * 1.02);
  Vec dn = integrate_transient(kSys, QubitState::g, wd, cf, ts,
                               sol.roots[1].alpha * 0.98);
  CHECK(std::norm(up(1)) == doctest::Approx(sol.roots[2].n).epsilon(1e-6));
  CHECK(std::norm(dn(1)) == doctest::Approx(sol.roots[0].n).epsilon(1e-6));
}

TEST_CASE("hard turn-on overshoots before settling into the high branch") {
  Real wd = kSys.omega_g - 9.5e6;
  Real F = 2.6e7;
  int m = 400;
  RVec ts(m);
  for (int k = 0; k < m; ++k) ts(k) = k * 1e-6 / (m - 1);
  auto cf = [F](Real) { return Complex(F, 0); };
  Vec tr = integrate_transient(kSys, QubitState::g, wd, cf, ts, 0.0);

  Real peak = 0, settle = std::norm(tr(m - 1));
  int argpeak = 0;
  for (int k = 0; k < m; ++k)
    if (std::norm(tr(k)) > peak) { peak = std::norm(tr(k)); argpeak = k; }
  CHECK(peak == doctest::Approx(17.396716).epsilon(1e-4));
  CHECK(settle == doctest::Approx(14.381301).epsilon(1e-4));
  CHECK(peak > 1.15 * settle);
  CHECK(argpeak < m / 4);
}

TEST_CASE("stochastic runs are seed-reproducible and hold the vacuum floor") {
  KerrSystem lin{7.65e9, 7.65e9, 10.6e6, 0.0};
  int m = 20001;
  RVec ts(m);
  for (int k = 0; k < m; ++k) ts(k) = k * 2e-5 / (m - 1);
  auto off = [](Real) { return Complex(0, 0); };

  Vec a = integrate_transient(lin, QubitState::g, lin.omega_g, off, ts, 0.0, true, 7);
  Vec b = integrate_transient(lin, QubitState::g, lin.omega_g, off, ts, 0.0, true, 7);
  Vec c = integrate_transient(lin, QubitState::g, lin.omega_g, off, ts, 0.0, true, 8);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - c).cwiseAbs().maxCoeff() > 1e-3);

  // Undriven with vacuum-convention noise: mean photon number near one half.
  Real mean = 0;
  int skip = m / 10;
  for (int k = skip; k < m; ++k) mean += std::norm(a(k));
  mean /= (m - skip);
  CHECK(mean > 0.40);
  CHECK(mean < 0.60);
}

TEST_CASE("csv dumps carry the documented columns") {
  RVec ts(3);
  ts << 0, 1e-9, 2e-9;
  Vec tr(3);
  tr << Complex(1, 0), Complex(0.5, 0.5), Complex(0, 0.25);
  std::string txt = transient_csv(ts, tr);
  CHECK(txt.substr(0, txt.find('\n')) == "t,re_alpha,im_alpha,n");
  CHECK(std::count(txt.begin(), txt.end(), '\n') == 4);
  CHECK_THROWS_AS(transient_csv(ts, Vec::Zero(2)), ConfigError);

  RVec wd = RVec::LinSpaced(3, 7.63e9, 7.65e9);
  RVec fg = RVec::LinSpaced(2, 1e6, 2e6);
  BistabilityMap map = bistability_map(kSys, QubitState::g, wd, fg);
  std::string grid = bistability_csv(map);
  CHECK(grid.substr(0, grid.find('\n')) == "omega_d,F,bistable");
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 7);
}
