#include "jrsim/semiclassical.hpp"

#include "jrsim/csv.hpp"
#include "jrsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jrsim {

namespace {

Complex reflection(const LineModel& line, Real omega_probe) {
  Real x = 2.0 * k_2pi * omega_probe * line.Z0 * line.C_in;
  return 1.0 / Complex(1.0, x);
}

void check_line(const LineModel& line) {
  if (line.kappa_prime <= 0) throw ConfigError("line: kappa_prime must be positive");
  if (line.Z0 <= 0) throw ConfigError("line: Z0 must be positive");
  if (line.C_in < 0) throw ConfigError("line: C_in must be nonnegative");
  if (line.attenuation_A < 1) throw ConfigError("line: attenuation_A must be >= 1");
}

Real detuning(const KerrSystem& sys, QubitState qs, Real omega_d) {
  return (qs == QubitState::g ? sys.omega_g : sys.omega_e) - omega_d;
}

// |F|^2 as a function of n along the response curve; its sign against the
// actual drive power locates the steady states.
Real cubic(Real n, Real delta, Real kappa, Real K, Real f2) {
  Real w = delta + K * n;
  return (w * w + kappa * kappa / 4.0) * n - f2;
}

Real cubic_slope(Real n, Real delta, Real kappa, Real K) {
  return 3.0 * K * K * n * n + 4.0 * K * delta * n + delta * delta +
         kappa * kappa / 4.0;
}

}  // namespace

EffectiveLine effective_line(const LineModel& line, Real omega_probe) {
  check_line(line);
  Complex gamma = reflection(line, omega_probe);
  EffectiveLine out;
  out.Gamma = gamma;
  out.kappa_eff = 0.5 * line.kappa_prime * (1.0 + gamma.real());
  out.omega_eff = line.omega_r_prime + line.kappa_prime * gamma.imag() / 4.0;
  return out;
}

Real drive_amplitude(const LineModel& line, Real omega_probe, Real power_watts) {
  check_line(line);
  if (omega_probe <= 0) throw ConfigError("drive_amplitude: probe frequency must be positive");
  if (power_watts < 0) throw ConfigError("drive_amplitude: power must be nonnegative");
  Complex gamma = reflection(line, omega_probe);
  Real f2_ang = 0.25 * (k_2pi * line.kappa_prime) * std::norm(1.0 - gamma) *
                power_watts /
                (line.attenuation_A * k_hbar * k_2pi * omega_probe);
  return std::sqrt(f2_ang) / k_2pi;
}

KerrSystem kerr_system(const FluxObservables& o, Real kappa) {
  return KerrSystem{o.omega_res_g, o.omega_res_e, kappa, o.K_avg};
}

SteadyStateSolution steady_states(const KerrSystem& sys, QubitState qs, Real omega_d,
                                  Complex F) {
  if (sys.kappa <= 0) throw ConfigError("steady_states: kappa must be positive");
  Real delta = detuning(sys, qs, omega_d);
  Real f2 = std::norm(F);
  Real half_k2 = delta * delta + sys.kappa * sys.kappa / 4.0;

  std::vector<Real> ns;
  if (f2 == 0) {
    ns.push_back(0);
  } else if (sys.K == 0) {
    ns.push_back(f2 / half_k2);
  } else {
    // Real roots of K^2 n^3 + 2 K delta n^2 + (delta^2 + kappa^2/4) n = |F|^2
    // from the companion matrix, polished by Newton.
    Real a = sys.K * sys.K;
    RMat comp = RMat::Zero(3, 3);
    comp(0, 2) = f2 / a;
    comp(1, 0) = 1;
    comp(1, 2) = -half_k2 / a;
    comp(2, 1) = 1;
    comp(2, 2) = -2.0 * sys.K * delta / a;
    Eigen::EigenSolver<RMat> es(comp);
    for (int k = 0; k < 3; ++k) {
      Complex lam = es.eigenvalues()(k);
      if (std::abs(lam.imag()) > 1e-8 * std::max<Real>(1.0, std::abs(lam.real())))
        continue;
      Real n = lam.real();
      for (int it = 0; it < 4; ++it) {
        Real slope = cubic_slope(n, delta, sys.kappa, sys.K);
        if (slope == 0) break;
        n -= cubic(n, delta, sys.kappa, sys.K, f2) / slope;
      }
      if (n >= 0) ns.push_back(n);
    }
    std::sort(ns.begin(), ns.end());
  }

  SteadyStateSolution sol;
  for (Real n : ns) {
    SteadyRoot r;
    r.n = n;
    r.alpha = F / Complex(sys.kappa / 2.0, delta + sys.K * n);
    r.stable = cubic_slope(n, delta, sys.kappa, sys.K) > 0;
    sol.roots.push_back(r);
  }
  return sol;
}

BifurcationPoint bifurcation_threshold(const KerrSystem& sys) {
  if (sys.kappa <= 0) throw ConfigError("bifurcation_threshold: kappa must be positive");
  if (sys.K == 0) throw ConfigError("bifurcation_threshold: self-Kerr is zero, no fold");
  Real sgn = sys.K > 0 ? 1.0 : -1.0;
  BifurcationPoint out;
  out.delta_bif = -sgn * std::sqrt(3.0) * sys.kappa / 2.0;
  out.n_bif = sys.kappa / (std::sqrt(3.0) * std::abs(sys.K));
  return out;
}

BistabilityMap bistability_map(const KerrSystem& sys, QubitState qs,
                               const RVec& omega_d, const RVec& F) {
  for (int i = 1; i < omega_d.size(); ++i)
    if (omega_d(i) <= omega_d(i - 1))
      throw ConfigError("bistability_map: omega_d grid not ascending");
  for (int j = 1; j < F.size(); ++j)
    if (F(j) <= F(j - 1)) throw ConfigError("bistability_map: F grid not ascending");

  BistabilityMap map;
  map.omega_d = omega_d;
  map.F = F;
  map.mask = MatX<int>::Zero(omega_d.size(), F.size());
  for (int i = 0; i < omega_d.size(); ++i)
    for (int j = 0; j < F.size(); ++j)
      map.mask(i, j) =
          steady_states(sys, qs, omega_d(i), F(j)).roots.size() == 3 ? 1 : 0;
  return map;
}

Vec s21(const LineModel& line, Real kappa_eff, Real omega_eff, const RVec& omega_probe,
        const S21Prefactor& pre) {
  check_line(line);
  if (kappa_eff <= 0) throw ConfigError("s21: kappa_eff must be positive");
  Vec out(omega_probe.size());
  for (int k = 0; k < omega_probe.size(); ++k) {
    Real w = omega_probe(k);
    Complex gamma = reflection(line, w);
    Complex dip = 1.0 - (1.0 + gamma) / (1.0 + gamma.real()) * kappa_eff /
                            Complex(kappa_eff, 2.0 * (w - omega_eff));
    Complex cal = (pre.A0 + pre.A_w * w) *
                  std::exp(Complex(0, -(pre.alpha0 + pre.tau * w)));
    out(k) = (1.0 - gamma) * dip * cal;
  }
  return out;
}

Vec integrate_transient(const KerrSystem& sys, QubitState qs, Real omega_d,
                        const std::function<Complex(Real)>& drive, const RVec& t_grid,
                        Complex alpha0, bool noise, std::uint64_t seed, int oversample) {
  if (sys.kappa < 0) throw ConfigError("integrate_transient: kappa must be nonnegative");
  if (oversample < 1) throw ConfigError("integrate_transient: oversample must be positive");
  if (t_grid.size() < 1) throw ConfigError("integrate_transient: empty time grid");
  for (int k = 1; k < t_grid.size(); ++k)
    if (t_grid(k) <= t_grid(k - 1))
      throw ConfigError("integrate_transient: time grid not ascending");

  Real delta = detuning(sys, qs, omega_d);

  // Resolve the fastest rotation actually reachable: detuning, linewidth, and
  // the Kerr shift at the largest amplitude in play.
  Real f_max = 0;
  for (int k = 0; k < t_grid.size(); ++k)
    f_max = std::max(f_max, std::abs(drive(t_grid(k))));
  Real n_ref = std::max<Real>(std::norm(alpha0), 1.0);
  if (f_max > 0 && sys.kappa > 0) {
    SteadyStateSolution sol = steady_states(sys, qs, omega_d, f_max);
    for (const SteadyRoot& r : sol.roots) n_ref = std::max(n_ref, r.n);
  }
  Real scale = std::abs(delta) + sys.kappa + 2.0 * std::abs(sys.K) * n_ref + 1.0;
  Real dt_target = 1.0 / (k_2pi * scale * oversample);

  auto rhs = [&](Complex a, Real t) {
    return k_2pi * (Complex(0, -1.0) * (delta + sys.K * std::norm(a)) * a -
                    sys.kappa / 2.0 * a + drive(t));
  };

  std::mt19937_64 gen = stream_for(seed, 0);
  std::normal_distribution<Real> gauss(0.0, 1.0);

  Vec out(t_grid.size());
  Complex a = alpha0;
  out(0) = a;
  for (int k = 1; k < t_grid.size(); ++k) {
    Real t0 = t_grid(k - 1), t1 = t_grid(k);
    int n_sub = std::max<int>(1, (int)std::ceil((t1 - t0) / dt_target));
    Real dt = (t1 - t0) / n_sub;
    if (noise) {
      Real amp = std::sqrt(k_2pi * sys.kappa * dt) / 2.0;
      for (int s = 0; s < n_sub; ++s) {
        Real t = t0 + s * dt;
        a += dt * rhs(a, t) + amp * Complex(gauss(gen), gauss(gen));
      }
    } else {
      for (int s = 0; s < n_sub; ++s) {
        Real t = t0 + s * dt;
        Complex k1 = rhs(a, t);
        Complex k2 = rhs(a + 0.5 * dt * k1, t + 0.5 * dt);
        Complex k3 = rhs(a + 0.5 * dt * k2, t + 0.5 * dt);
        Complex k4 = rhs(a + dt * k3, t + dt);
        a += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
    }
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      std::ostringstream os;
      os << "integrate_transient: amplitude diverged at t = " << t1 << " s";
      throw NumericalError(os.str());
    }
    out(k) = a;
  }
  return out;
}

std::string transient_csv(const RVec& t_grid, const Vec& trajectory) {
  if (t_grid.size() != trajectory.size())
    throw ConfigError("transient_csv: grid and trajectory sizes differ");
  CsvWriter csv({"t", "re_alpha", "im_alpha", "n"});
  for (int k = 0; k < t_grid.size(); ++k)
    csv.row({t_grid(k), trajectory(k).real(), trajectory(k).imag(),
             std::norm(trajectory(k))});
  return csv.str();
}

std::string bistability_csv(const BistabilityMap& map) {
  CsvWriter csv({"omega_d", "F", "bistable"});
  for (int i = 0; i < map.omega_d.size(); ++i)
    for (int j = 0; j < map.F.size(); ++j)
      csv.row({map.omega_d(i), map.F(j), (Real)map.mask(i, j)});
  return csv.str();
}

}  // namespace jrsim
