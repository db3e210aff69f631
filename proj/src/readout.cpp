#include "jrsim/readout.hpp"

#include "jrsim/csv.hpp"
#include "jrsim/parallel.hpp"
#include "jrsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

namespace jrsim {

namespace {

void check_readout(const ReadoutConfig& cfg) {
  if (!(cfg.sys.kappa > 0)) throw ConfigError("readout: kappa must be positive");
  if (!(cfg.tau_m > 0) || !(cfg.tau_w > 0))
    throw ConfigError("readout: pulse and wait times must be positive");
  if (!(cfg.eta > 0) || cfg.eta > 0.5)
    throw ConfigError("readout: eta must lie in (0, 1/2]");
  if (!(cfg.T1 > 0)) throw ConfigError("readout: T1 must be positive");
  if (cfg.n_shots < 1) throw ConfigError("readout: n_shots must be positive");
  if (cfg.n_bins < 4) throw ConfigError("readout: need at least 4 bins per window");
  if (cfg.oversample < 1) throw ConfigError("readout: oversample must be positive");
  if (cfg.prep_error < 0 || cfg.prep_error >= 1)
    throw ConfigError("readout: prep_error must lie in [0, 1)");
  if (cfg.up_rate < 0) throw ConfigError("readout: up_rate must be nonnegative");
  if (cfg.F < 0) throw ConfigError("readout: drive amplitude must be nonnegative");
  if (!(cfg.boost_factor > 0)) throw ConfigError("readout: boost_factor must be positive");
  if (cfg.boost_fraction < 0 || cfg.boost_fraction > 1)
    throw ConfigError("readout: boost_fraction must lie in [0, 1]");
}

QubitState flipped(QubitState s) {
  return s == QubitState::g ? QubitState::e : QubitState::g;
}

using StatePath = std::vector<std::pair<Real, QubitState>>;

QubitState state_at(const StatePath& path, Real t) {
  QubitState s = path.front().second;
  for (const auto& seg : path) {
    if (seg.first <= t) s = seg.second;
    else break;
  }
  return s;
}

// Qubit trajectory over the whole sequence: exponential waiting times with the
// state-dependent rate, plus the deterministic flip right before the measured
// window on the shots that get the inversion pulse.
StatePath qubit_path(const ReadoutConfig& cfg, Protocol prot, bool parity_e,
                     std::mt19937_64& rng, bool& jumped, QubitState& prep) {
  const Real t_total = 2 * cfg.tau_m + cfg.tau_w;
  const Real t_pi = cfg.tau_m + cfg.tau_w;
  const bool use_pi = prot == Protocol::assign && parity_e;
  prep = parity_e ? QubitState::e : QubitState::g;
  QubitState s = prot == Protocol::assign ? QubitState::g : prep;
  if (cfg.prep_error > 0) {
    std::uniform_real_distribution<Real> u(0.0, 1.0);
    if (u(rng) < cfg.prep_error) s = flipped(s);
  }
  Real down = std::isinf(cfg.T1) ? 0.0 : 1.0 / cfg.T1;

  StatePath path{{0.0, s}};
  jumped = false;
  Real t = 0;
  bool pi_pending = use_pi;
  while (t < t_total) {
    Real forced = pi_pending ? t_pi : t_total;
    Real rate = s == QubitState::e ? down : cfg.up_rate;
    Real t_jump = std::numeric_limits<Real>::infinity();
    if (rate > 0) {
      std::exponential_distribution<Real> wait(rate);
      t_jump = t + wait(rng);
    }
    if (t_jump < forced) {
      t = t_jump;
      s = flipped(s);
      path.emplace_back(t, s);
      jumped = true;
    } else if (pi_pending) {
      t = t_pi;
      s = flipped(s);
      path.emplace_back(t, s);
      pi_pending = false;
    } else {
      break;
    }
  }
  return path;
}

using Samples = std::vector<std::pair<Real, Complex>>;

// Advance the cavity across [a, b], emitting (t, alpha) at every point of
// emit_grid plus every qubit jump inside the span. Each constant-state piece
// is one integrate_transient call; with noise on, its seed comes from the
// shot's own stream so the whole shot replays from one counter.
void integrate_span(const ReadoutConfig& cfg, const StatePath& path, Real a, Real b,
                    const std::vector<Real>& emit_grid, Real drive_amp, bool noise,
                    std::mt19937_64* rng, Complex& alpha, Samples& out) {
  const Real tol = 1e-15;
  std::vector<Real> cuts;
  for (const auto& seg : path)
    if (seg.first > a + tol && seg.first < b - tol) cuts.push_back(seg.first);
  cuts.push_back(b);

  const Real t_boost = a + cfg.boost_fraction * cfg.tau_m;
  const Real boosted = drive_amp * cfg.boost_factor;
  auto drive = [=](Real t) { return Complex(t < t_boost ? boosted : drive_amp, 0.0); };

  out.emplace_back(a, alpha);
  Real p0 = a;
  std::size_t gi = 0;
  for (Real p1 : cuts) {
    std::vector<Real> pts{p0};
    while (gi < emit_grid.size() && emit_grid[gi] <= p0 + tol) ++gi;
    while (gi < emit_grid.size() && emit_grid[gi] < p1 - tol) pts.push_back(emit_grid[gi++]);
    pts.push_back(p1);

    RVec grid(static_cast<int>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) grid(static_cast<int>(k)) = pts[k];
    QubitState s = state_at(path, 0.5 * (p0 + p1));
    std::uint64_t piece_seed = noise && rng ? (*rng)() : 0;
    Vec traj = integrate_transient(cfg.sys, s, cfg.omega_d, drive, grid, alpha, noise,
                                   piece_seed, cfg.oversample);
    for (int k = 1; k < traj.size(); ++k) out.emplace_back(pts[k], traj(k));
    alpha = traj(traj.size() - 1);
    p0 = p1;
  }
}

// Trapezoid average of alpha over each bin; the sample list contains every
// bin edge by construction.
Vec bin_means(const Samples& samples, const std::vector<Real>& edges) {
  const Real tol = 1e-15;
  Vec out(static_cast<int>(edges.size()) - 1);
  std::size_t i = 0;
  for (int k = 0; k + 1 < static_cast<int>(edges.size()); ++k) {
    Complex acc = 0;
    while (i + 1 < samples.size() && samples[i + 1].first <= edges[k + 1] + tol) {
      Real dt = samples[i + 1].first - samples[i].first;
      acc += dt * 0.5 * (samples[i].second + samples[i + 1].second);
      ++i;
    }
    out(k) = acc / (edges[k + 1] - edges[k]);
  }
  return out;
}

Real mean_photons(const Samples& samples) {
  Real acc = 0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    Real dt = samples[i + 1].first - samples[i].first;
    acc += dt * 0.5 * (std::norm(samples[i].second) + std::norm(samples[i + 1].second));
  }
  Real span = samples.back().first - samples.front().first;
  return span > 0 ? acc / span : std::norm(samples.front().second);
}

std::vector<Real> window_edges(Real t0, Real tau, int n_bins) {
  std::vector<Real> edges(n_bins + 1);
  for (int k = 0; k <= n_bins; ++k) edges[k] = t0 + tau * Real(k) / n_bins;
  return edges;
}

struct WindowWeights {
  Vec w1, w2;
};

// Noiseless jump-free references with the qubit held in g or e fix the mean
// records both windows are matched against. When the two references coincide
// there is nothing to match and the weights drop to uniform.
Vec weights_or_uniform(const Vec& mean_g, const Vec& mean_e) {
  try {
    return optimal_weights(mean_g, mean_e);
  } catch (const NumericalError&) {
    return Vec::Constant(mean_g.size(), Complex(1.0 / std::sqrt(Real(mean_g.size())), 0));
  }
}

// Mean records for a qubit held in s across the whole sequence. With cavity
// noise on, the reference is the average over n_avg noisy trajectories drawn
// from streams far outside the per-shot counter range, so the template matches
// what the shots actually produce (latch jitter included) and stays tied to
// the same seed.
std::pair<Vec, Vec> mean_reference(const ReadoutConfig& cfg, QubitState s,
                                   const std::vector<Real>& e1, const std::vector<Real>& e2,
                                   Real scale) {
  const StatePath path{{0.0, s}};
  const Real t_w2 = cfg.tau_m + cfg.tau_w;
  const int n_avg = cfg.cavity_noise ? 128 : 1;
  Vec acc1 = Vec::Zero(cfg.n_bins), acc2 = Vec::Zero(cfg.n_bins);
  for (int i = 0; i < n_avg; ++i) {
    std::mt19937_64 rng = stream_for(
        cfg.seed, (1ull << 62) + 2ull * static_cast<std::uint64_t>(i) + (s == QubitState::e));
    std::mt19937_64* rp = cfg.cavity_noise ? &rng : nullptr;
    Complex alpha = 0;
    Samples s1, sw, s2;
    integrate_span(cfg, path, 0.0, cfg.tau_m, e1, cfg.F, cfg.cavity_noise, rp, alpha, s1);
    integrate_span(cfg, path, cfg.tau_m, t_w2, {cfg.tau_m, t_w2}, 0.0, cfg.cavity_noise, rp,
                   alpha, sw);
    integrate_span(cfg, path, t_w2, t_w2 + cfg.tau_m, e2, cfg.F, cfg.cavity_noise, rp, alpha, s2);
    acc1 += bin_means(s1, e1);
    acc2 += bin_means(s2, e2);
  }
  return {scale / Real(n_avg) * acc1, scale / Real(n_avg) * acc2};
}

WindowWeights reference_weights(const ReadoutConfig& cfg) {
  const auto e1 = window_edges(0.0, cfg.tau_m, cfg.n_bins);
  const auto e2 = window_edges(cfg.tau_m + cfg.tau_w, cfg.tau_m, cfg.n_bins);
  Real scale = std::sqrt(cfg.eta * k_2pi * cfg.sys.kappa * (cfg.tau_m / cfg.n_bins));
  auto [g1, g2] = mean_reference(cfg, QubitState::g, e1, e2, scale);
  auto [f1, f2] = mean_reference(cfg, QubitState::e, e1, e2, scale);
  return {weights_or_uniform(g1, f1), weights_or_uniform(g2, f2)};
}

Complex integrate_record(const Vec& weights, const Vec& record) {
  Complex acc = 0;
  for (int k = 0; k < weights.size(); ++k) acc += weights(k) * record(k);
  return acc;
}

ShotRecord run_shot(const ReadoutConfig& cfg, Protocol prot, int index,
                    std::uint64_t shot_offset, const WindowWeights& ww) {
  std::mt19937_64 rng = stream_for(cfg.seed, shot_offset + static_cast<std::uint64_t>(index));
  std::normal_distribution<Real> gauss(0.0, 1.0);

  ShotRecord rec;
  bool jumped = false;
  StatePath path = qubit_path(cfg, prot, index % 2 == 1, rng, jumped, rec.prep);
  rec.jumped = jumped;
  rec.truth_final = path.back().second;

  const Real dt_bin = cfg.tau_m / cfg.n_bins;
  const Real scale = std::sqrt(cfg.eta * k_2pi * cfg.sys.kappa * dt_bin);
  const Real t_w2 = cfg.tau_m + cfg.tau_w;
  const auto e1 = window_edges(0.0, cfg.tau_m, cfg.n_bins);
  const auto e2 = window_edges(t_w2, cfg.tau_m, cfg.n_bins);
  const Real inv_sqrt2 = 1.0 / std::sqrt(Real(2));

  auto record_window = [&](const Samples& samples, const std::vector<Real>& edges) {
    Vec rec_bins = scale * bin_means(samples, edges);
    if (cfg.record_noise)
      for (int k = 0; k < rec_bins.size(); ++k)
        rec_bins(k) += Complex(gauss(rng), gauss(rng)) * inv_sqrt2;
    return rec_bins;
  };

  Complex alpha = 0;
  Samples s1, sw, s2;
  integrate_span(cfg, path, 0.0, cfg.tau_m, e1, cfg.F, cfg.cavity_noise, &rng, alpha, s1);
  rec.iq_pre = integrate_record(ww.w1, record_window(s1, e1));
  integrate_span(cfg, path, cfg.tau_m, t_w2, {cfg.tau_m, t_w2}, 0.0, cfg.cavity_noise, &rng,
                 alpha, sw);
  integrate_span(cfg, path, t_w2, t_w2 + cfg.tau_m, e2, cfg.F, cfg.cavity_noise, &rng, alpha, s2);
  rec.iq = integrate_record(ww.w2, record_window(s2, e2));
  rec.mean_n = mean_photons(s2);

  if (cfg.F > 0) {
    QubitState s_w2 = state_at(path, t_w2 + 0.25 * dt_bin);
    SteadyStateSolution sol = steady_states(cfg.sys, s_w2, cfg.omega_d, cfg.F);
    if (sol.roots.size() == 3) {
      Complex a0 = s2.front().second, a1 = s2.back().second;
      auto basin = [&](Complex a) {
        return std::abs(a - sol.roots[0].alpha) <= std::abs(a - sol.roots[2].alpha) ? 0 : 2;
      };
      rec.switched_branch = basin(a0) != basin(a1);
    }
  }
  return rec;
}

std::vector<Complex> centroids_of(const std::vector<std::pair<Complex, int>>& training,
                                  int n_classes) {
  std::vector<Complex> cen(n_classes, Complex(0, 0));
  std::vector<int> count(n_classes, 0);
  for (const auto& [z, label] : training) {
    if (label < 0 || label >= n_classes)
      throw ConfigError("classify: training label out of range");
    cen[label] += z;
    ++count[label];
  }
  for (int c = 0; c < n_classes; ++c) {
    if (count[c] < 2) throw ConfigError("classify: need at least 2 training points per class");
    cen[c] /= Real(count[c]);
  }
  return cen;
}

Discriminant discriminant_from(const Complex& cen_g, const Complex& cen_e) {
  Complex d = cen_e - cen_g;
  Real nrm = std::abs(d);
  if (nrm == 0) throw NumericalError("classify: coincident class centroids");
  return {0.5 * (cen_g + cen_e), d / nrm};
}

bool reads_e(const Discriminant& disc, Complex iq) {
  return std::real(std::conj(disc.axis) * (iq - disc.midpoint)) > 0;
}

Real mixture_pdf(const DoubleGaussian& f, Real x, Real floor_sigma) {
  auto comp = [&](Real mu, Real sg) {
    Real s = std::max(sg, floor_sigma);
    Real z = (x - mu) / s;
    return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * k_pi));
  };
  return f.weight * comp(f.mu1, f.sigma1) + (1.0 - f.weight) * comp(f.mu2, f.sigma2);
}

Real half_overlap(const DoubleGaussian& a, const DoubleGaussian& b) {
  Real mus[4] = {a.mu1, a.mu2, b.mu1, b.mu2};
  Real sgs[4] = {a.sigma1, a.sigma2, b.sigma1, b.sigma2};
  Real lo = mus[0], hi = mus[0], smax = 0;
  for (int i = 0; i < 4; ++i) {
    lo = std::min(lo, mus[i]);
    hi = std::max(hi, mus[i]);
    smax = std::max(smax, sgs[i]);
  }
  Real span = std::max(hi - lo, std::abs(hi) + std::abs(lo));
  Real floor_sigma = std::max(smax, std::max(span, Real(1))) * 1e-12;
  Real s = std::max(smax, floor_sigma);
  lo -= 10 * s;
  hi += 10 * s;
  const int n = 8001;
  Real h = (hi - lo) / (n - 1), acc = 0;
  for (int i = 0; i < n; ++i) {
    Real x = lo + i * h;
    Real v = std::min(mixture_pdf(a, x, floor_sigma), mixture_pdf(b, x, floor_sigma));
    acc += (i == 0 || i == n - 1) ? 0.5 * v : v;
  }
  return 0.5 * acc * h;
}

// Empirical single-component stand-in for batches too small or too clean for
// the mixture fit.
DoubleGaussian single_component(const std::vector<Real>& xs) {
  Real n = Real(xs.size());
  Real mean = 0;
  for (Real x : xs) mean += x;
  mean /= std::max(n, Real(1));
  Real var = 0;
  for (Real x : xs) var += (x - mean) * (x - mean);
  Real sd = std::sqrt(var / std::max(n, Real(1)));
  return {mean, sd, mean, sd, 1.0};
}

DoubleGaussian robust_mixture(const std::vector<Real>& xs) {
  if (xs.size() >= 100) {
    try {
      return double_gaussian_fit(xs);
    } catch (const NumericalError&) {
    } catch (const ConvergenceError&) {
    }
  }
  return single_component(xs);
}

// Slide the cut along the centroid axis to the balanced-error minimum on the
// calibration batch. Ties resolve toward the centroid midpoint, so clean
// well-separated data keeps the plain bisector.
Discriminant refine_threshold(Discriminant disc,
                              const std::vector<std::pair<Complex, int>>& cal) {
  std::vector<Real> x_g, x_e;
  Real lo = 0, hi = 0;
  for (const auto& [z, label] : cal) {
    Real x = std::real(std::conj(disc.axis) * (z - disc.midpoint));
    (label ? x_e : x_g).push_back(x);
  }
  if (x_g.empty() || x_e.empty()) return disc;
  long n_g = static_cast<long>(x_g.size()), n_e = static_cast<long>(x_e.size());
  Real span = 0;
  for (Real x : x_g) span = std::max(span, std::abs(x));
  for (Real x : x_e) span = std::max(span, std::abs(x));
  lo = -span;
  hi = span;

  const int n_cand = 81;
  long best_cost = -1;
  Real best_t = 0;
  for (int k = 0; k < n_cand; ++k) {
    Real t = lo + (hi - lo) * Real(k) / (n_cand - 1);
    long wrong_g = 0, wrong_e = 0;
    for (Real x : x_g) wrong_g += x > t;
    for (Real x : x_e) wrong_e += x <= t;
    long cost = wrong_g * n_e + wrong_e * n_g;
    if (best_cost < 0 || cost < best_cost ||
        (cost == best_cost && std::abs(t) < std::abs(best_t))) {
      best_cost = cost;
      best_t = t;
    }
  }
  disc.midpoint += best_t * disc.axis;
  return disc;
}

}  // namespace

std::vector<ShotRecord> simulate_shots(const ReadoutConfig& cfg, Protocol protocol,
                                       std::uint64_t shot_offset) {
  check_readout(cfg);
  WindowWeights ww = reference_weights(cfg);
  std::vector<ShotRecord> out(cfg.n_shots);
  parallel_for(
      cfg.n_shots, [&](int i) { out[i] = run_shot(cfg, protocol, i, shot_offset, ww); },
      cfg.threads);
  return out;
}

Vec optimal_weights(const Vec& mean_g, const Vec& mean_e) {
  if (mean_g.size() != mean_e.size() || mean_g.size() == 0)
    throw ConfigError("optimal_weights: trajectory grids differ");
  Vec d = mean_e - mean_g;
  Real nrm = d.norm();
  Real ref = std::max(mean_g.norm(), mean_e.norm());
  if (nrm <= 1e-12 * std::max(ref, Real(1e-300)))
    throw NumericalError("optimal_weights: identical mean trajectories");
  return d.conjugate() / nrm;
}

std::vector<int> classify(const std::vector<Complex>& iqs,
                          const std::vector<std::pair<Complex, int>>& training,
                          int n_classes) {
  if (n_classes != 2 && n_classes != 3)
    throw ConfigError("classify: n_classes must be 2 or 3");
  std::vector<Complex> cen = centroids_of(training, n_classes);
  std::vector<int> labels(iqs.size());
  for (std::size_t i = 0; i < iqs.size(); ++i) {
    int best = 0;
    Real best_d = std::abs(iqs[i] - cen[0]);
    for (int c = 1; c < n_classes; ++c) {
      Real d = std::abs(iqs[i] - cen[c]);
      if (d < best_d) {
        best = c;
        best_d = d;
      }
    }
    labels[i] = best;
  }
  return labels;
}

DoubleGaussian double_gaussian_fit(const std::vector<Real>& values) {
  const int n = static_cast<int>(values.size());
  if (n < 100) throw ConfigError("double_gaussian_fit: need at least 100 samples");
  Real lo = values[0], hi = values[0], mean = 0;
  for (Real x : values) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    mean += x;
  }
  mean /= n;
  Real var = 0;
  for (Real x : values) var += (x - mean) * (x - mean);
  var /= n;
  Real sd = std::sqrt(var);
  if (!(hi > lo) || !(sd > 0))
    throw NumericalError("double_gaussian_fit: degenerate data");

  // Histogram-peak initialization: global mode plus the best mode at least an
  // eighth of the range away.
  const int n_hist = 64;
  std::vector<Real> counts(n_hist, 0);
  for (Real x : values) {
    int b = std::min(n_hist - 1, static_cast<int>((x - lo) / (hi - lo) * n_hist));
    counts[b] += 1;
  }
  std::vector<Real> smooth(n_hist);
  for (int i = 0; i < n_hist; ++i)
    smooth[i] = counts[std::max(0, i - 1)] + counts[i] + counts[std::min(n_hist - 1, i + 1)];
  int p1 = 0;
  for (int i = 1; i < n_hist; ++i)
    if (smooth[i] > smooth[p1]) p1 = i;
  int p2 = -1;
  for (int i = 0; i < n_hist; ++i) {
    if (std::abs(i - p1) < n_hist / 8) continue;
    if (p2 < 0 || smooth[i] > smooth[p2]) p2 = i;
  }
  auto center = [&](int b) { return lo + (b + 0.5) * (hi - lo) / n_hist; };
  Real mu[2] = {center(p1), p2 >= 0 && smooth[p2] > 0 ? center(p2) : center(p1) + sd};
  Real sg[2] = {sd / 2, sd / 2};
  Real w1 = 0.5;
  const Real sigma_floor = std::max(sd, hi - lo) * 1e-9;

  const int max_iters = 2000;
  Real prev_ll = -std::numeric_limits<Real>::infinity();
  Real ll = prev_ll;
  bool converged = false;
  std::vector<Real> resp(n);
  for (int it = 0; it < max_iters; ++it) {
    Real log_w1 = std::log(std::max(w1, Real(1e-300)));
    Real log_w2 = std::log(std::max(1.0 - w1, Real(1e-300)));
    ll = 0;
    for (int i = 0; i < n; ++i) {
      auto logn = [&](Real m, Real s) {
        Real z = (values[i] - m) / s;
        return -0.5 * z * z - std::log(s) - 0.5 * std::log(2.0 * k_pi);
      };
      Real l1 = log_w1 + logn(mu[0], sg[0]);
      Real l2 = log_w2 + logn(mu[1], sg[1]);
      Real m = std::max(l1, l2);
      ll += m + std::log(std::exp(l1 - m) + std::exp(l2 - m));
      resp[i] = 1.0 / (1.0 + std::exp(l2 - l1));
    }
    Real r1 = 0, m1 = 0, m2 = 0;
    for (int i = 0; i < n; ++i) {
      r1 += resp[i];
      m1 += resp[i] * values[i];
      m2 += (1.0 - resp[i]) * values[i];
    }
    Real r2 = n - r1;
    if (r1 > 1e-10 * n) mu[0] = m1 / r1;
    if (r2 > 1e-10 * n) mu[1] = m2 / r2;
    Real v1 = 0, v2 = 0;
    for (int i = 0; i < n; ++i) {
      v1 += resp[i] * (values[i] - mu[0]) * (values[i] - mu[0]);
      v2 += (1.0 - resp[i]) * (values[i] - mu[1]) * (values[i] - mu[1]);
    }
    if (r1 > 1e-10 * n) sg[0] = std::max(std::sqrt(v1 / r1), sigma_floor);
    if (r2 > 1e-10 * n) sg[1] = std::max(std::sqrt(v2 / r2), sigma_floor);
    w1 = r1 / n;
    if (std::abs(ll - prev_ll) < 1e-10 * (1.0 + std::abs(ll))) {
      converged = true;
      break;
    }
    prev_ll = ll;
  }
  if (!converged)
    throw ConvergenceError("double_gaussian_fit: no convergence after 2000 iterations");

  // Keep the second component only when it earns its three extra parameters.
  Real ll_single = 0;
  for (Real x : values) {
    Real z = (x - mean) / sd;
    ll_single += -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * k_pi);
  }
  Real bic_mix = -2.0 * ll + 5.0 * std::log(Real(n));
  Real bic_single = -2.0 * ll_single + 2.0 * std::log(Real(n));
  if (bic_single <= bic_mix) return {mean, sd, mean, sd, 1.0};

  if (mu[0] <= mu[1]) return {mu[0], sg[0], mu[1], sg[1], w1};
  return {mu[1], sg[1], mu[0], sg[0], 1.0 - w1};
}

FidelityReport error_budget(const std::vector<ShotRecord>& shots, const Discriminant& disc,
                            const DoubleGaussian& fit_g, const DoubleGaussian& fit_e,
                            const ReadoutConfig& cfg) {
  check_readout(cfg);
  FidelityReport r;
  int n_g = 0, n_e = 0, wrong_g = 0, wrong_e = 0;
  for (const ShotRecord& s : shots) {
    bool as_e = reads_e(disc, s.iq);
    if (s.prep == QubitState::g) {
      ++n_g;
      wrong_g += as_e;
    } else {
      ++n_e;
      wrong_e += !as_e;
    }
  }
  r.eps_g = n_g ? Real(wrong_g) / n_g : 0;
  r.eps_e = n_e ? Real(wrong_e) / n_e : 0;
  // A two-class discriminant can always be flipped, so below-chance scores
  // report at the coin-flip floor.
  r.F_assign = std::max(Real(0.5), 1.0 - 0.5 * (r.eps_g + r.eps_e));
  r.eps_sep = half_overlap(fit_g, fit_e);
  if (std::isinf(cfg.T1)) {
    r.eps_cl = 0;
    r.eps_r_qnd = 0;
  } else {
    r.eps_cl = cfg.tau_m / (2.0 * cfg.T1);
    r.eps_r_qnd = cfg.tau_w / (2.0 * cfg.T1) + cfg.tau_m / cfg.T1;
  }
  r.threshold = disc;
  return r;
}

FidelityReport fidelity_protocols(const ReadoutConfig& cfg) {
  check_readout(cfg);
  const std::uint64_t n = static_cast<std::uint64_t>(cfg.n_shots);

  std::vector<ShotRecord> cal = simulate_shots(cfg, Protocol::qnd, 0);
  std::vector<std::pair<Complex, int>> train_pre, train_m;
  train_pre.reserve(cal.size());
  train_m.reserve(cal.size());
  for (const ShotRecord& s : cal) {
    int label = s.prep == QubitState::e;
    train_pre.emplace_back(s.iq_pre, label);
    train_m.emplace_back(s.iq, label);
  }
  std::vector<Complex> cen_pre = centroids_of(train_pre, 2);
  std::vector<Complex> cen_m = centroids_of(train_m, 2);
  Discriminant disc_pre = refine_threshold(discriminant_from(cen_pre[0], cen_pre[1]), train_pre);
  Discriminant disc_m = refine_threshold(discriminant_from(cen_m[0], cen_m[1]), train_m);

  std::vector<ShotRecord> eva = simulate_shots(cfg, Protocol::assign, n);
  std::vector<ShotRecord> kept;
  kept.reserve(eva.size());
  for (const ShotRecord& s : eva)
    if (!reads_e(disc_pre, s.iq_pre)) kept.push_back(s);

  std::vector<Real> x_g, x_e;
  for (const ShotRecord& s : kept) {
    Real x = std::real(std::conj(disc_m.axis) * (s.iq - disc_m.midpoint));
    (s.prep == QubitState::g ? x_g : x_e).push_back(x);
  }
  DoubleGaussian fit_g = robust_mixture(x_g);
  DoubleGaussian fit_e = robust_mixture(x_e);
  FidelityReport r = error_budget(kept, disc_m, fit_g, fit_e, cfg);

  std::vector<ShotRecord> evq = simulate_shots(cfg, Protocol::qnd, 2 * n);
  int n_g1 = 0, n_e1 = 0, rep_g = 0, rep_e = 0;
  for (const ShotRecord& s : evq) {
    bool m1 = reads_e(disc_pre, s.iq_pre);
    bool m2 = reads_e(disc_m, s.iq);
    if (m1) {
      ++n_e1;
      rep_e += m2;
    } else {
      ++n_g1;
      rep_g += !m2;
    }
  }
  r.F_QND = 0.5 * ((n_g1 ? Real(rep_g) / n_g1 : 0) + (n_e1 ? Real(rep_e) / n_e1 : 0));
  return r;
}

Real stark_photon_number(Real delta_q, Real chi) {
  if (chi == 0) throw ConfigError("stark_photon_number: chi must be nonzero");
  return delta_q / (2.0 * chi);
}

RingdownFit kappa_from_ringdown(const std::vector<std::pair<Real, Real>>& n_of_t) {
  const int n = static_cast<int>(n_of_t.size());
  if (n < 5) throw ConfigError("kappa_from_ringdown: need at least 5 samples");
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [t, photons] : n_of_t) {
    if (!(photons > 0))
      throw ConfigError("kappa_from_ringdown: photon numbers must be positive");
    Real y = std::log(photons);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
  }
  Real denom = n * sxx - sx * sx;
  if (!(denom > 0)) throw ConfigError("kappa_from_ringdown: times must be distinct");
  Real slope = (n * sxy - sx * sy) / denom;
  Real intercept = (sy - slope * sx) / n;
  Real kappa = -slope / k_2pi;
  if (!(kappa > 0)) throw NumericalError("kappa_from_ringdown: trace does not decay");
  Real rss = 0;
  for (const auto& [t, photons] : n_of_t) {
    Real e = std::log(photons) - (intercept + slope * t);
    rss += e * e;
  }
  Real var_slope = n > 2 ? rss / (n - 2) * n / denom : 0;
  return {kappa, std::sqrt(var_slope) / k_2pi};
}

EfficiencyFit efficiency_from_sweeps(const std::vector<std::pair<Real, Real>>& snr_vs_amp,
                                     const std::vector<std::pair<Real, Real>>& contrast_vs_amp) {
  if (snr_vs_amp.size() < 5 || contrast_vs_amp.size() < 5)
    throw ConfigError("efficiency_from_sweeps: need at least 5 amplitudes per sweep");
  Real num = 0, den = 0;
  for (const auto& [amp, snr] : snr_vs_amp) {
    if (snr < 0) throw ConfigError("efficiency_from_sweeps: SNR must be nonnegative");
    num += amp * std::sqrt(snr);
    den += amp * amp;
  }
  if (!(den > 0))
    throw ConfigError("efficiency_from_sweeps: amplitudes must not all vanish");
  Real c = num / den;

  const int n = static_cast<int>(contrast_vs_amp.size());
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [amp, contrast] : contrast_vs_amp) {
    if (!(contrast > 0))
      throw ConfigError("efficiency_from_sweeps: contrast must be positive");
    Real x = amp * amp, y = std::log(contrast);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  Real denom = n * sxx - sx * sx;
  if (!(denom > 0))
    throw ConfigError("efficiency_from_sweeps: amplitudes must be distinct");
  Real slope = (n * sxy - sx * sy) / denom;
  if (!(slope < 0))
    throw NumericalError("efficiency_from_sweeps: contrast does not decay with amplitude");
  Real sigma_m2 = -1.0 / (2.0 * slope);
  Real eta = 0.5 * sigma_m2 * c * c;
  return {eta, eta > 0 && eta <= 0.5};
}

Real purcell_from_rabi(Real power_watts, Real Omega, Real omega_q) {
  if (!(power_watts > 0) || !(Omega > 0) || !(omega_q > 0))
    throw ConfigError("purcell_from_rabi: inputs must be positive");
  Real omega_ang = k_2pi * Omega;
  return 4.0 * power_watts / (omega_ang * omega_ang * k_hbar * k_2pi * omega_q);
}

FidelitySweep fidelity_sweep(const ReadoutConfig& base, const RVec& omega_d, const RVec& F,
                             int threads) {
  if (omega_d.size() < 1 || F.size() < 1)
    throw ConfigError("fidelity_sweep: empty grid");
  FidelitySweep out;
  out.omega_d = omega_d;
  out.F = F;
  out.F_assign = RMat::Zero(omega_d.size(), F.size());
  out.F_QND = RMat::Zero(omega_d.size(), F.size());
  const int n_f = static_cast<int>(F.size());
  const int n_cells = static_cast<int>(omega_d.size()) * n_f;
  parallel_for(
      n_cells,
      [&](int c) {
        int i = c / n_f, j = c % n_f;
        ReadoutConfig cell = base;
        cell.omega_d = omega_d(i);
        cell.F = F(j);
        cell.threads = 1;
        cell.seed = base.seed ^ (0x9e3779b97f4a7c15ULL * (std::uint64_t(c) + 1));
        FidelityReport r = fidelity_protocols(cell);
        out.F_assign(i, j) = r.F_assign;
        out.F_QND(i, j) = r.F_QND;
      },
      threads);
  return out;
}

std::string shots_csv(const std::vector<ShotRecord>& shots) {
  CsvWriter csv({"prep", "I", "Q", "truth_final", "jumped", "switched"});
  for (const ShotRecord& s : shots)
    csv.raw_row({s.prep == QubitState::e ? "e" : "g", CsvWriter::format(s.iq.real()),
                 CsvWriter::format(s.iq.imag()), s.truth_final == QubitState::e ? "e" : "g",
                 s.jumped ? "1" : "0", s.switched_branch ? "1" : "0"});
  return csv.str();
}

namespace {

std::vector<std::pair<std::string, Real>> report_fields(const FidelityReport& r) {
  return {{"F_assign", r.F_assign},
          {"F_QND", r.F_QND},
          {"eps_sep", r.eps_sep},
          {"eps_g", r.eps_g},
          {"eps_e", r.eps_e},
          {"eps_cl", r.eps_cl},
          {"eps_r_qnd", r.eps_r_qnd},
          {"threshold_mid_I", r.threshold.midpoint.real()},
          {"threshold_mid_Q", r.threshold.midpoint.imag()},
          {"threshold_axis_I", r.threshold.axis.real()},
          {"threshold_axis_Q", r.threshold.axis.imag()}};
}

}  // namespace

std::string report_text(const FidelityReport& r) {
  std::ostringstream os;
  for (const auto& [key, value] : report_fields(r))
    os << key << "=" << CsvWriter::format(value) << "\n";
  return os.str();
}

std::string report_csv(const FidelityReport& r) {
  auto fields = report_fields(r);
  std::vector<std::string> names;
  std::vector<Real> row;
  for (const auto& [key, value] : fields) {
    names.push_back(key);
    row.push_back(value);
  }
  CsvWriter csv(names);
  csv.row(row);
  return csv.str();
}

}  // namespace jrsim
