#include "jrsim/lindblad.hpp"

#include "jrsim/hilbert.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace jrsim {

Mat dressed_collapse_operator(const LabeledSpectrum& ls) {
  Mat a = fock_ladder<Complex>(ls.dim_r);
  Mat x = kron(Mat::Identity(ls.dim_t, ls.dim_t), Mat(a + a.adjoint()));
  Mat m = ls.states.adjoint() * x * ls.states;
  // Energies ascend with the index, so "released" transitions are the upper
  // triangle plus the diagonal.
  for (int j = 0; j < m.cols(); ++j)
    for (int i = j + 1; i < m.rows(); ++i) m(i, j) = 0;
  return m;
}

namespace {

struct Rhs {
  const Mat& h;
  const Mat& c;
  Mat cdc;
  Real kappa_ang;

  Rhs(const Mat& h_, const Mat& c_, Real kappa) : h(h_), c(c_), kappa_ang(k_2pi * kappa) {
    cdc = c.adjoint() * c;
  }

  Mat operator()(const Mat& rho) const {
    Mat out = Complex(0, -k_2pi) * (h * rho - rho * h);
    if (kappa_ang != 0) {
      out += kappa_ang * (c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc));
    }
    return out;
  }
};

[[noreturn]] void fail_at(const char* what, Real t) {
  std::ostringstream os;
  os << what << " at t = " << t << " s";
  throw NumericalError(os.str());
}

void check_snapshot(const Mat& rho, Real t) {
  Real tr = rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-8) fail_at("trace drift beyond 1e-8", t);
  Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8) fail_at("negative population beyond 1e-8", t);
}

}  // namespace

std::vector<Mat> evolve(const LindbladRun& run) {
  int n = run.h.rows();
  if (run.h.cols() != n || run.c_op.rows() != n || run.c_op.cols() != n ||
      run.rho0.rows() != n || run.rho0.cols() != n)
    throw ConfigError("evolve: shape mismatch");
  if (run.t_grid.size() < 1 || run.t_grid(0) < 0) throw ConfigError("evolve: bad time grid");
  for (int k = 1; k < run.t_grid.size(); ++k)
    if (run.t_grid(k) <= run.t_grid(k - 1)) throw ConfigError("evolve: time grid not ascending");

  // Dormand-Prince 5(4) tableau.
  static const Real a21 = 1. / 5;
  static const Real a31 = 3. / 40, a32 = 9. / 40;
  static const Real a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
  static const Real a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561,
                    a54 = -212. / 729;
  static const Real a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247,
                    a64 = 49. / 176, a65 = -5103. / 18656;
  static const Real b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192, b5 = -2187. / 6784,
                    b6 = 11. / 84;
  static const Real e1 = 71. / 57600, e3 = -71. / 16695, e4 = 71. / 1920,
                    e5 = -17253. / 339200, e6 = 22. / 525, e7 = -1. / 40;

  Rhs f(run.h, run.c_op, run.kappa);
  Mat rho = run.rho0;
  Real t = 0;

  // Step scale from the fastest phase in the generator.
  Real wmax = k_2pi * run.h.cwiseAbs().maxCoeff() * n + k_2pi * std::abs(run.kappa) + 1.0;
  Real h_step = 0.1 / wmax;
  const Real t_end = run.t_grid(run.t_grid.size() - 1);
  const Real h_min = std::max<Real>(t_end, 1e-30) * 1e-15;
  const Real atol = 1e-12, rtol = 1e-8;

  std::vector<Mat> out;
  out.reserve(run.t_grid.size());
  Mat k1 = f(rho);

  for (int snap = 0; snap < run.t_grid.size(); ++snap) {
    Real target = run.t_grid(snap);
    while (t < target) {
      Real h_try = std::min(h_step, target - t);
      Mat k2 = f(rho + h_try * (a21 * k1));
      Mat k3 = f(rho + h_try * (a31 * k1 + a32 * k2));
      Mat k4 = f(rho + h_try * (a41 * k1 + a42 * k2 + a43 * k3));
      Mat k5 = f(rho + h_try * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      Mat k6 = f(rho + h_try * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      Mat sol = rho + h_try * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      Mat k7 = f(sol);
      Mat err = h_try * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      Real scale = atol + rtol * std::max(rho.cwiseAbs().maxCoeff(), sol.cwiseAbs().maxCoeff());
      Real enorm = err.cwiseAbs().maxCoeff() / scale;
      if (enorm <= 1.0) {
        t += h_try;
        rho = 0.5 * (sol + sol.adjoint().eval());   // keep exactly Hermitian
        k1 = f(rho);
      }
      Real grow = enorm > 0 ? 0.9 * std::pow(enorm, -0.2) : 5.0;
      h_step = h_try * std::min<Real>(5.0, std::max<Real>(0.2, grow));
      if (h_step < h_min) fail_at("step size underflow", t);
    }
    check_snapshot(rho, t);
    out.push_back(rho);
  }
  return out;
}

Mat liouvillian(const Mat& h, const Mat& c_op, Real kappa) {
  int n = h.rows();
  Mat id = Mat::Identity(n, n);
  Mat cdc = c_op.adjoint() * c_op;
  Mat lv = Complex(0, -k_2pi) * (kron(id, h) - kron(h.transpose(), id));
  lv += (k_2pi * kappa) *
        (kron(c_op.conjugate(), c_op) - 0.5 * kron(id, cdc) - 0.5 * kron(cdc.transpose(), id));
  return lv;
}

std::vector<Mat> evolve_exact(const Mat& h, const Mat& c_op, Real kappa, const Mat& rho0,
                              const RVec& t_grid) {
  int n = h.rows();
  Mat lv = liouvillian(h, c_op, kappa);
  Eigen::ComplexEigenSolver<Mat> es(lv);
  if (es.info() != Eigen::Success) throw NumericalError("liouvillian eigendecomposition failed");
  Vec v0 = Eigen::Map<const Vec>(rho0.data(), n * n);
  Vec coef = es.eigenvectors().colPivHouseholderQr().solve(v0);

  std::vector<Mat> out;
  out.reserve(t_grid.size());
  for (int k = 0; k < t_grid.size(); ++k) {
    Vec amp = (es.eigenvalues() * t_grid(k)).array().exp() * coef.array();
    Vec vt = es.eigenvectors() * amp;
    out.push_back(Eigen::Map<const Mat>(vt.data(), n, n));
  }
  return out;
}

DecayFit purcell_T1(const CircuitParams& p, const BasisSpec& spec, Real kappa) {
  LabeledSpectrum ls = labeled_spectrum(p, spec);
  Mat c = dressed_collapse_operator(ls);
  int e0 = ls.index_of(1, 0);

  Real rate = 0;   // population leaves e0 through every lower state
  for (int i = 0; i < e0; ++i) rate += std::norm(c(i, e0));
  rate *= k_2pi * kappa;

  DecayFit fit;
  if (rate < 1e-9) {   // slower than ~30 years: no usable decay channel
    fit.T1_pl = std::numeric_limits<Real>::infinity();
    fit.population_trace = {{0.0, 1.0}};
    return fit;
  }

  // Loss only moves probability down in energy, so the states at or below e0
  // close the dynamics for this initial condition; propagate exactly there.
  int w = e0 + 1;
  Mat hw = RVec(ls.energies.head(w)).asDiagonal().toDenseMatrix().cast<Complex>();
  Mat cw = c.topLeftCorner(w, w);
  Mat rho0 = Mat::Zero(w, w);
  rho0(e0, e0) = 1;

  // 60 snapshots over [0, 5 T1_est]: t = 0 first, the rest log-spaced.
  const int n_snap = 60;
  Real t1_est = 1.0 / rate;
  RVec ts(n_snap);
  ts(0) = 0;
  Real t_hi = 5.0 * t1_est, t_lo = t_hi / 100.0;
  for (int k = 1; k < n_snap; ++k)
    ts(k) = t_lo * std::pow(t_hi / t_lo, Real(k - 1) / (n_snap - 2));

  std::vector<Mat> rhos = evolve_exact(hw, cw, kappa, rho0, ts);
  fit.population_trace.reserve(n_snap);
  for (int k = 0; k < n_snap; ++k)
    fit.population_trace.emplace_back(ts(k), rhos[k](e0, e0).real());

  // Straight-line least squares on log population.
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (auto& [t, pop] : fit.population_trace) {
    if (pop < 1e-14) continue;
    Real y = std::log(pop);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++m;
  }
  if (m < 3) throw NumericalError("purcell_T1: too few usable decay samples");
  Real det = m * sxx - sx * sx;
  Real slope = (m * sxy - sx * sy) / det;
  Real icept = (sy * sxx - sx * sxy) / det;
  if (slope >= 0) throw NumericalError("purcell_T1: population does not decay");
  fit.T1_pl = -1.0 / slope;

  Real ss = 0;
  for (auto& [t, pop] : fit.population_trace) {
    Real model = std::exp(icept + slope * t);
    ss += (pop - model) * (pop - model);
  }
  fit.residual = std::sqrt(ss / fit.population_trace.size());
  return fit;
}

}  // namespace jrsim
