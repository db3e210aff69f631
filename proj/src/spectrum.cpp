#include "jrsim/spectrum.hpp"

#include "jrsim/csv.hpp"
#include "jrsim/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace jrsim {

void fix_phases(Mat& v) {
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    Eigen::Index imax = 0;
    v.col(k).cwiseAbs().maxCoeff(&imax);
    Complex z = v(imax, k);
    Real az = std::abs(z);
    if (az > 0) v.col(k) *= std::conj(z) / az;
  }
}

int LabeledSpectrum::index_of(int s, int m) const {
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == std::make_pair(s, m)) {
      if (ambiguous[k])
        throw NumericalError("state (" + std::to_string(s) + "," + std::to_string(m) +
                             ") has ambiguous label (overlap <= 1/2)");
      return static_cast<int>(k);
    }
  }
  throw NumericalError("no eigenstate labeled (" + std::to_string(s) + "," +
                       std::to_string(m) + ")");
}

namespace {

// Reference-transmon eigenvectors, gauge-fixed.
Mat reference_basis(const CircuitParams& p, const BasisSpec& spec) {
  Eigen::SelfAdjointEigenSolver<Mat> es(transmon_reference_hamiltonian(p, spec));
  Mat v = es.eigenvectors();
  fix_phases(v);
  return v;
}

}  // namespace

LabeledSpectrum labeled_spectrum_of(const Mat& h, const CircuitParams& p,
                                    const BasisSpec& spec) {
  validate(spec);
  int dt = spec.dim_t(), dr = spec.dim_r(), dim = dt * dr;
  if (h.rows() != dim || h.cols() != dim)
    throw ConfigError("Hamiltonian dimension does not match the basis");
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-6 * std::max<Real>(1.0, h.cwiseAbs().maxCoeff()))
    throw NumericalError("Hamiltonian is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  LabeledSpectrum out;
  out.energies = es.eigenvalues();
  out.states = es.eigenvectors();
  fix_phases(out.states);
  out.dim_t = dt;
  out.dim_r = dr;
  out.labels.assign(dim, {-1, -1});
  out.ambiguous.assign(dim, 0);

  Mat tb = reference_basis(p, spec);

  // Overlap of product state (s, m) with eigenstate k: since the Fock basis
  // is canonical, reshape each eigenvector to dt x dr and project the
  // transmon factor.
  int n_s = std::min(dt, 5), n_m = dr;
  Eigen::MatrixXd ov(n_s * n_m, dim);
  for (int k = 0; k < dim; ++k) {
    Eigen::Map<const Mat> psi(out.states.col(k).data(), dr, dt);
    Mat q = tb.adjoint() * psi.transpose();   // (s, m) block
    for (int s = 0; s < n_s; ++s)
      for (int m = 0; m < n_m; ++m)
        ov(s * n_m + m, k) = std::norm(q(s, m));
  }

  // Greedy: repeatedly take the globally largest remaining overlap.
  std::vector<char> row_used(n_s * n_m, 0), col_used(dim, 0);
  for (int pass = 0; pass < n_s * n_m; ++pass) {
    int bi = -1, bk = -1;
    Real best = -1;
    for (int r = 0; r < n_s * n_m; ++r) {
      if (row_used[r]) continue;
      for (int k = 0; k < dim; ++k) {
        if (col_used[k]) continue;
        if (ov(r, k) > best) {
          best = ov(r, k);
          bi = r;
          bk = k;
        }
      }
    }
    if (bi < 0) break;
    row_used[bi] = 1;
    col_used[bk] = 1;
    out.labels[bk] = {bi / n_m, bi % n_m};
    out.ambiguous[bk] = best <= 0.5 ? 1 : 0;
    if (!out.ambiguous[bk]) out.min_overlap = std::min(out.min_overlap, best);
  }
  return out;
}

LabeledSpectrum labeled_spectrum(const CircuitParams& p, const BasisSpec& spec) {
  return labeled_spectrum_of(assemble_hamiltonian(p, spec), p, spec);
}

CouplingElements coupling_elements(const CircuitParams& p, const BasisSpec& spec,
                                   ElementBasis basis) {
  validate(spec);
  Mat href = basis == ElementBasis::dressed_reference
                 ? transmon_reference_hamiltonian(p, spec)
                 : transmon_hamiltonian(p, spec);
  Eigen::SelfAdjointEigenSolver<Mat> es(href);
  Mat tb = es.eigenvectors();
  fix_phases(tb);

  InteractionPieces pieces = interaction_pieces(p, spec);
  Mat h_int = pieces.cos_cos + pieces.sin_sin + pieces.n_n;

  int dt = spec.dim_t(), dr = spec.dim_r();
  auto product = [&](int s, int m) {
    Vec v = Vec::Zero(dt * dr);
    for (int i = 0; i < dt; ++i) v(i * dr + m) = tb(i, s);
    return v;
  };

  CouplingElements e;
  e.exchange = product(0, 1).dot(h_int * product(1, 0));   // Eigen dot conjugates lhs
  e.tms = product(0, 0).dot(h_int * product(1, 1));
  return e;
}

SignedElements signed_elements(const CouplingElements& e) {
  SignedElements s;
  Real a = std::abs(e.tms);
  if (a < 1e-30) {
    s.tms = 0;
    s.exchange = std::abs(e.exchange);
    return s;
  }
  Complex u = e.tms / a;
  s.tms = a;
  s.exchange = std::real(e.exchange * std::conj(u));
  return s;
}

FluxObservables observables_at_flux(const CircuitParams& p, const BasisSpec& spec,
                                    Real phi) {
  CircuitParams q = p;
  q.phi_ext_t = phi;
  FluxObservables o;
  o.phi = phi;

  LabeledSpectrum ls = labeled_spectrum(q, spec);
  Real e_g0 = ls.energy_of(0, 0);
  Real e_e0 = ls.energy_of(1, 0);
  Real e_f0 = ls.energy_of(2, 0);
  Real e_g1 = ls.energy_of(0, 1);
  Real e_e1 = ls.energy_of(1, 1);
  Real e_g2 = ls.energy_of(0, 2);
  Real e_e2 = ls.energy_of(1, 2);

  o.omega_q = e_e0 - e_g0;
  o.alpha = e_f0 - 2.0 * e_e0 + e_g0;
  o.omega_res_g = e_g1 - e_g0;
  o.omega_res_e = e_e1 - e_e0;
  o.chi = 0.5 * (o.omega_res_e - o.omega_res_g);
  o.K_g = e_g2 - 2.0 * e_g1 + e_g0;
  o.K_e = e_e2 - 2.0 * e_e1 + e_e0;
  o.K_avg = 0.5 * (o.K_g + o.K_e);
  o.min_overlap = ls.min_overlap;

  SignedElements se = signed_elements(coupling_elements(q, spec));
  o.g_exchange = se.exchange;
  o.g_tms = se.tms;
  o.ok = true;
  return o;
}

std::vector<FluxObservables> flux_sweep(const CircuitParams& p, const BasisSpec& spec,
                                        const std::vector<Real>& phis, int threads) {
  std::vector<FluxObservables> out(phis.size());
  parallel_for(static_cast<int>(phis.size()), [&](int i) {
    try {
      out[i] = observables_at_flux(p, spec, phis[i]);
    } catch (const std::exception&) {
      out[i] = FluxObservables{};
      out[i].phi = phis[i];
      out[i].ok = false;
    }
  }, threads);
  return out;
}

BalanceResult find_balanced_flux(const CircuitParams& p, const BasisSpec& spec,
                                 Real lo, Real hi, Real tol, ElementBasis basis) {
  auto element = [&](Real phi) {
    CircuitParams q = p;
    q.phi_ext_t = phi;
    return signed_elements(coupling_elements(q, spec, basis)).exchange;
  };
  Real flo = element(lo), fhi = element(hi);
  BalanceResult r;
  if (flo == 0) return {lo, true, 0};
  if (fhi == 0) return {hi, true, 0};
  if ((flo > 0) == (fhi > 0)) return r;   // not found
  while (hi - lo > tol) {
    Real mid = 0.5 * (lo + hi);
    Real fm = element(mid);
    if (fm == 0) return {mid, true, 0};
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  r.phi = 0.5 * (lo + hi);
  r.found = true;
  r.element = element(r.phi);
  return r;
}

KerrDecomposition cross_kerr_decomposition(const CircuitParams& p, const BasisSpec& spec) {
  Mat h0 = kron(transmon_hamiltonian(p, spec), Mat::Identity(spec.dim_r(), spec.dim_r())) +
           kron(Mat::Identity(spec.dim_t(), spec.dim_t()), resonator_hamiltonian(p, spec));
  InteractionPieces pieces = interaction_pieces(p, spec);

  auto chi_of = [&](const Mat& h) {
    LabeledSpectrum ls = labeled_spectrum_of(h, p, spec);
    Real wg = ls.energy_of(0, 1) - ls.energy_of(0, 0);
    Real we = ls.energy_of(1, 1) - ls.energy_of(1, 0);
    return 0.5 * (we - wg);
  };

  KerrDecomposition d;
  d.chi_total = chi_of(h0 + pieces.cos_cos + pieces.sin_sin + pieces.n_n);
  d.chi_cos_cos = chi_of(h0 + pieces.cos_cos);
  d.chi_transverse = chi_of(h0 + pieces.sin_sin + pieces.n_n);
  return d;
}

std::string sweep_csv(const std::vector<FluxObservables>& rows) {
  CsvWriter w({"phi", "omega_q", "alpha", "chi", "K_g", "K_e", "K_avg",
               "g_exchange", "g_tms"});
  for (const auto& r : rows) {
    if (!r.ok) continue;
    w.row({r.phi, r.omega_q, r.alpha, r.chi, r.K_g, r.K_e, r.K_avg,
           r.g_exchange, r.g_tms});
  }
  return w.str();
}

}  // namespace jrsim
