#include "jrsim/hilbert.hpp"

#include <cmath>

namespace jrsim {

void validate(const BasisSpec& spec) {
  if (spec.charge_cutoff < 5)
    throw ConfigError("charge_cutoff must be >= 5, got " + std::to_string(spec.charge_cutoff));
  if (spec.fock_cutoff < 3)
    throw ConfigError("fock_cutoff must be >= 3, got " + std::to_string(spec.fock_cutoff));
}

ResonatorOps resonator_quadratures(const BasisSpec& spec, Real phi_zpf, Real n_zpf) {
  validate(spec);
  if (std::abs(phi_zpf * n_zpf - 0.5) > 1e-9)
    throw ConfigError("inconsistent zero-point pair: phi_zpf*n_zpf = " +
                      std::to_string(phi_zpf * n_zpf) + ", expected 1/2");
  ResonatorOps ops;
  ops.a = fock_ladder(spec.fock_cutoff);
  Mat adag = ops.a.adjoint();
  ops.phi = phi_zpf * (ops.a + adag);
  ops.n = Complex(0, 1) * n_zpf * (adag - ops.a);
  ops.number = adag * ops.a;

  // cos/sin of the quadrature through its spectral decomposition; phi is
  // Hermitian so the eigenbasis is well defined at any cutoff.
  Eigen::SelfAdjointEigenSolver<Mat> es(ops.phi);
  const RVec& w = es.eigenvalues();
  const Mat& v = es.eigenvectors();
  RVec cw = w.array().cos();
  RVec sw = w.array().sin();
  ops.cos_phi = v * cw.asDiagonal() * v.adjoint();
  ops.sin_phi = v * sw.asDiagonal() * v.adjoint();
  return ops;
}

}  // namespace jrsim
