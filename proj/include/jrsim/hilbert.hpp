#pragma once

#include "jrsim/types.hpp"

namespace jrsim {

// Transmon charge basis |n>, n = -charge_cutoff .. +charge_cutoff
// (dimension 2*charge_cutoff+1), tensored with a resonator Fock space of
// dimension fock_cutoff. Defaults are the smallest cutoffs at which every
// flux observable moves by < 0.1% when both grow one step; the resonator
// self-Kerr is the last to settle and needs the seventh Fock level.
struct BasisSpec {
  int charge_cutoff = 20;
  int fock_cutoff = 7;

  int dim_t() const { return 2 * charge_cutoff + 1; }
  int dim_r() const { return fock_cutoff; }
  int dim() const { return dim_t() * dim_r(); }
};

void validate(const BasisSpec& spec);

// n operator in the charge basis: diag(-n_c .. n_c).
template <typename Scalar = Complex>
MatX<Scalar> charge_number_t(int charge_cutoff) {
  int dim = 2 * charge_cutoff + 1;
  MatX<Scalar> n = MatX<Scalar>::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = Scalar(k - charge_cutoff);
  return n;
}

// cos and sin of the transmon phase. With e^{i phi}|n> = |n+1> the raising
// part S has S(k+1, k) = 1, so cos = (S + S^T)/2 and sin = (S - S^T)/(2i).
template <typename Scalar = Complex>
std::pair<MatX<Scalar>, MatX<Scalar>> cos_sin_phi_t(int charge_cutoff) {
  static_assert(!std::is_floating_point_v<Scalar>,
                "sin(phi) has imaginary charge-basis entries; use a complex scalar");
  int dim = 2 * charge_cutoff + 1;
  MatX<Scalar> s = MatX<Scalar>::Zero(dim, dim);
  for (int k = 0; k + 1 < dim; ++k) s(k + 1, k) = Scalar(1);
  MatX<Scalar> cos_phi = (s + s.transpose().eval()) / Scalar(2);
  MatX<Scalar> sin_phi = (s - s.transpose().eval()) / (Scalar(2) * Scalar(0, 1));
  return {cos_phi, sin_phi};
}

// Resonator annihilation operator on a fock_cutoff-dimensional space.
template <typename Scalar = Complex>
MatX<Scalar> fock_ladder(int fock_cutoff) {
  MatX<Scalar> a = MatX<Scalar>::Zero(fock_cutoff, fock_cutoff);
  for (int k = 1; k < fock_cutoff; ++k)
    a(k - 1, k) = Scalar(std::sqrt(static_cast<double>(k)));
  return a;
}

struct ResonatorOps {
  Mat a;         // annihilation
  Mat phi;       // phi_zpf (a + a^dag)
  Mat n;         // i n_zpf (a^dag - a)
  Mat cos_phi;   // cos of the phi quadrature (via its eigenbasis)
  Mat sin_phi;
  Mat number;    // a^dag a
};

// Builds the resonator quadratures for a given zero-point pair. The pair must
// satisfy phi_zpf * n_zpf = 1/2 (canonical commutator); anything else is a
// caller bug and is rejected.
ResonatorOps resonator_quadratures(const BasisSpec& spec, Real phi_zpf, Real n_zpf);

template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename Eigen::ScalarBinaryOpTraits<typename DerivedA::Scalar,
                                                      typename DerivedB::Scalar>::ReturnType;
  MatX<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = Scalar(a(i, j)) * b;
  return out;
}

}  // namespace jrsim
