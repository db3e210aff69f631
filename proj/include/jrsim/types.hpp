#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace jrsim {

using Real = double;
using Complex = std::complex<double>;

using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// CODATA 2018 exact values, SI.
inline constexpr Real k_h = 6.62607015e-34;           // J s
inline constexpr Real k_e = 1.602176634e-19;          // C
inline constexpr Real k_hbar = k_h / (2.0 * 3.141592653589793238462643383279502884);
inline constexpr Real k_Phi0 = k_h / (2.0 * k_e);     // flux quantum, Wb
inline constexpr Real k_RQ = k_h / (4.0 * k_e * k_e); // superconducting resistance quantum, Ohm

inline constexpr Real k_pi = 3.141592653589793238462643383279502884;
inline constexpr Real k_2pi = 2.0 * k_pi;

// All stored energies and frequencies are linear (cycles/s, Hz); factors of
// 2*pi appear only inside time-evolution kernels.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Process exit codes used by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitNonConvergence = 4;

}  // namespace jrsim
