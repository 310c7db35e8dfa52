#ifndef BANGBANG_TYPES_HPP
#define BANGBANG_TYPES_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bangbang {

template <typename Scalar> struct dense_types {
  using Complex = std::complex<Scalar>;
  using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
  using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
};

using Complex = dense_types<double>::Complex;
using RealVector = dense_types<double>::RealVector;
using RealMatrix = dense_types<double>::RealMatrix;

// Amplitudes A_z over the 2^n computational basis states. Bit k of z is
// spin k; bit value 0 means s_k = +1.
using StateVector = dense_types<double>::ComplexVector;
// Conjugate momenta Pi_z = P_z + i Q_z, same layout as StateVector.
using CostateVector = dense_types<double>::ComplexVector;
// 2^n x 2^n operator in the computational basis.
using DensityMatrix = dense_types<double>::ComplexMatrix;

using Index = Eigen::Index;

inline constexpr int kMaxQubits = 16;

inline Index basis_dim(int n) { return Index{1} << n; }

inline int qubit_count(Index dim) {
  int n = 0;
  while ((Index{1} << n) < dim)
    ++n;
  if ((Index{1} << n) != dim)
    throw std::invalid_argument("dimension is not a power of two");
  return n;
}

// Raised when a simulation detects that a conservation law was broken
// beyond tolerance (norm, trace, hermiticity, positivity).
class InvariantViolation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace bangbang

#endif // BANGBANG_TYPES_HPP
