#ifndef BANGBANG_SK_MODEL_HPP
#define BANGBANG_SK_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "bangbang/types.hpp"

namespace bangbang {

// Sherrington-Kirkpatrick instance
//   C = (1/sqrt(n)) sum_{i<j} J_ij s_i s_j + sum_i h_i s_i
// with J_ij, h_i standard normal. Couplings are stored packed, row-major
// over the strict upper triangle.
struct SKInstance {
  int n = 0;
  std::vector<double> couplings;
  std::vector<double> fields;
  std::uint64_t seed = 0;
  std::string rng;

  static std::size_t pair_count(int n) {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  }
  static std::size_t pair_index(int n, int i, int j);

  double coupling(int i, int j) const;
  void set_coupling(int i, int j, double value);

  // Throws std::invalid_argument if table sizes disagree with n.
  void validate() const;

  bool operator==(const SKInstance &) const = default;
};

SKInstance generate_instance(int n, std::uint64_t seed);

// Classical energies C_z for all basis states, with the exhaustive ground
// state scan.
struct CostVector {
  int n = 0;
  RealVector values;
  double ground_energy = 0.0;
  std::vector<Index> ground_set;

  Index dim() const { return values.size(); }
  double max_energy() const { return values.maxCoeff(); }
  bool is_ground(Index z) const;
};

inline int spin(Index z, int k) { return ((z >> k) & 1) ? -1 : 1; }
inline Index flip(Index z, int k) { return z ^ (Index{1} << k); }

CostVector cost_vector(const SKInstance &inst);

// C_z - C_{z with bit k flipped}.
double flip_delta(const CostVector &cv, Index z, int k);

// Total probability on the (possibly degenerate) ground set, for either a
// state vector (sum |A_z|^2) or a density matrix (sum rho_zz).
template <typename Derived>
double ground_state_probability(const Eigen::MatrixBase<Derived> &state,
                                const CostVector &cv) {
  double p = 0.0;
  if constexpr (Derived::ColsAtCompileTime == 1) {
    for (Index z : cv.ground_set)
      p += std::norm(state(z));
  } else {
    if (state.cols() == 1) {
      for (Index z : cv.ground_set)
        p += std::norm(state(z, 0));
    } else {
      for (Index z : cv.ground_set)
        p += std::real(state(z, z));
    }
  }
  return p;
}

} // namespace bangbang

#endif // BANGBANG_SK_MODEL_HPP
