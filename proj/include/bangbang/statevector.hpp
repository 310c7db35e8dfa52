#ifndef BANGBANG_STATEVECTOR_HPP
#define BANGBANG_STATEVECTOR_HPP

#include <cmath>
#include <vector>

#include "bangbang/protocol.hpp"
#include "bangbang/sk_model.hpp"
#include "bangbang/types.hpp"

namespace bangbang {

// Closed-system evolution under H_g = g C + (1 - g) B with B = -sum_k X_k.
//
// The two bang kernels are exact: C is diagonal and B is a sum of commuting
// single-qubit terms, e^{-i beta B} = prod_k (cos beta + i sin beta X_k).
// Both accept negative durations, which the costate sweep uses for backward
// propagation.

template <typename Derived, typename CostDerived>
void rotate_by_cost(Eigen::MatrixBase<Derived> &amps,
                    const Eigen::MatrixBase<CostDerived> &costs,
                    typename CostDerived::Scalar t) {
  using Scalar = typename CostDerived::Scalar;
  for (Index z = 0; z < amps.size(); ++z) {
    const Scalar phase = -t * costs(z);
    amps(z) *= std::complex<Scalar>(std::cos(phase), std::sin(phase));
  }
}

template <typename Derived>
void rotate_by_mixer(Eigen::MatrixBase<Derived> &amps,
                     typename Derived::RealScalar beta) {
  using Real = typename Derived::RealScalar;
  using C = std::complex<Real>;
  const Real c = std::cos(beta);
  const C is(Real(0), std::sin(beta));
  const Index dim = amps.size();
  for (Index bit = 1; bit < dim; bit <<= 1) {
    for (Index base = 0; base < dim; base += 2 * bit) {
      for (Index z = base; z < base + bit; ++z) {
        const C a = amps(z);
        const C b = amps(z + bit);
        amps(z) = c * a + is * b;
        amps(z + bit) = is * a + c * b;
      }
    }
  }
}

// B applied to a vector: (B v)_z = -sum_k v_{z xor 2^k}.
template <typename Derived>
typename dense_types<typename Derived::RealScalar>::ComplexVector
apply_mixer_operator(const Eigen::MatrixBase<Derived> &v) {
  typename dense_types<typename Derived::RealScalar>::ComplexVector out =
      decltype(out)::Zero(v.size());
  for (Index bit = 1; bit < v.size(); bit <<= 1)
    for (Index z = 0; z < v.size(); ++z)
      out(z) -= v(z ^ bit);
  return out;
}

// One symmetric splitting step e^{-i(1-g)B dt/2} e^{-i g C dt} e^{-i(1-g)B dt/2}.
template <typename Derived>
void split_step(Eigen::MatrixBase<Derived> &amps, const RealVector &costs,
                double g, double dt) {
  rotate_by_mixer(amps, 0.5 * (1.0 - g) * dt);
  rotate_by_cost(amps, costs, g * dt);
  rotate_by_mixer(amps, 0.5 * (1.0 - g) * dt);
}

StateVector initial_state(int n);

StateVector apply_cost_pulse(StateVector state, double gamma,
                             const CostVector &cv);
StateVector apply_mixer_pulse(StateVector state, double beta);

// Number of splitting sub-steps used for each segment; 0 marks an exact
// bang. Reusing a plan makes a propagation exactly invertible.
struct IntegrationPlan {
  std::vector<int> substeps;
};

struct SplittingOptions {
  double initial_step = 1e-2;
  // Sub-steps are doubled until the segment's final state moves by less
  // than this (2-norm).
  double tolerance = 1e-9;
  int max_substeps = 1 << 22;
};

// Propagates one segment; `dt` may be negative. substeps == 0 with g in
// {0, 1} uses the exact kernel.
void propagate_segment(StateVector &amps, const CostVector &cv, double g,
                       double dt, int substeps);

struct Evolution {
  StateVector state;
  IntegrationPlan plan;
};

// Forward evolution that also records the plan it chose.
Evolution evolve_with_plan(StateVector state, const Protocol &p,
                           const CostVector &cv,
                           const SplittingOptions &opts = {});

StateVector evolve_protocol(StateVector state, const Protocol &p,
                            const CostVector &cv,
                            const SplittingOptions &opts = {});
StateVector evolve_protocol(StateVector state, const BangBangProtocol &p,
                            const CostVector &cv);

// Replays a recorded plan, forward (sign = +1) or backward (sign = -1, from
// the last segment to the first).
StateVector replay_plan(StateVector state, const Protocol &p,
                        const CostVector &cv, const IntegrationPlan &plan,
                        int sign);

// Sub-steps per unit time used when `steps` is not given explicitly.
inline constexpr int kRampStepsPerUnitTime = 4000;
int default_ramp_steps(double total_time);

StateVector evolve_linear_ramp(StateVector state, double total_time, int steps,
                               const CostVector &cv);

double energy(const StateVector &state, const CostVector &cv);
double fidelity_error(const StateVector &state, const CostVector &cv);

// Dense real-symmetric H_g in the computational basis.
RealMatrix dense_hamiltonian(const CostVector &cv, double g);

// Throws InvariantViolation when |norm^2 - reference| exceeds tolerance.
void check_norm(const StateVector &state, double reference, double tolerance,
                const char *where);

} // namespace bangbang

#endif // BANGBANG_STATEVECTOR_HPP
