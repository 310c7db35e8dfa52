#include "bangbang/statevector.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bangbang {

namespace {

constexpr double kNormTolerance = 1e-9;

void require_size(const StateVector &state, const CostVector &cv) {
  if (state.size() != cv.dim())
    throw std::invalid_argument("state and instance sizes differ");
}

bool is_bang(double g) { return g == 0.0 || g == 1.0; }

void split_propagate(StateVector &amps, const RealVector &costs, double g,
                     double dt, int substeps) {
  const double h = dt / substeps;
  // Adjacent half mixer steps fuse into full steps.
  const double half_mix = 0.5 * (1.0 - g) * h;
  rotate_by_mixer(amps, half_mix);
  for (int s = 0; s < substeps; ++s) {
    rotate_by_cost(amps, costs, g * h);
    rotate_by_mixer(amps, s + 1 < substeps ? 2.0 * half_mix : half_mix);
  }
}

} // namespace

StateVector initial_state(int n) {
  if (n < 1 || n > kMaxQubits)
    throw std::invalid_argument("unsupported qubit count");
  const Index dim = basis_dim(n);
  return StateVector::Constant(dim, Complex(1.0 / std::sqrt(double(dim)), 0.0));
}

StateVector apply_cost_pulse(StateVector state, double gamma,
                             const CostVector &cv) {
  if (gamma < 0.0)
    throw std::invalid_argument("pulse duration must be non-negative");
  require_size(state, cv);
  rotate_by_cost(state, cv.values, gamma);
  return state;
}

StateVector apply_mixer_pulse(StateVector state, double beta) {
  if (beta < 0.0)
    throw std::invalid_argument("pulse duration must be non-negative");
  rotate_by_mixer(state, beta);
  return state;
}

void propagate_segment(StateVector &amps, const CostVector &cv, double g,
                       double dt, int substeps) {
  if (dt == 0.0)
    return;
  if (substeps == 0) {
    if (g == 1.0)
      rotate_by_cost(amps, cv.values, dt);
    else if (g == 0.0)
      rotate_by_mixer(amps, dt);
    else
      throw std::logic_error("exact propagation requires a bang segment");
    return;
  }
  split_propagate(amps, cv.values, g, dt, substeps);
}

Evolution evolve_with_plan(StateVector state, const Protocol &p,
                           const CostVector &cv, const SplittingOptions &opts) {
  p.validate();
  require_size(state, cv);
  const double norm0 = state.squaredNorm();
  Evolution out;
  out.plan.substeps.reserve(p.segments.size());
  for (const auto &seg : p.segments) {
    if (is_bang(seg.g) || seg.dt == 0.0) {
      propagate_segment(state, cv, seg.g, seg.dt, 0);
      out.plan.substeps.push_back(0);
      continue;
    }
    int m = std::max(1, static_cast<int>(std::ceil(seg.dt / opts.initial_step)));
    StateVector coarse = state;
    split_propagate(coarse, cv.values, seg.g, seg.dt, m);
    while (true) {
      if (2 * m > opts.max_substeps)
        throw std::runtime_error("splitting refinement did not converge");
      StateVector fine = state;
      split_propagate(fine, cv.values, seg.g, seg.dt, 2 * m);
      const double change = (fine - coarse).norm();
      m *= 2;
      coarse = std::move(fine);
      if (change < opts.tolerance)
        break;
    }
    state = std::move(coarse);
    out.plan.substeps.push_back(m);
  }
  check_norm(state, norm0, kNormTolerance, "evolve_protocol");
  out.state = std::move(state);
  return out;
}

StateVector evolve_protocol(StateVector state, const Protocol &p,
                            const CostVector &cv, const SplittingOptions &opts) {
  return evolve_with_plan(std::move(state), p, cv, opts).state;
}

StateVector evolve_protocol(StateVector state, const BangBangProtocol &p,
                            const CostVector &cv) {
  p.validate();
  require_size(state, cv);
  const double norm0 = state.squaredNorm();
  for (std::size_t i = 0; i < p.durations.size(); ++i)
    propagate_segment(state, cv, p.value_of(i), p.durations[i], 0);
  check_norm(state, norm0, kNormTolerance, "evolve_protocol");
  return state;
}

StateVector replay_plan(StateVector state, const Protocol &p,
                        const CostVector &cv, const IntegrationPlan &plan,
                        int sign) {
  if (plan.substeps.size() != p.segments.size())
    throw std::invalid_argument("plan does not match protocol");
  require_size(state, cv);
  const std::size_t count = p.segments.size();
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = sign > 0 ? k : count - 1 - k;
    propagate_segment(state, cv, p.segments[i].g, sign * p.segments[i].dt,
                      plan.substeps[i]);
  }
  return state;
}

int default_ramp_steps(double total_time) {
  return std::max(1000, static_cast<int>(std::ceil(total_time * kRampStepsPerUnitTime)));
}

StateVector evolve_linear_ramp(StateVector state, double total_time, int steps,
                               const CostVector &cv) {
  if (steps < 1)
    throw std::invalid_argument("ramp needs at least one step");
  if (!(total_time >= 0.0))
    throw std::invalid_argument("ramp time must be non-negative");
  require_size(state, cv);
  const double norm0 = state.squaredNorm();
  const double h = total_time / steps;
  for (int k = 0; k < steps; ++k) {
    const double g = (k + 0.5) / steps;
    split_step(state, cv.values, g, h);
  }
  check_norm(state, norm0, kNormTolerance, "evolve_linear_ramp");
  return state;
}

double energy(const StateVector &state, const CostVector &cv) {
  require_size(state, cv);
  return state.cwiseAbs2().dot(cv.values);
}

double fidelity_error(const StateVector &state, const CostVector &cv) {
  require_size(state, cv);
  return 1.0 - ground_state_probability(state, cv);
}

RealMatrix dense_hamiltonian(const CostVector &cv, double g) {
  const Index dim = cv.dim();
  RealMatrix h = RealMatrix::Zero(dim, dim);
  h.diagonal() = g * cv.values;
  for (Index bit = 1; bit < dim; bit <<= 1)
    for (Index z = 0; z < dim; ++z)
      h(z, z ^ bit) -= (1.0 - g);
  return h;
}

void check_norm(const StateVector &state, double reference, double tolerance,
                const char *where) {
  const double drift = std::abs(state.squaredNorm() - reference);
  if (drift > tolerance)
    throw InvariantViolation(std::string(where) + ": norm drift " +
                             std::to_string(drift));
}

} // namespace bangbang
