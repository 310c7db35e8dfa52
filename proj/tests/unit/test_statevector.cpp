#include <doctest.h>

#include <stdexcept>

#include "../support/oracle.hpp"
#include "bangbang/statevector.hpp"

using namespace bangbang;

namespace {

double state_distance(const StateVector &a, const oracle::CVec &b) {
  return (a - b).norm();
}

} // namespace

TEST_CASE("initial state is the uniform superposition") {
  const auto psi = initial_state(4);
  CHECK(psi.size() == 16);
  CHECK(psi.squaredNorm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(psi(5) - Complex(0.25, 0.0)) < 1e-15);
  CHECK_THROWS_AS(initial_state(0), std::invalid_argument);
}

TEST_CASE("exact pulses match matrix exponentials") {
  for (int n : {1, 2, 3, 4}) {
    const auto inst = generate_instance(n, 20 + static_cast<std::uint64_t>(n));
    const auto cv = cost_vector(inst);
    const auto c = oracle::cost_matrix(inst);
    const auto b = oracle::mixer_matrix(n);
    oracle::CVec ref = oracle::plus_state(n);
    // Start away from the B eigenstate so the mixer pulse does something.
    StateVector psi = apply_cost_pulse(initial_state(n), 0.37, cv);
    ref = oracle::propagator(c, 0.37) * ref;
    CHECK(state_distance(psi, ref) < 1e-12);
    psi = apply_mixer_pulse(psi, 0.81);
    ref = oracle::propagator(b, 0.81) * ref;
    CHECK(state_distance(psi, ref) < 1e-12);
  }
  const auto cv = cost_vector(generate_instance(2, 1));
  CHECK_THROWS_AS(apply_cost_pulse(initial_state(2), -0.1, cv), std::invalid_argument);
  CHECK_THROWS_AS(apply_mixer_pulse(initial_state(2), -0.1), std::invalid_argument);
}

TEST_CASE("mixer pulse leaves the uniform state invariant up to phase") {
  const auto psi = apply_mixer_pulse(initial_state(3), 0.6);
  CHECK(std::abs(std::abs(psi.dot(initial_state(3))) - 1.0) < 1e-12);
}

TEST_CASE("generic segments match the dense oracle") {
  for (int n : {2, 3, 4}) {
    const auto inst = generate_instance(n, 40 + static_cast<std::uint64_t>(n));
    const auto cv = cost_vector(inst);
    const Protocol p{1.3, {{0.25, 0.4}, {1.0, 0.3}, {0.7, 0.35}, {0.0, 0.25}}};
    const auto psi = evolve_protocol(initial_state(n), p, cv);
    std::vector<oracle::Piece> pieces;
    for (const auto &s : p.segments)
      pieces.push_back({s.g, s.dt});
    CHECK(state_distance(psi, oracle::evolve(inst, pieces)) < 1e-8);
    CHECK(std::abs(psi.squaredNorm() - 1.0) < 1e-9);
  }
}

TEST_CASE("bang-bang evolution matches the dense oracle") {
  const auto inst = generate_instance(4, 77);
  const auto cv = cost_vector(inst);
  const BangBangProtocol p{1, {0.3, 0.2, 0.45, 0.15, 0.4}, 1.5};
  const auto psi = evolve_protocol(initial_state(4), p, cv);
  std::vector<oracle::Piece> pieces;
  for (std::size_t i = 0; i < p.durations.size(); ++i)
    pieces.push_back({static_cast<double>(p.value_of(i)), p.durations[i]});
  CHECK(state_distance(psi, oracle::evolve(inst, pieces)) < 1e-12);
}

TEST_CASE("linear ramp converges to the midpoint staircase") {
  const auto inst = generate_instance(3, 5);
  const auto cv = cost_vector(inst);
  const double T = 2.0;
  const int steps = 200;
  const auto psi = evolve_linear_ramp(initial_state(3), T, steps, cv);
  std::vector<oracle::Piece> pieces;
  for (int k = 0; k < steps; ++k)
    pieces.push_back({(k + 0.5) / steps, T / steps});
  // One splitting step per slice: second order in the slice width.
  const double coarse = state_distance(psi, oracle::evolve(inst, pieces));
  CHECK(coarse < 1e-4);

  // Default resolution against a much finer oracle staircase.
  const auto fine = evolve_linear_ramp(initial_state(3), T, default_ramp_steps(T), cv);
  pieces.clear();
  for (int k = 0; k < 20000; ++k)
    pieces.push_back({(k + 0.5) / 20000.0, T / 20000.0});
  CHECK(state_distance(fine, oracle::evolve(inst, pieces)) < 1e-6);
}

TEST_CASE("doubling ramp resolution changes fidelity by < 1e-8") {
  for (double T : {1.0, 2.0, 5.0}) {
    const auto cv = cost_vector(generate_instance(5, 8));
    const int s = default_ramp_steps(T);
    const auto a = evolve_linear_ramp(initial_state(5), T, s, cv);
    const auto b = evolve_linear_ramp(initial_state(5), T, 2 * s, cv);
    CHECK(std::abs(fidelity_error(a, cv) - fidelity_error(b, cv)) < 1e-8);
  }
}

TEST_CASE("norm is conserved over long evolutions") {
  const auto cv = cost_vector(generate_instance(6, 2));
  const auto psi = evolve_linear_ramp(initial_state(6), 10.0, default_ramp_steps(10.0), cv);
  CHECK(std::abs(psi.squaredNorm() - 1.0) < 1e-9);
  BangBangProtocol p{1, std::vector<double>(40, 0.25), 10.0};
  const auto phi = evolve_protocol(initial_state(6), p, cv);
  CHECK(std::abs(phi.squaredNorm() - 1.0) < 1e-9);
}

TEST_CASE("plans replay exactly and invert") {
  const auto cv = cost_vector(generate_instance(4, 3));
  const Protocol p{1.0, {{0.4, 0.5}, {1.0, 0.2}, {0.9, 0.3}}};
  const auto ev = evolve_with_plan(initial_state(4), p, cv);
  const auto again = replay_plan(initial_state(4), p, cv, ev.plan, +1);
  CHECK((again - ev.state).norm() == 0.0);
  const auto back = replay_plan(ev.state, p, cv, ev.plan, -1);
  CHECK((back - initial_state(4)).norm() < 1e-11);
}

TEST_CASE("long T=50 ramp on n=3 is adiabatic") {
  const auto cv = cost_vector(generate_instance(3, 1));
  const auto psi = evolve_linear_ramp(initial_state(3), 50.0, default_ramp_steps(50.0), cv);
  CHECK(ground_state_probability(psi, cv) > 0.99);
}

TEST_CASE("dense hamiltonian matches the Kronecker construction") {
  const auto inst = generate_instance(3, 9);
  const auto cv = cost_vector(inst);
  const RealMatrix h = dense_hamiltonian(cv, 0.35);
  const auto ref = oracle::hamiltonian(oracle::cost_matrix(inst), oracle::mixer_matrix(3), 0.35);
  CHECK((h.cast<Complex>() - ref).norm() < 1e-12);
}

TEST_CASE("check_norm throws InvariantViolation") {
  StateVector s = StateVector::Zero(2);
  s(0) = 1.1;
  CHECK_THROWS_AS(check_norm(s, 1.0, 1e-9, "test"), InvariantViolation);
}
