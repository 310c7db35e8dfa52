#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bangbang/open_system.hpp"
#include "bangbang/rng.hpp"
#include "bangbang/statevector.hpp"
#include "oracle.hpp"

using namespace bangbang;

namespace {

DensityMatrix plus_density(int n) { return pure_density(initial_state(n)); }

// Dense Redfield right-hand side built directly from the operator form.
oracle::CMat redfield_oracle(const oracle::CMat &rho, const oracle::CMat &h, int n,
                             const RedfieldConfig &cfg) {
  Eigen::SelfAdjointEigenSolver<oracle::CMat> es(h);
  const oracle::CMat v = es.eigenvectors();
  const Eigen::VectorXd e = es.eigenvalues();
  const oracle::cd mi(0, -1);
  oracle::CMat out = mi * (h * rho - rho * h);
  for (int i = 0; i < n; ++i) {
    const oracle::CMat z = oracle::on_qubit(oracle::pauli('z'), i, n);
    oracle::CMat l = v.adjoint() * z * v;
    for (Eigen::Index a = 0; a < l.rows(); ++a)
      for (Eigen::Index b = 0; b < l.cols(); ++b)
        l(a, b) *= spectral_density(e(b) - e(a), cfg) / 2.0;
    l = v * l * v.adjoint();
    const oracle::CMat x = l * rho - rho * l.adjoint();
    out -= z * x - x * z;
  }
  return out;
}

oracle::CMat random_density(int dim, Rng &rng) {
  oracle::CMat a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      a(i, j) = oracle::cd(rng.normal(), rng.normal());
  oracle::CMat rho = a * a.adjoint();
  return rho / rho.trace();
}

} // namespace

TEST_CASE("zero noise reproduces closed evolution") {
  const auto cv = cost_vector(generate_instance(4, 3));
  const BangBangProtocol bb{1, {0.3, 0.6, 0.4}, 1.3};
  const auto psi = evolve_protocol(initial_state(4), bb, cv);
  const DensityMatrix closed = pure_density(psi);
  const auto d = dephasing_evolve(plus_density(4), bb, DephasingConfig{0.0, 1e-3}, cv);
  CHECK((d.rho - closed).norm() < 1e-6);
  const auto r = redfield_evolve(plus_density(4), bb, RedfieldConfig{0.0, 1.0, 1e-3}, cv);
  CHECK((r.rho - closed).norm() < 1e-6);

  const auto ramp = evolve_linear_ramp(initial_state(4), 1.0, default_ramp_steps(1.0), cv);
  const auto dr = dephasing_evolve(plus_density(4), LinearRamp{1.0}, DephasingConfig{0.0, 1e-3}, cv);
  CHECK((dr.rho - pure_density(ramp)).norm() < 1e-6);
  const auto rr = redfield_evolve(plus_density(4), LinearRamp{1.0}, RedfieldConfig{0.0, 1.0, 1e-3}, cv);
  CHECK((rr.rho - pure_density(ramp)).norm() < 1e-6);
}

TEST_CASE("dephasing matches the dense Lindblad propagator") {
  for (int n : {1, 2, 3}) {
    const auto inst = generate_instance(n, 40 + static_cast<std::uint64_t>(n));
    const auto cv = cost_vector(inst);
    const double w = 0.3;
    const BangBangProtocol bb{0, {0.4, 0.5, 0.35}, 1.25};
    std::vector<oracle::Piece> pieces;
    for (std::size_t i = 0; i < bb.durations.size(); ++i)
      pieces.push_back({static_cast<double>(bb.value_of(i)), bb.durations[i]});
    const auto out = dephasing_evolve(plus_density(n), bb, DephasingConfig{w, 1e-3}, cv);
    CHECK((out.rho - oracle::evolve_dephasing(inst, pieces, w)).norm() < 1e-9);
  }
}

TEST_CASE("dephasing on a ramp converges to a fine staircase") {
  const auto inst = generate_instance(2, 6);
  const auto cv = cost_vector(inst);
  std::vector<oracle::Piece> pieces;
  const int m = 400;
  for (int k = 0; k < m; ++k)
    pieces.push_back({(k + 0.5) / m, 1.0 / m});
  const auto out = dephasing_evolve(plus_density(2), LinearRamp{1.0}, DephasingConfig{0.2, 1e-3}, cv);
  // Midpoint staircase error is O(1/m^2).
  CHECK((out.rho - oracle::evolve_dephasing(inst, pieces, 0.2)).norm() < 1e-5);
}

TEST_CASE("Redfield generator matches the operator form") {
  Rng rng(17);
  for (int n : {1, 2, 3}) {
    const auto cv = cost_vector(generate_instance(n, 50 + static_cast<std::uint64_t>(n)));
    const RedfieldConfig cfg{0.2, 1.5, 1e-3};
    for (double g : {0.0, 0.3, 1.0}) {
      const RealMatrix h = dense_hamiltonian(cv, g);
      const oracle::CMat rho = random_density(static_cast<int>(cv.dim()), rng);
      const DensityMatrix got = redfield_rhs(rho, h, cfg, n);
      const oracle::CMat want = redfield_oracle(rho, h.cast<oracle::cd>(), n, cfg);
      CHECK((got - want).norm() < 1e-12 * std::max(1.0, want.norm()));
    }
  }
}

TEST_CASE("spectral density") {
  const RedfieldConfig cfg{0.3, 2.0, 1e-3};
  CHECK(spectral_density(0.0, cfg) == doctest::Approx(0.3 / 2.0));
  CHECK(spectral_density(1e-9, cfg) == doctest::Approx(0.3 / 2.0).epsilon(1e-8));
  for (double w : {0.1, 0.7, 2.5, 10.0}) {
    // Detailed balance.
    CHECK(spectral_density(-w, cfg) == doctest::Approx(std::exp(-cfg.beta * w) * spectral_density(w, cfg)).epsilon(1e-12));
    CHECK(spectral_density(w, cfg) > 0.0);
    CHECK(spectral_density(w, cfg) - spectral_density(-w, cfg) == doctest::Approx(cfg.eta * w).epsilon(1e-12));
  }
}

TEST_CASE("the Gibbs state is stationary and attracts the maximally mixed state") {
  const auto cv = cost_vector(generate_instance(3, 11));
  const RedfieldConfig cfg{0.1, 2.0, 1e-2};
  const double g = 0.5;
  const RealMatrix h = dense_hamiltonian(cv, g);
  const oracle::CMat rho_th = oracle::gibbs(h.cast<oracle::cd>(), cfg.beta);
  CHECK(redfield_rhs(rho_th, h, cfg, 3).norm() < 1e-12);

  const Index d = cv.dim();
  const DensityMatrix mixed = DensityMatrix::Identity(d, d) / static_cast<double>(d);
  const Protocol hold{200.0, {{g, 200.0}}};
  const auto out = redfield_evolve(mixed, hold, cfg, cv);
  CHECK(trace_distance(out.rho, rho_th) < 1e-4);
}

TEST_CASE("trace and hermiticity are preserved") {
  const auto cv = cost_vector(generate_instance(4, 2));
  const auto d = dephasing_evolve(plus_density(4), LinearRamp{2.0}, DephasingConfig{0.1, 1e-3}, cv);
  CHECK(std::abs(d.rho.trace().real() - 1.0) < 1e-10);
  CHECK((d.rho - d.rho.adjoint()).norm() < 1e-12);
  CHECK(d.min_eigenvalue > -1e-10);
  CHECK(d.trace_drift < 1e-10);
  const auto r = redfield_evolve(plus_density(4), LinearRamp{2.0}, RedfieldConfig{1e-4, 1.0, 1e-3}, cv);
  CHECK(std::abs(r.rho.trace().real() - 1.0) < 1e-10);
  CHECK((r.rho - r.rho.adjoint()).norm() < 1e-12);
  CHECK(r.min_eigenvalue > -1e-6);
}

TEST_CASE("fidelity degrades monotonically with dephasing strength") {
  const auto cv = cost_vector(generate_instance(4, 27));
  const BangBangProtocol bb{0, {0.3, 0.5, 0.4, 0.8}, 2.0};
  double last = -1.0;
  for (double w : {0.0, 1e-3, 3e-3, 1e-2, 3e-2}) {
    const auto out = dephasing_evolve(plus_density(4), bb, DephasingConfig{w, 1e-3}, cv);
    const double err = fidelity_error(out.rho, cv);
    CHECK(err > last);
    last = err;
  }
}

TEST_CASE("state-level helpers") {
  const auto cv = cost_vector(generate_instance(3, 8));
  const auto rho = plus_density(3);
  CHECK(energy(rho, cv) == doctest::Approx(energy(initial_state(3), cv)).epsilon(1e-12));
  CHECK(fidelity_error(rho, cv) == doctest::Approx(fidelity_error(initial_state(3), cv)).epsilon(1e-12));
  CHECK(min_eigenvalue(rho) == doctest::Approx(0.0).epsilon(1e-12));
  const DensityMatrix mixed = DensityMatrix::Identity(8, 8) / 8.0;
  CHECK(trace_distance(rho, mixed) == doctest::Approx(7.0 / 8.0).epsilon(1e-12));
  CHECK(trace_distance(rho, rho) < 1e-12);
}

TEST_CASE("invalid configurations and invariant failures") {
  const auto cv = cost_vector(generate_instance(3, 1));
  CHECK_THROWS_AS(DephasingConfig({-1.0, 1e-3}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(RedfieldConfig({0.1, 0.0, 1e-3}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(dephasing_evolve(plus_density(2), LinearRamp{1.0}, DephasingConfig{}, cv),
                  std::invalid_argument);
  // Redfield dynamics is not completely positive; a strong bath on a pure
  // state drives an eigenvalue negative beyond any step refinement.
  OpenOptions strict;
  strict.positivity_tolerance = 1e-9;
  CHECK_THROWS_AS(redfield_evolve(plus_density(3), LinearRamp{2.0}, RedfieldConfig{0.5, 5.0, 1e-2}, cv, strict),
                  InvariantViolation);
}
