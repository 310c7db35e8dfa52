#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "../support/oracle.hpp"
#include "bangbang/rng.hpp"
#include "bangbang/sk_model.hpp"
#include "bangbang/statevector.hpp"

using namespace bangbang;

TEST_CASE("instances are deterministic per seed and record the generator") {
  const auto a = generate_instance(6, 42), b = generate_instance(6, 42);
  CHECK(a == b);
  CHECK(a.rng == std::string(kRngName));
  CHECK(a.seed == 42);
  CHECK(a.couplings.size() == 15);
  CHECK(a.fields.size() == 6);
  CHECK_FALSE(generate_instance(6, 43) == a);
}

TEST_CASE("coupling and field draws are standard normal") {
  std::vector<double> xs;
  for (std::uint64_t s = 0; s < 400; ++s) {
    const auto inst = generate_instance(10, derive_seed(7, s));
    xs.insert(xs.end(), inst.couplings.begin(), inst.couplings.end());
    xs.insert(xs.end(), inst.fields.begin(), inst.fields.end());
  }
  double mean = 0.0, var = 0.0;
  for (double x : xs)
    mean += x;
  mean /= static_cast<double>(xs.size());
  for (double x : xs)
    var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  // 22000 samples: standard errors ~0.007 (mean) and ~0.01 (variance).
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.04);
}

TEST_CASE("generate_instance rejects bad sizes") {
  CHECK_THROWS_AS(generate_instance(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_instance(17, 1), std::invalid_argument);
}

TEST_CASE("validate catches malformed tables") {
  auto inst = generate_instance(4, 1);
  inst.fields.pop_back();
  CHECK_THROWS_AS(inst.validate(), std::invalid_argument);
  inst = generate_instance(4, 1);
  inst.couplings.push_back(0.0);
  CHECK_THROWS_AS(inst.validate(), std::invalid_argument);
}

TEST_CASE("cost table matches the spin-sum and the dense operator") {
  for (int n : {1, 2, 3, 5}) {
    const auto inst = generate_instance(n, 100 + static_cast<std::uint64_t>(n));
    const auto cv = cost_vector(inst);
    const auto dense = oracle::cost_matrix(inst);
    for (Index z = 0; z < cv.dim(); ++z) {
      CHECK(cv.values(z) == doctest::Approx(oracle::classical_energy(inst, static_cast<unsigned>(z))).epsilon(1e-13));
      CHECK(cv.values(z) == doctest::Approx(dense(z, z).real()).epsilon(1e-12));
    }
  }
}

TEST_CASE("bit 0 maps to spin +1") {
  SKInstance inst;
  inst.n = 2;
  inst.couplings = {0.0};
  inst.fields = {1.0, 0.0};
  const auto cv = cost_vector(inst);
  CHECK(cv.values(0) == 1.0);  // s_0 = +1
  CHECK(cv.values(1) == -1.0); // bit 0 set, s_0 = -1
  CHECK(cv.ground_set == std::vector<Index>{1, 3});
}

TEST_CASE("flip_delta") {
  SKInstance one;
  one.n = 1;
  one.fields = {0.7};
  CHECK(flip_delta(cost_vector(one), 0, 0) == doctest::Approx(1.4));

  const auto cv = cost_vector(generate_instance(6, 3));
  for (Index z = 0; z < cv.dim(); ++z)
    for (int k = 0; k < 6; ++k) {
      CHECK(flip_delta(cv, z, k) == cv.values(z) - cv.values(flip(z, k)));
      CHECK(flip_delta(cv, z, k) == -flip_delta(cv, flip(z, k), k));
    }
  CHECK_THROWS_AS(flip_delta(cv, 0, 6), std::out_of_range);
  CHECK_THROWS_AS(flip_delta(cv, 64, 0), std::out_of_range);
}

TEST_CASE("zero fields give a spin-flip symmetric spectrum") {
  auto inst = generate_instance(7, 9);
  std::fill(inst.fields.begin(), inst.fields.end(), 0.0);
  const auto cv = cost_vector(inst);
  const Index mask = cv.dim() - 1;
  for (Index z = 0; z < cv.dim(); ++z)
    CHECK(cv.values(z) == cv.values(z ^ mask));
  CHECK(cv.ground_set.size() % 2 == 0);
}

TEST_CASE("ground set equals brute force") {
  for (int n = 1; n <= 12; n += (n < 6 ? 1 : 3)) {
    const auto inst = generate_instance(n, 500 + static_cast<std::uint64_t>(n));
    const auto cv = cost_vector(inst);
    double best = INFINITY;
    std::vector<Index> arg;
    for (unsigned z = 0; z < (1u << n); ++z) {
      const double e = oracle::classical_energy(inst, z);
      if (e < best - 1e-12) {
        best = e;
        arg = {static_cast<Index>(z)};
      } else if (std::abs(e - best) <= 1e-12) {
        arg.push_back(static_cast<Index>(z));
      }
    }
    CHECK(cv.ground_energy == doctest::Approx(best).epsilon(1e-13));
    CHECK(cv.ground_set == arg);
  }
}

TEST_CASE("ground_state_probability") {
  SKInstance inst;
  inst.n = 2;
  inst.couplings = {0.3};
  inst.fields = {0.5, -1.1};
  const auto cv = cost_vector(inst);
  REQUIRE(cv.ground_set.size() == 1);
  CHECK(ground_state_probability(initial_state(2), cv) == doctest::Approx(0.25));
  StateVector basis = StateVector::Zero(4);
  basis(cv.ground_set[0]) = 1.0;
  CHECK(ground_state_probability(basis, cv) == doctest::Approx(1.0));
  DensityMatrix rho = basis * basis.adjoint();
  CHECK(ground_state_probability(rho, cv) == doctest::Approx(1.0));

  SKInstance deg;
  deg.n = 2;
  deg.couplings = {-1.0};
  deg.fields = {0.0, 0.0};
  const auto dv = cost_vector(deg);
  REQUIRE(dv.ground_set.size() == 2);
  for (Index z : dv.ground_set) {
    StateVector s = StateVector::Zero(4);
    s(z) = 1.0;
    CHECK(ground_state_probability(s, dv) == doctest::Approx(1.0));
  }
}

TEST_CASE("uniform state has zero mean cost") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto cv = cost_vector(generate_instance(8, s));
    CHECK(std::abs(energy(initial_state(8), cv)) < 1e-12);
  }
}

TEST_CASE("disorder-averaged flip variance approaches 4((n-1)/n + 1)") {
  const int n = 10;
  double sum2 = 0.0;
  long count = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto cv = cost_vector(generate_instance(n, derive_seed(11, s)));
    for (Index z = 0; z < cv.dim(); ++z)
      for (int k = 0; k < n; ++k) {
        const double d = flip_delta(cv, z, k);
        sum2 += d * d;
        ++count;
      }
  }
  const double expected = 4.0 * ((n - 1.0) / n + 1.0);
  CHECK(sum2 / static_cast<double>(count) == doctest::Approx(expected).epsilon(0.05));
}
