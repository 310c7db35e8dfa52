#include "bangbang/sk_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bangbang/rng.hpp"

namespace bangbang {

std::size_t SKInstance::pair_index(int n, int i, int j) {
  if (i > j)
    std::swap(i, j);
  if (i < 0 || j >= n || i == j)
    throw std::out_of_range("coupling index out of range");
  // Offset of row i in the packed strict upper triangle.
  const auto row = static_cast<std::size_t>(i);
  return row * static_cast<std::size_t>(n) - row * (row + 1) / 2 +
         static_cast<std::size_t>(j - i - 1);
}

double SKInstance::coupling(int i, int j) const {
  return couplings[pair_index(n, i, j)];
}

void SKInstance::set_coupling(int i, int j, double value) {
  couplings[pair_index(n, i, j)] = value;
}

void SKInstance::validate() const {
  if (n < 1 || n > kMaxQubits)
    throw std::invalid_argument("qubit count must be in [1, 16], got " +
                                std::to_string(n));
  if (couplings.size() != pair_count(n))
    throw std::invalid_argument("coupling table has wrong size");
  if (fields.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("field vector has wrong size");
}

SKInstance generate_instance(int n, std::uint64_t seed) {
  if (n < 1 || n > kMaxQubits)
    throw std::invalid_argument("qubit count must be in [1, 16], got " +
                                std::to_string(n));
  SKInstance inst;
  inst.n = n;
  inst.seed = seed;
  inst.rng = std::string(kRngName);
  Rng rng(seed);
  inst.couplings.resize(SKInstance::pair_count(n));
  for (double &j : inst.couplings)
    j = rng.normal();
  inst.fields.resize(static_cast<std::size_t>(n));
  for (double &h : inst.fields)
    h = rng.normal();
  return inst;
}

bool CostVector::is_ground(Index z) const {
  return std::binary_search(ground_set.begin(), ground_set.end(), z);
}

CostVector cost_vector(const SKInstance &inst) {
  inst.validate();
  const int n = inst.n;
  const Index dim = basis_dim(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));

  CostVector cv;
  cv.n = n;
  cv.values.resize(dim);
  for (Index z = 0; z < dim; ++z) {
    double pair_sum = 0.0;
    std::size_t p = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j, ++p)
        pair_sum += inst.couplings[p] * spin(z, i) * spin(z, j);
    double field_sum = 0.0;
    for (int i = 0; i < n; ++i)
      field_sum += inst.fields[static_cast<std::size_t>(i)] * spin(z, i);
    cv.values(z) = scale * pair_sum + field_sum;
  }

  cv.ground_energy = cv.values.minCoeff();
  for (Index z = 0; z < dim; ++z)
    if (cv.values(z) == cv.ground_energy)
      cv.ground_set.push_back(z);
  return cv;
}

double flip_delta(const CostVector &cv, Index z, int k) {
  if (k < 0 || k >= cv.n)
    throw std::out_of_range("spin index out of range");
  if (z < 0 || z >= cv.dim())
    throw std::out_of_range("basis index out of range");
  return cv.values(z) - cv.values(flip(z, k));
}

} // namespace bangbang
