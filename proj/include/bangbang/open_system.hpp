#ifndef BANGBANG_OPEN_SYSTEM_HPP
#define BANGBANG_OPEN_SYSTEM_HPP

#include <variant>

#include "bangbang/protocol.hpp"
#include "bangbang/sk_model.hpp"
#include "bangbang/types.hpp"

namespace bangbang {

// g(t) = t/T over [0, T].
struct LinearRamp {
  double total_time = 0.0;
};

using Schedule = std::variant<Protocol, BangBangProtocol, LinearRamp>;

double schedule_time(const Schedule &s);

// White-noise random fields on every qubit in x and z, W_b = W_h = W:
//   d rho/dt = -i[H, rho] - (W^2/2) sum_i [[rho, Z_i], Z_i]
//                         - (W^2/2) sum_i [[rho, X_i], X_i]
struct DephasingConfig {
  double W = 0.0;
  double step = 1e-3;
  void validate() const;
};

// Ohmic bath coupled through sum_i Z_i (x) Q_i at inverse temperature beta.
struct RedfieldConfig {
  double eta = 0.0;
  double beta = 1.0;
  double step = 1e-3;
  void validate() const;
};

// S(omega) = eta omega / (1 - e^{-beta omega}); eta / beta at omega = 0.
double spectral_density(double omega, const RedfieldConfig &cfg);

struct OpenEvolution {
  DensityMatrix rho;
  // Largest |Tr rho(t) - Tr rho(0)| over the checkpoints.
  double trace_drift = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  // Step actually used after any halving.
  double step = 0.0;
};

struct OpenOptions {
  // Diagnostics are taken at segment ends and at least this often.
  double checkpoint_interval = 0.5;
  double trace_tolerance_per_time = 1e-6;
  double hermiticity_tolerance = 1e-9;
  double positivity_tolerance = 1e-6;
  int max_halvings = 3;
};

DensityMatrix pure_density(const StateVector &psi);

// Classical 4th-order fixed-step integration of the dephasing master
// equation. For bang-bang schedules H is C or B per segment; for ramps H(t)
// is evaluated at each stage time.
OpenEvolution dephasing_evolve(const DensityMatrix &rho0, const Schedule &s,
                               const DephasingConfig &cfg, const CostVector &cv,
                               const OpenOptions &opts = {});

// Born-Markov Redfield equation without secular approximation or Lamb
// shift, built in the instantaneous eigenbasis of H:
//   d rho/dt = -i[H, rho] - sum_i [Z_i, L_i rho - rho L_i^dagger],
//   <a|L_i|b> = <a|Z_i|b> S(E_b - E_a) / 2.
// The eigenbasis is computed once per constant-g segment and at the midpoint
// of every step for ramps.
OpenEvolution redfield_evolve(const DensityMatrix &rho0, const Schedule &s,
                              const RedfieldConfig &cfg, const CostVector &cv,
                              const OpenOptions &opts = {});

// Redfield generator for a fixed Hamiltonian applied once; used to check
// stationary states.
DensityMatrix redfield_rhs(const DensityMatrix &rho, const RealMatrix &hamiltonian,
                           const RedfieldConfig &cfg, int n);

double energy(const DensityMatrix &rho, const CostVector &cv);
double fidelity_error(const DensityMatrix &rho, const CostVector &cv);
double min_eigenvalue(const DensityMatrix &rho);
// Half the trace norm of the difference.
double trace_distance(const DensityMatrix &a, const DensityMatrix &b);

} // namespace bangbang

#endif // BANGBANG_OPEN_SYSTEM_HPP
