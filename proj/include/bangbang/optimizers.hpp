#ifndef BANGBANG_OPTIMIZERS_HPP
#define BANGBANG_OPTIMIZERS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bangbang/protocol.hpp"
#include "bangbang/sk_model.hpp"

namespace bangbang {

struct MCConfig {
  int slices = 40;
  int sweeps = 3000;
  // nullopt selects the standard deviation of cost changes over a pilot
  // sweep; 0 gives greedy descent.
  std::optional<double> initial_temperature;
  double cooling_factor = 0.95;
  double move_width = 0.2;
  // Stop once fewer than this fraction of moves in a sweep change the
  // protocol.
  double stop_acceptance = 0.01;
  std::uint64_t seed = 1;
  // Starting slice values; drawn uniformly from [0, 1] when empty.
  std::vector<double> initial_g;

  void validate() const;
};

struct OptimizationResult {
  Protocol best_protocol;
  // Set by the bang-bang optimizer (merged, no zero-length pulses).
  std::optional<BangBangProtocol> best_bang_bang;
  double best_cost = 0.0;
  // Best cost seen so far: one entry per sweep (MC) or per objective
  // evaluation (bang-bang).
  std::vector<double> cost_trace;
  long evaluations = 0;
  bool converged = false;
};

// Metropolis annealing over S equal slices. Each step perturbs one random
// slice by U(-w, w), clamps to [0, 1], and accepts with min(1, e^{-dE/T_MC})
// on the final energy. T_MC decays geometrically per sweep.
//
// Slice propagators are exact (dense eigendecomposition of H_g), so this is
// intended for n <= 8.
OptimizationResult mc_optimize(const CostVector &cv, double total_time,
                               const MCConfig &cfg);
OptimizationResult mc_optimize(const SKInstance &inst, double total_time,
                               const MCConfig &cfg);

struct BBConfig {
  // Pulses in each random start. Needle insertion grows the protocol from
  // there up to max_pulses.
  int initial_pulses = 4;
  int max_pulses = 40;
  int restarts = 4;
  std::uint64_t seed = 1;
  int max_iterations = 3000;
  // Projected-gradient stopping threshold on |P(x - grad) - x|_inf.
  double projected_tolerance = 1e-7;
  // Switch-time gradient threshold for the polishing stage.
  double polish_tolerance = 1e-6;
  int polish_iterations = 400;
  // Wrong-sign excursion of Phi (relative) that triggers a needle pulse.
  double needle_threshold = 5e-4;
  int needle_rounds = 16;
  // A needle round has to lower F by at least this much to continue.
  double improvement_tolerance = 1e-3;

  void validate() const;
};

// Optimizes pulse durations on the simplex {d_i >= 0, sum d_i = T} with
// adjoint gradients. Both start values are tried for each restart.
OptimizationResult bb_optimize(const CostVector &cv, double total_time,
                               const BBConfig &cfg);
OptimizationResult bb_optimize(const SKInstance &inst, double total_time,
                               const BBConfig &cfg);

// Euclidean projection onto {x >= 0, sum x = total}.
std::vector<double> project_to_simplex(const std::vector<double> &x,
                                       double total);

struct QAAResult {
  double final_energy = 0.0;
  double energy_error = 0.0;
  double fidelity_error = 0.0;
};

QAAResult qaa_baseline(const CostVector &cv, double total_time, int steps = 0);
QAAResult qaa_baseline(const SKInstance &inst, double total_time,
                       int steps = 0);

enum class RankBy { SuccessProbability, EnergyError };

struct EnsembleConfig {
  int n = 6;
  double total_time = 2.0;
  int count = 50;
  std::uint64_t master_seed = 2024;
  // 0 keeps every instance.
  int top_k = 0;
  RankBy rank_by = RankBy::SuccessProbability;
  BBConfig bb;
  bool with_qaa = false;
  int qaa_steps = 0;
  unsigned threads = 1;
};

struct InstanceRow {
  int index = 0;
  std::uint64_t instance_seed = 0;
  int n = 0;
  double total_time = 0.0;
  BangBangProtocol protocol;
  int pulses = 0;
  double final_energy = 0.0;
  double energy_error = 0.0;
  double fidelity_error = 0.0;
  double success_prob = 0.0;
  long evaluations = 0;
  bool converged = false;
  std::optional<QAAResult> qaa;
};

struct EnsembleReport {
  std::vector<InstanceRow> rows;
  std::vector<int> selected;
  double mean_success = 0.0;
  double mean_energy_error = 0.0;
  double mean_fidelity_error = 0.0;
  double mean_qaa_energy_error = 0.0;
  double mean_qaa_fidelity_error = 0.0;
};

// Instance i uses seed derive_seed(master_seed, i) for both the couplings
// and its optimizer stream.
EnsembleReport instance_ensemble_run(const EnsembleConfig &cfg);

// Aggregates over a chosen subset; exposed for re-selection without
// re-optimizing.
void summarize(EnsembleReport &report, int top_k, RankBy rank_by);

} // namespace bangbang

#endif // BANGBANG_OPTIMIZERS_HPP
