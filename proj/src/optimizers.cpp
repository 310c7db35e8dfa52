#include "bangbang/optimizers.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

#include "bangbang/pontryagin.hpp"
#include "bangbang/rng.hpp"
#include "bangbang/statevector.hpp"
#include "bangbang/worker_pool.hpp"

namespace bangbang {

using ComplexMatrix = dense_types<double>::ComplexMatrix;

void MCConfig::validate() const {
  if (slices < 1)
    throw std::invalid_argument("MC needs at least one slice");
  if (sweeps < 0)
    throw std::invalid_argument("MC sweep budget must be non-negative");
  if (!(cooling_factor > 0.0 && cooling_factor < 1.0))
    throw std::invalid_argument("cooling factor must lie in (0, 1)");
  if (!(move_width > 0.0 && move_width <= 1.0))
    throw std::invalid_argument("move width must lie in (0, 1]");
  if (initial_temperature && *initial_temperature < 0.0)
    throw std::invalid_argument("initial temperature must be non-negative");
  if (!initial_g.empty() &&
      initial_g.size() != static_cast<std::size_t>(slices))
    throw std::invalid_argument("initial protocol has the wrong slice count");
}

void BBConfig::validate() const {
  if (initial_pulses < 1 || max_pulses < initial_pulses)
    throw std::invalid_argument("need 1 <= initial_pulses <= max_pulses");
  if (!(improvement_tolerance >= 0.0))
    throw std::invalid_argument("improvement tolerance must be non-negative");
  if (restarts < 1)
    throw std::invalid_argument("need at least one restart");
}

namespace {

// Exact propagator e^{-i H_g dt} for one slice, from the real symmetric
// eigendecomposition of H_g.
class SlicePropagator {
public:
  SlicePropagator(const CostVector &cv, double dt)
      : mixer_(dense_hamiltonian(cv, 0.0)), costs_(cv.values), dt_(dt) {}

  ComplexMatrix operator()(double g) const {
    RealMatrix h = (1.0 - g) * mixer_;
    h.diagonal() += g * costs_;
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("slice eigendecomposition failed");
    const RealMatrix &v = es.eigenvectors();
    const RealVector phase = -dt_ * es.eigenvalues();
    const RealMatrix re = v * phase.array().cos().matrix().asDiagonal() * v.transpose();
    const RealMatrix im = v * phase.array().sin().matrix().asDiagonal() * v.transpose();
    ComplexMatrix u(re.rows(), re.cols());
    u.real() = re;
    u.imag() = im;
    return u;
  }

private:
  RealMatrix mixer_;
  RealVector costs_;
  double dt_;
};

} // namespace

OptimizationResult mc_optimize(const CostVector &cv, double total_time,
                               const MCConfig &cfg) {
  cfg.validate();
  if (!(total_time > 0.0))
    throw std::invalid_argument("total time must be positive");

  const auto S = static_cast<std::size_t>(cfg.slices);
  const SlicePropagator propagator(cv, total_time / cfg.slices);
  Rng rng(cfg.seed);

  std::vector<double> g = cfg.initial_g;
  if (g.empty()) {
    g.resize(S);
    for (double &v : g)
      v = rng.uniform();
  }
  for (double &v : g)
    v = std::clamp(v, 0.0, 1.0);

  std::vector<ComplexMatrix> u(S);
  std::vector<StateVector> states(S + 1);
  states[0] = initial_state(cv.n);
  for (std::size_t k = 0; k < S; ++k) {
    u[k] = propagator(g[k]);
    states[k + 1] = u[k] * states[k];
  }

  OptimizationResult result;
  double cost = energy(states[S], cv);
  result.evaluations = 1;
  double best = cost;
  std::vector<double> best_g = g;

  std::vector<StateVector> buffer(S + 1);
  ComplexMatrix trial_u;
  auto propose = [&](std::size_t j, double gp) {
    trial_u = propagator(gp);
    buffer[j + 1] = trial_u * states[j];
    for (std::size_t k = j + 1; k < S; ++k)
      buffer[k + 1] = u[k] * buffer[k];
    ++result.evaluations;
    return energy(buffer[S], cv);
  };
  auto draw_move = [&](std::size_t &j, double &gp) {
    j = static_cast<std::size_t>(rng.index(S));
    gp = std::clamp(g[j] + rng.uniform(-cfg.move_width, cfg.move_width), 0.0, 1.0);
  };

  double temperature = 0.0;
  if (cfg.initial_temperature) {
    temperature = *cfg.initial_temperature;
  } else {
    // Pilot sweep: spread of cost changes from the starting protocol.
    std::vector<double> deltas;
    for (std::size_t step = 0; step < S; ++step) {
      std::size_t j;
      double gp;
      draw_move(j, gp);
      deltas.push_back(propose(j, gp) - cost);
    }
    const double mean =
        std::accumulate(deltas.begin(), deltas.end(), 0.0) / deltas.size();
    double var = 0.0;
    for (double d : deltas)
      var += (d - mean) * (d - mean);
    temperature = std::sqrt(var / deltas.size());
    if (!(temperature > 0.0))
      temperature = 1e-3;
  }

  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
    std::size_t changed = 0;
    for (std::size_t step = 0; step < S; ++step) {
      std::size_t j;
      double gp;
      draw_move(j, gp);
      if (gp == g[j])
        continue;
      const double trial = propose(j, gp);
      const double delta = trial - cost;
      bool accept = delta <= 0.0;
      if (!accept && temperature > 0.0)
        accept = rng.uniform() < std::exp(-delta / temperature);
      if (!accept)
        continue;
      g[j] = gp;
      u[j] = trial_u;
      for (std::size_t k = j + 1; k <= S; ++k)
        std::swap(states[k], buffer[k]);
      cost = trial;
      ++changed;
      if (cost < best) {
        best = cost;
        best_g = g;
      }
    }
    result.cost_trace.push_back(best);
    temperature *= cfg.cooling_factor;
    if (static_cast<double>(changed) < cfg.stop_acceptance * static_cast<double>(S)) {
      result.converged = true;
      break;
    }
  }

  result.best_cost = best;
  result.best_protocol = Protocol::slices(total_time, best_g);
  return result;
}

OptimizationResult mc_optimize(const SKInstance &inst, double total_time,
                               const MCConfig &cfg) {
  return mc_optimize(cost_vector(inst), total_time, cfg);
}

std::vector<double> project_to_simplex(const std::vector<double> &x,
                                       double total) {
  std::vector<double> u = x;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - total) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0)
      theta = candidate;
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = std::max(x[i] - theta, 0.0);
  return out;
}

namespace {

double max_abs(const std::vector<double> &v) {
  double m = 0.0;
  for (double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

// Bang-bang objective with evaluation counting and a running-best trace.
class DurationObjective {
public:
  DurationObjective(const CostVector &cv, double total_time,
                    OptimizationResult &result)
      : cv_(cv), total_time_(total_time), result_(result) {}

  BangBangProtocol protocol(int start, const std::vector<double> &d) const {
    BangBangProtocol p;
    p.start_value = start;
    p.durations = d;
    p.total_time = total_time_;
    return p;
  }

  double cost(const BangBangProtocol &p) {
    ++result_.evaluations;
    return record(bang_bang_cost(p, cv_));
  }

  BangBangGradient gradient(const BangBangProtocol &p) {
    ++result_.evaluations;
    auto g = bang_bang_gradient(p, cv_);
    record(g.cost);
    return g;
  }

  double total_time() const { return total_time_; }
  const CostVector &cv() const { return cv_; }

private:
  double record(double f) {
    const double best = result_.cost_trace.empty()
                            ? f
                            : std::min(result_.cost_trace.back(), f);
    result_.cost_trace.push_back(best);
    return f;
  }

  const CostVector &cv_;
  double total_time_;
  OptimizationResult &result_;
};

// Spectral projected gradient on the duration simplex with a
// non-monotone Armijo backtracking line search.
std::vector<double> projected_gradient(DurationObjective &obj, int start,
                                       std::vector<double> x,
                                       const BBConfig &cfg) {
  constexpr double kStepMin = 1e-10;
  constexpr double kStepMax = 1e10;
  constexpr double kArmijo = 1e-4;
  constexpr std::size_t kMemory = 10;
  const double T = obj.total_time();
  const std::size_t m = x.size();

  auto grad = obj.gradient(obj.protocol(start, x));
  double f = grad.cost;
  std::vector<double> g = grad.duration;
  std::deque<double> history{f};

  auto projected_step = [&](double alpha) {
    std::vector<double> trial(m);
    for (std::size_t i = 0; i < m; ++i)
      trial[i] = x[i] - alpha * g[i];
    trial = project_to_simplex(trial, T);
    for (std::size_t i = 0; i < m; ++i)
      trial[i] -= x[i];
    return trial;
  };

  double alpha = 1.0 / std::max(max_abs(projected_step(1.0)), 1e-12);
  alpha = std::clamp(alpha, kStepMin, kStepMax);

  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (max_abs(projected_step(1.0)) < cfg.projected_tolerance)
      break;
    const auto d = projected_step(alpha);
    const double gd = dot(g, d);
    if (!(gd < 0.0))
      break;
    const double f_ref = *std::max_element(history.begin(), history.end());
    double lambda = 1.0;
    std::vector<double> xt(m);
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      for (std::size_t i = 0; i < m; ++i)
        xt[i] = std::max(0.0, x[i] + lambda * d[i]);
      const double ft = obj.cost(obj.protocol(start, xt));
      if (ft <= f_ref + kArmijo * lambda * gd) {
        accepted = true;
        break;
      }
      // Safeguarded quadratic interpolation.
      const double denom = ft - f - lambda * gd;
      double next = denom > 0.0 ? -0.5 * lambda * lambda * gd / denom : 0.5 * lambda;
      lambda = std::clamp(next, 0.1 * lambda, 0.5 * lambda);
    }
    if (!accepted)
      break;
    const auto gt = obj.gradient(obj.protocol(start, xt));
    std::vector<double> s(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
      s[i] = xt[i] - x[i];
      y[i] = gt.duration[i] - g[i];
    }
    const double sty = dot(s, y);
    alpha = sty > 0.0 ? std::clamp(dot(s, s) / sty, kStepMin, kStepMax) : kStepMax;
    x = std::move(xt);
    f = gt.cost;
    g = gt.duration;
    history.push_back(f);
    if (history.size() > kMemory)
      history.pop_front();
  }
  return x;
}

// Durations implied by switch times (tau_0 = 0, tau_m = T).
std::vector<double> durations_from(const std::vector<double> &tau, double T) {
  std::vector<double> d(tau.size() + 1);
  double prev = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    d[i] = tau[i] - prev;
    prev = tau[i];
  }
  d.back() = T - prev;
  return d;
}

struct PolishOutcome {
  BangBangProtocol protocol;
  double cost = 0.0;
  double gradient_norm = 0.0;
};

// BFGS on the switch times of a merged protocol. When a pulse shrinks to
// zero the protocol is merged and the search restarts in fewer variables.
PolishOutcome polish_switch_times(DurationObjective &obj, BangBangProtocol p,
                                  const BBConfig &cfg) {
  constexpr double kArmijo = 1e-4;
  const double T = obj.total_time();
  PolishOutcome out;
  int budget = cfg.polish_iterations;

  while (true) {
    p = p.merged();
    const std::size_t m = p.durations.size();
    auto grad = obj.gradient(p);
    out.protocol = p;
    out.cost = grad.cost;
    out.gradient_norm = max_abs(grad.switching);
    if (m <= 1)
      return out;

    const std::size_t k = m - 1;
    std::vector<double> tau = p.switch_times();
    std::vector<double> G = grad.switching;
    double f = grad.cost;
    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(k, k);
    bool first_step = true;
    bool collapsed = false;

    while (budget-- > 0) {
      if (max_abs(G) < cfg.polish_tolerance)
        break;
      Eigen::Map<const Eigen::VectorXd> gvec(G.data(), k);
      Eigen::VectorXd dir = -Hinv * gvec;
      if (!(dir.dot(gvec) < 0.0)) {
        Hinv.setIdentity();
        dir = -gvec;
      }
      // Largest step keeping every duration non-negative.
      double alpha_max = std::numeric_limits<double>::infinity();
      std::size_t blocking = m;
      const auto d = durations_from(tau, T);
      for (std::size_t i = 0; i < m; ++i) {
        const double before = i > 0 ? dir(static_cast<Index>(i - 1)) : 0.0;
        const double after = i < k ? dir(static_cast<Index>(i)) : 0.0;
        const double rate = after - before;
        if (rate < 0.0 && -d[i] / rate < alpha_max) {
          alpha_max = -d[i] / rate;
          blocking = i;
        }
      }
      double alpha = std::min(1.0, alpha_max);
      const double slope = dir.dot(gvec);
      std::vector<double> trial(k);
      double ft = f;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        for (std::size_t i = 0; i < k; ++i)
          trial[i] = tau[i] + alpha * dir(static_cast<Index>(i));
        if (alpha == alpha_max && blocking < m) {
          // Land exactly on the boundary.
          if (blocking < k)
            trial[blocking] = blocking > 0 ? trial[blocking - 1] : 0.0;
          else
            trial[k - 1] = T;
        }
        std::sort(trial.begin(), trial.end());
        for (double &t : trial)
          t = std::clamp(t, 0.0, T);
        ft = obj.cost(BangBangProtocol::from_switch_times(p.start_value, trial, T));
        if (ft <= f + kArmijo * alpha * slope) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted)
        break;
      if (alpha == alpha_max && blocking < m) {
        p = BangBangProtocol::from_switch_times(p.start_value, trial, T);
        collapsed = true;
        break;
      }
      const auto gt =
          obj.gradient(BangBangProtocol::from_switch_times(p.start_value, trial, T));
      Eigen::VectorXd s(k), y(k);
      for (std::size_t i = 0; i < k; ++i) {
        s(static_cast<Index>(i)) = trial[i] - tau[i];
        y(static_cast<Index>(i)) = gt.switching[i] - G[i];
      }
      const double sy = s.dot(y);
      if (sy > 1e-14 * s.norm() * y.norm()) {
        if (first_step) {
          Hinv *= sy / y.squaredNorm();
          first_step = false;
        }
        const double rho = 1.0 / sy;
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
        Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) +
               rho * s * s.transpose();
      }
      tau = trial;
      G = gt.switching;
      f = gt.cost;
    }

    if (!collapsed) {
      out.protocol = BangBangProtocol::from_switch_times(p.start_value, tau, T);
      out.cost = f;
      out.gradient_norm = max_abs(G);
      return out;
    }
  }
}

struct NeedleSite {
  double violation = 0.0;
  double time = 0.0;
  std::size_t pulse = 0;
};

// Worst wrong-sign excursion of Phi over the pulses of p.
NeedleSite worst_sign_violation(const BangBangProtocol &p, const CostVector &cv) {
  const auto trace = switching_trace(p.to_protocol(), cv);
  const double scale = trace.max_abs_phi();
  NeedleSite site;
  if (scale == 0.0)
    return site;
  const auto ends = [&] {
    std::vector<double> e;
    double t = 0.0;
    for (double d : p.durations)
      e.push_back(t += d);
    e.back() = p.total_time;
    return e;
  }();
  std::size_t pulse = 0;
  for (std::size_t j = 0; j < trace.times.size(); ++j) {
    const double t = trace.times[j];
    while (pulse + 1 < ends.size() && t > ends[pulse])
      ++pulse;
    const double wrong = (p.value_of(pulse) == 1 ? trace.phi[j] : -trace.phi[j]) / scale;
    if (wrong > site.violation)
      site = {wrong, t, pulse};
  }
  return site;
}

BangBangProtocol insert_needle(const BangBangProtocol &p, const NeedleSite &site,
                               double width) {
  const double start = [&] {
    double t = 0.0;
    for (std::size_t i = 0; i < site.pulse; ++i)
      t += p.durations[i];
    return t;
  }();
  const double length = p.durations[site.pulse];
  width = std::min(width, 0.25 * length);
  const double left = std::clamp(site.time - start - 0.5 * width, 0.0, length - width);
  const double right = length - width - left;

  BangBangProtocol out;
  out.total_time = p.total_time;
  out.start_value = p.start_value;
  for (std::size_t i = 0; i < p.durations.size(); ++i) {
    if (i != site.pulse) {
      out.durations.push_back(p.durations[i]);
      continue;
    }
    out.durations.push_back(left);
    out.durations.push_back(width);
    out.durations.push_back(right);
  }
  return out.merged();
}

struct LocalSolution {
  BangBangProtocol protocol;
  double cost = 0.0;
  bool converged = false;
};

LocalSolution local_search(DurationObjective &obj, int start,
                           std::vector<double> x0, const BBConfig &cfg) {
  auto x = projected_gradient(obj, start, std::move(x0), cfg);
  auto polished = polish_switch_times(obj, obj.protocol(start, x), cfg);

  LocalSolution sol{polished.protocol, polished.cost, false};
  for (int round = 0; round <= cfg.needle_rounds; ++round) {
    const auto site = worst_sign_violation(sol.protocol, obj.cv());
    if (site.violation <= cfg.needle_threshold)
      break;
    if (round == cfg.needle_rounds ||
        sol.protocol.pulse_count() + 2 > static_cast<std::size_t>(cfg.max_pulses))
      break;
    // Phi changes slope inside the needle, so only a thin enough needle
    // realizes the first-order gain.
    std::optional<BangBangProtocol> seeded;
    for (double width = 1e-2; width > 1e-6; width *= 0.25) {
      auto trial = insert_needle(sol.protocol, site, width);
      if (obj.cost(trial) < sol.cost) {
        seeded = std::move(trial);
        break;
      }
    }
    if (!seeded)
      break;
    auto candidate = polish_switch_times(obj, *seeded, cfg);
    if (!(candidate.cost < sol.cost))
      break;
    const double gain = sol.cost - candidate.cost;
    polished = candidate;
    sol.protocol = candidate.protocol;
    sol.cost = candidate.cost;
    if (gain < cfg.improvement_tolerance)
      break;
  }
  // Stationarity in the switch times; the minimum-principle sign conditions
  // are left to the certificate.
  sol.converged = polished.gradient_norm < 10.0 * cfg.polish_tolerance;
  return sol;
}

} // namespace

OptimizationResult bb_optimize(const CostVector &cv, double total_time,
                               const BBConfig &cfg) {
  cfg.validate();
  if (!(total_time > 0.0))
    throw std::invalid_argument("total time must be positive");
  OptimizationResult result;
  DurationObjective obj(cv, total_time, result);

  std::optional<LocalSolution> best;
  for (int r = 0; r < cfg.restarts; ++r) {
    for (int start : {1, 0}) {
      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(2 * r + (1 - start))));
      // Uniform draw on the simplex via normalized exponential spacings.
      std::vector<double> x(static_cast<std::size_t>(cfg.initial_pulses));
      double sum = 0.0;
      for (double &v : x) {
        double u;
        do {
          u = rng.uniform();
        } while (u <= 0.0);
        v = -std::log(u);
        sum += v;
      }
      for (double &v : x)
        v *= total_time / sum;
      x = project_to_simplex(x, total_time);

      auto sol = local_search(obj, start, std::move(x), cfg);
      if (!best || sol.cost < best->cost)
        best = std::move(sol);
    }
  }

  result.best_bang_bang = best->protocol.merged();
  result.best_protocol = result.best_bang_bang->to_protocol();
  result.best_cost = best->cost;
  result.converged = best->converged;
  return result;
}

OptimizationResult bb_optimize(const SKInstance &inst, double total_time,
                               const BBConfig &cfg) {
  return bb_optimize(cost_vector(inst), total_time, cfg);
}

QAAResult qaa_baseline(const CostVector &cv, double total_time, int steps) {
  if (!(total_time > 0.0))
    throw std::invalid_argument("total time must be positive");
  if (steps <= 0)
    steps = default_ramp_steps(total_time);
  const auto psi = evolve_linear_ramp(initial_state(cv.n), total_time, steps, cv);
  QAAResult r;
  r.final_energy = energy(psi, cv);
  r.energy_error = r.final_energy - cv.ground_energy;
  r.fidelity_error = fidelity_error(psi, cv);
  return r;
}

QAAResult qaa_baseline(const SKInstance &inst, double total_time, int steps) {
  return qaa_baseline(cost_vector(inst), total_time, steps);
}

void summarize(EnsembleReport &report, int top_k, RankBy rank_by) {
  std::vector<int> order(report.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto &ra = report.rows[static_cast<std::size_t>(a)];
    const auto &rb = report.rows[static_cast<std::size_t>(b)];
    if (rank_by == RankBy::SuccessProbability)
      return ra.success_prob > rb.success_prob;
    return ra.energy_error < rb.energy_error;
  });
  if (top_k > 0 && static_cast<std::size_t>(top_k) < order.size())
    order.resize(static_cast<std::size_t>(top_k));
  std::sort(order.begin(), order.end());
  report.selected = order;

  double s = 0, e = 0, f = 0, qe = 0, qf = 0;
  for (int i : order) {
    const auto &r = report.rows[static_cast<std::size_t>(i)];
    s += r.success_prob;
    e += r.energy_error;
    f += r.fidelity_error;
    if (r.qaa) {
      qe += r.qaa->energy_error;
      qf += r.qaa->fidelity_error;
    }
  }
  const double k = order.empty() ? 1.0 : static_cast<double>(order.size());
  report.mean_success = s / k;
  report.mean_energy_error = e / k;
  report.mean_fidelity_error = f / k;
  report.mean_qaa_energy_error = qe / k;
  report.mean_qaa_fidelity_error = qf / k;
}

EnsembleReport instance_ensemble_run(const EnsembleConfig &cfg) {
  if (cfg.count < 1)
    throw std::invalid_argument("ensemble needs at least one instance");
  EnsembleReport report;
  report.rows.resize(static_cast<std::size_t>(cfg.count));
  parallel_for(report.rows.size(), cfg.threads, [&](std::size_t i) {
    InstanceRow row;
    row.index = static_cast<int>(i);
    row.instance_seed = derive_seed(cfg.master_seed, i);
    row.n = cfg.n;
    row.total_time = cfg.total_time;
    const auto cv = cost_vector(generate_instance(cfg.n, row.instance_seed));
    BBConfig bb = cfg.bb;
    bb.seed = derive_seed(row.instance_seed, 0xbb);
    const auto res = bb_optimize(cv, cfg.total_time, bb);
    row.protocol = *res.best_bang_bang;
    row.pulses = static_cast<int>(row.protocol.nonzero_pulses());
    const auto psi = evolve_protocol(initial_state(cv.n), row.protocol, cv);
    row.final_energy = energy(psi, cv);
    row.energy_error = row.final_energy - cv.ground_energy;
    row.success_prob = ground_state_probability(psi, cv);
    row.fidelity_error = 1.0 - row.success_prob;
    row.evaluations = res.evaluations;
    row.converged = res.converged;
    if (cfg.with_qaa)
      row.qaa = qaa_baseline(cv, cfg.total_time, cfg.qaa_steps);
    report.rows[i] = std::move(row);
  });
  summarize(report, cfg.top_k, cfg.rank_by);
  return report;
}

} // namespace bangbang
