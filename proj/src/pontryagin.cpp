#include "bangbang/pontryagin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bangbang {

namespace {

constexpr double kFullSegmentSlack = 1e-14;
constexpr double kRootScanStep = 1e-3;
constexpr double kBisectionWidth = 1e-10;

std::vector<double> segment_starts(const Protocol &p) {
  std::vector<double> starts(p.segments.size() + 1, 0.0);
  for (std::size_t i = 0; i < p.segments.size(); ++i)
    starts[i + 1] = starts[i] + p.segments[i].dt;
  return starts;
}

IntegrationPlan exact_plan(const Protocol &p) {
  IntegrationPlan plan;
  for (const auto &s : p.segments) {
    if (s.g != 0.0 && s.g != 1.0 && s.dt != 0.0)
      throw std::invalid_argument(
          "protocol has non-bang segments; pass the forward integration plan");
    plan.substeps.push_back(0);
  }
  return plan;
}

int partial_substeps(int full, double length, double dt) {
  if (full == 0)
    return 0;
  return std::max(1, static_cast<int>(std::ceil(full * length / dt)));
}

// Propagates a state/costate pair together.
void propagate_pair(StateVector &a, CostateVector &pi, const Protocol &p,
                    const IntegrationPlan &plan, const CostVector &cv,
                    double t_from, double t_to) {
  propagate_between(a, p, plan, cv, t_from, t_to);
  propagate_between(pi, p, plan, cv, t_from, t_to);
}

} // namespace

CostateVector terminal_costate(const StateVector &final_state,
                               const CostVector &cv) {
  if (final_state.size() != cv.dim())
    throw std::invalid_argument("state and instance sizes differ");
  return 2.0 * cv.values.cast<Complex>().cwiseProduct(final_state);
}

HamiltonianParts hamiltonian_parts(const StateVector &state,
                                   const CostateVector &costate,
                                   const CostVector &cv) {
  if (state.size() != costate.size() || state.size() != cv.dim())
    throw std::invalid_argument("state, costate and instance sizes differ");
  const Index dim = state.size();
  Complex cost_term(0.0, 0.0);
  for (Index z = 0; z < dim; ++z)
    cost_term += std::conj(costate(z)) * cv.values(z) * state(z);
  Complex flip_term(0.0, 0.0);
  for (Index bit = 1; bit < dim; bit <<= 1)
    for (Index z = 0; z < dim; ++z)
      flip_term += std::conj(costate(z)) * state(z ^ bit);
  // B = -sum_k X_k.
  return {cost_term.imag(), -flip_term.imag()};
}

double switching_function(const StateVector &state,
                          const CostateVector &costate, const CostVector &cv) {
  return hamiltonian_parts(state, costate, cv).switching();
}

void propagate_between(StateVector &amps, const Protocol &p,
                       const IntegrationPlan &plan, const CostVector &cv,
                       double t_from, double t_to) {
  if (t_from == t_to)
    return;
  const auto starts = segment_starts(p);
  const std::size_t count = p.segments.size();
  const bool forward = t_to > t_from;
  const double lo = std::min(t_from, t_to);
  const double hi = std::max(t_from, t_to);
  const double slack = kFullSegmentSlack * std::max(1.0, p.total_time);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = forward ? k : count - 1 - k;
    const auto &seg = p.segments[i];
    const double s = std::max(starts[i], lo);
    const double e = std::min(starts[i + 1], hi);
    double len = e - s;
    if (len <= 0.0)
      continue;
    int sub = plan.substeps[i];
    if (std::abs(len - seg.dt) <= slack)
      len = seg.dt;
    else
      sub = partial_substeps(sub, len, seg.dt);
    propagate_segment(amps, cv, seg.g, forward ? len : -len, sub);
  }
}

std::vector<CostateVector>
backward_sweep(const CostateVector &costate_T, const Protocol &p,
               const CostVector &cv, const std::vector<double> &times,
               const std::optional<IntegrationPlan> &plan) {
  p.validate();
  const IntegrationPlan used = plan ? *plan : exact_plan(p);
  if (used.substeps.size() != p.segments.size())
    throw std::invalid_argument("plan does not match protocol");
  for (double t : times)
    if (!(t >= 0.0 && t <= p.total_time))
      throw std::out_of_range("sample time outside [0, T]");

  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] > times[b]; });

  std::vector<CostateVector> out(times.size());
  CostateVector pi = costate_T;
  double t = p.total_time;
  for (std::size_t idx : order) {
    propagate_between(pi, p, used, cv, t, times[idx]);
    t = times[idx];
    out[idx] = pi;
  }
  return out;
}

double SwitchingTrace::max_abs_phi() const {
  double m = 0.0;
  for (double v : phi)
    m = std::max(m, std::abs(v));
  return m;
}

SwitchingTrace switching_trace(const Protocol &p, const CostVector &cv,
                               double samples_per_unit) {
  auto evo = evolve_with_plan(initial_state(cv.n), p, cv);
  const double T = p.total_time;
  const auto intervals = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(T * samples_per_unit)));

  SwitchingTrace trace;
  trace.times.resize(intervals + 1);
  trace.phi.resize(intervals + 1);
  trace.g.resize(intervals + 1);
  for (std::size_t j = 0; j <= intervals; ++j)
    trace.times[j] = T * static_cast<double>(j) / static_cast<double>(intervals);
  trace.times.back() = T;

  StateVector a = evo.state;
  CostateVector pi = terminal_costate(a, cv);
  for (std::size_t jj = 0; jj <= intervals; ++jj) {
    const std::size_t j = intervals - jj;
    if (jj > 0) {
      const double t_prev = trace.times[j + 1];
      const StateVector a_prev = a;
      const CostateVector pi_prev = pi;
      propagate_pair(a, pi, p, evo.plan, cv, t_prev, trace.times[j]);
      trace.phi[j] = switching_function(a, pi, cv);
      const double phi_hi = trace.phi[j + 1];
      const double phi_lo = trace.phi[j];
      if (phi_lo * phi_hi < 0.0) {
        // Bisect on [t_j, t_{j+1}] starting from the later endpoint.
        double lo = trace.times[j];
        double hi = t_prev;
        const bool hi_positive = phi_hi > 0.0;
        while (hi - lo > kBisectionWidth) {
          const double mid = 0.5 * (lo + hi);
          StateVector am = a_prev;
          CostateVector pm = pi_prev;
          propagate_pair(am, pm, p, evo.plan, cv, t_prev, mid);
          const double v = switching_function(am, pm, cv);
          if ((v > 0.0) == hi_positive)
            hi = mid;
          else
            lo = mid;
        }
        trace.switch_times.push_back(0.5 * (lo + hi));
      } else if (phi_lo == 0.0) {
        trace.switch_times.push_back(trace.times[j]);
      }
    } else {
      trace.phi[j] = switching_function(a, pi, cv);
    }
    trace.g[j] = p.g_at(trace.times[j]);
  }
  std::reverse(trace.switch_times.begin(), trace.switch_times.end());
  return trace;
}

std::vector<double> switching_at(const Protocol &p, const CostVector &cv,
                                 const std::vector<double> &times) {
  for (double t : times)
    if (!(t >= 0.0 && t <= p.total_time))
      throw std::out_of_range("sample time outside [0, T]");
  auto evo = evolve_with_plan(initial_state(cv.n), p, cv);
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] > times[b]; });
  StateVector a = evo.state;
  CostateVector pi = terminal_costate(a, cv);
  std::vector<double> out(times.size());
  double t = p.total_time;
  for (std::size_t idx : order) {
    propagate_pair(a, pi, p, evo.plan, cv, t, times[idx]);
    t = times[idx];
    out[idx] = switching_function(a, pi, cv);
  }
  return out;
}

BangBangGradient bang_bang_gradient(const BangBangProtocol &p,
                                    const CostVector &cv) {
  const std::size_t m = p.durations.size();
  if (m == 0)
    throw std::invalid_argument("empty bang-bang protocol");
  std::vector<StateVector> ends;
  ends.reserve(m);
  StateVector a = initial_state(cv.n);
  for (std::size_t i = 0; i < m; ++i) {
    propagate_segment(a, cv, p.value_of(i), p.durations[i], 0);
    ends.push_back(a);
  }

  BangBangGradient grad;
  grad.cost = energy(a, cv);
  grad.duration.resize(m);
  grad.switching.resize(m - 1);
  grad.phi_at_switch.resize(m - 1);
  CostateVector pi = terminal_costate(a, cv);
  for (std::size_t ii = 0; ii < m; ++ii) {
    const std::size_t i = m - 1 - ii;
    const auto parts = hamiltonian_parts(ends[i], pi, cv);
    const double g = p.value_of(i);
    grad.duration[i] = parts.at(g);
    if (i + 1 < m) {
      const double phi = parts.switching();
      grad.phi_at_switch[i] = phi;
      grad.switching[i] = (g - p.value_of(i + 1)) * phi;
    }
    propagate_segment(pi, cv, g, -p.durations[i], 0);
  }
  return grad;
}

double bang_bang_cost(const BangBangProtocol &p, const CostVector &cv) {
  StateVector a = initial_state(cv.n);
  for (std::size_t i = 0; i < p.durations.size(); ++i)
    propagate_segment(a, cv, p.value_of(i), p.durations[i], 0);
  return energy(a, cv);
}

PulseEndWeight::PulseEndWeight(const StateVector &state_t0,
                               const CostateVector &costate_t0,
                               const CostVector &cv) {
  const Index dim = cv.dim();
  const int n = cv.n;
  gaps_.resize(dim * n);
  weights_.resize(dim * n);
  for (Index z = 0; z < dim; ++z) {
    for (int k = 0; k < n; ++k) {
      const Index zf = flip(z, k);
      gaps_(z * n + k) = cv.values(z) - cv.values(zf);
      weights_(z * n + k) = state_t0(z) * std::conj(costate_t0(zf));
    }
  }
}

double PulseEndWeight::operator()(double tau) const {
  double w = 0.0;
  for (Index i = 0; i < gaps_.size(); ++i) {
    const double phase = -gaps_(i) * tau;
    const Complex factor(std::cos(phase) - 1.0, std::sin(phase));
    w += (factor * weights_(i)).imag();
  }
  return w;
}

std::optional<double> pulse_end_root(const StateVector &state_t0,
                                     const CostateVector &costate_t0,
                                     const CostVector &cv, double horizon) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("search horizon must be positive");
  const PulseEndWeight w(state_t0, costate_t0, cv);
  double prev_t = std::min(kRootScanStep, horizon);
  double prev_w = w(prev_t);
  if (prev_w == 0.0)
    return prev_t;
  const bool positive = prev_w > 0.0;
  for (double t = prev_t + kRootScanStep; t <= horizon + 1e-15;
       t += kRootScanStep) {
    const double cur = w(t);
    if (cur == 0.0)
      return t;
    if ((cur > 0.0) != positive) {
      double lo = prev_t;
      double hi = t;
      while (hi - lo > kBisectionWidth) {
        const double mid = 0.5 * (lo + hi);
        if ((w(mid) > 0.0) == positive)
          lo = mid;
        else
          hi = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev_t = t;
  }
  return std::nullopt;
}

std::string to_string(CertificateStatus s) {
  switch (s) {
  case CertificateStatus::Pass:
    return "pass";
  case CertificateStatus::Fail:
    return "fail";
  case CertificateStatus::PossiblySingular:
    return "possibly_singular";
  }
  return "unknown";
}

double Certificate::max_switch_residual() const {
  double m = 0.0;
  for (const auto &s : switches)
    m = std::max(m, s.relative);
  return m;
}

double Certificate::max_sign_violation() const {
  double m = 0.0;
  for (const auto &s : segments)
    m = std::max(m, s.violation);
  return m;
}

Certificate certify_protocol(const Protocol &p, const CostVector &cv,
                             const CertificateOptions &opts) {
  p.validate();
  Certificate cert;
  cert.interior_fraction = p.interior_fraction();
  cert.trace = switching_trace(p, cv, opts.samples_per_unit);
  cert.max_abs_phi = cert.trace.max_abs_phi();
  const double scale = cert.max_abs_phi;

  // Merge runs of equal control into segments and collect the switches.
  std::vector<double> switch_times;
  double t = 0.0;
  for (std::size_t i = 0; i < p.segments.size(); ++i) {
    const auto &seg = p.segments[i];
    if (seg.dt <= 0.0)
      continue;
    if (!cert.segments.empty() && cert.segments.back().g == seg.g) {
      cert.segments.back().end = t + seg.dt;
    } else {
      if (!cert.segments.empty())
        switch_times.push_back(t);
      cert.segments.push_back({t, t + seg.dt, seg.g, 0.0, true});
    }
    t += seg.dt;
  }
  if (!cert.segments.empty())
    cert.segments.back().end = p.total_time;

  const auto phis = switching_at(p, cv, switch_times);
  for (std::size_t k = 0; k < switch_times.size(); ++k) {
    const double rel = scale > 0.0 ? std::abs(phis[k]) / scale : 0.0;
    cert.switches.push_back({switch_times[k], phis[k], rel});
  }

  const auto &tr = cert.trace;
  for (auto &seg : cert.segments) {
    const bool upper = seg.g == 1.0;
    const bool lower = seg.g == 0.0;
    if (!upper && !lower) {
      seg.consistent = false;
      continue;
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < tr.times.size(); ++j) {
      if (tr.times[j] < seg.start || tr.times[j] > seg.end)
        continue;
      // Phi < 0 selects g = 1; Phi > 0 selects g = 0.
      const double wrong = upper ? tr.phi[j] : -tr.phi[j];
      worst = std::max(worst, wrong);
    }
    seg.violation = scale > 0.0 ? worst / scale : 0.0;
    seg.consistent = seg.violation <= opts.sign_tolerance;
  }

  int run = 0;
  for (double v : tr.phi) {
    if (std::abs(v) < opts.singular_threshold * scale || scale == 0.0) {
      if (++run > opts.singular_window)
        cert.singular = true;
    } else {
      run = 0;
    }
  }

  const bool switches_ok = std::all_of(
      cert.switches.begin(), cert.switches.end(),
      [&](const SwitchResidual &s) { return s.relative < opts.switch_tolerance; });
  const bool signs_ok =
      std::all_of(cert.segments.begin(), cert.segments.end(),
                  [](const SegmentCheck &s) { return s.consistent; });

  if (cert.interior_fraction > opts.interior_tolerance)
    cert.status = CertificateStatus::Fail;
  else if (cert.singular)
    cert.status = CertificateStatus::PossiblySingular;
  else if (switches_ok && signs_ok)
    cert.status = CertificateStatus::Pass;
  else
    cert.status = CertificateStatus::Fail;
  return cert;
}

} // namespace bangbang
