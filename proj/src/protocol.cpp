#include "bangbang/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace bangbang {

namespace {
constexpr double kSumTolerance = 1e-12;

double sum_tolerance(double total_time) {
  return kSumTolerance * std::max(1.0, std::abs(total_time));
}
} // namespace

void Protocol::validate() const {
  if (!(total_time > 0.0) || !std::isfinite(total_time))
    throw std::invalid_argument("protocol total time must be positive");
  double sum = 0.0;
  for (const auto &s : segments) {
    if (!(s.g >= 0.0 && s.g <= 1.0))
      throw std::invalid_argument("control value outside [0, 1]");
    if (!(s.dt >= 0.0) || !std::isfinite(s.dt))
      throw std::invalid_argument("segment duration must be non-negative");
    sum += s.dt;
  }
  if (std::abs(sum - total_time) > sum_tolerance(total_time))
    throw std::invalid_argument("segment durations do not sum to total time");
}

double Protocol::g_at(double t) const {
  double start = 0.0;
  for (const auto &s : segments) {
    if (t < start + s.dt)
      return s.g;
    start += s.dt;
  }
  return segments.empty() ? 0.0 : segments.back().g;
}

double Protocol::interior_fraction() const {
  double interior = 0.0;
  for (const auto &s : segments)
    if (s.g > 0.0 && s.g < 1.0)
      interior += s.dt;
  return interior / total_time;
}

Protocol Protocol::linear_ramp(double total_time, int steps) {
  if (steps < 1)
    throw std::invalid_argument("ramp needs at least one step");
  Protocol p;
  p.total_time = total_time;
  const double dt = total_time / steps;
  p.segments.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k)
    p.segments.push_back({(k + 0.5) / steps, dt});
  return p;
}

Protocol Protocol::slices(double total_time, const std::vector<double> &g) {
  if (g.empty())
    throw std::invalid_argument("need at least one slice");
  Protocol p;
  p.total_time = total_time;
  const double dt = total_time / static_cast<double>(g.size());
  for (double v : g)
    p.segments.push_back({v, dt});
  return p;
}

void BangBangProtocol::validate() const {
  if (start_value != 0 && start_value != 1)
    throw std::invalid_argument("bang-bang start value must be 0 or 1");
  if (!(total_time > 0.0) || !std::isfinite(total_time))
    throw std::invalid_argument("protocol total time must be positive");
  double sum = 0.0;
  for (double d : durations) {
    if (!(d >= 0.0) || !std::isfinite(d))
      throw std::invalid_argument("pulse duration must be non-negative");
    sum += d;
  }
  if (std::abs(sum - total_time) > sum_tolerance(total_time))
    throw std::invalid_argument("pulse durations do not sum to total time");
}

std::size_t BangBangProtocol::nonzero_pulses() const {
  std::size_t count = 0;
  for (double d : durations)
    if (d > 0.0)
      ++count;
  return count;
}

BangBangProtocol BangBangProtocol::merged() const {
  BangBangProtocol out;
  out.total_time = total_time;
  int last_value = -1;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    if (durations[i] <= 0.0)
      continue;
    const int v = value_of(i);
    if (v == last_value) {
      out.durations.back() += durations[i];
    } else {
      if (out.durations.empty())
        out.start_value = v;
      out.durations.push_back(durations[i]);
      last_value = v;
    }
  }
  if (out.durations.empty()) {
    out.start_value = start_value;
    out.durations.push_back(total_time);
  }
  return out;
}

std::vector<double> BangBangProtocol::switch_times() const {
  std::vector<double> times;
  double t = 0.0;
  for (std::size_t i = 0; i + 1 < durations.size(); ++i) {
    t += durations[i];
    times.push_back(t);
  }
  return times;
}

Protocol BangBangProtocol::to_protocol() const {
  Protocol p;
  p.total_time = total_time;
  for (std::size_t i = 0; i < durations.size(); ++i)
    p.segments.push_back({static_cast<double>(value_of(i)), durations[i]});
  return p;
}

BangBangProtocol BangBangProtocol::from_switch_times(
    int start_value, const std::vector<double> &times, double total_time) {
  BangBangProtocol out;
  out.start_value = start_value;
  out.total_time = total_time;
  double prev = 0.0;
  for (double t : times) {
    out.durations.push_back(std::max(0.0, t - prev));
    prev = std::max(prev, t);
  }
  out.durations.push_back(std::max(0.0, total_time - prev));
  return out;
}

std::optional<BangBangProtocol> as_bang_bang(const Protocol &p) {
  BangBangProtocol out;
  out.total_time = p.total_time;
  int last_value = -1;
  for (const auto &s : p.segments) {
    if (s.g != 0.0 && s.g != 1.0)
      return std::nullopt;
    const int v = static_cast<int>(s.g);
    if (v == last_value) {
      out.durations.back() += s.dt;
    } else {
      if (out.durations.empty())
        out.start_value = v;
      out.durations.push_back(s.dt);
      last_value = v;
    }
  }
  if (out.durations.empty())
    return std::nullopt;
  return out;
}

} // namespace bangbang
