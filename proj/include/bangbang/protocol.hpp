#ifndef BANGBANG_PROTOCOL_HPP
#define BANGBANG_PROTOCOL_HPP

#include <optional>
#include <vector>

namespace bangbang {

struct Segment {
  double g = 0.0;
  double dt = 0.0;
  bool operator==(const Segment &) const = default;
};

// Piecewise-constant control g(t) on [0, T], H(t) = g C + (1 - g) B.
struct Protocol {
  double total_time = 0.0;
  std::vector<Segment> segments;

  // Sum of dt equals total_time within 1e-12 and every g lies in [0, 1].
  void validate() const;

  // Control value at time t; right-continuous at segment boundaries.
  double g_at(double t) const;
  // Fraction of total time spent with g strictly inside (0, 1).
  double interior_fraction() const;

  // g(t) = t/T sampled at the midpoint of `steps` equal slices.
  static Protocol linear_ramp(double total_time, int steps);
  // S equal slices with the given control values.
  static Protocol slices(double total_time, const std::vector<double> &g);
};

// Bang-bang control: pulses alternate between g = start_value and its
// complement. Zero-length pulses are allowed and act as if their neighbours
// were merged.
struct BangBangProtocol {
  int start_value = 1;
  std::vector<double> durations;
  double total_time = 0.0;

  void validate() const;

  int value_of(std::size_t pulse) const {
    return (pulse % 2 == 0) ? start_value : 1 - start_value;
  }
  std::size_t pulse_count() const { return durations.size(); }
  std::size_t nonzero_pulses() const;

  // Drops zero-length pulses, merging equal-valued neighbours.
  BangBangProtocol merged() const;
  // Times of the boundaries between consecutive pulses (one fewer than the
  // pulse count).
  std::vector<double> switch_times() const;

  Protocol to_protocol() const;
  // Rebuilds from switch times; durations telescope so that the sum is
  // exactly total_time up to rounding.
  static BangBangProtocol from_switch_times(int start_value,
                                            const std::vector<double> &times,
                                            double total_time);
};

// Returns the bang-bang form if every segment has g exactly 0 or 1.
std::optional<BangBangProtocol> as_bang_bang(const Protocol &p);

} // namespace bangbang

#endif // BANGBANG_PROTOCOL_HPP
