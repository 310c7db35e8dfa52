#ifndef BANGBANG_STATS_HPP
#define BANGBANG_STATS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "bangbang/protocol.hpp"

namespace bangbang {

enum class PulseFilter { Both, MixerOnly, CostOnly };

PulseFilter parse_pulse_filter(const std::string &name);
std::string to_string(PulseFilter f);

struct HistogramBin {
  double center = 0.0;
  double probability = 0.0;
  std::size_t count = 0;
};

// Pulse-duration histogram on [0, range) with equal bins.
struct DurationHistogram {
  double bin_width = 0.05;
  double range = 2.0;
  std::vector<HistogramBin> bins;
  std::size_t sample_count = 0;
  int n = 0;
  double T = 0.0;

  std::size_t mode_bin() const;
};

// Pools the merged nonzero pulse durations of every protocol. Durations at
// or beyond `range` land in the last bin; range <= 0 means max(2, T).
DurationHistogram collect_durations(const std::vector<BangBangProtocol> &protocols,
                                    int n, double bin_width = 0.05,
                                    PulseFilter filter = PulseFilter::Both,
                                    double range = 0.0);

// Mode bin center refined by the probability-weighted mean of the mode bin
// and its two neighbours.
double peak_location(const DurationHistogram &h);

struct CollapseResult {
  double ks_statistic = 0.0;
  // Mode bin of h2 minus mode bin of h1.
  int peak_shift = 0;
};

CollapseResult collapse_test(const DurationHistogram &h1,
                             const DurationHistogram &h2);

struct ComparisonRow {
  std::uint64_t instance_seed = 0;
  int n = 0;
  double T = 0.0;
  // "qaa" is the baseline; anything else is the optimized side.
  std::string method;
  double noise = 0.0;
  double fidelity_error = 0.0;
  double energy_error = 0.0;
};

struct ComparisonEntry {
  double T = 0.0;
  double noise = 0.0;
  std::size_t pairs = 0;
  double bb_fidelity_error = 0.0;
  double qaa_fidelity_error = 0.0;
  double bb_energy_error = 0.0;
  double qaa_energy_error = 0.0;
  double fidelity_ratio = 0.0;
  double energy_ratio = 0.0;
};

// Means per (T, noise) over pairs matched on (instance_seed, n, T, noise),
// sorted by T then noise. Throws on unmatched or duplicated rows.
std::vector<ComparisonEntry> comparison_table(const std::vector<ComparisonRow> &rows);

} // namespace bangbang

#endif // BANGBANG_STATS_HPP
