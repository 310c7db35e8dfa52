#include "bangbang/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace bangbang {

PulseFilter parse_pulse_filter(const std::string &name) {
  if (name == "both")
    return PulseFilter::Both;
  if (name == "g0")
    return PulseFilter::MixerOnly;
  if (name == "g1")
    return PulseFilter::CostOnly;
  throw std::invalid_argument("unknown pulse filter '" + name + "'");
}

std::string to_string(PulseFilter f) {
  switch (f) {
  case PulseFilter::Both:
    return "both";
  case PulseFilter::MixerOnly:
    return "g0";
  case PulseFilter::CostOnly:
    return "g1";
  }
  return "both";
}

std::size_t DurationHistogram::mode_bin() const {
  if (bins.empty())
    throw std::logic_error("empty histogram");
  std::size_t best = 0;
  for (std::size_t i = 1; i < bins.size(); ++i)
    if (bins[i].count > bins[best].count)
      best = i;
  return best;
}

DurationHistogram collect_durations(const std::vector<BangBangProtocol> &protocols,
                                    int n, double bin_width, PulseFilter filter,
                                    double range) {
  if (protocols.empty())
    throw std::invalid_argument("no protocols to histogram");
  if (!(bin_width > 0.0))
    throw std::invalid_argument("bin width must be positive");
  const double T = protocols.front().total_time;
  for (const auto &p : protocols) {
    p.validate();
    if (std::abs(p.total_time - T) > 1e-9 * std::max(1.0, T))
      throw std::invalid_argument("protocols have different total times");
  }

  DurationHistogram h;
  h.bin_width = bin_width;
  h.range = range > 0.0 ? range : std::max(2.0, T);
  h.n = n;
  h.T = T;
  const auto nbins = static_cast<std::size_t>(std::ceil(h.range / bin_width - 1e-9));
  h.bins.resize(nbins);
  for (std::size_t i = 0; i < nbins; ++i)
    h.bins[i].center = (static_cast<double>(i) + 0.5) * bin_width;

  for (const auto &p : protocols) {
    const auto m = p.merged();
    for (std::size_t k = 0; k < m.pulse_count(); ++k) {
      const int v = m.value_of(k);
      if ((filter == PulseFilter::MixerOnly && v != 0) ||
          (filter == PulseFilter::CostOnly && v != 1))
        continue;
      auto bin = static_cast<std::size_t>(std::floor(m.durations[k] / bin_width));
      bin = std::min(bin, nbins - 1);
      ++h.bins[bin].count;
      ++h.sample_count;
    }
  }
  if (h.sample_count == 0)
    throw std::invalid_argument("no pulses pass the filter");
  for (auto &b : h.bins)
    b.probability = static_cast<double>(b.count) / static_cast<double>(h.sample_count);
  return h;
}

double peak_location(const DurationHistogram &h) {
  const std::size_t m = h.mode_bin();
  double mass = 0.0, moment = 0.0;
  for (std::size_t i = (m == 0 ? 0 : m - 1); i <= std::min(m + 1, h.bins.size() - 1); ++i) {
    mass += h.bins[i].probability;
    moment += h.bins[i].probability * h.bins[i].center;
  }
  return moment / mass;
}

CollapseResult collapse_test(const DurationHistogram &h1,
                             const DurationHistogram &h2) {
  if (std::abs(h1.bin_width - h2.bin_width) > 1e-12 ||
      h1.bins.size() != h2.bins.size() ||
      std::abs(h1.T - h2.T) > 1e-9 * std::max(1.0, h1.T))
    throw std::invalid_argument("histograms have incompatible binning");
  CollapseResult r;
  double c1 = 0.0, c2 = 0.0;
  for (std::size_t i = 0; i < h1.bins.size(); ++i) {
    c1 += h1.bins[i].probability;
    c2 += h2.bins[i].probability;
    r.ks_statistic = std::max(r.ks_statistic, std::abs(c1 - c2));
  }
  r.peak_shift = static_cast<int>(h2.mode_bin()) - static_cast<int>(h1.mode_bin());
  return r;
}

std::vector<ComparisonEntry> comparison_table(const std::vector<ComparisonRow> &rows) {
  using Key = std::tuple<double, double, std::uint64_t, int>;
  struct Pair {
    const ComparisonRow *bb = nullptr;
    const ComparisonRow *qaa = nullptr;
  };
  std::map<Key, Pair> pairs;
  for (const auto &r : rows) {
    auto &slot = pairs[{r.T, r.noise, r.instance_seed, r.n}];
    auto &target = (r.method == "qaa") ? slot.qaa : slot.bb;
    if (target)
      throw std::invalid_argument("duplicate comparison row for seed " +
                                  std::to_string(r.instance_seed));
    target = &r;
  }

  std::vector<ComparisonEntry> table;
  for (const auto &[key, pair] : pairs) {
    if (!pair.bb || !pair.qaa)
      throw std::invalid_argument("unmatched comparison row for seed " +
                                  std::to_string(std::get<2>(key)));
    const double T = std::get<0>(key), noise = std::get<1>(key);
    if (table.empty() || table.back().T != T || table.back().noise != noise)
      table.push_back({T, noise});
    auto &e = table.back();
    ++e.pairs;
    e.bb_fidelity_error += pair.bb->fidelity_error;
    e.qaa_fidelity_error += pair.qaa->fidelity_error;
    e.bb_energy_error += pair.bb->energy_error;
    e.qaa_energy_error += pair.qaa->energy_error;
  }
  for (auto &e : table) {
    const double k = static_cast<double>(e.pairs);
    e.bb_fidelity_error /= k;
    e.qaa_fidelity_error /= k;
    e.bb_energy_error /= k;
    e.qaa_energy_error /= k;
    e.fidelity_ratio = e.bb_fidelity_error / e.qaa_fidelity_error;
    e.energy_ratio = e.bb_energy_error / e.qaa_energy_error;
  }
  return table;
}

} // namespace bangbang
