#include "bangbang/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bangbang/rng.hpp"

namespace bangbang {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_text(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path &path, const std::string &text) {
  std::error_code ec;
  if (path.has_parent_path())
    fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out)
    throw std::runtime_error("write failed for " + path.string());
}

namespace {

json parse_file(const fs::path &path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception &e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

template <typename T>
T field(const json &j, const char *key) {
  if (!j.contains(key))
    throw InputError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw InputError(std::string("bad field '") + key + "': " + e.what());
  }
}

} // namespace

json instance_to_json(const SKInstance &inst) {
  json j;
  j["n"] = inst.n;
  j["seed"] = inst.seed;
  j["rng"] = inst.rng;
  json couplings = json::array();
  for (int a = 0; a < inst.n; ++a)
    for (int b = a + 1; b < inst.n; ++b)
      couplings.push_back(json::array({a, b, inst.coupling(a, b)}));
  j["J"] = std::move(couplings);
  j["h"] = inst.fields;
  return j;
}

SKInstance instance_from_json(const json &j) {
  if (!j.is_object())
    throw InputError("instance must be a JSON object");
  const int n = field<int>(j, "n");
  if (n < 1 || n > kMaxQubits)
    throw InputError("instance size out of range");
  const bool has_tables = j.contains("J") || j.contains("h");
  SKInstance inst;
  if (!has_tables) {
    inst = generate_instance(n, field<std::uint64_t>(j, "seed"));
  } else {
    if (!j.contains("J") || !j.contains("h"))
      throw InputError("explicit instances need both J and h");
    inst.n = n;
    inst.seed = j.contains("seed") ? field<std::uint64_t>(j, "seed") : 0;
    inst.rng = j.contains("rng") ? field<std::string>(j, "rng") : std::string(kRngName);
    inst.couplings.assign(SKInstance::pair_count(n), 0.0);
    inst.fields = field<std::vector<double>>(j, "h");
    try {
      for (const auto &entry : j.at("J")) {
        if (!entry.is_array() || entry.size() != 3)
          throw InputError("J entries must be [i, j, value]");
        const int a = entry[0].get<int>(), b = entry[1].get<int>();
        if (a < 0 || b < 0 || a >= n || b >= n || a == b)
          throw InputError("J index out of range");
        inst.set_coupling(a, b, entry[2].get<double>());
      }
    } catch (const json::exception &e) {
      throw InputError(std::string("bad J table: ") + e.what());
    }
  }
  try {
    inst.validate();
  } catch (const std::invalid_argument &e) {
    throw InputError(e.what());
  }
  return inst;
}

void write_instance(const fs::path &path, const SKInstance &inst) {
  write_text(path, instance_to_json(inst).dump(2) + "\n");
}

SKInstance read_instance(const fs::path &path) {
  try {
    return instance_from_json(parse_file(path));
  } catch (const InputError &e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string instance_file_name(int n, std::uint64_t seed, int index) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "sk_n%d_s%llu_%04d.json", n,
                static_cast<unsigned long long>(seed), index);
  return buf;
}

json protocol_to_json(const Protocol &p) {
  json j;
  j["T"] = p.total_time;
  json segs = json::array();
  for (const auto &s : p.segments)
    segs.push_back({{"g", s.g}, {"dt", s.dt}});
  j["segments"] = std::move(segs);
  return j;
}

json protocol_to_json(const BangBangProtocol &p) {
  json j;
  j["T"] = p.total_time;
  j["start"] = p.start_value;
  j["durations"] = p.durations;
  return j;
}

Protocol protocol_from_json(const json &j) {
  if (!j.is_object())
    throw InputError("protocol must be a JSON object");
  try {
    if (j.contains("durations")) {
      BangBangProtocol bb;
      bb.total_time = field<double>(j, "T");
      bb.start_value = field<int>(j, "start");
      bb.durations = field<std::vector<double>>(j, "durations");
      bb.validate();
      return bb.to_protocol();
    }
    Protocol p;
    p.total_time = field<double>(j, "T");
    if (!j.contains("segments") || !j.at("segments").is_array())
      throw InputError("protocol needs segments or durations");
    for (const auto &s : j.at("segments"))
      p.segments.push_back({field<double>(s, "g"), field<double>(s, "dt")});
    p.validate();
    return p;
  } catch (const std::invalid_argument &e) {
    throw InputError(e.what());
  }
}

Protocol read_protocol(const fs::path &path) {
  try {
    return protocol_from_json(parse_file(path));
  } catch (const InputError &e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string results_csv(const std::vector<ResultRow> &rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto &r : rows) {
    out += std::to_string(r.instance_seed) + "," + std::to_string(r.n) + "," +
           format_real(r.T) + "," + r.method + "," + std::to_string(r.pulses) + "," +
           format_real(r.final_energy) + "," + format_real(r.energy_error) + "," +
           format_real(r.fidelity_error) + "," + format_real(r.success_prob) + "," +
           std::to_string(r.evaluations) + "\n";
  }
  return out;
}

std::string noise_csv(const std::vector<NoiseRow> &rows) {
  std::string out = std::string(kNoiseHeader) + "\n";
  for (const auto &r : rows) {
    out += r.protocol_id + "," + r.model + "," + format_real(r.W_or_eta) + "," +
           format_real(r.beta) + "," + format_real(r.T) + "," +
           format_real(r.fidelity_error) + "," + format_real(r.energy_error) + "," +
           format_real(r.trace_drift) + "," + format_real(r.min_eigenvalue) + "\n";
  }
  return out;
}

std::string histogram_csv(const std::vector<DurationHistogram> &hists) {
  std::string out = std::string(kHistogramHeader) + "\n";
  for (const auto &h : hists)
    for (const auto &b : h.bins)
      out += std::to_string(h.n) + "," + format_real(h.T) + "," +
             format_real(b.center) + "," + format_real(b.probability) + "," +
             std::to_string(h.sample_count) + "\n";
  return out;
}

std::string trace_csv(const SwitchingTrace &trace) {
  std::string out = std::string(kTraceHeader) + "\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i)
    out += format_real(trace.times[i]) + "," + format_real(trace.phi[i]) + "," +
           format_real(trace.g[i]) + "\n";
  return out;
}

json result_row_to_json(const ResultRow &r) {
  return {{"instance_seed", r.instance_seed}, {"n", r.n}, {"T", r.T},
          {"method", r.method}, {"pulses", r.pulses},
          {"final_energy", r.final_energy}, {"energy_error", r.energy_error},
          {"fidelity_error", r.fidelity_error}, {"success_prob", r.success_prob},
          {"evaluations", r.evaluations}};
}

ResultRow result_row_from_json(const json &j) {
  ResultRow r;
  r.instance_seed = field<std::uint64_t>(j, "instance_seed");
  r.n = field<int>(j, "n");
  r.T = field<double>(j, "T");
  r.method = field<std::string>(j, "method");
  r.pulses = field<int>(j, "pulses");
  r.final_energy = field<double>(j, "final_energy");
  r.energy_error = field<double>(j, "energy_error");
  r.fidelity_error = field<double>(j, "fidelity_error");
  r.success_prob = field<double>(j, "success_prob");
  r.evaluations = field<long>(j, "evaluations");
  return r;
}

json noise_row_to_json(const NoiseRow &r) {
  return {{"protocol_id", r.protocol_id}, {"model", r.model},
          {"W_or_eta", r.W_or_eta}, {"beta", r.beta}, {"T", r.T},
          {"fidelity_error", r.fidelity_error}, {"energy_error", r.energy_error},
          {"trace_drift", r.trace_drift}, {"min_eigenvalue", r.min_eigenvalue}};
}

NoiseRow noise_row_from_json(const json &j) {
  NoiseRow r;
  r.protocol_id = field<std::string>(j, "protocol_id");
  r.model = field<std::string>(j, "model");
  r.W_or_eta = field<double>(j, "W_or_eta");
  r.beta = field<double>(j, "beta");
  r.T = field<double>(j, "T");
  r.fidelity_error = field<double>(j, "fidelity_error");
  r.energy_error = field<double>(j, "energy_error");
  r.trace_drift = field<double>(j, "trace_drift");
  r.min_eigenvalue = field<double>(j, "min_eigenvalue");
  return r;
}

json RunManifest::to_json() const {
  json j;
  j["command"] = command;
  j["parameters"] = parameters;
  j["master_seed"] = master_seed;
  j["version"] = version;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["wall_clock_seconds"] = wall_clock_seconds;
  return j;
}

void write_manifest(const fs::path &dir, const RunManifest &m) {
  write_text(dir / "manifest.json", m.to_json().dump(2) + "\n");
}

std::string job_key(const json &parameters) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : parameters.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace bangbang
