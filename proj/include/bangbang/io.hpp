#ifndef BANGBANG_IO_HPP
#define BANGBANG_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bangbang/pontryagin.hpp"
#include "bangbang/protocol.hpp"
#include "bangbang/sk_model.hpp"
#include "bangbang/stats.hpp"

namespace bangbang {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Thrown for unreadable or malformed input files.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// %.17g, enough to round-trip any double.
std::string format_real(double x);

std::string read_text(const fs::path &path);
// Creates parent directories; throws std::runtime_error if unwritable.
void write_text(const fs::path &path, const std::string &text);

// { "n", "seed", "rng", "J": [[i, j, value]...], "h": [...] }
json instance_to_json(const SKInstance &inst);
// Accepts seed-only input (tables regenerated) or explicit tables; explicit
// tables win when both are present.
SKInstance instance_from_json(const json &j);
void write_instance(const fs::path &path, const SKInstance &inst);
SKInstance read_instance(const fs::path &path);
std::string instance_file_name(int n, std::uint64_t seed, int index);

// { "T", "segments": [{"g", "dt"}...] }
json protocol_to_json(const Protocol &p);
// { "T", "start", "durations" }
json protocol_to_json(const BangBangProtocol &p);
// Either form; the bang-bang form is converted to segments.
Protocol protocol_from_json(const json &j);
Protocol read_protocol(const fs::path &path);

inline constexpr const char *kResultsHeader =
    "instance_seed,n,T,method,pulses,final_energy,energy_error,fidelity_error,"
    "success_prob,evaluations";
inline constexpr const char *kNoiseHeader =
    "protocol_id,model,W_or_eta,beta,T,fidelity_error,energy_error,"
    "trace_drift,min_eigenvalue";
inline constexpr const char *kHistogramHeader = "n,T,bin_center,probability,samples";
inline constexpr const char *kTraceHeader = "time,phi,g";

struct ResultRow {
  std::uint64_t instance_seed = 0;
  int n = 0;
  double T = 0.0;
  std::string method;
  int pulses = 0;
  double final_energy = 0.0;
  double energy_error = 0.0;
  double fidelity_error = 0.0;
  double success_prob = 0.0;
  long evaluations = 0;
};

struct NoiseRow {
  std::string protocol_id;
  std::string model;
  double W_or_eta = 0.0;
  double beta = 0.0;
  double T = 0.0;
  double fidelity_error = 0.0;
  double energy_error = 0.0;
  double trace_drift = 0.0;
  double min_eigenvalue = 0.0;
};

std::string results_csv(const std::vector<ResultRow> &rows);
std::string noise_csv(const std::vector<NoiseRow> &rows);
std::string histogram_csv(const std::vector<DurationHistogram> &hists);
std::string trace_csv(const SwitchingTrace &trace);

json result_row_to_json(const ResultRow &r);
ResultRow result_row_from_json(const json &j);
json noise_row_to_json(const NoiseRow &r);
NoiseRow noise_row_from_json(const json &j);

struct RunManifest {
  std::string command;
  json parameters = json::object();
  std::uint64_t master_seed = 0;
  std::string version;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;

  json to_json() const;
};

void write_manifest(const fs::path &dir, const RunManifest &m);

// FNV-1a of the compact dump, as 16 hex digits.
std::string job_key(const json &parameters);

} // namespace bangbang

#endif // BANGBANG_IO_HPP
