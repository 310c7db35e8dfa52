#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bangbang/io.hpp"
#include "bangbang/open_system.hpp"
#include "bangbang/optimizers.hpp"
#include "bangbang/pontryagin.hpp"
#include "bangbang/rng.hpp"
#include "bangbang/stats.hpp"
#include "bangbang/statevector.hpp"
#include "bangbang/worker_pool.hpp"

using namespace bangbang;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInvariant = 3;

using Clock = std::chrono::steady_clock;

struct Common {
  std::string out;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

void add_common(CLI::App *cmd, Common &c, std::uint64_t default_seed) {
  c.seed = default_seed;
  cmd->add_option("--out", c.out, "Output directory")->required();
  cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads")->capture_default_str();
}

class Run {
public:
  Run(std::string command, const Common &c) : start_(Clock::now()) {
    manifest_.command = std::move(command);
    manifest_.master_seed = c.seed;
    manifest_.version = BANGBANG_VERSION;
    dir_ = c.out;
    fs::create_directories(dir_);
  }

  json &parameters() { return manifest_.parameters; }
  void input(const fs::path &p) { manifest_.inputs.push_back(p.string()); }

  void write(const std::string &name, const std::string &text) {
    write_text(dir_ / name, text);
    manifest_.outputs.push_back(name);
  }

  void finish() {
    manifest_.wall_clock_seconds =
        std::chrono::duration<double>(Clock::now() - start_).count();
    write_manifest(dir_, manifest_);
  }

  const fs::path &dir() const { return dir_; }

private:
  RunManifest manifest_;
  fs::path dir_;
  Clock::time_point start_;
};

std::string dump(const json &j) { return j.dump(2) + "\n"; }

ResultRow make_row(const SKInstance &inst, const CostVector &cv, double T,
                   const std::string &method, int pulses,
                   const StateVector &final_state, long evaluations) {
  ResultRow r;
  r.instance_seed = inst.seed;
  r.n = inst.n;
  r.T = T;
  r.method = method;
  r.pulses = pulses;
  r.final_energy = energy(final_state, cv);
  r.energy_error = r.final_energy - cv.ground_energy;
  r.fidelity_error = fidelity_error(final_state, cv);
  r.success_prob = 1.0 - r.fidelity_error;
  r.evaluations = evaluations;
  return r;
}

int segment_runs(const Protocol &p) {
  int runs = 0;
  double last = -1.0;
  for (const auto &s : p.segments) {
    if (s.dt <= 0.0)
      continue;
    if (s.g != last)
      ++runs;
    last = s.g;
  }
  return runs;
}

json certificate_json(const Certificate &c) {
  json j;
  j["status"] = to_string(c.status);
  j["interior_fraction"] = c.interior_fraction;
  j["max_abs_phi"] = c.max_abs_phi;
  j["max_switch_residual"] = c.max_switch_residual();
  j["max_sign_violation"] = c.max_sign_violation();
  j["possibly_singular"] = c.singular;
  json sw = json::array();
  for (const auto &s : c.switches)
    sw.push_back({{"time", s.time}, {"phi", s.phi}, {"relative", s.relative}});
  j["switches"] = std::move(sw);
  j["phi_zeros"] = c.trace.switch_times;
  json segs = json::array();
  for (const auto &s : c.segments)
    segs.push_back({{"start", s.start}, {"end", s.end}, {"g", s.g},
                    {"violation", s.violation}, {"consistent", s.consistent}});
  j["segments"] = std::move(segs);
  return j;
}

// Config readers share the defaults of the library structs.
BBConfig bb_config(const json &j) {
  BBConfig c;
  if (j.is_null())
    return c;
  c.restarts = j.value("restarts", c.restarts);
  c.initial_pulses = j.value("initial_pulses", c.initial_pulses);
  c.max_pulses = j.value("max_pulses", c.max_pulses);
  c.needle_rounds = j.value("needle_rounds", c.needle_rounds);
  c.improvement_tolerance = j.value("improvement_tolerance", c.improvement_tolerance);
  return c;
}

json bb_json(const BBConfig &c) {
  return {{"restarts", c.restarts}, {"initial_pulses", c.initial_pulses},
          {"max_pulses", c.max_pulses}, {"needle_rounds", c.needle_rounds},
          {"improvement_tolerance", c.improvement_tolerance}};
}

MCConfig mc_config(const json &j) {
  MCConfig c;
  if (j.is_null())
    return c;
  c.slices = j.value("slices", c.slices);
  c.sweeps = j.value("sweeps", c.sweeps);
  c.cooling_factor = j.value("cooling_factor", c.cooling_factor);
  c.move_width = j.value("move_width", c.move_width);
  return c;
}

json mc_json(const MCConfig &c) {
  return {{"slices", c.slices}, {"sweeps", c.sweeps},
          {"cooling_factor", c.cooling_factor}, {"move_width", c.move_width}};
}

// ---- gen -------------------------------------------------------------------

int cmd_gen(const Common &c, int n, int count) {
  if (n < 1 || n > kMaxQubits || count < 1)
    throw InputError("gen needs 1 <= n <= 16 and count >= 1");
  Run run("gen", c);
  run.parameters() = {{"n", n}, {"count", count}, {"seed", c.seed}};
  for (int i = 0; i < count; ++i) {
    const auto seed = derive_seed(c.seed, static_cast<std::uint64_t>(i));
    run.write(instance_file_name(n, c.seed, i),
              dump(instance_to_json(generate_instance(n, seed))));
  }
  run.finish();
  return kExitOk;
}

// ---- optimize --------------------------------------------------------------

struct OptimizeArgs {
  std::string instance;
  std::string method = "bb";
  double T = 2.0;
  bool certify = false;
  int slices = 40;
  int sweeps = 3000;
  int restarts = 4;
  int max_pulses = 40;
};

int cmd_optimize(const Common &c, const OptimizeArgs &a) {
  if (a.method != "mc" && a.method != "bb")
    throw CLI::ValidationError("--method", "must be mc or bb");
  if (!(a.T > 0.0))
    throw InputError("--T must be positive");
  const auto inst = read_instance(a.instance);
  const auto cv = cost_vector(inst);

  Run run("optimize", c);
  run.input(a.instance);
  OptimizationResult res;
  json method_params;
  if (a.method == "mc") {
    MCConfig cfg;
    cfg.slices = a.slices;
    cfg.sweeps = a.sweeps;
    cfg.seed = c.seed;
    res = mc_optimize(cv, a.T, cfg);
    method_params = mc_json(cfg);
  } else {
    BBConfig cfg;
    cfg.restarts = a.restarts;
    cfg.max_pulses = a.max_pulses;
    cfg.seed = c.seed;
    res = bb_optimize(cv, a.T, cfg);
    method_params = bb_json(cfg);
  }
  run.parameters() = {{"instance", a.instance}, {"method", a.method}, {"T", a.T},
                      {"certify", a.certify}, {"seed", c.seed},
                      {a.method, method_params}};

  StateVector final_state;
  int pulses;
  if (res.best_bang_bang) {
    run.write("protocol.json", dump(protocol_to_json(*res.best_bang_bang)));
    final_state = evolve_protocol(initial_state(inst.n), *res.best_bang_bang, cv);
    pulses = static_cast<int>(res.best_bang_bang->pulse_count());
  } else {
    run.write("protocol.json", dump(protocol_to_json(res.best_protocol)));
    final_state = evolve_protocol(initial_state(inst.n), res.best_protocol, cv);
    pulses = segment_runs(res.best_protocol);
  }
  const auto row = make_row(inst, cv, a.T, a.method, pulses, final_state, res.evaluations);
  json result = result_row_to_json(row);
  result["converged"] = res.converged;
  result["interior_fraction"] = res.best_protocol.interior_fraction();
  run.write("result.json", dump(result));
  run.write("results.csv", results_csv({row}));

  if (a.certify) {
    const auto cert = certify_protocol(res.best_protocol, cv);
    run.write("switches.json", dump(certificate_json(cert)));
    run.write("trace.csv", trace_csv(cert.trace));
    std::cout << "certificate: " << to_string(cert.status) << "\n";
  }
  std::cout << "final_energy " << format_real(row.final_energy) << " success_prob "
            << format_real(row.success_prob) << "\n";
  run.finish();
  return kExitOk;
}

// ---- evolve ----------------------------------------------------------------

struct EvolveArgs {
  std::string instance;
  std::string protocol;
  double ramp = 0.0;
  std::optional<double> dephasing;
  std::vector<double> redfield;
  double step = 1e-3;
  double positivity_tolerance = 1e-6;
};

struct Metrics {
  std::string model = "closed";
  double final_energy = 0.0;
  double energy_error = 0.0;
  double fidelity_error = 0.0;
  double trace_drift = 0.0;
  double min_eigenvalue = 0.0;
  double hermiticity_error = 0.0;
  double step = 0.0;
};

Metrics closed_metrics(const Schedule &s, const CostVector &cv) {
  StateVector psi = initial_state(cv.n);
  if (const auto *r = std::get_if<LinearRamp>(&s))
    psi = evolve_linear_ramp(psi, r->total_time, default_ramp_steps(r->total_time), cv);
  else if (const auto *bb = std::get_if<BangBangProtocol>(&s))
    psi = evolve_protocol(psi, *bb, cv);
  else
    psi = evolve_protocol(psi, std::get<Protocol>(s), cv);
  Metrics m;
  m.final_energy = energy(psi, cv);
  m.energy_error = m.final_energy - cv.ground_energy;
  m.fidelity_error = fidelity_error(psi, cv);
  m.trace_drift = std::abs(psi.squaredNorm() - 1.0);
  m.min_eigenvalue = 0.0;
  return m;
}

Metrics open_metrics(const std::string &model, const OpenEvolution &e,
                     const CostVector &cv) {
  Metrics m;
  m.model = model;
  m.final_energy = energy(e.rho, cv);
  m.energy_error = m.final_energy - cv.ground_energy;
  m.fidelity_error = fidelity_error(e.rho, cv);
  m.trace_drift = e.trace_drift;
  m.min_eigenvalue = e.min_eigenvalue;
  m.hermiticity_error = e.hermiticity_error;
  m.step = e.step;
  return m;
}

Schedule to_schedule(const Protocol &p) {
  if (auto bb = as_bang_bang(p))
    return *bb;
  return p;
}

int cmd_evolve(const Common &c, const EvolveArgs &a) {
  if (a.protocol.empty() == (a.ramp <= 0.0))
    throw InputError("give exactly one of --protocol or --ramp");
  if (a.dephasing && !a.redfield.empty())
    throw InputError("--dephasing and --redfield are exclusive");
  const auto inst = read_instance(a.instance);
  const auto cv = cost_vector(inst);
  const Schedule schedule = a.protocol.empty() ? Schedule{LinearRamp{a.ramp}}
                                               : to_schedule(read_protocol(a.protocol));

  Run run("evolve", c);
  run.input(a.instance);
  if (!a.protocol.empty())
    run.input(a.protocol);
  OpenOptions opts;
  opts.positivity_tolerance = a.positivity_tolerance;

  Metrics m;
  json noise = {{"model", "closed"}};
  if (a.dephasing) {
    DephasingConfig cfg{*a.dephasing, a.step};
    m = open_metrics("dephasing",
                     dephasing_evolve(pure_density(initial_state(inst.n)), schedule, cfg, cv, opts),
                     cv);
    noise = {{"model", "dephasing"}, {"W", cfg.W}, {"step", cfg.step}};
  } else if (!a.redfield.empty()) {
    RedfieldConfig cfg{a.redfield.at(0), a.redfield.at(1), a.step};
    m = open_metrics("redfield",
                     redfield_evolve(pure_density(initial_state(inst.n)), schedule, cfg, cv, opts),
                     cv);
    noise = {{"model", "redfield"}, {"eta", cfg.eta}, {"beta", cfg.beta}, {"step", cfg.step}};
  } else {
    m = closed_metrics(schedule, cv);
  }
  run.parameters() = {{"instance", a.instance}, {"protocol", a.protocol},
                      {"ramp", a.ramp}, {"noise", noise},
                      {"positivity_tolerance", a.positivity_tolerance}};

  json out;
  out["model"] = m.model;
  out["T"] = schedule_time(schedule);
  out["final_energy"] = m.final_energy;
  out["energy_error"] = m.energy_error;
  out["fidelity_error"] = m.fidelity_error;
  out["success_prob"] = 1.0 - m.fidelity_error;
  out[m.model == "closed" ? "norm_drift" : "trace_drift"] = m.trace_drift;
  if (m.model != "closed") {
    out["min_eigenvalue"] = m.min_eigenvalue;
    out["hermiticity_error"] = m.hermiticity_error;
    out["step"] = m.step;
  }
  run.write("metrics.json", dump(out));
  std::cout << out.dump(2) << "\n";
  run.finish();
  return kExitOk;
}

// ---- certify ---------------------------------------------------------------

int cmd_certify(const Common &c, const std::string &instance,
                const std::string &protocol) {
  const auto inst = read_instance(instance);
  const auto cv = cost_vector(inst);
  const auto p = read_protocol(protocol);
  Run run("certify", c);
  run.input(instance);
  run.input(protocol);
  run.parameters() = {{"instance", instance}, {"protocol", protocol}};
  const auto cert = certify_protocol(p, cv);
  run.write("switches.json", dump(certificate_json(cert)));
  run.write("trace.csv", trace_csv(cert.trace));
  std::cout << "certificate: " << to_string(cert.status) << "\n";
  run.finish();
  return kExitOk;
}

// ---- qaa -------------------------------------------------------------------

int cmd_qaa(const Common &c, const std::string &instance, double T, int steps) {
  if (!(T > 0.0))
    throw InputError("--T must be positive");
  const auto inst = read_instance(instance);
  const auto cv = cost_vector(inst);
  Run run("qaa", c);
  run.input(instance);
  const int used = steps > 0 ? steps : default_ramp_steps(T);
  run.parameters() = {{"instance", instance}, {"T", T}, {"steps", used}};
  const auto psi = evolve_linear_ramp(initial_state(inst.n), T, used, cv);
  const auto row = make_row(inst, cv, T, "qaa", used, psi, 0);
  run.write("result.json", dump(result_row_to_json(row)));
  run.write("results.csv", results_csv({row}));
  std::cout << "energy_error " << format_real(row.energy_error) << " fidelity_error "
            << format_real(row.fidelity_error) << "\n";
  run.finish();
  return kExitOk;
}

// ---- sweep -----------------------------------------------------------------

struct NoiseSetting {
  std::string model;
  double value = 0.0;
  double beta = 0.0;
};

struct SweepConfig {
  std::vector<int> sizes;
  std::vector<double> times;
  int count = 1;
  std::vector<std::string> methods;
  std::vector<NoiseSetting> noise;
  BBConfig bb;
  MCConfig mc;
  int qaa_steps = 0;
  int top_k = 0;
  double bin_width = 0.05;
  PulseFilter pulses = PulseFilter::Both;
  double step = 1e-3;
  double positivity_tolerance = 1e-6;
};

template <typename T>
std::vector<T> list_of(const json &j, const char *key) {
  if (!j.contains(key))
    throw InputError(std::string("sweep config needs '") + key + "'");
  const auto &v = j.at(key);
  if (v.is_array())
    return v.get<std::vector<T>>();
  return {v.get<T>()};
}

SweepConfig parse_sweep(const json &j) {
  SweepConfig s;
  try {
    s.sizes = list_of<int>(j, "n");
    s.times = list_of<double>(j, "T");
    s.count = j.value("count", 1);
    s.methods = j.contains("methods") ? list_of<std::string>(j, "methods")
                                      : std::vector<std::string>{"bb", "qaa"};
    if (j.contains("dephasing"))
      for (double w : list_of<double>(j, "dephasing"))
        s.noise.push_back({"dephasing", w, 0.0});
    if (j.contains("redfield")) {
      const auto &r = j.at("redfield");
      for (double beta : list_of<double>(r, "beta"))
        for (double eta : list_of<double>(r, "eta"))
          s.noise.push_back({"redfield", eta, beta});
    }
    s.bb = bb_config(j.contains("bb") ? j.at("bb") : json());
    s.mc = mc_config(j.contains("mc") ? j.at("mc") : json());
    s.qaa_steps = j.value("qaa_steps", 0);
    s.top_k = j.value("top_k", 0);
    s.bin_width = j.value("bin_width", 0.05);
    s.pulses = parse_pulse_filter(j.value("pulses", std::string("both")));
    s.step = j.value("step", 1e-3);
    s.positivity_tolerance = j.value("positivity_tolerance", 1e-6);
  } catch (const json::exception &e) {
    throw InputError(std::string("sweep config: ") + e.what());
  } catch (const std::invalid_argument &e) {
    throw InputError(std::string("sweep config: ") + e.what());
  }
  if (s.sizes.empty() || s.times.empty())
    throw InputError("sweep grid is empty");
  for (int n : s.sizes)
    if (n < 1 || n > kMaxQubits)
      throw InputError("sweep n out of range");
  for (double T : s.times)
    if (!(T > 0.0))
      throw InputError("sweep T must be positive");
  if (s.count < 1)
    throw InputError("sweep count must be >= 1");
  for (const auto &m : s.methods)
    if (m != "bb" && m != "mc" && m != "qaa")
      throw InputError("unknown sweep method '" + m + "'");
  for (const auto &ns : s.noise) {
    if (!(ns.value >= 0.0))
      throw InputError("noise strengths must be non-negative");
    if (ns.model == "redfield" && !(ns.beta > 0.0))
      throw InputError("redfield beta must be positive");
  }
  if (!(s.bin_width > 0.0) || s.top_k < 0)
    throw InputError("bad histogram or selection settings");
  return s;
}

struct Job {
  int n = 0;
  double T = 0.0;
  int index = 0;
  std::uint64_t instance_seed = 0;
  json parameters;
  std::string key;
};

std::string protocol_id(const std::string &method, const Job &job) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s-n%d-T%s-%04d", method.c_str(), job.n,
                format_real(job.T).c_str(), job.index);
  return buf;
}

json run_job(const Job &job, const SweepConfig &s) {
  const auto inst = generate_instance(job.n, job.instance_seed);
  const auto cv = cost_vector(inst);
  json results = json::array(), noise = json::array(), protocols = json::object();
  std::vector<std::pair<std::string, Schedule>> schedules;

  for (const auto &method : s.methods) {
    if (method == "qaa") {
      const int steps = s.qaa_steps > 0 ? s.qaa_steps : default_ramp_steps(job.T);
      const auto psi = evolve_linear_ramp(initial_state(job.n), job.T, steps, cv);
      results.push_back(result_row_to_json(make_row(inst, cv, job.T, "qaa", steps, psi, 0)));
      schedules.emplace_back("qaa", LinearRamp{job.T});
    } else if (method == "bb") {
      BBConfig cfg = s.bb;
      cfg.seed = derive_seed(job.instance_seed, 0xbb);
      const auto res = bb_optimize(cv, job.T, cfg);
      const auto &p = *res.best_bang_bang;
      const auto psi = evolve_protocol(initial_state(job.n), p, cv);
      results.push_back(result_row_to_json(make_row(
          inst, cv, job.T, "bb", static_cast<int>(p.pulse_count()), psi, res.evaluations)));
      protocols["bb"] = protocol_to_json(p);
      schedules.emplace_back("bb", p);
    } else {
      MCConfig cfg = s.mc;
      cfg.seed = derive_seed(job.instance_seed, 0x3c);
      const auto res = mc_optimize(cv, job.T, cfg);
      const auto psi = evolve_protocol(initial_state(job.n), res.best_protocol, cv);
      results.push_back(result_row_to_json(make_row(
          inst, cv, job.T, "mc", segment_runs(res.best_protocol), psi, res.evaluations)));
      protocols["mc"] = protocol_to_json(res.best_protocol);
      schedules.emplace_back("mc", to_schedule(res.best_protocol));
    }
  }

  OpenOptions opts;
  opts.positivity_tolerance = s.positivity_tolerance;
  const DensityMatrix rho0 = pure_density(initial_state(job.n));
  for (const auto &ns : s.noise) {
    for (const auto &[method, schedule] : schedules) {
      OpenEvolution e;
      if (ns.model == "dephasing")
        e = dephasing_evolve(rho0, schedule, DephasingConfig{ns.value, s.step}, cv, opts);
      else
        e = redfield_evolve(rho0, schedule, RedfieldConfig{ns.value, ns.beta, s.step}, cv, opts);
      NoiseRow row;
      row.protocol_id = protocol_id(method, job);
      row.model = ns.model;
      row.W_or_eta = ns.value;
      row.beta = ns.beta;
      row.T = job.T;
      row.fidelity_error = fidelity_error(e.rho, cv);
      row.energy_error = energy(e.rho, cv) - cv.ground_energy;
      row.trace_drift = e.trace_drift;
      row.min_eigenvalue = e.min_eigenvalue;
      noise.push_back(noise_row_to_json(row));
    }
  }
  return {{"parameters", job.parameters}, {"results", std::move(results)},
          {"noise", std::move(noise)}, {"protocols", std::move(protocols)}};
}

std::string comparison_csv_header() {
  return "n,model,beta,T,noise,pairs,bb_fidelity_error,qaa_fidelity_error,"
         "fidelity_ratio,bb_energy_error,qaa_energy_error,energy_ratio\n";
}

int cmd_sweep(const Common &c, const std::string &config_path) {
  json config;
  try {
    config = json::parse(read_text(config_path));
  } catch (const json::exception &e) {
    throw InputError(config_path + ": " + e.what());
  }
  const auto s = parse_sweep(config);

  Run run("sweep", c);
  run.input(config_path);
  run.parameters() = config;
  run.parameters()["threads"] = c.threads;

  std::vector<Job> jobs;
  for (int n : s.sizes) {
    for (double T : s.times) {
      for (int i = 0; i < s.count; ++i) {
        Job job{n, T, i, derive_seed(derive_seed(c.seed, static_cast<std::uint64_t>(n)),
                                     static_cast<std::uint64_t>(i))};
        json noise = json::array();
        for (const auto &ns : s.noise)
          noise.push_back({ns.model, ns.value, ns.beta});
        job.parameters = {{"n", n}, {"T", T}, {"index", i},
                          {"instance_seed", job.instance_seed},
                          {"methods", s.methods}, {"bb", bb_json(s.bb)},
                          {"mc", mc_json(s.mc)}, {"qaa_steps", s.qaa_steps},
                          {"noise", noise}, {"step", s.step},
                          {"positivity_tolerance", s.positivity_tolerance},
                          {"version", BANGBANG_VERSION}};
        job.key = job_key(job.parameters);
        jobs.push_back(std::move(job));
      }
    }
  }

  const fs::path job_dir = run.dir() / "jobs";
  fs::create_directories(job_dir);
  auto load = [&](const Job &job) -> std::optional<json> {
    const auto path = job_dir / (job.key + ".json");
    if (!fs::exists(path))
      return std::nullopt;
    try {
      auto j = json::parse(read_text(path));
      if (j.at("parameters") == job.parameters)
        return j;
    } catch (const std::exception &) {
    }
    return std::nullopt;
  };

  std::vector<const Job *> pending;
  for (const auto &job : jobs)
    if (!load(job))
      pending.push_back(&job);
  std::cerr << "sweep: " << jobs.size() << " jobs, " << pending.size() << " to run\n";

  std::mutex log_mutex;
  parallel_for(pending.size(), c.threads, [&](std::size_t k) {
    const Job &job = *pending[k];
    const auto result = run_job(job, s);
    const auto tmp = job_dir / (job.key + ".json.tmp");
    write_text(tmp, result.dump() + "\n");
    fs::rename(tmp, job_dir / (job.key + ".json"));
    std::lock_guard lock(log_mutex);
    std::cerr << "  done n=" << job.n << " T=" << job.T << " #" << job.index << "\n";
  });

  // Aggregation is sequential in grid order.
  std::vector<ResultRow> result_rows;
  std::vector<NoiseRow> noise_rows;
  std::map<std::pair<int, double>, std::vector<BangBangProtocol>> bb_protocols;
  std::map<std::pair<int, double>, std::vector<std::pair<double, std::uint64_t>>> success;
  for (const auto &job : jobs) {
    const auto j = load(job);
    if (!j)
      throw std::runtime_error("job " + job.key + " missing after sweep");
    for (const auto &r : j->at("results")) {
      result_rows.push_back(result_row_from_json(r));
      if (result_rows.back().method == "bb")
        success[{job.n, job.T}].push_back({result_rows.back().success_prob, job.instance_seed});
    }
    for (const auto &r : j->at("noise"))
      noise_rows.push_back(noise_row_from_json(r));
    if (j->at("protocols").contains("bb")) {
      const auto p = protocol_from_json(j->at("protocols").at("bb"));
      bb_protocols[{job.n, job.T}].push_back(*as_bang_bang(p));
    }
  }
  run.write("results.csv", results_csv(result_rows));
  if (!noise_rows.empty())
    run.write("noise.csv", noise_csv(noise_rows));

  // Top-k selection by bang-bang success probability, per (n, T).
  std::map<std::pair<int, double>, std::vector<std::uint64_t>> keep;
  for (auto &[key, list] : success) {
    std::stable_sort(list.begin(), list.end(),
                     [](const auto &a, const auto &b) { return a.first > b.first; });
    const std::size_t k = s.top_k > 0 ? std::min<std::size_t>(s.top_k, list.size()) : list.size();
    for (std::size_t i = 0; i < k; ++i)
      keep[key].push_back(list[i].second);
  }
  auto selected = [&](int n, double T, std::uint64_t seed) {
    auto it = keep.find({n, T});
    if (it == keep.end())
      return s.top_k == 0;
    return std::find(it->second.begin(), it->second.end(), seed) != it->second.end();
  };

  const bool compare = std::count(s.methods.begin(), s.methods.end(), "bb") &&
                       std::count(s.methods.begin(), s.methods.end(), "qaa");
  if (compare) {
    std::string csv = comparison_csv_header();
    auto emit = [&](int n, const std::string &model, double beta,
                    const std::vector<ComparisonRow> &rows) {
      for (const auto &e : comparison_table(rows))
        csv += std::to_string(n) + "," + model + "," + format_real(beta) + "," +
               format_real(e.T) + "," + format_real(e.noise) + "," +
               std::to_string(e.pairs) + "," + format_real(e.bb_fidelity_error) + "," +
               format_real(e.qaa_fidelity_error) + "," + format_real(e.fidelity_ratio) + "," +
               format_real(e.bb_energy_error) + "," + format_real(e.qaa_energy_error) + "," +
               format_real(e.energy_ratio) + "\n";
    };
    for (int n : s.sizes) {
      std::vector<ComparisonRow> rows;
      for (const auto &r : result_rows)
        if (r.n == n && r.method != "mc" && selected(n, r.T, r.instance_seed))
          rows.push_back({r.instance_seed, r.n, r.T, r.method, 0.0, r.fidelity_error,
                          r.energy_error});
      emit(n, "none", 0.0, rows);
      // Noise rows are tied back to their instance through the job list.
      std::map<std::tuple<std::string, double>, std::vector<ComparisonRow>> by_model;
      for (const auto &job : jobs) {
        if (job.n != n || !selected(n, job.T, job.instance_seed))
          continue;
        for (const auto &r : noise_rows) {
          for (const char *m : {"bb", "qaa"}) {
            if (r.protocol_id == protocol_id(m, job))
              by_model[{r.model, r.beta}].push_back({job.instance_seed, n, r.T, m, r.W_or_eta,
                                                     r.fidelity_error, r.energy_error});
          }
        }
      }
      for (const auto &[key, rows2] : by_model)
        emit(n, std::get<0>(key), std::get<1>(key), rows2);
    }
    run.write("comparison.csv", csv);
  }

  if (!bb_protocols.empty()) {
    std::vector<DurationHistogram> hists;
    json collapse = json::array();
    std::map<double, const DurationHistogram *> reference;
    for (const auto &[key, protocols] : bb_protocols)
      hists.push_back(collect_durations(protocols, key.first, s.bin_width, s.pulses));
    for (const auto &h : hists) {
      if (!reference.count(h.T))
        reference[h.T] = &h;
      const auto vs = collapse_test(*reference[h.T], h);
      json entry = {{"n", h.n}, {"T", h.T}, {"reference_n", reference[h.T]->n},
                    {"ks_statistic", vs.ks_statistic}, {"peak_shift", vs.peak_shift},
                    {"peak_location", peak_location(h)}, {"samples", h.sample_count}};
      try {
        const auto &ps = bb_protocols.at({h.n, h.T});
        const auto g0 = collect_durations(ps, h.n, s.bin_width, PulseFilter::MixerOnly);
        const auto g1 = collect_durations(ps, h.n, s.bin_width, PulseFilter::CostOnly);
        entry["ks_g0_vs_g1"] = collapse_test(g0, g1).ks_statistic;
      } catch (const std::invalid_argument &) {
        entry["ks_g0_vs_g1"] = nullptr;
      }
      collapse.push_back(std::move(entry));
    }
    run.write("histograms.csv", histogram_csv(hists));
    run.write("collapse.json", dump(collapse));
  }
  run.finish();
  return kExitOk;
}

// ---- hist ------------------------------------------------------------------

int cmd_hist(const Common &c, const std::vector<std::string> &files, int n,
             double bin_width, const std::string &pulses) {
  if (files.empty())
    throw InputError("hist needs protocol files");
  Run run("hist", c);
  std::vector<BangBangProtocol> protocols;
  for (const auto &f : files) {
    run.input(f);
    auto bb = as_bang_bang(read_protocol(f));
    if (!bb)
      throw InputError(f + " is not a bang-bang protocol");
    protocols.push_back(*bb);
  }
  run.parameters() = {{"files", files}, {"n", n}, {"bin_width", bin_width},
                      {"pulses", pulses}};
  const auto h = collect_durations(protocols, n, bin_width, parse_pulse_filter(pulses));
  run.write("histogram.csv", histogram_csv({h}));
  std::cout << "samples " << h.sample_count << " peak " << format_real(peak_location(h))
            << "\n";
  run.finish();
  return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Bang-bang quantum annealing toolkit"};
  app.set_version_flag("--version", BANGBANG_VERSION);
  app.require_subcommand(1);

  Common gen_c, opt_c, evo_c, cert_c, qaa_c, sweep_c, hist_c;

  int gen_n = 6, gen_count = 1;
  auto *gen = app.add_subcommand("gen", "Write random SK instances");
  add_common(gen, gen_c, 2024);
  gen->add_option("--n", gen_n, "Number of spins")->capture_default_str();
  gen->add_option("--count", gen_count, "Number of instances")->capture_default_str();

  OptimizeArgs oa;
  auto *opt = app.add_subcommand("optimize", "Optimize a protocol for one instance");
  add_common(opt, opt_c, 1);
  opt->add_option("--instance", oa.instance)->required();
  opt->add_option("--method", oa.method, "mc or bb")->capture_default_str();
  opt->add_option("--T", oa.T, "Total time")->capture_default_str();
  opt->add_flag("--certify", oa.certify, "Also write the switching trace");
  opt->add_option("--slices", oa.slices)->capture_default_str();
  opt->add_option("--sweeps", oa.sweeps)->capture_default_str();
  opt->add_option("--restarts", oa.restarts)->capture_default_str();
  opt->add_option("--max-pulses", oa.max_pulses)->capture_default_str();

  EvolveArgs ea;
  auto *evo = app.add_subcommand("evolve", "Evolve a protocol, optionally with noise");
  add_common(evo, evo_c, 1);
  evo->add_option("--instance", ea.instance)->required();
  evo->add_option("--protocol", ea.protocol);
  evo->add_option("--ramp", ea.ramp, "Linear ramp of this total time");
  evo->add_option("--dephasing", ea.dephasing, "White-noise strength W");
  evo->add_option("--redfield", ea.redfield, "eta beta")->expected(2);
  evo->add_option("--step", ea.step, "RK4 step")->capture_default_str();
  evo->add_option("--positivity-tolerance", ea.positivity_tolerance)->capture_default_str();

  std::string cert_instance, cert_protocol;
  auto *cert = app.add_subcommand("certify", "Check the minimum-principle conditions");
  add_common(cert, cert_c, 1);
  cert->add_option("--instance", cert_instance)->required();
  cert->add_option("--protocol", cert_protocol)->required();

  std::string qaa_instance;
  double qaa_T = 2.0;
  int qaa_steps = 0;
  auto *qaa = app.add_subcommand("qaa", "Linear-ramp baseline");
  add_common(qaa, qaa_c, 1);
  qaa->add_option("--instance", qaa_instance)->required();
  qaa->add_option("--T", qaa_T)->capture_default_str();
  qaa->add_option("--steps", qaa_steps, "0 picks the default resolution");

  std::string sweep_config;
  auto *sweep = app.add_subcommand("sweep", "Run a JSON-configured experiment grid");
  add_common(sweep, sweep_c, 2024);
  sweep->add_option("--config", sweep_config)->required();

  std::vector<std::string> hist_files;
  int hist_n = 0;
  double hist_width = 0.05;
  std::string hist_pulses = "both";
  auto *hist = app.add_subcommand("hist", "Pulse-duration histogram of protocol files");
  add_common(hist, hist_c, 1);
  hist->add_option("protocols", hist_files)->required();
  hist->add_option("--n", hist_n, "Size tag for the CSV");
  hist->add_option("--bin-width", hist_width)->capture_default_str();
  hist->add_option("--pulses", hist_pulses, "both, g0 or g1")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen)
      return cmd_gen(gen_c, gen_n, gen_count);
    if (*opt)
      return cmd_optimize(opt_c, oa);
    if (*evo)
      return cmd_evolve(evo_c, ea);
    if (*cert)
      return cmd_certify(cert_c, cert_instance, cert_protocol);
    if (*qaa)
      return cmd_qaa(qaa_c, qaa_instance, qaa_T, qaa_steps);
    if (*sweep)
      return cmd_sweep(sweep_c, sweep_config);
    if (*hist)
      return cmd_hist(hist_c, hist_files, hist_n, hist_width, hist_pulses);
  } catch (const CLI::ValidationError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError &e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument &e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvariantViolation &e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
