#include "distkp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "distkp/errors.hpp"
#include "distkp/run_log_io.hpp"

namespace distkp {

std::vector<std::uint64_t> ExperimentSpec::resolved_seeds() const {
  return seeds.empty() ? std::vector<std::uint64_t>{config.seed} : seeds;
}

void validate(const ExperimentSpec& spec) {
  try {
    validate(spec.config);
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  if (!spec.run_distkp && !spec.run_oracle && !spec.run_baseline) throw UsageError("runs: select at least one run");
  if (!(spec.lambda > 0.0 && spec.lambda <= 1.0)) throw UsageError("lambda: must lie in (0, 1]");
  std::set<std::uint64_t> unique(spec.seeds.begin(), spec.seeds.end());
  if (unique.size() != spec.seeds.size()) throw UsageError("seeds: values must be distinct");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::stringstream ss(value);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v)) {
    throw UsageError(fmt::format("{}: expected a number, got '{}'", key, value));
  }
  return v;
}

long long to_integer(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw UsageError(fmt::format("{}: expected an integer, got '{}'", key, value));
  return v;
}

std::size_t to_count(const std::string& key, const std::string& value) {
  const long long v = to_integer(key, value);
  if (v < 1) throw UsageError(fmt::format("{}: must be at least 1, got {}", key, v));
  return static_cast<std::size_t>(v);
}

std::uint64_t to_seed(const std::string& key, const std::string& value) {
  const long long v = to_integer(key, value);
  if (v < 0) throw UsageError(fmt::format("{}: seeds must be non-negative", key));
  return static_cast<std::uint64_t>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw UsageError(fmt::format("{}: expected true or false, got '{}'", key, value));
}

using Setter = void (*)(ExperimentSpec&, const std::string&, const std::string&);

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"agents", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.agents = to_count(k, v); }},
      {"features", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.features = to_count(k, v); }},
      {"kernel",
       [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         try {
           s.config.kernel.family = parse_kernel_family(v);
         } catch (const InputError&) {
           throw UsageError(fmt::format("{}: expected rbf or laplace, got '{}'", k, v));
         }
       }},
      {"lengthscale", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.kernel.lengthscale = to_double(k, v); }},
      {"sigma_omega", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.sigma_omega = to_double(k, v); }},
      {"sigma_nu", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.sigma_nu = to_double(k, v); }},
      {"sigma_init", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.sigma_init = to_double(k, v); }},
      {"comm_range", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.comm_range = to_double(k, v); }},
      {"u_max", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.u_max = to_double(k, v); }},
      {"step_std", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.step_std = to_double(k, v); }},
      {"sensing_period", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.sensing_period = static_cast<long>(to_count(k, v)); }},
      {"steps", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.steps = static_cast<long>(to_count(k, v)); }},
      {"seed", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.seed = to_seed(k, v); }},
      {"grid_resolution", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.grid_resolution = to_count(k, v); }},
      {"rel_threshold", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.rel_threshold = to_double(k, v); }},
      {"alg1_literal", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.alg1_literal = to_bool(k, v); }},
      {"parallel", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.parallel = to_bool(k, v); }},
      {"domain_min",
       [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.domain.lower.setConstant(to_double(k, v)); }},
      {"domain_max",
       [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.domain.upper.setConstant(to_double(k, v)); }},
      {"covariance_form",
       [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         if (v == "standard") s.config.covariance_form = CovarianceUpdate::Standard;
         else if (v == "joseph") s.config.covariance_form = CovarianceUpdate::Joseph;
         else throw UsageError(fmt::format("{}: expected standard or joseph, got '{}'", k, v));
       }},
      {"weights",
       [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         if (v == "uniform") s.config.weights = ConsensusWeights::Uniform;
         else if (v == "metropolis") s.config.weights = ConsensusWeights::Metropolis;
         else throw UsageError(fmt::format("{}: expected uniform or metropolis, got '{}'", k, v));
       }},
      {"connectivity",
       [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         if (v == "warn") s.config.connectivity = ConnectivityPolicy::Warn;
         else if (v == "abort") s.config.connectivity = ConnectivityPolicy::Abort;
         else throw UsageError(fmt::format("{}: expected warn or abort, got '{}'", k, v));
       }},
      {"checkpoints",
       [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.config.checkpoints.clear();
         for (const auto& item : split_list(v)) s.config.checkpoints.push_back(static_cast<long>(to_count(k, item)));
       }},
      {"wind_updrafts", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.wind.updrafts = static_cast<std::size_t>(to_integer(k, v)); }},
      {"wind_radius", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.wind.updraft_radius = to_double(k, v); }},
      {"wind_downdraft_amplitude", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.wind.downdraft_amplitude = to_double(k, v); }},
      {"wind_downdraft_radius", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.wind.downdraft_radius = to_double(k, v); }},
      {"wind_satellite_offset", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.wind.satellite_offset = to_double(k, v); }},
      {"wind_speed", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.config.wind.speed = to_double(k, v); }},
      {"runs",
       [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.run_distkp = s.run_oracle = s.run_baseline = false;
         for (const auto& item : split_list(v)) {
           if (item == "distkp") s.run_distkp = true;
           else if (item == "oracle") s.run_oracle = true;
           else if (item == "baseline") s.run_baseline = true;
           else throw UsageError(fmt::format("{}: unknown run '{}' (distkp, oracle, baseline)", k, item));
         }
       }},
      {"seeds",
       [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         s.seeds.clear();
         for (const auto& item : split_list(v)) s.seeds.push_back(to_seed(k, item));
         if (s.seeds.empty()) throw UsageError(fmt::format("{}: empty seed list", k));
       }},
      {"lambda", [](ExperimentSpec& s, const std::string& k, const std::string& v) { s.lambda = to_double(k, v); }},
      {"out", [](ExperimentSpec& s, const std::string&, const std::string& v) { s.output_dir = v; }},
  };
  return table;
}

}  // namespace

void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw UsageError(fmt::format("unknown config key '{}'", key));
  it->second(spec, key, trim(value));
}

void apply_config(std::istream& in, ExperimentSpec& spec) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("config line {}: expected key = value", lineno));
    apply_setting(spec, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

ExperimentSpec parse_args_and_config(int argc, const char* const* argv) {
  CLI::App app{"Distributed Kalman learning of time-varying fields over Nyström features"};
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "flat key = value config file");

  // flag -> config key; every flag value goes through the same setter as the file.
  const std::vector<std::pair<std::string, std::string>> flags{
      {"--agents", "agents"},           {"--features", "features"},       {"--kernel", "kernel"},
      {"--lengthscale", "lengthscale"}, {"--sigma-omega", "sigma_omega"}, {"--sigma-nu", "sigma_nu"},
      {"--sensing-period", "sensing_period"}, {"--steps", "steps"},     {"--seed", "seed"},
      {"--seeds", "seeds"},             {"--runs", "runs"},               {"--lambda", "lambda"},
      {"--out", "out"},                 {"--connectivity", "connectivity"}, {"--weights", "weights"},
  };
  std::vector<std::optional<std::string>> values(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) app.add_option(flags[i].first, values[i]);
  std::vector<std::string> overrides;
  app.add_option("--set", overrides, "override any config key: --set key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  ExperimentSpec spec;
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw IoError(fmt::format("cannot read config file '{}'", *config_path));
    apply_config(in, spec);
  }
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (values[i]) apply_setting(spec, flags[i].second, *values[i]);
  }
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("--set: expected key=value, got '{}'", kv));
    apply_setting(spec, trim(kv.substr(0, eq)), kv.substr(eq + 1));
  }
  validate(spec);
  return spec;
}

namespace {

double final_rmse(const RunLog& log) { return log.metrics.back().rmse; }

void write_run_fields(const std::filesystem::path& dir, const Scenario& scenario, const RunLog& log) {
  std::filesystem::create_directories(dir);
  for (const auto& cp : log.checkpoints) {
    for (std::size_t i = 0; i < cp.fields.size(); ++i) {
      write_field_csv(dir / fmt::format("field_t{}_agent{}.csv", cp.step, i), scenario.grid, cp.fields[i]);
    }
  }
}

struct SeedResult {
  std::uint64_t seed;
  std::optional<double> distkp, oracle, baseline;
};

SeedResult run_seed(const ExperimentSpec& spec, std::uint64_t seed, const std::filesystem::path& dir,
                    std::ostream& log) {
  SimConfig config = spec.config;
  config.seed = seed;
  const Scenario scenario = make_scenario(config);
  std::filesystem::create_directories(dir);
  {
    std::ofstream basis_out(dir / "basis.txt", std::ios::binary);
    write_basis(basis_out, scenario.basis);
  }

  std::optional<RunLog> distkp, oracle, baseline;
  if (spec.run_distkp) distkp = run_distkp(scenario);
  if (spec.run_oracle) oracle = run_centralized_oracle(scenario);
  if (spec.run_baseline) baseline = run_forgetting_baseline(scenario, spec.lambda);

  write_metrics_csv(dir / "metrics.csv", distkp ? &*distkp : nullptr, oracle ? &*oracle : nullptr,
                    baseline ? &*baseline : nullptr);
  const RunLog& any = distkp ? *distkp : (baseline ? *baseline : *oracle);
  for (const auto& cp : any.checkpoints) write_truth_csv(dir / fmt::format("truth_t{}.csv", cp.step), scenario.grid, cp.truth);

  SeedResult result{seed, {}, {}, {}};
  if (distkp) {
    write_run_fields(dir / "distkp", scenario, *distkp);
    result.distkp = final_rmse(*distkp);
    if (distkp->disconnected_steps > 0) {
      fmt::print(log, "warning: seed {}: communication graph disconnected on {} of {} steps\n", seed,
                 distkp->disconnected_steps, config.steps);
    }
  }
  if (oracle) {
    write_run_fields(dir / "oracle", scenario, *oracle);
    result.oracle = final_rmse(*oracle);
  }
  if (baseline) {
    write_run_fields(dir / "baseline", scenario, *baseline);
    result.baseline = final_rmse(*baseline);
  }
  return result;
}

void write_summary(const std::filesystem::path& path, const std::vector<SeedResult>& results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  out << "run,seed,final_rmse\n";
  const std::vector<std::pair<const char*, std::optional<double> SeedResult::*>> runs{
      {"distkp", &SeedResult::distkp}, {"oracle", &SeedResult::oracle}, {"baseline", &SeedResult::baseline}};
  for (const auto& [name, member] : runs) {
    std::vector<double> values;
    for (const auto& r : results) {
      if (const auto& v = r.*member) {
        values.push_back(*v);
        out << name << ',' << r.seed << ',' << format_number(*v) << '\n';
      }
    }
    if (values.empty()) continue;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
    out << name << ",mean," << format_number(mean) << '\n';
    out << name << ",std," << format_number(sd) << '\n';
  }
}

void flag_incomplete(const std::filesystem::path& dir, const std::string& why) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream(dir / "INCOMPLETE") << why << '\n';
}

}  // namespace

int run_experiment(const ExperimentSpec& spec, std::ostream& log) {
  try {
    validate(spec);
  } catch (const UsageError& e) {
    fmt::print(log, "error: {}\n", e.what());
    return kExitUsage;
  }
  std::vector<SeedResult> results;
  for (const std::uint64_t seed : spec.resolved_seeds()) {
    const auto dir = spec.output_dir / fmt::format("seed_{}", seed);
    try {
      results.push_back(run_seed(spec, seed, dir, log));
    } catch (const ConnectivityError& e) {
      flag_incomplete(dir, e.what());
      fmt::print(log, "error: seed {}: {}\n", seed, e.what());
      return kExitConnectivity;
    } catch (const std::exception& e) {
      flag_incomplete(dir, e.what());
      fmt::print(log, "error: seed {}: {}\n", seed, e.what());
      return kExitRuntime;
    }
  }
  try {
    write_summary(spec.output_dir / "summary.csv", results);
  } catch (const std::exception& e) {
    fmt::print(log, "error: {}\n", e.what());
    return kExitRuntime;
  }
  for (const auto& r : results) {
    fmt::print(log, "seed {}:", r.seed);
    if (r.distkp) fmt::print(log, " distkp={:.4f}", *r.distkp);
    if (r.oracle) fmt::print(log, " oracle={:.4f}", *r.oracle);
    if (r.baseline) fmt::print(log, " baseline={:.4f}", *r.baseline);
    fmt::print(log, "\n");
  }
  return kExitOk;
}

}  // namespace distkp
