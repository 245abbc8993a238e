#pragma once

// Run configuration for the command-line tool. Every key lives in one
// section of the config file and is also available as --<key> on every
// subcommand. Precedence: built-in default, then file, then flag.

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "covq/infotheory.hpp"
#include "covq/rate.hpp"

namespace covq::cli {

inline constexpr const char* kConfigEnvVar = "COVERT_QKD_CONFIG";

enum class OutputFormat { csv, json, text };

struct RunConfig {
  // [channel]
  double tau_e = 0.9994;
  double nbar_e = 11.0;
  double tau_n = 1.0;
  double nbar_n = 0.01;
  double alpha = 0.6;
  // [ppm]; ell = 0 sizes ell from target_lambda1
  double ell = 0.0;
  double m_x = 2.0;
  double m_v = 2.0;
  // [budget]
  double lambda2 = 1e-3;
  double delta_pa = 1e-6;
  double eps_ir = 1e-6;
  double delta_smooth = 0.0;
  double target_lambda1 = 1e-2;
  double reconciliation_efficiency = 1.0;
  // [numerics]
  int cutoff = 0;
  int env_cutoff = 0;
  int chi2_start = 10;
  int chi2_step = 10;
  int chi2_max = 300;
  double chi2_tol = 1e-4;
  int threads = 0;
  // [sweep]
  std::string sweep_var = "tau_n";
  std::string grid = "0.95:1:11";
  // [desk]
  double desk_tau = 0.9;
  double desk_nbar = 0.1;
  int desk_cutoff = 2;
  int desk_ell = 3;
  int desk_m_x = 1;
  int desk_m_v = 2;
  int desk_k = 0;  // 0: full codebook
  std::string codebook_out;
  // [nogo]
  double epsilon = 0.0;
  double delta = 0.0;
  double mu = 0.0;
  double log_dim_c = 0.0;
  // [oracle]
  int recovery_instances = 200;
  int lemma_trials = 500;
  // [run]
  std::uint64_t seed = 1;
  std::string output = "-";
  std::string format;  // empty: command default
  std::string sign = "proof";
  std::string unit = "bits";

  void validate() const;

  BosonicLink link() const;
  BlockChoice block() const;
  CovertnessBudget budget() const;
  RateOptions rate_options() const;
  Chi2ConvergenceOptions chi2_options() const;
  LogUnit log_unit() const;
  EtaSign eta_sign() const;
  SweepVariable sweep_variable() const;
  std::vector<double> grid_values() const;
  OutputFormat output_format(OutputFormat fallback) const;
};

struct ConfigKey {
  std::string name;
  std::string section;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// All keys in a fixed order.
const std::vector<ConfigKey>& config_keys();
const ConfigKey* find_key(const std::string& name);

// Assigns one value; ValidationError on unknown key or malformed value.
void set_value(RunConfig& cfg, const std::string& key, const std::string& value);

// "key = value" lines under "[section]" headers, '#' or ';' comments.
// A key outside its own section, or an unknown key, is a ValidationError.
void apply_config_text(RunConfig& cfg, std::istream& in, const std::string& origin);
void apply_config_file(RunConfig& cfg, const std::string& path);

// Parses "start:stop:points" or a comma-separated list.
std::vector<double> parse_grid(const std::string& text);

}  // namespace covq::cli
