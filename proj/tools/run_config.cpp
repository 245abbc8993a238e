#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "covq/errors.hpp"

namespace covq::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value))
    throw ValidationError(key + ": expected a finite number, got '" + text + "'");
  return value;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  Int value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ValidationError(key + ": expected an integer, got '" + text + "'");
  return value;
}

ConfigKey key(std::string name, std::string section, std::string help, double RunConfig::*member) {
  const std::string n = name;
  return {std::move(name), std::move(section), std::move(help),
          [member, n](RunConfig& c, const std::string& v) { c.*member = parse_double(n, v); },
          [member](const RunConfig& c) { return format_double(c.*member); }};
}

ConfigKey key(std::string name, std::string section, std::string help, int RunConfig::*member) {
  const std::string n = name;
  return {std::move(name), std::move(section), std::move(help),
          [member, n](RunConfig& c, const std::string& v) { c.*member = parse_int<int>(n, v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

ConfigKey key(std::string name, std::string section, std::string help, std::uint64_t RunConfig::*member) {
  const std::string n = name;
  return {std::move(name), std::move(section), std::move(help),
          [member, n](RunConfig& c, const std::string& v) { c.*member = parse_int<std::uint64_t>(n, v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

ConfigKey key(std::string name, std::string section, std::string help, std::string RunConfig::*member) {
  return {std::move(name), std::move(section), std::move(help),
          [member](RunConfig& c, const std::string& v) { c.*member = trim(v); },
          [member](const RunConfig& c) { return c.*member; }};
}

bool is_prime_power(int n) {
  if (n < 2) return false;
  int p = 2;
  while (n % p != 0) ++p;
  while (n % p == 0) n /= p;
  return n == 1;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  using R = RunConfig;
  static const std::vector<ConfigKey> keys = {
      key("tau_e", "channel", "probe transmissivity", &R::tau_e),
      key("nbar_e", "channel", "probe excess noise (mean photons)", &R::nbar_e),
      key("tau_n", "channel", "honest-channel transmissivity", &R::tau_n),
      key("nbar_n", "channel", "honest-channel excess noise", &R::nbar_n),
      key("alpha", "channel", "coherent amplitude of the non-idle state (real)", &R::alpha),
      key("ell", "ppm", "number of PPM symbols; 0 sizes it from target_lambda1", &R::ell),
      key("m_x", "ppm", "key positions per sub-block", &R::m_x),
      key("m_v", "ppm", "coordination positions per sub-block", &R::m_v),
      key("lambda2", "budget", "resolvability budget", &R::lambda2),
      key("delta_pa", "budget", "privacy-amplification failure probability", &R::delta_pa),
      key("eps_ir", "budget", "information-reconciliation failure probability", &R::eps_ir),
      key("delta_smooth", "budget", "smoothing parameter; 0 uses delta_pa", &R::delta_smooth),
      key("target_lambda1", "budget", "covertness target used to size ell", &R::target_lambda1),
      key("reconciliation_efficiency", "budget", "efficiency f in (0, 1]", &R::reconciliation_efficiency),
      key("cutoff", "numerics", "Fock cutoff for the rate pipeline; 0 picks one", &R::cutoff),
      key("env_cutoff", "numerics", "environment cutoff for dilations; 0 picks one", &R::env_cutoff),
      key("chi2_start", "numerics", "first cutoff of the chi2 table", &R::chi2_start),
      key("chi2_step", "numerics", "cutoff increment of the chi2 table", &R::chi2_step),
      key("chi2_max", "numerics", "largest cutoff tried for chi2", &R::chi2_max),
      key("chi2_tol", "numerics", "relative change that ends the chi2 table", &R::chi2_tol),
      key("threads", "numerics", "worker threads; 0 uses all cores", &R::threads),
      key("sweep_var", "sweep", "tau_n, nbar_n, tau_e, nbar_e, alpha, ell, m_x or m_v", &R::sweep_var),
      key("grid", "sweep", "start:stop:points or a comma-separated list", &R::grid),
      key("desk_tau", "desk", "desk-scale probe transmissivity", &R::desk_tau),
      key("desk_nbar", "desk", "desk-scale probe excess noise", &R::desk_nbar),
      key("desk_cutoff", "desk", "desk-scale Fock cutoff", &R::desk_cutoff),
      key("desk_ell", "desk", "desk-scale number of PPM symbols", &R::desk_ell),
      key("desk_m_x", "desk", "desk-scale key positions", &R::desk_m_x),
      key("desk_m_v", "desk", "desk-scale coordination positions (prime power)", &R::desk_m_v),
      key("desk_k", "desk", "hash output symbols; 0 uses the full codebook", &R::desk_k),
      key("codebook_out", "desk", "file to write the drawn codebook to", &R::codebook_out),
      key("epsilon", "nogo", "reliability parameter", &R::epsilon),
      key("delta", "nogo", "secrecy parameter", &R::delta),
      key("mu", "nogo", "covertness parameter", &R::mu),
      key("log_dim_c", "nogo", "log dimension of the public register (in unit)", &R::log_dim_c),
      key("recovery_instances", "oracle", "non-vacuous random instances for the recovery bound", &R::recovery_instances),
      key("lemma_trials", "oracle", "random trials per fidelity lemma", &R::lemma_trials),
      key("seed", "run", "random seed", &R::seed),
      key("output", "run", "output file, '-' for stdout", &R::output),
      key("format", "run", "csv, json or text; empty uses the command default", &R::format),
      key("sign", "run", "eta sign in the min-entropy bound: proof or printed", &R::sign),
      key("unit", "run", "log base for nogo and covertness: bits or nats", &R::unit),
  };
  return keys;
}

const ConfigKey* find_key(const std::string& name) {
  const auto& keys = config_keys();
  const auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == name; });
  return it == keys.end() ? nullptr : &*it;
}

void set_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const ConfigKey* k = find_key(key);
  if (!k) throw ValidationError("unknown config key '" + key + "'");
  k->set(cfg, value);
}

void apply_config_text(RunConfig& cfg, std::istream& in, const std::string& origin) {
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(number) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      const auto& keys = config_keys();
      if (std::none_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.section == section; }))
        throw ValidationError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(where + "expected key = value");
    const std::string name = trim(line.substr(0, eq));
    const ConfigKey* k = find_key(name);
    if (!k) throw ValidationError(where + "unknown config key '" + name + "'");
    if (k->section != section)
      throw ValidationError(where + "key '" + name + "' belongs in section [" + k->section + "]");
    try {
      k->set(cfg, line.substr(eq + 1));
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  apply_config_text(cfg, in, path);
}

std::vector<double> parse_grid(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ValidationError("grid is empty");
  std::vector<double> out;
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ValidationError("grid range must be start:stop:points");
    const double start = parse_double("grid", parts[0]);
    const double stop = parse_double("grid", parts[1]);
    const int points = parse_int<int>("grid", parts[2]);
    if (points < 1) throw ValidationError("grid needs at least one point");
    if (points == 1) return {start};
    for (int i = 0; i < points; ++i) out.push_back(i == points - 1 ? stop : start + (stop - start) * i / (points - 1));
    return out;
  }
  std::stringstream ss(t);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(parse_double("grid", p));
  return out;
}

void RunConfig::validate() const {
  link().validate();
  budget().validate();
  if (!(reconciliation_efficiency > 0.0 && reconciliation_efficiency <= 1.0))
    throw ValidationError("reconciliation_efficiency must lie in (0, 1]");
  if (ell < 0.0) throw ValidationError("ell must be >= 0");
  if (m_x < 1.0 || m_v < 1.0) throw ValidationError("m_x and m_v must be >= 1");
  if (delta_smooth < 0.0 || delta_smooth >= 1.0) throw ValidationError("delta_smooth must lie in [0, 1)");
  if (cutoff < 0 || env_cutoff < 0) throw ValidationError("cutoffs must be >= 0");
  if (chi2_start < 1 || chi2_step < 1 || chi2_max < chi2_start)
    throw ValidationError("chi2 table needs chi2_start >= 1, chi2_step >= 1, chi2_max >= chi2_start");
  if (!(chi2_tol > 0.0)) throw ValidationError("chi2_tol must be positive");
  if (threads < 0) throw ValidationError("threads must be >= 0");
  sweep_variable();
  grid_values();
  if (!(desk_tau >= 0.0 && desk_tau <= 1.0) || desk_nbar < 0.0)
    throw ValidationError("desk probe needs desk_tau in [0, 1] and desk_nbar >= 0");
  if (desk_cutoff < 1 || desk_ell < 1 || desk_m_x < 1) throw ValidationError("desk sizes must be >= 1");
  if (!is_prime_power(desk_m_v)) throw ValidationError("desk_m_v must be a prime power");
  if (desk_k < 0 || desk_k > desk_ell) throw ValidationError("desk_k must lie in [0, desk_ell]");
  if (recovery_instances < 1 || lemma_trials < 1) throw ValidationError("oracle trial counts must be >= 1");
  if (output.empty()) throw ValidationError("output must be a path or '-'");
  output_format(OutputFormat::json);
  eta_sign();
  log_unit();
}

BosonicLink RunConfig::link() const { return {tau_e, nbar_e, tau_n, nbar_n, alpha}; }

BlockChoice RunConfig::block() const { return {ell, m_x, m_v}; }

CovertnessBudget RunConfig::budget() const { return {lambda2, delta_pa, eps_ir, target_lambda1}; }

Chi2ConvergenceOptions RunConfig::chi2_options() const {
  Chi2ConvergenceOptions o;
  o.start_cutoff = chi2_start;
  o.step = chi2_step;
  o.max_cutoff = chi2_max;
  o.relative_tolerance = chi2_tol;
  return o;
}

RateOptions RunConfig::rate_options() const {
  RateOptions o;
  o.cutoff = cutoff;
  o.reconciliation_efficiency = reconciliation_efficiency;
  o.delta_smooth = delta_smooth;
  o.sign = eta_sign();
  o.chi2 = chi2_options();
  return o;
}

LogUnit RunConfig::log_unit() const {
  if (unit == "bits") return LogUnit::bits;
  if (unit == "nats") return LogUnit::nats;
  throw ValidationError("unit must be bits or nats");
}

EtaSign RunConfig::eta_sign() const {
  if (sign == "proof") return EtaSign::proof;
  if (sign == "printed") return EtaSign::printed;
  throw ValidationError("sign must be proof or printed");
}

SweepVariable RunConfig::sweep_variable() const {
  const auto v = parse_sweep_variable(sweep_var);
  if (!v) throw ValidationError("unknown sweep_var '" + sweep_var + "'");
  return *v;
}

std::vector<double> RunConfig::grid_values() const { return parse_grid(grid); }

OutputFormat RunConfig::output_format(OutputFormat fallback) const {
  if (format.empty()) return fallback;
  if (format == "csv") return OutputFormat::csv;
  if (format == "json") return OutputFormat::json;
  if (format == "text") return OutputFormat::text;
  throw ValidationError("format must be csv, json or text");
}

}  // namespace covq::cli
