#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "covq/bounds.hpp"
#include "covq/errors.hpp"
#include "covq/finite_field.hpp"
#include "covq/oracle.hpp"
#include "covq/ppm.hpp"
#include "covq/probe_chi2.hpp"

namespace covq::cli {

namespace {

using Json = nlohmann::ordered_json;

Json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

// Shortest form that round-trips exactly.
std::string csv_num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '\n') c = ' ';
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

void write_json(std::ostream& out, const Json& doc) { out << doc.dump(2) << '\n'; }

void require_not_text(OutputFormat f, const char* command) {
  if (f == OutputFormat::text) throw ValidationError(std::string("format text is not available for ") + command);
}

const char* unit_name(LogUnit u) { return u == LogUnit::bits ? "bits" : "nats"; }

// m_v = p^e
std::pair<int, int> split_prime_power(int n) {
  int p = 2;
  while (n % p != 0) ++p;
  int e = 0;
  while (n % p == 0) {
    n /= p;
    ++e;
  }
  if (n != 1) throw ValidationError("m_v must be a prime power");
  return {p, e};
}

Json link_json(const BosonicLink& l) {
  return Json{{"tau_e", l.tau_e}, {"nbar_e", l.nbar_e}, {"tau_n", l.tau_n}, {"nbar_n", l.nbar_n}, {"alpha", l.alpha}};
}

Json chi2_pair_json(const Chi2Pair& p) {
  return Json{{"rho_given_sigma", num(p.rho_given_sigma)}, {"sigma_given_rho", num(p.sigma_given_rho)},
              {"digits", p.digits}};
}

Json report_json(const RateReport& r) {
  Json j;
  j["link"] = link_json(r.link);
  j["block"] = Json{{"ell", r.block.ell}, {"m_x", r.block.m_x}, {"m_v", r.block.m_v}};
  j["budget"] = Json{{"lambda2", r.budget.lambda2}, {"delta_pa", r.budget.delta_pa}, {"eps_ir", r.budget.eps_ir},
                     {"target_lambda1", r.budget.target_lambda1}};
  j["reconciliation_efficiency"] = r.reconciliation_efficiency;
  j["delta_smooth"] = r.delta_smooth;
  j["sign"] = r.sign == EtaSign::proof ? "proof" : "printed";
  j["cutoff"] = r.cutoff;
  j["chi2"] = chi2_pair_json(r.chi2);
  j["security"] = Json{{"f_meas", num(r.security.f_meas)}, {"f01", num(r.security.f01)},
                       {"delta0", num(r.security.delta0)}, {"delta1", num(r.security.delta1)},
                       {"d_probe_bits", num(r.security.d_probe)}};
  j["d_honest_bits"] = num(r.d_honest);
  j["eta"] = num(r.eta.eta);
  j["eta_no_slack"] = r.eta.no_slack;
  j["lambda1"] = num(r.lambda1);
  j["log_h_bits"] = num(r.log_h);
  j["hmin_bits"] = num(r.hmin);
  j["leak_ir_bits"] = num(r.leak_ir);
  j["pa_penalty_bits"] = num(r.pa_penalty);
  j["net_key_bits"] = num(r.net_key);
  j["rate_per_symbol"] = num(r.rate_per_symbol);
  return j;
}

Json table_json(const Chi2Table& t) {
  Json rows = Json::array();
  for (const Chi2Row& row : t.rows)
    rows.push_back(Json{{"cutoff", row.cutoff},
                        {"rho_given_sigma", num(row.value.rho_given_sigma)},
                        {"sigma_given_rho", num(row.value.sigma_given_rho)},
                        {"relative_change", num(row.relative_change)},
                        {"digits", row.value.digits}});
  return rows;
}

void write_chi2_csv(std::ostream& out, const Chi2Table& t) {
  out << "cutoff,rho_given_sigma,sigma_given_rho,relative_change,digits\n";
  for (const Chi2Row& row : t.rows)
    out << row.cutoff << ',' << csv_num(row.value.rho_given_sigma) << ',' << csv_num(row.value.sigma_given_rho) << ','
        << csv_num(row.relative_change) << ',' << row.value.digits << '\n';
}

}  // namespace

int cmd_chi2(const RunConfig& cfg, std::ostream& out) {
  const OutputFormat fmt = cfg.output_format(OutputFormat::json);
  require_not_text(fmt, "chi2");
  const BosonicLink link = cfg.link();
  const DisplacedThermalParams sig = through_lossy_thermal(link.tau_e, link.nbar_e, {Complex(link.alpha, 0.0), 0.0});
  const double beta = std::abs(sig.beta);

  Json doc;
  doc["command"] = "chi2";
  doc["link"] = link_json(link);
  doc["probe"] = Json{{"beta_abs", beta}, {"nbar", sig.nbar}};
  doc["argument_orders"] = Json{{"rho_given_sigma", "chi2(E(|alpha><alpha|) || E(|0><0|))"},
                                {"sigma_given_rho", "chi2(E(|0><0|) || E(|alpha><alpha|))"}};

  if (beta == 0.0 || sig.nbar == 0.0) {
    // Identical outputs, or two pure outputs with different supports.
    const bool identical = beta == 0.0;
    const double v = identical ? 0.0 : std::numeric_limits<double>::infinity();
    if (fmt == OutputFormat::csv) {
      out << "cutoff,rho_given_sigma,sigma_given_rho,relative_change,digits\n";
      out << "0," << csv_num(v) << ',' << csv_num(v) << ",0,0\n";
      return kOk;
    }
    doc["converged"] = true;
    doc["support_violation"] = !identical;
    doc["chi2"] = Json{{"rho_given_sigma", num(v)}, {"sigma_given_rho", num(v)}, {"digits", 0}};
    doc["table"] = Json::array();
    write_json(out, doc);
    return kOk;
  }

  const Chi2Table t = chi2_convergence_table(beta, sig.nbar, cfg.chi2_options());
  if (fmt == OutputFormat::csv) {
    write_chi2_csv(out, t);
  } else {
    doc["converged"] = t.converged;
    doc["support_violation"] = false;
    doc["chi2"] = chi2_pair_json(t.value);
    doc["table"] = table_json(t);
    // The generic double-precision route at the last cutoff, for comparison.
    const int d = t.rows.back().cutoff;
    Json diag{{"cutoff", d}};
    try {
      const State rho = displaced_thermal(sig.beta, sig.nbar, d, TruncationPolicy::permissive());
      const State sigma = displaced_thermal(Complex(0.0), sig.nbar, d, TruncationPolicy::permissive());
      const DivergenceValue a = chi2_divergence(rho, sigma);
      const DivergenceValue b = chi2_divergence(sigma, rho);
      diag["rho_given_sigma"] = a.infinite ? Json("inf") : num(a.value);
      diag["sigma_given_rho"] = b.infinite ? Json("inf") : num(b.value);
      diag["floor_clips"] = a.floor_clips + b.floor_clips;
    } catch (const std::exception& e) {
      diag["error"] = e.what();
    }
    doc["double_precision_diagnostic"] = diag;
    write_json(out, doc);
  }
  if (!t.converged) {
    std::ostringstream msg;
    msg << "chi2 did not converge by cutoff " << cfg.chi2_max << " (last relative change "
        << t.rows.back().relative_change << ")";
    throw ConvergenceError(msg.str());
  }
  return kOk;
}

int cmd_rate_sweep(const RunConfig& cfg, std::ostream& out) {
  const OutputFormat fmt = cfg.output_format(OutputFormat::csv);
  require_not_text(fmt, "rate-sweep");
  if (cfg.log_unit() != LogUnit::bits) throw ValidationError("rate-sweep reports bits; unit = nats is not supported");
  const SweepVariable var = cfg.sweep_variable();
  const std::vector<SweepRow> rows = rate_sweep(cfg.link(), cfg.block(), cfg.budget(), cfg.rate_options(), var,
                                                cfg.grid_values(), static_cast<unsigned>(cfg.threads));
  if (fmt == OutputFormat::csv) {
    out << "sweep_var,lambda1,log_h_bits,hmin_bits,leak_ir_bits,pa_penalty_bits,net_key_bits,rate_per_symbol,eta,"
           "f_meas,error\n";
    for (const SweepRow& row : rows) {
      out << csv_num(row.value);
      if (row.report) {
        const RateReport& r = *row.report;
        for (double v : {r.lambda1, r.log_h, r.hmin, r.leak_ir, r.pa_penalty, r.net_key, r.rate_per_symbol,
                         r.eta.eta, r.security.f_meas})
          out << ',' << csv_num(v);
        out << ",\n";
      } else {
        out << ",,,,,,,,,," << csv_text(row.error) << '\n';
      }
    }
    return kOk;
  }
  Json doc;
  doc["command"] = "rate-sweep";
  doc["sweep_var"] = to_string(var);
  doc["trace_norm"] = "full one-norm";
  Json list = Json::array();
  for (const SweepRow& row : rows) {
    Json j{{"value", row.value}};
    if (row.report) j["report"] = report_json(*row.report);
    j["error"] = row.error;
    list.push_back(j);
  }
  doc["rows"] = list;
  write_json(out, doc);
  return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const OutputFormat fmt = cfg.output_format(OutputFormat::json);
  require_not_text(fmt, "simulate");
  const PPMConfig ppm{cfg.desk_ell, cfg.desk_m_x, cfg.desk_m_v};
  ppm.validate();
  require_desk_scale(ppm, cfg.desk_cutoff);
  const auto [p, e] = split_prime_power(cfg.desk_m_v);
  const FieldSpec field(p, e, cfg.desk_ell);
  const ProbeOutputs probe = desk_probe_outputs(cfg.desk_tau, cfg.desk_nbar, cfg.desk_cutoff, cfg.alpha, cfg.env_cutoff);

  std::mt19937_64 rng = trial_rng(cfg.seed, 0);
  State sigma = average_ppm_state(ppm, probe);
  std::string codebook_kind = "full";
  std::uint64_t h = field.order();
  Json hash = nullptr;
  if (cfg.desk_k > 0) {
    const std::uint64_t u_index = std::uniform_int_distribution<std::uint64_t>(1, field.order() - 1)(rng);
    SymbolVector z(static_cast<std::size_t>(cfg.desk_k));
    for (int& s : z) s = std::uniform_int_distribution<int>(0, field.symbol_size() - 1)(rng);
    const HashCodebook cb = preimage(make_hash(field, field.element_at(u_index), cfg.desk_k), z);
    sigma = protocol_state(ppm, probe, cb);
    codebook_kind = "hash";
    h = cb.h();
    hash = Json{{"u_index", u_index}, {"k", cfg.desk_k}, {"z", z}};
    if (!cfg.codebook_out.empty()) {
      std::ofstream f(cfg.codebook_out);
      if (!f) throw ValidationError("cannot write codebook to '" + cfg.codebook_out + "'");
      write_codebook(f, cb);
    }
  } else if (!cfg.codebook_out.empty()) {
    throw ValidationError("codebook_out needs desk_k > 0");
  }

  const State avg = average_ppm_state(ppm, probe);
  const State idle = idle_output_state(ppm, probe);
  const DivergenceValue chi = chi2_divergence(probe.nonidle, probe.idle);
  const DivergenceValue d = relative_entropy(avg, idle);
  const double covertness = trace_distance(sigma, idle);
  const double average = trace_distance(avg, idle);
  const double resolvability = trace_distance(sigma, avg);
  const double lambda1 = chi.infinite ? std::numeric_limits<double>::infinity()
                                      : covertness_lambda1({double(ppm.ell), double(ppm.m_x), double(ppm.m_v)},
                                                           std::max(0.0, chi.value));
  if (fmt == OutputFormat::csv) {
    out << "codebook,h,covertness_distance,average_ppm_distance,codebook_to_average,d_bits,chi2,lambda1\n";
    out << codebook_kind << ',' << h << ',' << csv_num(covertness) << ',' << csv_num(average) << ','
        << csv_num(resolvability) << ',' << csv_num(d.infinite ? INFINITY : d.value) << ','
        << csv_num(chi.infinite ? INFINITY : chi.value) << ',' << csv_num(lambda1) << '\n';
    return kOk;
  }
  Json doc;
  doc["command"] = "simulate";
  doc["ppm"] = Json{{"ell", ppm.ell}, {"m_x", ppm.m_x}, {"m_v", ppm.m_v}, {"n", ppm.n()}};
  doc["probe"] = Json{{"tau", cfg.desk_tau}, {"nbar", cfg.desk_nbar}, {"cutoff", cfg.desk_cutoff},
                      {"alpha", cfg.alpha}, {"idle_deficit", probe.idle.truncation_deficit()},
                      {"nonidle_deficit", probe.nonidle.truncation_deficit()}};
  doc["field"] = Json{{"p", field.characteristic()}, {"e", field.extension()}, {"ell", field.length()},
                      {"modulus", field.modulus()}};
  doc["codebook"] = codebook_kind;
  doc["hash"] = hash;
  doc["h"] = h;
  doc["trace_norm"] = "full one-norm";
  doc["covertness_distance"] = covertness;
  doc["average_ppm_distance"] = average;
  doc["codebook_to_average"] = resolvability;
  doc["d_bits"] = d.infinite ? Json("inf") : num(d.value);
  doc["chi2"] = chi.infinite ? Json("inf") : num(chi.value);
  doc["support_violation"] = chi.infinite;
  doc["lambda1"] = num(lambda1);
  write_json(out, doc);
  return kOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const OutputFormat fmt = cfg.output_format(OutputFormat::text);
  if (fmt == OutputFormat::csv) throw ValidationError("format csv is not available for verify");
  OracleSuiteOptions o;
  o.seed = cfg.seed;
  o.recovery_instances = static_cast<std::size_t>(cfg.recovery_instances);
  o.lemma_trials = static_cast<std::size_t>(cfg.lemma_trials);
  o.probe_tau = cfg.desk_tau;
  o.probe_nbar = cfg.desk_nbar;
  o.cutoff = cfg.desk_cutoff;
  o.alpha = cfg.alpha;
  const OracleReport report = run_oracle_suite(o);
  if (fmt == OutputFormat::text) {
    write_report(out, report);
  } else {
    Json checks = Json::array();
    for (const CheckResult& c : report.checks)
      checks.push_back(Json{{"name", c.name},         {"pass", c.pass},
                            {"trials", c.trials},     {"violations", c.violations},
                            {"vacuous", c.vacuous},   {"worst_slack", num(c.worst_slack)},
                            {"detail", c.detail}});
    write_json(out, Json{{"command", "verify"}, {"seed", cfg.seed}, {"pass", report.all_pass()}, {"checks", checks}});
  }
  return report.all_pass() ? kOk : kOracleFailure;
}

int cmd_nogo(const RunConfig& cfg, std::ostream& out) {
  const OutputFormat fmt = cfg.output_format(OutputFormat::json);
  require_not_text(fmt, "nogo");
  const LogUnit unit = cfg.log_unit();
  const NoGoBound b = nogo_max_key({cfg.epsilon, cfg.delta, cfg.mu, cfg.log_dim_c}, unit);
  if (fmt == OutputFormat::csv) {
    out << "epsilon,delta,mu,log_dim_c,max_key,unbounded,rhs,denominator,unit\n";
    out << csv_num(cfg.epsilon) << ',' << csv_num(cfg.delta) << ',' << csv_num(cfg.mu) << ',' << csv_num(cfg.log_dim_c)
        << ',' << csv_num(b.max_key) << ',' << (b.unbounded ? 1 : 0) << ',' << csv_num(b.rhs) << ','
        << csv_num(b.denominator) << ',' << unit_name(unit) << '\n';
    return kOk;
  }
  write_json(out, Json{{"command", "nogo"},
                       {"epsilon", cfg.epsilon},
                       {"delta", cfg.delta},
                       {"mu", cfg.mu},
                       {"log_dim_c", cfg.log_dim_c},
                       {"unit", unit_name(unit)},
                       {"max_key", num(b.max_key)},
                       {"unbounded", b.unbounded},
                       {"rhs", num(b.rhs)},
                       {"denominator", num(b.denominator)}});
  return kOk;
}

int cmd_covertness(const RunConfig& cfg, std::ostream& out) {
  const OutputFormat fmt = cfg.output_format(OutputFormat::csv);
  require_not_text(fmt, "covertness");
  const LogUnit unit = cfg.log_unit();
  const BosonicLink link = cfg.link();
  const DisplacedThermalParams sig = through_lossy_thermal(link.tau_e, link.nbar_e, {Complex(link.alpha, 0.0), 0.0});
  double chi2 = 0.0;
  if (std::abs(sig.beta) > 0.0) {
    if (sig.nbar == 0.0) throw ValidationError("probe outputs are pure with different supports; chi2 is infinite");
    chi2 = probe_chi2_table(link, cfg.chi2_options()).value.rho_given_sigma;
  }
  std::vector<double> ells;
  if (cfg.sweep_var == "ell") {
    ells = cfg.grid_values();
  } else if (cfg.ell > 0.0) {
    ells = {cfg.ell};
  } else {
    ells = {block_count_for_lambda1(cfg.m_x * cfg.m_v, chi2, cfg.target_lambda1)};
  }
  struct Row {
    double ell, lambda1, log_h;
  };
  std::vector<Row> rows;
  for (double ell : ells) {
    const BlockParameters block{ell, cfg.m_x, cfg.m_v};
    rows.push_back({ell, covertness_lambda1(block, chi2), covertness_log_h(block, chi2, cfg.lambda2, unit)});
  }
  const std::string log_h_name = std::string("log_h_") + unit_name(unit);
  if (fmt == OutputFormat::csv) {
    out << "ell,m_x,m_v,chi2,lambda1," << log_h_name << '\n';
    for (const Row& r : rows)
      out << csv_num(r.ell) << ',' << csv_num(cfg.m_x) << ',' << csv_num(cfg.m_v) << ',' << csv_num(chi2) << ','
          << csv_num(r.lambda1) << ',' << csv_num(r.log_h) << '\n';
    return kOk;
  }
  Json list = Json::array();
  for (const Row& r : rows) list.push_back(Json{{"ell", r.ell}, {"lambda1", r.lambda1}, {log_h_name, r.log_h}});
  write_json(out, Json{{"command", "covertness"},
                       {"link", link_json(link)},
                       {"m_x", cfg.m_x},
                       {"m_v", cfg.m_v},
                       {"lambda2", cfg.lambda2},
                       {"chi2", chi2},
                       {"trace_norm", "full one-norm"},
                       {"rows", list}});
  return kOk;
}

namespace {

void error_record(std::ostream& err, const char* kind, const std::string& message, int code) {
  err << Json{{"error", Json{{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump() << '\n';
}

std::string keys_help() {
  std::ostringstream h;
  h << "Config keys (file section / flag):\n";
  for (const ConfigKey& k : config_keys()) h << "  [" << k.section << "] " << k.name << ": " << k.help << "\n";
  h << "\nrate-sweep CSV columns: sweep_var, lambda1, log_h_bits, hmin_bits, leak_ir_bits, pa_penalty_bits, "
       "net_key_bits, rate_per_symbol, eta, f_meas, error\n"
       "Exit codes: 0 success, 2 validation error, 3 non-convergence, 4 oracle failure.\n"
       "Default config path: $"
    << kConfigEnvVar << "\n";
  return h.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Covert QKD numerical toolkit", "covert-qkd");
  app.footer(keys_help());
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&);
  };
  const Command commands[] = {
      {"chi2", "probe chi2 divergence with cutoff-convergence table", cmd_chi2},
      {"rate-sweep", "key rate over a grid of one parameter", cmd_rate_sweep},
      {"simulate", "desk-scale protocol state and covertness distances", cmd_simulate},
      {"verify", "run every oracle check", cmd_verify},
      {"nogo", "key-length ceiling without a probe", cmd_nogo},
      {"covertness", "lambda1 and required log h", cmd_covertness},
  };

  std::string config_path;
  std::map<std::string, std::map<std::string, std::string>> flags;  // subcommand -> key -> value
  std::map<std::string, CLI::App*> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "config file (default: $" + std::string(kConfigEnvVar) + ")");
    for (const ConfigKey& k : config_keys()) sub->add_option("--" + k.name, flags[c.name][k.name], k.help);
    subs[c.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    error_record(err, "validation", e.what(), kValidation);
    return kValidation;
  }

  const Command* chosen = nullptr;
  for (const Command& c : commands)
    if (subs[c.name]->parsed()) chosen = &c;

  try {
    RunConfig cfg;
    std::string path = config_path;
    if (path.empty())
      if (const char* env = std::getenv(kConfigEnvVar)) path = env;
    if (!path.empty()) apply_config_file(cfg, path);
    for (const ConfigKey& k : config_keys())
      if (subs[chosen->name]->count("--" + k.name) > 0) k.set(cfg, flags[chosen->name][k.name]);
    cfg.validate();

    std::unique_ptr<std::ofstream> file;
    std::ostream* sink = &out;
    if (cfg.output != "-") {
      file = std::make_unique<std::ofstream>(cfg.output, std::ios::binary);
      if (!*file) throw ValidationError("cannot open output '" + cfg.output + "'");
      sink = file.get();
    }
    const int code = chosen->fn(cfg, *sink);
    sink->flush();
    if (code == kOracleFailure) error_record(err, "oracle_failure", "one or more oracle checks failed", code);
    return code;
  } catch (const ConvergenceError& e) {
    error_record(err, "non_convergence", e.what(), kNonConvergence);
    return kNonConvergence;
  } catch (const ValidationError& e) {
    error_record(err, "validation", e.what(), kValidation);
    return kValidation;
  } catch (const CutoffError& e) {
    error_record(err, "cutoff", e.what(), kValidation);
    return kValidation;
  } catch (const DimensionError& e) {
    error_record(err, "validation", e.what(), kValidation);
    return kValidation;
  } catch (const std::exception& e) {
    error_record(err, "internal", e.what(), kInternal);
    return kInternal;
  }
}

}  // namespace covq::cli
