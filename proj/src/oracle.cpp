#include "covq/oracle.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>

#include "covq/bounds.hpp"
#include "covq/infotheory.hpp"
#include "covq/parallel.hpp"

namespace covq {

bool OracleReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

void write_report(std::ostream& out, const OracleReport& report) {
  for (const CheckResult& c : report.checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << " trials=" << c.trials << " violations=" << c.violations
        << " vacuous=" << c.vacuous << " worst_slack=" << std::setprecision(6) << std::scientific << c.worst_slack
        << std::defaultfloat;
    if (!c.detail.empty()) out << " " << c.detail;
    out << '\n';
  }
  const auto passed = std::count_if(report.checks.begin(), report.checks.end(), [](const CheckResult& c) { return c.pass; });
  out << (report.all_pass() ? "PASS" : "FAIL") << " summary " << passed << "/" << report.checks.size()
      << " checks passed\n";
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

namespace {

MatrixXc gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXc g(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      const double re = n(rng);
      const double im = n(rng);
      g(r, c) = Complex(re, im);
    }
  return g;
}

// Thin Q with the phases of diag(R) absorbed, so Q -> m as m becomes orthonormal.
MatrixXc orthonormalize_columns(const MatrixXc& m) {
  Eigen::HouseholderQR<MatrixXc> qr(m);
  MatrixXc q = qr.householderQ() * MatrixXc::Identity(m.rows(), m.cols());
  const MatrixXc& r = qr.matrixQR();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double mag = std::abs(r(c, c));
    if (mag > 0.0) q.col(c) *= r(c, c) / mag;
  }
  return q;
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

State mix(const State& a, const State& b, double t) {
  return State((1.0 - t) * a.matrix() + t * b.matrix(), a.dims());
}

// Canonical Hermitian cleanup after products that should be exactly Hermitian.
MatrixXc hermitize(const MatrixXc& m) { return 0.5 * (m + m.adjoint()); }

void record(CheckResult& c, double slack) {
  ++c.trials;
  if (c.trials == 1 || slack < c.worst_slack) c.worst_slack = slack;
  if (slack < -kOracleSlack) ++c.violations;
}

}  // namespace

VectorXc random_unit_vector(int dim, std::mt19937_64& rng) {
  if (dim < 1) throw ValidationError("dimension must be at least 1");
  VectorXc v = gaussian_matrix(dim, 1, rng).col(0);
  return v / v.norm();
}

State random_pure_state(int dim, std::mt19937_64& rng) {
  const VectorXc v = random_unit_vector(dim, rng);
  return State(hermitize(v * v.adjoint()), {dim});
}

State random_mixed_state(int dim, std::mt19937_64& rng) {
  const MatrixXc g = gaussian_matrix(dim, dim, rng);
  MatrixXc m = hermitize(g * g.adjoint());
  m /= m.trace().real();
  return State(std::move(m), {dim});
}

MatrixXc random_isometry(int rows, int cols, std::mt19937_64& rng) {
  if (rows < cols || cols < 1) throw ValidationError("an isometry needs rows >= cols >= 1");
  return orthonormalize_columns(gaussian_matrix(rows, cols, rng));
}

MatrixXc near_identity_isometry(int in_dim, int env_dim, double scale, std::mt19937_64& rng) {
  if (in_dim < 1 || env_dim < 1) throw ValidationError("dimensions must be at least 1");
  MatrixXc v = MatrixXc::Zero(static_cast<Eigen::Index>(in_dim) * env_dim, in_dim);
  for (int a = 0; a < in_dim; ++a) v(static_cast<Eigen::Index>(a) * env_dim, a) = 1.0;
  return orthonormalize_columns(v + scale * gaussian_matrix(static_cast<int>(v.rows()), in_dim, rng));
}

MatrixXc apply_isometry(const MatrixXc& v, const MatrixXc& rho) {
  if (v.cols() != rho.rows()) throw DimensionError("isometry input dimension differs from the state");
  return hermitize(v * rho * v.adjoint());
}

void RandomInstanceSpec::validate() const {
  auto ok = [](int d) { return d >= 1 && d <= 12; };
  if (!ok(dim_a1) || !ok(dim_a2) || !ok(dim_env)) throw ValidationError("instance dimensions must lie in [1, 12]");
  if (dim_a1 < 2) throw ValidationError("A' needs dimension >= 2 to hold two distinct pure states");
  if (!(state_perturbation >= 0.0 && state_perturbation < 1.0)) throw ValidationError("state perturbation in [0, 1)");
  if (!(isometry_perturbation >= 0.0)) throw ValidationError("isometry perturbation must be >= 0");
}

// ---- resolvability ----------------------------------------------------------

ResolvabilityRow resolvability_row(const PPMConfig& cfg, const ProbeOutputs& probe, const FieldSpec& field, int k,
                                   const CodebookHook& hook) {
  if (field.symbol_size() != cfg.m_v || field.length() != cfg.ell)
    throw DimensionError("field does not match (m_v, ell) of the PPM configuration");
  const State target = average_ppm_state(cfg, probe);
  const std::vector<HashFunction> family = hash_family(field, k);
  std::vector<SymbolVector> zs;
  {
    const FieldSpec z_space(field.characteristic(), field.extension(), k);
    for (const SymbolVector& z : full_codebook(z_space)) zs.push_back(z);
  }
  ResolvabilityRow row;
  row.k = k;
  row.distances.assign(family.size(), std::vector<double>(zs.size(), 0.0));
  parallel_for(family.size(), 0, [&](std::size_t f) {
    for (std::size_t zi = 0; zi < zs.size(); ++zi) {
      HashCodebook cb = preimage(family[f], zs[zi]);
      if (hook) hook(f, cb);
      row.distances[f][zi] = trace_distance(protocol_state(cfg, probe, cb), target);
    }
  });
  row.h = preimage(family.front(), zs.front()).h();
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& per_f : row.distances)
    for (double d : per_f) {
      sum += d;
      ++count;
      row.max_distance = std::max(row.max_distance, d);
    }
  row.average = sum / static_cast<double>(count);
  return row;
}

ResolvabilityTable resolvability_exhaustive(const PPMConfig& cfg, const ProbeOutputs& probe, const FieldSpec& field) {
  ResolvabilityTable t;
  for (int k = cfg.ell; k >= 1; --k) t.rows.push_back(resolvability_row(cfg, probe, field, k));
  const std::vector<SymbolVector> all = full_codebook(field);
  t.full_codebook_distance =
      trace_distance(protocol_state(cfg, probe, std::span<const SymbolVector>(all)), average_ppm_state(cfg, probe));
  return t;
}

double z_invariance_deviation(const ResolvabilityRow& row) {
  double worst = 0.0;
  for (const auto& per_f : row.distances) {
    const auto [lo, hi] = std::minmax_element(per_f.begin(), per_f.end());
    worst = std::max(worst, *hi - *lo);
  }
  return worst;
}

CheckResult z_invariance_check(const PPMConfig& cfg, const ProbeOutputs& probe, const FieldSpec& field,
                               const CodebookHook& hook) {
  CheckResult c;
  std::ostringstream name;
  name << "z_invariance(m_v=" << cfg.m_v << ",ell=" << cfg.ell << ",m_x=" << cfg.m_x << ")";
  c.name = name.str();
  double worst = 0.0;
  std::ostringstream detail;
  for (int k = 1; k <= cfg.ell; ++k) {
    const ResolvabilityRow row = resolvability_row(cfg, probe, field, k, hook);
    const double dev = z_invariance_deviation(row);
    worst = std::max(worst, dev);
    ++c.trials;
    if (dev > 1e-9) ++c.violations;
    detail << " k=" << k << ":" << std::setprecision(3) << std::scientific << dev;
  }
  c.worst_slack = 1e-9 - worst;
  c.pass = c.violations == 0;
  c.detail = "max_deviation_by_k" + detail.str();
  return c;
}

// ---- recovery-slack bound ---------------------------------------------------

CheckResult recovery_bound_check(const RandomInstanceSpec& spec, std::size_t instances, std::size_t max_attempts) {
  spec.validate();
  const int da = spec.dim_a1 * spec.dim_a2;
  if (da * spec.dim_env > 64) throw ValidationError("instance too large for the exhaustive check");
  CheckResult c;
  c.name = "recovery_bound";
  CheckResult vacuous_dp;  // data processing on eta = 0 instances
  std::size_t attempts = 0;
  for (; attempts < max_attempts && c.trials < instances; ++attempts) {
    std::mt19937_64 rng = trial_rng(spec.seed, attempts);
    const State phi0 = random_pure_state(spec.dim_a1, rng);
    const State phi1 = random_pure_state(spec.dim_a1, rng);
    const State nu = random_mixed_state(spec.dim_a2, rng);
    const State base0 = tensor(phi0, nu);
    const State base1 = tensor(phi1, nu);
    const double s0 = spec.state_perturbation * uniform(rng, 0.1, 1.0);
    const double s1 = spec.state_perturbation * uniform(rng, 0.1, 1.0);
    const State rho0(mix(base0, random_mixed_state(da, rng), s0).matrix(), {da});
    const State rho1(mix(base1, random_mixed_state(da, rng), s1).matrix(), {da});
    const MatrixXc v = near_identity_isometry(da, spec.dim_env, spec.isometry_perturbation * uniform(rng, 0.1, 1.0), rng);

    const std::vector<int> out_dims{da, spec.dim_env};
    const State out0(apply_isometry(v, rho0.matrix()), out_dims);
    const State out1(apply_isometry(v, rho1.matrix()), out_dims);
    const State n0 = partial_trace(out0, {0}), n1 = partial_trace(out1, {0});
    const State e0 = partial_trace(out0, {1}), e1 = partial_trace(out1, {1});

    SecurityInputs si;
    si.f_meas = std::min(1.0, fidelity(n1, n0));
    si.f01 = fidelity(phi1, phi0);
    if (!(si.f01 > 0.0)) continue;
    si.delta0 = c_distance(State(base0.matrix(), {da}), rho0);
    si.delta1 = c_distance(State(base1.matrix(), {da}), rho1);
    const EtaSolution eta = eta_solver(si);

    const double lhs = relative_entropy(e1, e0).value;
    const double d_in = relative_entropy(rho1, rho0).value;
    if (eta.eta <= 0.0) {
      ++c.vacuous;
      record(vacuous_dp, d_in - lhs);
      continue;
    }
    record(c, d_in + std::log2(1.0 - eta.eta) - lhs);
  }
  std::ostringstream detail;
  detail << "attempts=" << attempts << " data_processing_on_vacuous: violations=" << vacuous_dp.violations
         << " worst_slack=" << std::setprecision(3) << std::scientific << vacuous_dp.worst_slack;
  c.detail = detail.str();
  c.pass = c.trials >= instances && c.violations == 0 && vacuous_dp.violations == 0;
  if (c.trials < instances) c.detail += " (too few non-vacuous instances)";
  return c;
}

CheckResult fidelity_triangle_check(std::uint64_t seed, std::size_t trials, int max_dim) {
  if (max_dim < 2) throw ValidationError("max_dim must be at least 2");
  CheckResult c;
  c.name = "fidelity_triangle";
  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng = trial_rng(seed, t);
    const int d = uniform_int(rng, 2, max_dim);
    // Pure or mixed references, perturbation weights log-uniform.
    auto draw = [&](bool pure) { return pure ? random_pure_state(d, rng) : random_mixed_state(d, rng); };
    const State rho_p = draw(uniform_int(rng, 0, 1) == 1);
    const State sigma_p = draw(uniform_int(rng, 0, 1) == 1);
    const State rho = mix(rho_p, random_mixed_state(d, rng), std::pow(10.0, uniform(rng, -4.0, -0.5)));
    const State sigma = mix(sigma_p, random_mixed_state(d, rng), std::pow(10.0, uniform(rng, -4.0, -0.5)));
    const double eps = c_distance(rho, rho_p) + c_distance(sigma, sigma_p);
    const double fp = fidelity(rho_p, sigma_p);
    const double rhs = fp - 2.0 * std::sqrt(std::max(0.0, 1.0 - fp)) * eps - eps * eps;
    if (rhs <= 0.0) ++c.vacuous;
    record(c, fidelity(rho, sigma) - rhs);
  }
  c.pass = c.violations == 0;
  return c;
}

CheckResult pure_distinguish_check(std::uint64_t seed, std::size_t trials, int max_dim) {
  if (max_dim < 2) throw ValidationError("max_dim must be at least 2");
  CheckResult c;
  c.name = "pure_distinguish";
  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng = trial_rng(seed, t);
    const int d1 = uniform_int(rng, 2, std::min(3, max_dim));
    const int d2 = uniform_int(rng, 1, std::max(1, max_dim / d1));
    const int da = d1 * d2;
    const int db = uniform_int(rng, 2, 3);
    const State phi0 = random_pure_state(d1, rng);
    const State phi1 = random_pure_state(d1, rng);
    const State nu = random_mixed_state(d2, rng);
    const State rho0(tensor(phi0, nu).matrix(), {da});
    const State rho1(tensor(phi1, nu).matrix(), {da});
    const MatrixXc v = near_identity_isometry(da, db, std::pow(10.0, uniform(rng, -4.0, -1.0)), rng);
    const State psi0(apply_isometry(v, rho0.matrix()), {da, db});
    const State psi1(apply_isometry(v, rho1.matrix()), {da, db});
    const double eps = c_distance(partial_trace(psi0, {0}), rho0) + c_distance(partial_trace(psi1, {0}), rho1);
    const double f01 = fidelity(phi1, phi0);
    if (!(f01 > 0.0)) continue;
    const double rhs = aleph(eps, f01);
    if (rhs <= 0.0) ++c.vacuous;
    record(c, fidelity(partial_trace(psi1, {1}), partial_trace(psi0, {1})) - rhs);
  }
  c.pass = c.violations == 0;
  return c;
}

// ---- covertness chain -------------------------------------------------------

CovertnessChain covertness_chain(const PPMConfig& cfg, const ProbeOutputs& probe) {
  CovertnessChain out;
  const State ppm = average_ppm_state(cfg, probe);
  const State idle = idle_output_state(cfg, probe);
  out.trace_distance = trace_distance(ppm, idle);
  const DivergenceValue chi = chi2_divergence(probe.nonidle, probe.idle);
  const DivergenceValue d = relative_entropy(ppm, idle);
  if (chi.infinite || d.infinite) {
    out.support_violation = true;
    out.chi2 = out.chi2_rhs = out.d_bits = out.d_nats = out.pinsker_rhs = std::numeric_limits<double>::infinity();
    return out;
  }
  out.d_bits = std::max(0.0, d.value);
  out.d_nats = convert_log_unit(out.d_bits, LogUnit::bits, LogUnit::nats);
  out.pinsker_rhs = 2.0 * std::sqrt(std::log(2.0) / 2.0 * out.d_bits);
  out.chi2 = std::max(0.0, chi.value);
  out.chi2_rhs = static_cast<double>(cfg.ell) / cfg.m() * out.chi2;
  out.constant_ratio = out.chi2_rhs > 0.0 ? out.d_nats / out.chi2_rhs : 0.0;
  out.pinsker_holds = out.trace_distance <= out.pinsker_rhs + kOracleSlack;
  out.chi2_holds = out.d_nats <= out.chi2_rhs + kOracleSlack;
  return out;
}

CheckResult pinsker_chi2_chain_check(const PPMConfig& cfg, const ProbeOutputs& probe, const std::string& label) {
  CheckResult c;
  c.name = "covertness_chain(" + label + ")";
  const CovertnessChain ch = covertness_chain(cfg, probe);
  std::ostringstream detail;
  detail << std::setprecision(6) << std::scientific;
  if (ch.support_violation) {
    c.trials = 1;
    c.pass = false;
    c.detail = "support violation: supp(E(|phi><phi|)) not contained in supp(E(|0><0|)); chi2 is infinite";
    return c;
  }
  record(c, ch.pinsker_rhs - ch.trace_distance);
  record(c, ch.chi2_rhs - ch.d_nats);
  detail << "trace_distance=" << ch.trace_distance << " pinsker_rhs=" << ch.pinsker_rhs << " d_nats=" << ch.d_nats
         << " chi2_rhs=" << ch.chi2_rhs << " constant_ratio=" << ch.constant_ratio;
  c.detail = detail.str();
  c.pass = c.violations == 0;
  return c;
}

// ---- full suite ---------------------------------------------------------------

ProbeOutputs desk_probe_outputs(double tau, double nbar, int cutoff, double alpha, int env_cutoff) {
  LossyThermalChannel ch = LossyThermalChannel::with_auto_env(tau, nbar, cutoff);
  if (env_cutoff > 0) ch.env_cutoff = env_cutoff;
  const TruncationPolicy loose = TruncationPolicy::permissive();
  const SingleModeChannel probe = [ch, loose](const State& r) { return apply_lossy_thermal(ch, r, loose); };
  return probe_outputs(probe, vacuum_ket(cutoff), coherent_ket(Complex(alpha, 0.0), cutoff, loose));
}

CheckResult resolvability_trend_check(const PPMConfig& cfg, const ProbeOutputs& probe, const FieldSpec& field) {
  CheckResult c;
  std::ostringstream name;
  name << "resolvability_trend(m_v=" << cfg.m_v << ",ell=" << cfg.ell << ",m_x=" << cfg.m_x << ")";
  c.name = name.str();
  const ResolvabilityTable t = resolvability_exhaustive(cfg, probe, field);
  std::ostringstream detail;
  detail << std::setprecision(6) << std::scientific;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    detail << " h=" << t.rows[i].h << ":" << t.rows[i].average;
    if (i > 0) {
      ++c.trials;
      const double drop = t.rows[i - 1].average - t.rows[i].average;
      if (c.trials == 1 || drop < c.worst_slack) c.worst_slack = drop;
      if (!(drop > 0.0)) ++c.violations;
    }
  }
  ++c.trials;
  const double full_slack = 1e-12 - t.full_codebook_distance;
  c.worst_slack = c.trials == 1 ? full_slack : std::min(c.worst_slack, full_slack);
  if (!(full_slack > 0.0)) ++c.violations;
  detail << " full=" << t.full_codebook_distance;
  c.detail = "average_by_h" + detail.str();
  c.pass = c.violations == 0;
  return c;
}

CheckResult hash_family_check(int p, int e, int ell) {
  const FieldSpec field(p, e, ell);
  CheckResult c;
  std::ostringstream name;
  name << "hash_family(GF(" << field.symbol_size() << ")^" << ell << ")";
  c.name = name.str();
  std::ostringstream detail;
  detail << std::setprecision(6);
  for (int k = 1; k <= ell; ++k) {
    const UniversalityReport r = verify_two_universal(field, k);
    ++c.trials;
    const double slack = r.bound - r.max_collision;
    if (c.trials == 1 || slack < c.worst_slack) c.worst_slack = slack;
    if (!r.pass()) ++c.violations;
    detail << " k=" << k << ":collision=" << r.max_collision << ",bound=" << r.bound
           << ",regular=" << (r.regular ? "yes" : "no");
  }
  c.detail = detail.str().substr(1);
  c.pass = c.violations == 0;
  return c;
}

OracleReport run_oracle_suite(const OracleSuiteOptions& o) {
  OracleReport report;
  auto& checks = report.checks;

  RandomInstanceSpec spec;
  spec.seed = o.seed;
  checks.push_back(recovery_bound_check(spec, o.recovery_instances));
  checks.push_back(fidelity_triangle_check(o.seed, o.lemma_trials));
  checks.push_back(pure_distinguish_check(o.seed, o.lemma_trials));

  for (const auto& [p, e, ell] : {std::tuple{2, 1, 2}, std::tuple{2, 1, 3}, std::tuple{3, 1, 2}, std::tuple{2, 2, 2}})
    checks.push_back(hash_family_check(p, e, ell));

  const ProbeOutputs probe = desk_probe_outputs(o.probe_tau, o.probe_nbar, o.cutoff, o.alpha);
  const PPMConfig binary{3, 1, 2};
  const FieldSpec gf2(2, 1, 3);
  checks.push_back(z_invariance_check(binary, probe, gf2));
  checks.push_back(resolvability_trend_check(binary, probe, gf2));
  checks.push_back(z_invariance_check(PPMConfig{2, 1, 3}, probe, FieldSpec(3, 1, 2)));

  for (const PPMConfig& cfg : {PPMConfig{2, 1, 2}, PPMConfig{2, 2, 1}, PPMConfig{3, 1, 2}, PPMConfig{1, 2, 2},
                               PPMConfig{2, 1, 3}}) {
    std::ostringstream label;
    label << "ell=" << cfg.ell << ",m_x=" << cfg.m_x << ",m_v=" << cfg.m_v;
    checks.push_back(pinsker_chi2_chain_check(cfg, probe, label.str()));
  }
  return report;
}

}  // namespace covq
