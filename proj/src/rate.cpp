#include "covq/rate.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "covq/infotheory.hpp"
#include "covq/parallel.hpp"

namespace covq {

namespace {

bool finite_unit(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

// Probe outputs are displaced thermal with these parameters.
DisplacedThermalParams probe_signal_params(const BosonicLink& link) {
  return through_lossy_thermal(link.tau_e, link.nbar_e, {Complex(link.alpha, 0.0), 0.0});
}

}  // namespace

void BosonicLink::validate() const {
  if (!finite_unit(tau_e) || !finite_unit(tau_n)) throw ValidationError("transmissivities must lie in [0, 1]");
  if (!std::isfinite(nbar_e) || nbar_e < 0.0 || !std::isfinite(nbar_n) || nbar_n < 0.0)
    throw ValidationError("excess noise must be finite and >= 0");
  if (!std::isfinite(alpha)) throw ValidationError("alpha must be finite");
}

void CovertnessBudget::validate() const {
  auto open_unit = [](double x) { return x > 0.0 && x < 1.0; };
  if (!open_unit(lambda2) || !open_unit(delta_pa) || !open_unit(eps_ir))
    throw ValidationError("lambda2, delta_pa, eps_ir must lie in (0, 1)");
  if (!(target_lambda1 >= 0.0) || !std::isfinite(target_lambda1))
    throw ValidationError("target lambda1 must be finite and >= 0");
}

int auto_cutoff(const BosonicLink& link) {
  link.validate();
  const DisplacedThermalParams sig = probe_signal_params(link);
  const DisplacedThermalParams bob = through_lossy_thermal(link.tau_n, link.nbar_n, sig);
  const DisplacedThermalParams bob_idle = through_lossy_thermal(link.tau_n, link.nbar_n, {Complex(0.0), sig.nbar});
  int d = 8;
  for (const DisplacedThermalParams& p : {sig, bob, bob_idle}) {
    int need = thermal_cutoff_for_tail(p.nbar + std::norm(p.beta), 1e-12);
    while (poisson_tail(std::norm(p.beta), need) > 1e-12) ++need;
    d = std::max(d, need);
  }
  return 2 * d + 4;
}

BosonicStates bosonic_states(const BosonicLink& link, int cutoff) {
  link.validate();
  if (cutoff < 1) throw ValidationError("cutoff must be at least 1");
  const DisplacedThermalParams probe_signal = probe_signal_params(link);
  const DisplacedThermalParams probe_idle{Complex(0.0), probe_signal.nbar};
  const DisplacedThermalParams bob_signal = through_lossy_thermal(link.tau_n, link.nbar_n, probe_signal);
  const DisplacedThermalParams bob_idle = through_lossy_thermal(link.tau_n, link.nbar_n, probe_idle);
  auto state = [cutoff](const DisplacedThermalParams& p) { return displaced_thermal(p.beta, p.nbar, cutoff); };
  return BosonicStates{cutoff,          probe_idle,        probe_signal,      bob_idle,         bob_signal,
                       state(probe_idle), state(probe_signal), state(bob_idle), state(bob_signal)};
}

double honest_subblock_fidelity(const SingleModeChannel& probe, const SingleModeChannel& honest, const Ket& idle,
                                const Ket& nonidle) {
  return fidelity(honest(probe(pure_state(nonidle))), honest(probe(pure_state(idle))));
}

double honest_subblock_fidelity_dilation(const BosonicLink& link, int cutoff) {
  link.validate();
  const auto probe_ch = LossyThermalChannel::with_auto_env(link.tau_e, link.nbar_e, cutoff);
  const auto honest_ch = LossyThermalChannel::with_auto_env(link.tau_n, link.nbar_n, cutoff);
  const SingleModeChannel probe = [probe_ch](const State& r) { return apply_lossy_thermal(probe_ch, r); };
  const SingleModeChannel honest = [honest_ch](const State& r) { return apply_lossy_thermal(honest_ch, r); };
  return honest_subblock_fidelity(probe, honest, vacuum_ket(cutoff), coherent_ket(Complex(link.alpha, 0.0), cutoff));
}

SecurityInputs security_inputs(const BosonicStates& states, double alpha) {
  const int d = states.cutoff;
  const State vac = pure_state(vacuum_ket(d));
  const State coh = pure_state(coherent_ket(Complex(alpha, 0.0), d));
  SecurityInputs si;
  si.f01 = std::exp(-alpha * alpha);
  si.delta0 = c_distance(vac, states.rho0);
  si.delta1 = c_distance(coh, states.rho1);
  const DivergenceValue dp = relative_entropy(states.rho1, states.rho0);
  if (dp.infinite) throw ValidationError("probe outputs violate the support condition: D(rho1||rho0) is infinite");
  si.d_probe = std::max(0.0, dp.value);
  si.f_meas = fidelity(states.bob1, states.bob0);
  return si;
}

RateReport rate_report(const BosonicLink& link, const BlockChoice& block, const CovertnessBudget& budget,
                       const RateOptions& options, const Chi2Pair& chi2) {
  link.validate();
  budget.validate();
  if (!(options.reconciliation_efficiency > 0.0 && options.reconciliation_efficiency <= 1.0))
    throw ValidationError("reconciliation efficiency must lie in (0, 1]");
  RateReport r;
  r.link = link;
  r.budget = budget;
  r.reconciliation_efficiency = options.reconciliation_efficiency;
  r.delta_smooth = options.delta_smooth > 0.0 ? options.delta_smooth : budget.delta_pa;
  r.sign = options.sign;
  r.chi2 = chi2;
  const double chi = chi2.rho_given_sigma;

  r.block = {block.ell, block.m_x, block.m_v};
  if (!(block.ell > 0.0)) {
    if (!(budget.target_lambda1 > 0.0)) throw ValidationError("either ell or a positive target lambda1 is required");
    r.block.ell = block_count_for_lambda1(block.m_x * block.m_v, chi, budget.target_lambda1);
    if (r.block.ell < 1.0) {
      std::ostringstream msg;
      msg << "target lambda1 " << budget.target_lambda1 << " with m = " << block.m_x * block.m_v
          << " gives ell = floor(2 m lambda1^2 / chi2) < 1 (chi2 = " << chi << ")";
      throw ValidationError(msg.str());
    }
  }
  r.block.validate();

  r.cutoff = options.cutoff > 0 ? options.cutoff : auto_cutoff(link);
  const BosonicStates states = bosonic_states(link, r.cutoff);
  r.security = security_inputs(states, link.alpha);
  const DivergenceValue dh = relative_entropy(states.bob1, states.bob0);
  if (dh.infinite) throw ValidationError("Bob's states violate the support condition");
  r.d_honest = std::max(0.0, dh.value);
  r.eta = eta_solver(r.security);

  r.lambda1 = covertness_lambda1(r.block, chi);
  r.log_h = covertness_log_h(r.block, chi, budget.lambda2);
  r.hmin = min_entropy_bound(r.block, r.security.d_probe, r.eta.eta, r.delta_smooth, options.sign);
  r.leak_ir = r.block.ell / options.reconciliation_efficiency * std::max(0.0, std::log2(r.block.m_x) - r.d_honest);
  r.pa_penalty = 2.0 * std::log2(1.0 / budget.delta_pa);
  r.net_key = r.hmin - r.leak_ir - r.pa_penalty - r.log_h;
  r.rate_per_symbol = r.net_key / r.block.ell;
  return r;
}

Chi2Table probe_chi2_table(const BosonicLink& link, const Chi2ConvergenceOptions& options) {
  link.validate();
  const DisplacedThermalParams p = probe_signal_params(link);
  Chi2Table t = chi2_convergence_table(std::abs(p.beta), p.nbar, options);
  if (!t.converged) {
    std::ostringstream msg;
    msg << "chi2 did not converge by cutoff " << options.max_cutoff << ";";
    for (const Chi2Row& row : t.rows) msg << " d=" << row.cutoff << ":" << row.value.rho_given_sigma;
    throw ConvergenceError(msg.str());
  }
  return t;
}

std::optional<SweepVariable> parse_sweep_variable(const std::string& name) {
  static const std::map<std::string, SweepVariable> names = {
      {"tau_n", SweepVariable::tau_n}, {"nbar_n", SweepVariable::nbar_n}, {"tau_e", SweepVariable::tau_e},
      {"nbar_e", SweepVariable::nbar_e}, {"alpha", SweepVariable::alpha}, {"ell", SweepVariable::ell},
      {"m_x", SweepVariable::m_x},     {"m_v", SweepVariable::m_v}};
  const auto it = names.find(name);
  if (it == names.end()) return std::nullopt;
  return it->second;
}

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::tau_n: return "tau_n";
    case SweepVariable::nbar_n: return "nbar_n";
    case SweepVariable::tau_e: return "tau_e";
    case SweepVariable::nbar_e: return "nbar_e";
    case SweepVariable::alpha: return "alpha";
    case SweepVariable::ell: return "ell";
    case SweepVariable::m_x: return "m_x";
    case SweepVariable::m_v: return "m_v";
  }
  return "unknown";
}

std::vector<SweepRow> rate_sweep(const BosonicLink& link, const BlockChoice& block, const CovertnessBudget& budget,
                                 const RateOptions& options, SweepVariable variable, const std::vector<double>& grid,
                                 unsigned threads) {
  if (grid.empty()) throw ValidationError("sweep grid is empty");
  struct Point {
    BosonicLink link;
    BlockChoice block;
  };
  std::vector<Point> points;
  for (double value : grid) {
    Point p{link, block};
    switch (variable) {
      case SweepVariable::tau_n: p.link.tau_n = value; break;
      case SweepVariable::nbar_n: p.link.nbar_n = value; break;
      case SweepVariable::tau_e: p.link.tau_e = value; break;
      case SweepVariable::nbar_e: p.link.nbar_e = value; break;
      case SweepVariable::alpha: p.link.alpha = value; break;
      case SweepVariable::ell: p.block.ell = value; break;
      case SweepVariable::m_x: p.block.m_x = value; break;
      case SweepVariable::m_v: p.block.m_v = value; break;
    }
    points.push_back(p);
  }

  // chi2 depends only on the probe parameters.
  using Key = std::pair<double, double>;
  std::map<Key, std::size_t> key_index;
  std::vector<Key> keys;
  std::vector<std::size_t> point_key(points.size(), 0);
  std::vector<std::string> point_error(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      points[i].link.validate();
      const DisplacedThermalParams sig = probe_signal_params(points[i].link);
      const Key key{std::abs(sig.beta), sig.nbar};
      auto [it, inserted] = key_index.emplace(key, keys.size());
      if (inserted) keys.push_back(key);
      point_key[i] = it->second;
    } catch (const std::exception& e) {
      point_error[i] = e.what();
    }
  }
  std::vector<std::optional<Chi2Pair>> chi2(keys.size());
  std::vector<std::string> chi2_error(keys.size());
  parallel_for(keys.size(), threads, [&](std::size_t i) {
    try {
      const Chi2Table t = chi2_convergence_table(keys[i].first, keys[i].second, options.chi2);
      if (!t.converged) throw ConvergenceError("chi2 did not converge by the maximum cutoff");
      chi2[i] = t.value;
    } catch (const std::exception& e) {
      chi2_error[i] = e.what();
    }
  });

  std::vector<SweepRow> rows(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    rows[i].value = grid[i];
    if (!point_error[i].empty()) {
      rows[i].error = point_error[i];
      return;
    }
    const std::size_t k = point_key[i];
    if (!chi2[k]) {
      rows[i].error = "chi2: " + chi2_error[k];
      return;
    }
    try {
      rows[i].report = rate_report(points[i].link, points[i].block, budget, options, *chi2[k]);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });
  return rows;
}

}  // namespace covq
