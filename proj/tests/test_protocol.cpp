#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

#include "covq/bounds.hpp"
#include "covq/errors.hpp"
#include "covq/oracle.hpp"
#include "covq/ppm.hpp"
#include "covq/probe_chi2.hpp"
#include "covq/rate.hpp"

using namespace covq;
using testing::max_abs_diff;

namespace {

ProbeOutputs desk_probe() { return desk_probe_outputs(0.9, 0.1, 2, 0.6); }

SingleModeChannel identity_channel() {
  return [](const State& r) { return r; };
}

}  // namespace

TEST_CASE("pulse positions") {
  const PPMConfig cfg{1, 3, 2};
  CHECK(ppm_position(1, 1, cfg) == 1);
  CHECK(ppm_position(1, 2, cfg) == 2);
  CHECK(ppm_position(2, 1, cfg) == 3);
  CHECK(ppm_position(3, 2, cfg) == 6);
  std::vector<int> seen;
  for (int x = 1; x <= 3; ++x)
    for (int v = 1; v <= 2; ++v) seen.push_back(ppm_position(x, v, cfg));
  std::sort(seen.begin(), seen.end());
  CHECK(seen == std::vector<int>{1, 2, 3, 4, 5, 6});
  CHECK_THROWS_AS(ppm_position(4, 1, cfg), ValidationError);
  CHECK_THROWS_AS(ppm_position(1, 0, cfg), ValidationError);
  CHECK_THROWS_AS(PPMConfig({0, 1, 1}).validate(), ValidationError);
}

TEST_CASE("sub-block kets") {
  const PPMConfig cfg{1, 2, 2};
  const Ket idle = vacuum_ket(3);
  const Ket phi = coherent_ket(Complex(0.3, 0.0), 3, TruncationPolicy::permissive());
  const double vac_overlap = std::norm(phi.amplitudes()(0));
  for (int z = 1; z <= 4; ++z) {
    const Ket k = ppm_subblock_ket(z, cfg, idle, phi);
    CHECK(k.amplitudes().size() == 81);
    CHECK(std::abs(k.amplitudes().squaredNorm() - 1.0) < 1e-12);
    // overlap with the all-idle ket is |<0|phi>|^2
    CHECK(std::abs(std::norm(k.amplitudes()(0)) - vac_overlap) < 1e-14);
  }
  const Ket a = ppm_subblock_ket(1, cfg, idle, phi), b = ppm_subblock_ket(3, cfg, idle, phi);
  CHECK(std::abs(std::norm(a.amplitudes().dot(b.amplitudes())) - vac_overlap * vac_overlap) < 1e-14);
  CHECK_THROWS_AS(ppm_subblock_ket(5, cfg, idle, phi), ValidationError);
}

TEST_CASE("averaged PPM state") {
  const ProbeOutputs probe = desk_probe();

  // one mode per sub-block: every codeword is the non-idle output
  const PPMConfig single{2, 1, 1};
  CHECK(max_abs_diff(average_ppm_state(single, probe).matrix(), tensor(probe.nonidle, probe.nonidle).matrix()) < 1e-14);

  // identical inputs give the idle product
  const ProbeOutputs same{probe.idle, probe.idle};
  const PPMConfig cfg{2, 2, 1};
  CHECK(max_abs_diff(average_ppm_state(cfg, same).matrix(), idle_output_state(cfg, same).matrix()) < 1e-14);

  // ell = 1, m = 2 by hand
  const PPMConfig two{1, 2, 1};
  const MatrixXc hand =
      0.5 * (tensor(probe.nonidle, probe.idle).matrix() + tensor(probe.idle, probe.nonidle).matrix());
  CHECK(max_abs_diff(average_ppm_state(two, probe).matrix(), hand) < 1e-14);
  CHECK(std::abs(average_ppm_state(two, probe).matrix().trace().real() - 1.0) < 1e-12);

  CHECK_THROWS_AS(average_ppm_state(PPMConfig{4, 2, 2}, probe), ValidationError);
}

TEST_CASE("protocol state over a codebook") {
  const ProbeOutputs probe = desk_probe();
  const PPMConfig cfg{2, 1, 2};
  const FieldSpec field(2, 1, 2);
  const std::vector<SymbolVector> all = full_codebook(field);
  CHECK(max_abs_diff(protocol_state(cfg, probe, all).matrix(), average_ppm_state(cfg, probe).matrix()) < 1e-12);

  // a single coordination sequence: product of key-averaged sub-blocks
  for (const SymbolVector& w : all) {
    const std::vector<SymbolVector> one{w};
    const State expect = tensor(key_averaged_subblock(w[0] + 1, cfg, probe), key_averaged_subblock(w[1] + 1, cfg, probe));
    CHECK(max_abs_diff(protocol_state(cfg, probe, one).matrix(), expect.matrix()) < 1e-14);
  }

  // m_x = 2, m_v = 1: key-averaged sub-block by hand
  const PPMConfig key{1, 2, 1};
  const MatrixXc hand =
      0.5 * (tensor(probe.nonidle, probe.idle).matrix() + tensor(probe.idle, probe.nonidle).matrix());
  CHECK(max_abs_diff(key_averaged_subblock(1, key, probe).matrix(), hand) < 1e-14);
}

TEST_CASE("covertness lambda1 and block count") {
  CHECK(covertness_lambda1({10, 2, 2}, 0.0) == 0.0);
  for (double chi : {0.1, 1.0, 7.0}) CHECK(std::abs(covertness_lambda1({8, 2, 2}, chi) - std::sqrt(chi)) < 1e-14);
  CHECK(std::abs(covertness_lambda1({1, 1, 2}, 4.0) - 1.0) < 1e-15);
  CHECK(block_count_for_lambda1(4.0, 1.0, 0.5) == 2.0);
  CHECK(block_count_for_lambda1(4.0, 1e24, 1e-2) == 0.0);
  for (double ell : {1.0, 3.0, 1e6}) {
    const BlockParameters b{ell, 2, 2};
    const double chi = 0.37;
    const double target = covertness_lambda1(b, chi);
    CHECK(block_count_for_lambda1(b.m(), chi, target * (1.0 + 1e-12)) == ell);
  }
}

TEST_CASE("log h evaluator") {
  struct Case {
    BlockParameters b;
    double chi2, lambda2, expect;
  };
  const std::vector<Case> cases{{{4, 2, 2}, 1.0, 0.25, 2.0 + 10.0 * std::sqrt(5.0)},
                                {{100, 2, 2}, 0.5, 1e-3, 205.04016416248685906},
                                {{1000, 4, 2}, 0.01, 1e-2, 493.51568686180293632},
                                {{10, 1, 4}, 2.0, 0.1, 75.657387348803999634},
                                {{1e6, 2, 8}, 1e-5, 1e-3, 32412.229549247634632}};
  for (const Case& c : cases) CHECK(std::abs(covertness_log_h(c.b, c.chi2, c.lambda2) - c.expect) < 1e-9);
  CHECK(std::abs(covertness_log_h({100, 2, 2}, 0.5, 1e-3, LogUnit::nats) - 158.72120065776352635) < 1e-9);
  CHECK_THROWS_AS(covertness_log_h({100, 2, 2}, 0.5, 0.0), ValidationError);
}

TEST_CASE("min-entropy bound") {
  CHECK(std::abs(min_entropy_bound({100, 4, 1}, 1.0, 0.5, 1e-6) - (-120.2572184817829411)) < 1e-9);

  const double delta = 1e-6;
  double prev = -1e300;
  for (double mx : {2.0, 4.0, 16.0, 1024.0}) {
    const double h = min_entropy_bound({1e6, mx, 2}, 0.5, 0.1, delta);
    CHECK(h > prev);
    prev = h;
  }
  prev = 1e300;
  for (double d : {0.0, 0.1, 0.5, 2.0}) {
    const double h = min_entropy_bound({1e6, 8, 2}, d, 0.1, delta);
    CHECK(h < prev);
    prev = h;
  }
  prev = -1e300;
  for (double eta : {0.0, 0.1, 0.5, 0.9}) {
    const double h = min_entropy_bound({1e6, 8, 2}, 0.5, eta, delta);
    CHECK(h > prev);
    prev = h;
  }
  prev = 1e300;
  for (double eta : {0.0, 0.1, 0.5, 0.9}) {
    const double h = min_entropy_bound({1e6, 8, 2}, 0.5, eta, delta, EtaSign::printed);
    CHECK(h < prev);
    prev = h;
  }
  for (double ell : {1.0, 10.0, 1e4})
    for (double d : {0.0, 0.3}) CHECK(min_entropy_bound({ell, 1, 2}, d, 0.0, delta) <= 0.0);

  // per-sub-block eta values enter through their average of log(1 - eta)
  const std::vector<double> etas{0.1, 0.5};
  const double avg = -0.5 * (std::log2(0.9) + std::log2(0.5));
  const double base = min_entropy_bound({50, 4, 2}, 0.2, 0.0, delta);
  CHECK(std::abs(min_entropy_bound({50, 4, 2}, 0.2, etas, delta) - (base + 50.0 * avg)) < 1e-9);
  CHECK_THROWS_AS(min_entropy_bound({50, 4, 2}, 0.2, 1.0, delta), ValidationError);
}

TEST_CASE("eta solver") {
  SecurityInputs si;
  si.f01 = 0.4;
  si.f_meas = 0.5;
  si.delta0 = 0.01;
  si.delta1 = 0.01;
  const EtaSolution s = eta_solver(si);
  CHECK_FALSE(s.no_slack);
  CHECK(s.eta > 0.0);
  CHECK(eta_condition_holds(si, s.eta));
  CHECK_FALSE(eta_condition_holds(si, s.eta + 1e-6));

  // delta = 0: the condition is aleph(sqrt(eta), F01) >= F_meas
  SecurityInputs clean;
  clean.f01 = 0.5;
  clean.f_meas = 0.5;
  const EtaSolution c = eta_solver(clean);
  double best = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double eta = i * 1e-5;
    if (eta < 1.0 && aleph(std::sqrt(eta), 0.5) >= 0.5) best = eta;
  }
  CHECK(std::abs(c.eta - best) <= 1e-5);
  CHECK(std::abs(eta_lambda(0.25, 0.0, 0.0) - 0.5) < 1e-15);

  SecurityInputs tight;
  tight.f01 = 0.5;
  tight.f_meas = 1.0;
  tight.delta0 = 0.01;
  const EtaSolution t = eta_solver(tight);
  CHECK(t.no_slack);
  CHECK(t.eta == 0.0);
}

TEST_CASE("no-go bound") {
  struct Case {
    NoGoInputs in;
    double expect;
  };
  const std::vector<Case> cases{{{0.01, 0, 0, 0}, 0.08160922817768805477},
                                {{0.01, 0.001, 1e-4, 10}, 0.43081929002868635812},
                                {{0.05, 0.01, 1e-3, 100}, 3.910103834801035904},
                                {{0.001, 1e-5, 1e-6, 1000}, 0.075494708081095308656},
                                {{0.1, 0.02, 0.004, 5}, 3.4465811222824377689},
                                {{0.2, 0.1, 0.01, 3}, 29.171798640473039656}};
  for (const Case& c : cases) {
    const NoGoBound b = nogo_max_key(c.in);
    CHECK_FALSE(b.unbounded);
    CHECK(std::abs(b.max_key - c.expect) < 1e-9);
  }
  CHECK(std::abs(nogo_max_key({0.01, 0, 0, 0}).max_key - binary_entropy(0.01) / 0.99) < 1e-14);
  CHECK(nogo_max_key({0.5, 0.3, 0.0, 1.0}).unbounded);
  CHECK_THROWS_AS(nogo_max_key({-0.1, 0, 0, 0}), ValidationError);
}

TEST_CASE("closed-form chi2 for the probe pair") {
  // chi2(D thermal D^dag || thermal) = exp(b^2 (2N + 1) / (N (N + 1))) - 1
  const auto closed = [](double beta, double nbar) {
    return std::expm1(beta * beta * (2.0 * nbar + 1.0) / (nbar * (nbar + 1.0)));
  };
  for (const auto& [beta, nbar] : {std::pair{0.5, 0.3}, std::pair{0.2, 0.05}, std::pair{0.8, 1.0}}) {
    const double expect = closed(beta, nbar);
    const Chi2Pair p = chi2_thermal_displaced(beta, nbar, 80);
    CHECK(std::abs(p.rho_given_sigma - expect) < 1e-10 * std::max(1.0, expect));
    CHECK(p.sigma_given_rho > 0.0);
  }
  // double precision agrees where rounding has not yet caught up with truncation
  const TruncationPolicy loose = TruncationPolicy::permissive();
  for (const auto& [beta, nbar, d] : {std::tuple{0.5, 0.3, 32}, std::tuple{0.8, 1.0, 40}}) {
    const double direct =
        chi2_divergence(displaced_thermal(Complex(beta, 0.0), nbar, d, loose), thermal_state(nbar, d, loose)).value;
    CHECK(std::abs(direct / closed(beta, nbar) - 1.0) < 1e-6);
  }
  // and drifts where p_n at the cutoff falls far below eps
  const double drift =
      chi2_divergence(displaced_thermal(Complex(0.2, 0.0), 0.05, 40), thermal_state(0.05, 40)).value;
  CHECK(std::abs(drift / closed(0.2, 0.05) - 1.0) > 1e-4);
  CHECK(std::abs(chi2_thermal_displaced(0.2, 0.05, 40).rho_given_sigma / closed(0.2, 0.05) - 1.0) < 1e-10);
  const Chi2Table t = chi2_convergence_table(0.5, 0.3);
  CHECK(t.converged);
  CHECK(t.rows.size() >= 2);
  CHECK(t.rows.back().relative_change < 1e-4);
}

TEST_CASE("chi2 at the example parameters tracks the closed form") {
  const BosonicLink link;
  const Chi2Table t = probe_chi2_table(link);
  CHECK(t.converged);
  const double closed = 6.7577846976376840633e23;
  CHECK(std::abs(t.value.rho_given_sigma / closed - 1.0) < 1e-4);
}

TEST_CASE("honest sub-block fidelity") {
  const int d = 16;
  for (double alpha : {0.0, 0.3, 0.9}) {
    const double f = honest_subblock_fidelity(identity_channel(), identity_channel(), vacuum_ket(d),
                                              coherent_ket(Complex(alpha, 0.0), d));
    CHECK(std::abs(f - std::exp(-alpha * alpha)) < 1e-10);
  }
  const auto loss = LossyThermalChannel::with_auto_env(0.7, 0.2, d);
  const SingleModeChannel lossy = [loss](const State& r) { return apply_lossy_thermal(loss, r); };
  CHECK(std::abs(honest_subblock_fidelity(lossy, lossy, vacuum_ket(d), vacuum_ket(d)) - 1.0) < 1e-10);

  BosonicLink link;
  link.tau_n = 0.99;
  const int cutoff = 20;
  const BosonicStates s = bosonic_states(link, cutoff);
  const double fast = fidelity(s.bob1, s.bob0);
  const double dil = honest_subblock_fidelity_dilation(link, cutoff);
  CHECK(std::abs(fast - dil) < 1e-6);
  CHECK(std::abs(fast - security_inputs(s, link.alpha).f_meas) < 1e-14);
}

TEST_CASE("rate report accounting") {
  // identity honest channel with a quiet probe leaves eta > 0
  BosonicLink link;
  link.tau_e = 0.9999;
  link.nbar_e = 0.1;
  link.tau_n = 1.0;
  link.nbar_n = 0.0;
  const BlockChoice block{1e8, 1e30, 2};
  const CovertnessBudget budget;
  const RateOptions options;
  const Chi2Pair chi{1.0, 1.0, 0};
  const RateReport r = rate_report(link, block, budget, options, chi);
  CHECK(r.eta.eta > 0.0);
  CHECK(std::abs(r.d_honest - r.security.d_probe) < 1e-9);
  CHECK(r.net_key <= r.hmin);
  const double fs = r.block.ell * finite_size_term(std::log2(r.block.m_x), r.block.ell, r.delta_smooth);
  const double slack_bits = -r.block.ell * std::log2(1.0 - r.eta.eta);
  const double rebuilt = slack_bits - fs - r.pa_penalty - r.log_h;
  CHECK(std::abs(r.net_key - rebuilt) < 1e-9 * std::abs(slack_bits));
  CHECK(std::abs(r.rate_per_symbol - r.net_key / r.block.ell) < 1e-15);

  BosonicLink dark = link;
  dark.alpha = 0.0;
  const RateReport z = rate_report(dark, block, budget, options, Chi2Pair{0.0, 0.0, 0});
  CHECK(z.rate_per_symbol <= 0.0);
  CHECK(z.lambda1 == 0.0);

  // the example link has no slack and the default ell rule yields no blocks
  const BosonicLink example;
  const Chi2Pair big{6.7577846976376840633e23, 0.0, 0};
  CHECK_THROWS_AS(rate_report(example, BlockChoice{}, budget, options, big), ValidationError);
  const RateReport e = rate_report(example, BlockChoice{1e6, 2, 2}, budget, options, big);
  CHECK(e.eta.no_slack);
  CHECK(e.rate_per_symbol < 0.0);
}

TEST_CASE("rate sweep") {
  const BosonicLink link;
  const BlockChoice block{1e6, 2, 2};
  const CovertnessBudget budget;
  const RateOptions options;
  const std::vector<SweepRow> rows = rate_sweep(link, block, budget, options, SweepVariable::tau_n, {1.5, 1.0}, 1);
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].report.has_value());
  CHECK_FALSE(rows[0].error.empty());
  REQUIRE(rows[1].report.has_value());
  CHECK(rows[1].error.empty());
  CHECK(rows[1].value == 1.0);
  const RateReport direct = rate_report(link, block, budget, options, probe_chi2_table(link).value);
  CHECK(rows[1].report->net_key == direct.net_key);
  CHECK(rows[1].report->eta.no_slack);

  CHECK_THROWS_AS(rate_sweep(link, block, budget, options, SweepVariable::ell, {}, 1), ValidationError);
  CHECK(parse_sweep_variable("tau_n") == SweepVariable::tau_n);
  CHECK_FALSE(parse_sweep_variable("gamma").has_value());
  CHECK(to_string(SweepVariable::m_v) == "m_v");
}
