#pragma once

// End-to-end key-rate evaluation for a coherent-state PPM link whose probe
// and honest channel are both lossy-thermal beam splitters.
//
// Bob receives N(E(.)): the honest channel acts after the probe. Coherent
// inputs stay displaced thermal through both, so single-mode states are
// built from the closed-form parameters; the dilation path is an
// independent cross-check.

#include <optional>
#include <string>
#include <vector>

#include "covq/bounds.hpp"
#include "covq/fock.hpp"
#include "covq/probe_chi2.hpp"

namespace covq {

struct BosonicLink {
  double tau_e = 0.9994;
  double nbar_e = 11.0;
  double tau_n = 1.0;
  double nbar_n = 0.01;
  double alpha = 0.6;
  void validate() const;
};

struct CovertnessBudget {
  double lambda2 = 1e-3;
  double delta_pa = 1e-6;
  double eps_ir = 1e-6;
  double target_lambda1 = 1e-2;  // sizes ell when the block count is not fixed
  void validate() const;
};

// Block structure; ell = 0 means "size ell from target_lambda1".
struct BlockChoice {
  double ell = 0.0;
  double m_x = 2.0;
  double m_v = 2.0;
};

struct RateOptions {
  int cutoff = 0;                       // 0: chosen from the state parameters
  double reconciliation_efficiency = 1.0;
  double delta_smooth = 0.0;            // 0: use budget.delta_pa
  EtaSign sign = EtaSign::proof;
  Chi2ConvergenceOptions chi2;
};

// Single-mode states of the example at one cutoff.
struct BosonicStates {
  int cutoff = 0;
  DisplacedThermalParams probe_idle, probe_signal, bob_idle, bob_signal;
  State rho0, rho1;  // E(|0><0|), E(|alpha><alpha|)
  State bob0, bob1;  // N(E(|0><0|)), N(E(|alpha><alpha|))
};

// Smallest cutoff (at least 8) at which every displaced thermal state of the
// link has tail mass below 1e-12, plus a margin.
int auto_cutoff(const BosonicLink& link);
BosonicStates bosonic_states(const BosonicLink& link, int cutoff);

// F(N(E(|phi><phi|)), N(E(|0><0|))) for arbitrary single-mode channels.
double honest_subblock_fidelity(const SingleModeChannel& probe, const SingleModeChannel& honest, const Ket& idle,
                                const Ket& nonidle);

// Same quantity for the example link through explicit beam-splitter
// dilations of both channels.
double honest_subblock_fidelity_dilation(const BosonicLink& link, int cutoff);

SecurityInputs security_inputs(const BosonicStates& states, double alpha);

struct RateReport {
  // echoed inputs
  BosonicLink link;
  BlockParameters block;
  CovertnessBudget budget;
  double reconciliation_efficiency = 1.0;
  double delta_smooth = 0.0;
  EtaSign sign = EtaSign::proof;
  int cutoff = 0;

  Chi2Pair chi2;
  SecurityInputs security;
  double d_honest = 0.0;
  EtaSolution eta;

  double lambda1 = 0.0;
  double log_h = 0.0;
  double hmin = 0.0;
  double leak_ir = 0.0;
  double pa_penalty = 0.0;
  double net_key = 0.0;
  double rate_per_symbol = 0.0;
};

// chi2 is passed in because it depends only on the probe and is expensive.
RateReport rate_report(const BosonicLink& link, const BlockChoice& block, const CovertnessBudget& budget,
                       const RateOptions& options, const Chi2Pair& chi2);

// Probe chi2 for the link, from the convergence table. Throws
// ConvergenceError (with the partial table in the message) on failure.
Chi2Table probe_chi2_table(const BosonicLink& link, const Chi2ConvergenceOptions& options = {});

enum class SweepVariable { tau_n, nbar_n, tau_e, nbar_e, alpha, ell, m_x, m_v };
std::optional<SweepVariable> parse_sweep_variable(const std::string& name);
std::string to_string(SweepVariable v);

struct SweepRow {
  double value = 0.0;
  std::optional<RateReport> report;
  std::string error;  // empty when report is set
};

// One row per grid point in grid order. Per-point failures are recorded in
// the row and the sweep continues. Points run on up to `threads` workers
// (0: hardware concurrency).
std::vector<SweepRow> rate_sweep(const BosonicLink& link, const BlockChoice& block, const CovertnessBudget& budget,
                                 const RateOptions& options, SweepVariable variable, const std::vector<double>& grid,
                                 unsigned threads = 0);

}  // namespace covq
