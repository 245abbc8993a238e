#pragma once

// Brute-force verifiers on exhaustively small instances. Nothing here is
// used by the evaluators; these only re-derive their claims independently.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "covq/finite_field.hpp"
#include "covq/ppm.hpp"

namespace covq {

inline constexpr double kOracleSlack = 1e-8;

struct CheckResult {
  std::string name;
  bool pass = false;
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::size_t vacuous = 0;     // instances where the claim holds trivially
  double worst_slack = 0.0;    // min over trials of (rhs - lhs); negative means violated
  std::string detail;
};

struct OracleReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

// "PASS name ..." / "FAIL name ..." per line, then a summary line.
void write_report(std::ostream& out, const OracleReport& report);

// ---- random instances ------------------------------------------------------

// Independent stream per trial: seeded from (seed, trial).
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial);

VectorXc random_unit_vector(int dim, std::mt19937_64& rng);
State random_pure_state(int dim, std::mt19937_64& rng);
// Ginibre ensemble: G G^dag / tr, full rank almost surely.
State random_mixed_state(int dim, std::mt19937_64& rng);
// Columns of a Gaussian rows x cols matrix, orthonormalized.
MatrixXc random_isometry(int rows, int cols, std::mt19937_64& rng);
// Orthonormalized (V0 + scale * Gaussian), V0 = identity embedding |a> -> |a>|0>.
MatrixXc near_identity_isometry(int in_dim, int env_dim, double scale, std::mt19937_64& rng);

// rho -> V rho V^dag on (out (x) env), basis index out * env_dim + e.
MatrixXc apply_isometry(const MatrixXc& v, const MatrixXc& rho);

struct RandomInstanceSpec {
  std::uint64_t seed = 1;
  int dim_a1 = 2;       // A'
  int dim_a2 = 2;       // A''
  int dim_env = 2;      // environment of the isometry
  double state_perturbation = 1e-3;     // weight of a random full-rank state mixed into phi^x (x) nu
  double isometry_perturbation = 5e-2;  // Gaussian scale around the identity embedding
  void validate() const;
};

// ---- resolvability and symmetry --------------------------------------------

struct ResolvabilityRow {
  int k = 0;
  std::uint64_t h = 0;
  double average = 0.0;  // over all f and z
  double max_distance = 0.0;
  // distances[f][z]: f over nonzero u by index, z over V^k in lexicographic order
  std::vector<std::vector<double>> distances;
};

struct ResolvabilityTable {
  std::vector<ResolvabilityRow> rows;  // k = ell down to 1, so h doubles (for m_v = 2) along the table
  double full_codebook_distance = 0.0;
};

// Optional codebook corruption hook, called as hook(f_index, codebook).
using CodebookHook = std::function<void(std::size_t, HashCodebook&)>;

// Exact averages of ||sigma_codebook - rho_PPM||_1 over all (f, z).
ResolvabilityRow resolvability_row(const PPMConfig& cfg, const ProbeOutputs& probe, const FieldSpec& field, int k,
                                   const CodebookHook& hook = {});
ResolvabilityTable resolvability_exhaustive(const PPMConfig& cfg, const ProbeOutputs& probe, const FieldSpec& field);

// max over f of (max_z - min_z) distance.
double z_invariance_deviation(const ResolvabilityRow& row);
CheckResult z_invariance_check(const PPMConfig& cfg, const ProbeOutputs& probe, const FieldSpec& field,
                               const CodebookHook& hook = {});

// ---- lemmas and the recovery bound ----------------------------------------

// D(E(rho1)||E(rho0)) <= D(rho1||rho0) + log2(1 - eta) whenever eta > 0.
// Runs until `instances` non-vacuous instances have been checked, giving up
// after max_attempts total.
CheckResult recovery_bound_check(const RandomInstanceSpec& spec, std::size_t instances, std::size_t max_attempts = 50000);

// F(rho, sigma) >= F(rho', sigma') - 2 sqrt(1 - F') eps - eps^2 with
// eps = C(rho, rho') + C(sigma, sigma').
CheckResult fidelity_triangle_check(std::uint64_t seed, std::size_t trials, int max_dim = 6);

// F(psi1_B, psi0_B) >= aleph(eps, F(phi1, phi0)) for rho^x = phi^x (x) nu,
// psi^x = V rho^x V^dag, eps = sum_x C(psi^x_A, rho^x).
CheckResult pure_distinguish_check(std::uint64_t seed, std::size_t trials, int max_dim = 6);

struct CovertnessChain {
  double trace_distance = 0.0;  // ||rho_PPM - rho0^n||_1
  double d_bits = 0.0;          // D(rho_PPM || rho0^n)
  double pinsker_rhs = 0.0;     // 2 sqrt((ln 2 / 2) d_bits)
  double d_nats = 0.0;
  double chi2 = 0.0;            // chi2(rho1 || rho0), single mode
  double chi2_rhs = 0.0;        // (ell / m) chi2
  double constant_ratio = 0.0;  // d_nats / chi2_rhs, 0 when chi2_rhs = 0
  bool support_violation = false;
  bool pinsker_holds = false;
  bool chi2_holds = false;
};

CovertnessChain covertness_chain(const PPMConfig& cfg, const ProbeOutputs& probe);
CheckResult pinsker_chi2_chain_check(const PPMConfig& cfg, const ProbeOutputs& probe, const std::string& label);

// ---- full suite ---------------------------------------------------------------

struct OracleSuiteOptions {
  std::uint64_t seed = 1;
  std::size_t recovery_instances = 200;
  std::size_t lemma_trials = 500;
  // desk probe: lossy thermal on `cutoff` levels, coherent non-idle state
  double probe_tau = 0.9;
  double probe_nbar = 0.1;
  int cutoff = 2;
  double alpha = 0.6;
};

// Probe outputs of the desk probe, truncation permitted (deficits kept).
ProbeOutputs desk_probe_outputs(double tau, double nbar, int cutoff, double alpha, int env_cutoff = 0);

// Strictly decreasing average distance as h grows, and exact full codebook.
CheckResult resolvability_trend_check(const PPMConfig& cfg, const ProbeOutputs& probe, const FieldSpec& field);
CheckResult hash_family_check(int p, int e, int ell);

OracleReport run_oracle_suite(const OracleSuiteOptions& options);

}  // namespace covq
