#pragma once

// Closed-form covertness, security and no-go bounds, and the recovery-slack
// solver. Block sizes are real-valued here: the regime of interest has
// alphabets far beyond what can be enumerated.

#include <span>
#include <vector>

#include "covq/infotheory.hpp"

namespace covq {

struct BlockParameters {
  double ell = 1.0;
  double m_x = 1.0;
  double m_v = 1.0;

  double m() const noexcept { return m_x * m_v; }
  void validate() const;
};

// sqrt(ell chi2 / (2 m)), for the full one-norm covertness distance.
double covertness_lambda1(const BlockParameters& block, double chi2);

// (ell/m_x) chi2 + sqrt(ell) (2 log m_v + 3) sqrt(log(4/lambda2) + 1).
double covertness_log_h(const BlockParameters& block, double chi2, double lambda2, LogUnit unit = LogUnit::bits);

// Largest ell with covertness_lambda1 <= target: floor(2 m target^2 / chi2).
double block_count_for_lambda1(double m, double chi2, double target_lambda1);

struct SecurityInputs {
  double f_meas = 1.0;  // F(tau^x, rho^0) on Bob's side
  double f01 = 1.0;     // F(|0><0|, |phi><phi|)
  double delta0 = 0.0;  // C(|0><0|, rho_Q^0)
  double delta1 = 0.0;  // C(|phi><phi|, rho_Q^1)
  double d_probe = 0.0; // D(rho_Q^1 || rho_Q^0), bits

  double delta() const noexcept { return delta0 + delta1; }
  void validate() const;
};

// 2 delta0 + sqrt(eta + 4 sqrt(eta) delta1 + 4 delta1^2).
double eta_lambda(double eta, double delta0, double delta1);

// aleph(lambda(eta), F01) - 2 sqrt(1 - F01) delta - delta^2 - F_meas.
// The condition holds when this is >= -kEtaBoundaryTolerance.
double eta_condition_slack(const SecurityInputs& si, double eta);
inline constexpr double kEtaBoundaryTolerance = 1e-14;
bool eta_condition_holds(const SecurityInputs& si, double eta);

struct EtaSolution {
  double eta = 0.0;
  bool no_slack = false;  // the condition fails already at eta = 0
};

// Largest eta in [0, 1) satisfying the condition, by bisection to 1e-10.
EtaSolution eta_solver(const SecurityInputs& si, double tolerance = 1e-10);

enum class EtaSign {
  proof,   // - avg log(1 - eta): recovery slack adds entropy
  printed  // + avg log(1 - eta), the opposite convention
};

// Whole-block smooth min-entropy lower bound:
//   ell (log m_x - D - s avg_x log(1 - eta_x)) - ell * finite_size_term(log m_x, ell, delta)
// with s = +1 for EtaSign::proof and -1 for EtaSign::printed. d_probe is in
// `unit`.
double min_entropy_bound(const BlockParameters& block, double d_probe, std::span<const double> eta,
                         double delta_smooth, EtaSign sign = EtaSign::proof, LogUnit unit = LogUnit::bits);
double min_entropy_bound(const BlockParameters& block, double d_probe, double eta, double delta_smooth,
                         EtaSign sign = EtaSign::proof, LogUnit unit = LogUnit::bits);

struct NoGoInputs {
  double epsilon = 0.0;
  double delta = 0.0;
  double mu = 0.0;
  double log_dim_c = 0.0;  // in the requested unit
  void validate() const;
};

struct NoGoBound {
  double max_key = 0.0;
  bool unbounded = false;  // 1 - 5 sqrt(mu) - epsilon - 2 delta <= 0
  double rhs = 0.0;
  double denominator = 0.0;
};

NoGoBound nogo_max_key(const NoGoInputs& in, LogUnit unit = LogUnit::bits);

}  // namespace covq
