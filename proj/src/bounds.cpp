#include "covq/bounds.hpp"

#include <cmath>
#include <limits>

namespace covq {

namespace {

double binary_entropy_in(double p, LogUnit unit) { return convert_log_unit(binary_entropy(p), LogUnit::bits, unit); }

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void BlockParameters::validate() const {
  if (!(ell >= 1.0) || !std::isfinite(ell)) throw ValidationError("block count ell must be >= 1");
  if (!(m_x >= 1.0) || !std::isfinite(m_x)) throw ValidationError("m_x must be >= 1");
  if (!(m_v >= 1.0) || !std::isfinite(m_v)) throw ValidationError("m_v must be >= 1");
}

double covertness_lambda1(const BlockParameters& block, double chi2) {
  block.validate();
  if (!(chi2 >= 0.0)) throw ValidationError("chi2 must be nonnegative");
  return std::sqrt(block.ell * chi2 / (2.0 * block.m()));
}

double covertness_log_h(const BlockParameters& block, double chi2, double lambda2, LogUnit unit) {
  block.validate();
  if (!(chi2 >= 0.0)) throw ValidationError("chi2 must be nonnegative");
  if (!(lambda2 > 0.0 && lambda2 < 1.0)) throw ValidationError("lambda2 must lie in (0, 1)");
  return block.ell / block.m_x * chi2 +
         std::sqrt(block.ell) * (2.0 * log_in(block.m_v, unit) + 3.0) * std::sqrt(log_in(4.0 / lambda2, unit) + 1.0);
}

double block_count_for_lambda1(double m, double chi2, double target_lambda1) {
  if (!(m >= 1.0)) throw ValidationError("sub-block length m must be >= 1");
  if (!(chi2 > 0.0)) throw ValidationError("chi2 must be positive to size ell");
  if (!(target_lambda1 > 0.0)) throw ValidationError("target lambda1 must be positive");
  return std::floor(2.0 * m * target_lambda1 * target_lambda1 / chi2);
}

void SecurityInputs::validate() const {
  if (!in_unit_interval(f_meas)) throw ValidationError("F_meas must lie in [0, 1]");
  if (!(f01 > 0.0 && f01 <= 1.0)) throw ValidationError("F01 must lie in (0, 1]");
  if (!in_unit_interval(delta0) || !in_unit_interval(delta1)) throw ValidationError("delta0, delta1 must lie in [0, 1]");
  if (!std::isfinite(d_probe) || d_probe < 0.0) throw ValidationError("D_probe must be finite and >= 0");
}

double eta_lambda(double eta, double delta0, double delta1) {
  if (!(eta >= 0.0)) throw ValidationError("eta must be nonnegative");
  return 2.0 * delta0 + std::sqrt(eta + 4.0 * std::sqrt(eta) * delta1 + 4.0 * delta1 * delta1);
}

double eta_condition_slack(const SecurityInputs& si, double eta) {
  const double d = si.delta();
  return aleph(eta_lambda(eta, si.delta0, si.delta1), si.f01) - 2.0 * std::sqrt(1.0 - si.f01) * d - d * d -
         si.f_meas;
}

bool eta_condition_holds(const SecurityInputs& si, double eta) {
  return eta_condition_slack(si, eta) >= -kEtaBoundaryTolerance;
}

EtaSolution eta_solver(const SecurityInputs& si, double tolerance) {
  si.validate();
  if (!(tolerance > 0.0)) throw ValidationError("bisection tolerance must be positive");
  if (!eta_condition_holds(si, 0.0)) return {0.0, true};
  // lambda(1) >= 1 drives aleph below -1, so eta = 1 always fails.
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (eta_condition_holds(si, mid) ? lo : hi) = mid;
  }
  return {lo, false};
}

double min_entropy_bound(const BlockParameters& block, double d_probe, std::span<const double> eta,
                         double delta_smooth, EtaSign sign, LogUnit unit) {
  block.validate();
  if (eta.empty()) throw ValidationError("eta list is empty");
  if (!std::isfinite(d_probe) || d_probe < 0.0) throw ValidationError("D_probe must be finite and >= 0");
  double avg = 0.0;
  for (double e : eta) {
    if (!(e >= 0.0 && e < 1.0)) throw ValidationError("eta must lie in [0, 1)");
    avg += log_in(1.0 - e, unit);
  }
  avg /= static_cast<double>(eta.size());
  const double s = sign == EtaSign::proof ? 1.0 : -1.0;
  const double log_mx = log_in(block.m_x, unit);
  const double fs = finite_size_term(log_mx, block.ell, delta_smooth, unit);
  return block.ell * (log_mx - d_probe - s * avg) - block.ell * fs;
}

double min_entropy_bound(const BlockParameters& block, double d_probe, double eta, double delta_smooth,
                         EtaSign sign, LogUnit unit) {
  const double one[] = {eta};
  return min_entropy_bound(block, d_probe, std::span<const double>(one), delta_smooth, sign, unit);
}

void NoGoInputs::validate() const {
  auto half_open = [](double x) { return x >= 0.0 && x < 1.0; };
  if (!half_open(epsilon) || !half_open(delta) || !half_open(mu))
    throw ValidationError("epsilon, delta, mu must lie in [0, 1)");
  if (!(log_dim_c >= 0.0) || !std::isfinite(log_dim_c)) throw ValidationError("log dim C must be finite and >= 0");
}

NoGoBound nogo_max_key(const NoGoInputs& in, LogUnit unit) {
  in.validate();
  const double r = std::sqrt(in.mu);
  if (in.epsilon + r > 1.0) {
    // H_b(eps + sqrt(mu)) is undefined; this only happens when the
    // denominator is already negative.
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, true, inf, 1.0 - 5.0 * r - in.epsilon - 2.0 * in.delta};
  }
  NoGoBound out;
  out.rhs = 2.0 * in.delta * in.log_dim_c + binary_entropy_in(r, unit) + binary_entropy_in(in.epsilon + r, unit) +
            2.0 * (1.0 + r) * binary_entropy_in(r / (1.0 + r), unit);
  out.denominator = 1.0 - 5.0 * r - in.epsilon - 2.0 * in.delta;
  if (out.denominator <= 0.0) {
    out.unbounded = true;
    out.max_key = std::numeric_limits<double>::infinity();
  } else {
    out.max_key = out.rhs / out.denominator;
  }
  return out;
}

}  // namespace covq
