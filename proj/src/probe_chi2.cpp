#include "covq/probe_chi2.hpp"

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "covq/errors.hpp"
#include "covq/fock.hpp"

namespace covq {

namespace {

// Fixed-precision types: the precision is part of the type, so concurrent
// evaluations never touch a shared default precision.
template <unsigned Digits>
using Mp = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<Digits, boost::multiprecision::allocate_stack>,
    boost::multiprecision::et_off>;

template <typename Real>
Chi2Pair evaluate(double beta_abs, double nbar, int cutoff, int digits) {
  const Real beta(beta_abs);
  const Real n(nbar);
  const Real x = n / (Real(1) + n);
  Vector<Real> p(cutoff);
  Real w(1);
  for (int i = 0; i < cutoff; ++i) {
    p(i) = w;
    w *= x;
  }
  p /= p.sum();

  const Matrix<Real> d = displacement_operator_real<Real>(beta, cutoff);
  Real forward(0), reverse(0);
  for (int r = 0; r < cutoff; ++r) {
    for (int c = 0; c < cutoff; ++c) {
      const Real d2 = d(r, c) * d(r, c);
      forward += d2 * p(c) * p(c) / p(r);
      reverse += d2 * p(r) * p(r) / p(c);
    }
  }
  return {static_cast<double>(forward - Real(1)), static_cast<double>(reverse - Real(1)), digits};
}

}  // namespace

int chi2_required_digits(double beta_abs, double nbar, int cutoff) {
  double scale = 0.0;
  if (nbar > 0.0) scale = 0.5 * cutoff * std::log10((1.0 + nbar) / nbar);
  const double growth = 2.0 * beta_abs * std::sqrt(static_cast<double>(cutoff)) * std::log10(std::exp(1.0));
  return static_cast<int>(std::ceil(scale + growth + 25.0));
}

Chi2Pair chi2_thermal_displaced(double beta_abs, double nbar, int cutoff) {
  if (cutoff < 1) throw ValidationError("cutoff must be at least 1");
  if (!(beta_abs >= 0.0) || !std::isfinite(beta_abs)) throw ValidationError("|beta| must be finite and >= 0");
  if (!(nbar > 0.0) || !std::isfinite(nbar))
    throw ValidationError("chi2 against a thermal state needs nbar > 0 (full support)");
  const int need = chi2_required_digits(beta_abs, nbar, cutoff);
  if (need <= 50) return evaluate<Mp<50>>(beta_abs, nbar, cutoff, 50);
  if (need <= 100) return evaluate<Mp<100>>(beta_abs, nbar, cutoff, 100);
  if (need <= 200) return evaluate<Mp<200>>(beta_abs, nbar, cutoff, 200);
  if (need <= 400) return evaluate<Mp<400>>(beta_abs, nbar, cutoff, 400);
  if (need <= 800) return evaluate<Mp<800>>(beta_abs, nbar, cutoff, 800);
  throw ConvergenceError("chi2 at cutoff " + std::to_string(cutoff) + " needs " + std::to_string(need) +
                         " digits, above the 800-digit tier");
}

Chi2Table chi2_convergence_table(double beta_abs, double nbar, const Chi2ConvergenceOptions& options) {
  if (options.start_cutoff < 1 || options.step < 1 || options.max_cutoff < options.start_cutoff)
    throw ValidationError("invalid cutoff schedule for the chi2 convergence table");
  if (!(options.relative_tolerance > 0.0)) throw ValidationError("relative tolerance must be positive");
  Chi2Table table;
  for (int d = options.start_cutoff; d <= options.max_cutoff; d += options.step) {
    Chi2Row row{d, chi2_thermal_displaced(beta_abs, nbar, d), 0.0};
    if (!table.rows.empty()) {
      const Chi2Pair& prev = table.rows.back().value;
      auto rel = [](double now, double before) {
        if (now == before) return 0.0;
        return std::abs(now - before) / std::max(std::abs(now), std::abs(before));
      };
      row.relative_change =
          std::max(rel(row.value.rho_given_sigma, prev.rho_given_sigma), rel(row.value.sigma_given_rho, prev.sigma_given_rho));
    }
    table.rows.push_back(row);
    table.value = row.value;
    if (table.rows.size() > 1 && row.relative_change < options.relative_tolerance) {
      table.converged = true;
      break;
    }
  }
  return table;
}

}  // namespace covq
