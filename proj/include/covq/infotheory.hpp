#pragma once

// Entropies, divergences and the closed-form scalar functions used by the
// covertness and security bounds. Entropic quantities are reported in bits
// unless a LogUnit says otherwise; chi-squared is base-free.

#include "covq/fock.hpp"

namespace covq {

enum class LogUnit { bits, nats };

inline double log_in(double x, LogUnit unit) { return unit == LogUnit::bits ? std::log2(x) : std::log(x); }

// Convert a quantity measured in `from` to `to`.
double convert_log_unit(double value, LogUnit from, LogUnit to);

// Eigenvalues of sigma below this are clipped (relative entropy) or dropped
// from the pseudo-inverse (chi-squared) and counted in floor_clips.
inline constexpr double kSpectralFloor = 1e-30;
// Eigenvalues of rho above this count as support.
inline constexpr double kSupportThreshold = 1e-12;

struct DivergenceValue {
  double value = 0.0;
  int floor_clips = 0;
  // supp(rho) is not contained in supp(sigma); value is +infinity.
  bool infinite = false;
};

double von_neumann_entropy(const State& rho, LogUnit unit = LogUnit::bits);

// tr rho (log rho - log sigma).
DivergenceValue relative_entropy(const State& rho, const State& sigma, LogUnit unit = LogUnit::bits);

// tr(rho^2 sigma^+) - 1 with a spectral pseudo-inverse. Double precision
// limits this to well-conditioned sigma; see probe_chi2.hpp for the
// thermal/displaced-thermal pair.
DivergenceValue chi2_divergence(const State& rho, const State& sigma);

// sqrt(1 - F(rho, sigma)).
double c_distance(const State& rho, const State& sigma);

double binary_entropy(double p);

// (2 alphabet_log + 3) sqrt((log(1/epsilon) + 1) / ell), logs in `unit`.
double finite_size_term(double alphabet_log, double ell, double epsilon, LogUnit unit = LogUnit::bits);

// aleph(x, y) = 1 - g - 2 sqrt(g) x - x^2 with g = (2 sqrt(1-y) x + x^2) / y.
double aleph(double x, double y);

}  // namespace covq
