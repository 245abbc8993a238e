#include "covq/infotheory.hpp"

#include <cmath>
#include <limits>

namespace covq {

double convert_log_unit(double value, LogUnit from, LogUnit to) {
  if (from == to) return value;
  return from == LogUnit::bits ? value * std::log(2.0) : value / std::log(2.0);
}

double von_neumann_entropy(const State& rho, LogUnit unit) {
  const HermitianSpectrum s = psd_spectrum(rho.matrix());
  double h = 0.0;
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    const double l = s.values(i);
    if (l > 0.0) h -= l * log_in(l, unit);
  }
  return std::max(h, 0.0);
}

namespace {

void require_same_shape(const State& a, const State& b) {
  if (a.dims() != b.dims()) throw DimensionError("states live on different mode structures");
}

// Support rule: every eigenvector of rho with weight above the threshold must
// see sigma-expectation above the floor.
bool support_contained(const HermitianSpectrum& rho, const MatrixXc& sigma) {
  for (Eigen::Index i = 0; i < rho.values.size(); ++i) {
    if (rho.values(i) <= kSupportThreshold) continue;
    const auto u = rho.vectors.col(i);
    const double expectation = (u.adjoint() * sigma * u)(0, 0).real();
    if (!(expectation > kSpectralFloor)) return false;
  }
  return true;
}

}  // namespace

DivergenceValue relative_entropy(const State& rho, const State& sigma, LogUnit unit) {
  require_same_shape(rho, sigma);
  const HermitianSpectrum r = psd_spectrum(rho.matrix());
  if (!support_contained(r, sigma.matrix()))
    return {std::numeric_limits<double>::infinity(), 0, true};
  const HermitianSpectrum s = psd_spectrum(sigma.matrix());

  DivergenceValue out;
  Eigen::VectorXd log_sigma(s.values.size());
  for (Eigen::Index j = 0; j < s.values.size(); ++j) {
    double m = s.values(j);
    if (m < kSpectralFloor) {
      m = kSpectralFloor;
      ++out.floor_clips;
    }
    log_sigma(j) = log_in(m, unit);
  }
  // |<u_i|v_j>|^2 couples the two eigenbases.
  const Eigen::MatrixXd overlap = (r.vectors.adjoint() * s.vectors).cwiseAbs2();
  double d = 0.0;
  for (Eigen::Index i = 0; i < r.values.size(); ++i) {
    const double l = r.values(i);
    if (l <= 0.0) continue;
    d += l * (log_in(l, unit) - overlap.row(i).dot(log_sigma));
  }
  out.value = d;
  return out;
}

DivergenceValue chi2_divergence(const State& rho, const State& sigma) {
  require_same_shape(rho, sigma);
  const HermitianSpectrum r = psd_spectrum(rho.matrix());
  if (!support_contained(r, sigma.matrix()))
    return {std::numeric_limits<double>::infinity(), 0, true};
  const HermitianSpectrum s = psd_spectrum(sigma.matrix());
  const MatrixXc rho2 = rho.matrix() * rho.matrix();

  DivergenceValue out;
  double t = 0.0;
  for (Eigen::Index j = 0; j < s.values.size(); ++j) {
    const double m = s.values(j);
    if (m < kSpectralFloor) {
      ++out.floor_clips;
      continue;
    }
    const auto v = s.vectors.col(j);
    t += (v.adjoint() * rho2 * v)(0, 0).real() / m;
  }
  out.value = t - 1.0;
  return out;
}

double c_distance(const State& rho, const State& sigma) { return std::sqrt(std::max(0.0, 1.0 - fidelity(rho, sigma))); }

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("binary entropy argument must lie in [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double finite_size_term(double alphabet_log, double ell, double epsilon, LogUnit unit) {
  if (!(ell >= 1.0)) throw ValidationError("block count must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("smoothing parameter must lie in (0, 1)");
  if (!(alphabet_log >= 0.0)) throw ValidationError("alphabet size in bits must be nonnegative");
  return (2.0 * alphabet_log + 3.0) * std::sqrt((log_in(1.0 / epsilon, unit) + 1.0) / ell);
}

double aleph(double x, double y) {
  if (!(y > 0.0 && y <= 1.0)) throw ValidationError("aleph needs a fidelity argument in (0, 1]");
  if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("aleph needs x >= 0");
  const double g = (2.0 * std::sqrt(1.0 - y) * x + x * x) / y;
  return 1.0 - g - 2.0 * std::sqrt(g) * x - x * x;
}

}  // namespace covq
