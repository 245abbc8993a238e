#pragma once

// High-precision chi-squared divergence between a thermal state and a
// displaced thermal state with the same mean photon number. This is the pair
// produced by a lossy-thermal probe acting on vacuum and on a coherent state.
//
// With sigma = thermal(N) = diag(p) and rho = D thermal(N) D^T (D real for
// real beta), both inverses are exact in the truncated space:
//   chi2(rho || sigma) = sum_{n,k} D_nk^2 p_k^2 / p_n - 1
//   chi2(sigma || rho) = sum_{n,k} p_n^2 D_nk^2 / p_k - 1
// Every summand is positive; the only precision hazard is the absolute error
// on the tiny off-diagonal entries of D, which is divided by p_n ~ x^n. D is
// therefore built in MPFR arithmetic sized to the cutoff.

#include <vector>

namespace covq {

struct Chi2Pair {
  double rho_given_sigma = 0.0;  // chi2(D thermal D^T || thermal)
  double sigma_given_rho = 0.0;  // chi2(thermal || D thermal D^T)
  int digits = 0;                // decimal digits of the arithmetic used
};

// Decimal digits needed at this cutoff, before rounding up to a tier.
int chi2_required_digits(double beta_abs, double nbar, int cutoff);

// Both orders at a single cutoff. Throws ConvergenceError when the required
// precision exceeds the largest supported tier (800 digits).
Chi2Pair chi2_thermal_displaced(double beta_abs, double nbar, int cutoff);

struct Chi2Row {
  int cutoff = 0;
  Chi2Pair value;
  double relative_change = 0.0;  // against the previous row; 0 for the first
};

struct Chi2ConvergenceOptions {
  int start_cutoff = 10;
  int step = 10;
  int max_cutoff = 300;
  double relative_tolerance = 1e-4;
};

struct Chi2Table {
  std::vector<Chi2Row> rows;
  bool converged = false;
  Chi2Pair value;  // last row
};

// Raises the cutoff until both orders change by less than the tolerance.
// On failure the partial table is returned with converged = false.
Chi2Table chi2_convergence_table(double beta_abs, double nbar, const Chi2ConvergenceOptions& options = {});

}  // namespace covq
