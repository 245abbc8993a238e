#pragma once

// Truncated Fock-space state algebra: kets, density operators, thermal and
// displaced states, tensor products, partial traces, and the lossy-thermal
// (beam-splitter) channel.
//
// Mode ordering: for a multi-mode operator, mode 0 is the most significant
// digit of the basis index, matching Eigen::kroneckerProduct(A, B).

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "covq/errors.hpp"

namespace covq {

using Complex = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXc = Matrix<Complex>;
using VectorXc = Vector<Complex>;

inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-8;
inline constexpr double kNegativeEigenvalueTolerance = 1e-9;

// How much probability mass a truncation may discard before the operation
// refuses. The deficit is always recorded on the result.
struct TruncationPolicy {
  double ket_tolerance = 1e-6;
  double thermal_tolerance = 1e-8;
  bool allow_truncation = false;

  static TruncationPolicy permissive() {
    TruncationPolicy p;
    p.allow_truncation = true;
    return p;
  }
};

namespace detail {

inline std::size_t product(const std::vector<int>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         [](std::size_t acc, int d) { return acc * static_cast<std::size_t>(d); });
}

inline double combine_deficits(double a, double b) { return 1.0 - (1.0 - a) * (1.0 - b); }

}  // namespace detail

// Pure state on a product of truncated modes. Always normalized; the mass
// removed by truncation before normalization is kept in truncation_deficit().
class Ket {
 public:
  Ket(VectorXc amplitudes, std::vector<int> dims, double truncation_deficit);

  // Normalizes raw (possibly truncated) amplitudes, recording 1 - |raw|^2.
  static Ket from_truncated(VectorXc raw, std::vector<int> dims);

  const VectorXc& amplitudes() const noexcept { return amplitudes_; }
  const std::vector<int>& dims() const noexcept { return dims_; }
  int mode_count() const noexcept { return static_cast<int>(dims_.size()); }
  Eigen::Index dimension() const noexcept { return amplitudes_.size(); }
  int cutoff() const;
  double truncation_deficit() const noexcept { return truncation_deficit_; }

 private:
  VectorXc amplitudes_;
  std::vector<int> dims_;
  double truncation_deficit_;
};

// Hermitian, positive semidefinite, unit-trace matrix over a tensor product
// of truncated Fock spaces.
template <typename Scalar = Complex>
class DensityOperator {
 public:
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using MatrixType = Matrix<Scalar>;

  DensityOperator(MatrixType matrix, std::vector<int> dims, double truncation_deficit = 0.0)
      : matrix_(std::move(matrix)), dims_(std::move(dims)), truncation_deficit_(truncation_deficit) {
    if (matrix_.rows() != matrix_.cols()) throw DimensionError("density operator must be square");
    if (dims_.empty() || static_cast<Eigen::Index>(detail::product(dims_)) != matrix_.rows())
      throw DimensionError("mode dimensions do not match matrix size");
    if (truncation_deficit_ < 0.0) throw ValidationError("truncation deficit must be nonnegative");
    check_hermitian_and_trace();
  }

  const MatrixType& matrix() const noexcept { return matrix_; }
  const std::vector<int>& dims() const noexcept { return dims_; }
  int mode_count() const noexcept { return static_cast<int>(dims_.size()); }
  Eigen::Index dimension() const noexcept { return matrix_.rows(); }
  double truncation_deficit() const noexcept { return truncation_deficit_; }

  int cutoff() const {
    if (dims_.size() != 1) throw DimensionError("cutoff() is defined for single-mode states only");
    return dims_.front();
  }

 private:
  void check_hermitian_and_trace() const {
    using std::abs;
    const Real herm = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > Real(kHermitianTolerance)) throw InvariantError("density operator is not Hermitian");
    const Real tr_err = abs(matrix_.trace() - Scalar(1));
    if (tr_err > Real(kTraceTolerance)) throw InvariantError("density operator trace differs from 1");
  }

  MatrixType matrix_;
  std::vector<int> dims_;
  double truncation_deficit_;
};

using State = DensityOperator<Complex>;

State pure_state(const Ket& ket);

Ket fock_ket(int n, int cutoff);
inline Ket vacuum_ket(int cutoff) { return fock_ket(0, cutoff); }

// |alpha> truncated to `cutoff` levels. Refuses when the discarded Poisson
// tail exceeds policy.ket_tolerance unless truncation is allowed.
Ket coherent_ket(Complex alpha, int cutoff, const TruncationPolicy& policy = {});

Ket tensor(const Ket& a, const Ket& b);
Ket tensor(std::span<const Ket> factors);

// Probability mass of Poisson(mean) at or above `cutoff`.
double poisson_tail(double mean, int cutoff);

// Smallest cutoff d with geometric tail (nbar/(1+nbar))^d below `tail`.
int thermal_cutoff_for_tail(double nbar, double tail = 1e-8);

// Annihilation operator a on `cutoff` levels: a|n> = sqrt(n)|n-1>.
template <typename Scalar = Complex>
Matrix<Scalar> annihilation(int cutoff) {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using std::sqrt;
  if (cutoff < 1) throw ValidationError("cutoff must be at least 1");
  Matrix<Scalar> a = Matrix<Scalar>::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) a(n - 1, n) = Scalar(sqrt(Real(n)));
  return a;
}

// Geometric photon-number distribution with mean nbar, renormalized on
// `cutoff` levels. Weight (nbar/(1+nbar))^cutoff beyond the cutoff is the
// recorded deficit.
template <typename Scalar = Complex>
DensityOperator<Scalar> thermal_state(const typename Eigen::NumTraits<Scalar>::Real& nbar, int cutoff,
                                      const TruncationPolicy& policy = {}) {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using std::pow;
  if (cutoff < 1) throw ValidationError("cutoff must be at least 1");
  if (!(nbar >= Real(0))) throw ValidationError("mean photon number must be nonnegative");
  const Real ratio = nbar / (Real(1) + nbar);
  const Real tail = pow(ratio, cutoff);
  const double deficit = static_cast<double>(tail);
  if (deficit > policy.thermal_tolerance && !policy.allow_truncation)
    throw CutoffError("thermal state tail mass " + std::to_string(deficit) + " exceeds tolerance at cutoff " +
                          std::to_string(cutoff),
                      deficit);
  Vector<Real> weights(cutoff);
  Real term(1);
  for (int n = 0; n < cutoff; ++n) {
    weights(n) = term;
    term *= ratio;
  }
  weights /= weights.sum();
  Matrix<Scalar> m = Matrix<Scalar>::Zero(cutoff, cutoff);
  for (int n = 0; n < cutoff; ++n) m(n, n) = Scalar(weights(n));
  return DensityOperator<Scalar>(std::move(m), {cutoff}, deficit);
}

// Truncated displacement exp(beta a^dag - conj(beta) a), computed from the
// spectral decomposition of the Hermitian generator i(beta a^dag - conj(beta) a).
MatrixXc displacement_operator(Complex beta, int cutoff);

// Same operator for real beta on an arbitrary real scalar (used with
// multiprecision types). The generator is tridiagonal, so the Taylor series
// is accumulated with O(cutoff^2) work per term.
template <typename Real>
Matrix<Real> displacement_operator_real(const Real& beta, int cutoff) {
  using std::abs;
  using std::sqrt;
  if (cutoff < 1) throw ValidationError("cutoff must be at least 1");
  Vector<Real> coupling(cutoff);
  coupling(0) = Real(0);
  for (int n = 1; n < cutoff; ++n) coupling(n) = beta * sqrt(Real(n));

  Matrix<Real> sum = Matrix<Real>::Identity(cutoff, cutoff);
  Matrix<Real> term = sum;
  Matrix<Real> next(cutoff, cutoff);
  const Real generator_norm = Real(2) * abs(beta) * sqrt(Real(cutoff));
  const Real eps = Eigen::NumTraits<Real>::epsilon();
  next.setZero();
  for (int k = 1;; ++k) {
    // next = G * term / k with G(n, n-1) = coupling(n), G(n-1, n) = -coupling(n).
    // G^k has bandwidth k, so only the band |r - c| <= k is touched.
    const Real inv_k = Real(1) / Real(k);
    for (int c = 0; c < cutoff; ++c) {
      const int r_lo = std::max(0, c - k);
      const int r_hi = std::min(cutoff - 1, c + k);
      for (int r = r_lo; r <= r_hi; ++r) {
        Real v(0);
        if (r > 0) v += coupling(r) * term(r - 1, c);
        if (r + 1 < cutoff) v -= coupling(r + 1) * term(r + 1, c);
        next(r, c) = v * inv_k;
      }
    }
    term.swap(next);
    sum += term;
    if (Real(k) > generator_norm + Real(1) && term.cwiseAbs().maxCoeff() < eps) break;
    if (k > 100000) throw ConvergenceError("displacement Taylor series did not converge");
  }
  return sum;
}

// D(beta) thermal(nbar) D(beta)^dag on `cutoff` levels.
State displaced_thermal(Complex beta, double nbar, int cutoff, const TruncationPolicy& policy = {});

// Parameters of a displaced thermal state; closed under lossy-thermal maps.
struct DisplacedThermalParams {
  Complex beta{0.0, 0.0};
  double nbar = 0.0;
};

template <typename Scalar>
DensityOperator<Scalar> tensor(std::span<const DensityOperator<Scalar>> factors) {
  if (factors.empty()) throw DimensionError("tensor product of zero factors");
  Matrix<Scalar> m = factors.front().matrix();
  std::vector<int> dims = factors.front().dims();
  double deficit = factors.front().truncation_deficit();
  for (std::size_t i = 1; i < factors.size(); ++i) {
    m = Eigen::kroneckerProduct(m, factors[i].matrix()).eval();
    dims.insert(dims.end(), factors[i].dims().begin(), factors[i].dims().end());
    deficit = detail::combine_deficits(deficit, factors[i].truncation_deficit());
  }
  return DensityOperator<Scalar>(std::move(m), std::move(dims), deficit);
}

template <typename Scalar>
DensityOperator<Scalar> tensor(const DensityOperator<Scalar>& a, const DensityOperator<Scalar>& b) {
  const DensityOperator<Scalar> pair[] = {a, b};
  return tensor<Scalar>(std::span<const DensityOperator<Scalar>>(pair));
}

template <typename Scalar>
DensityOperator<Scalar> tensor_power(const DensityOperator<Scalar>& a, int copies) {
  if (copies < 1) throw ValidationError("tensor power needs at least one copy");
  std::vector<DensityOperator<Scalar>> f(static_cast<std::size_t>(copies), a);
  return tensor<Scalar>(std::span<const DensityOperator<Scalar>>(f));
}

// Reduced state on the modes listed in `keep` (any order; output keeps the
// original mode order).
template <typename Scalar>
DensityOperator<Scalar> partial_trace(const DensityOperator<Scalar>& rho, std::vector<int> keep) {
  const auto& dims = rho.dims();
  const int modes = rho.mode_count();
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.empty()) throw DimensionError("partial trace must keep at least one mode");
  for (int k : keep)
    if (k < 0 || k >= modes) throw DimensionError("partial trace mode index out of range");

  std::vector<bool> kept(static_cast<std::size_t>(modes), false);
  for (int k : keep) kept[static_cast<std::size_t>(k)] = true;
  std::vector<int> keep_dims, trace_dims;
  for (int i = 0; i < modes; ++i) (kept[static_cast<std::size_t>(i)] ? keep_dims : trace_dims).push_back(dims[static_cast<std::size_t>(i)]);
  const auto keep_size = static_cast<Eigen::Index>(detail::product(keep_dims));
  const auto trace_size = static_cast<Eigen::Index>(detail::product(trace_dims));

  // Row of `groups` t lists the full indices with traced digits t, ordered by kept index.
  std::vector<Eigen::Index> groups(static_cast<std::size_t>(keep_size * trace_size));
  const Eigen::Index full = rho.dimension();
  for (Eigen::Index idx = 0; idx < full; ++idx) {
    Eigen::Index rem = idx, k_idx = 0, t_idx = 0, k_mul = 1, t_mul = 1;
    for (int i = modes - 1; i >= 0; --i) {
      const int d = dims[static_cast<std::size_t>(i)];
      const Eigen::Index digit = rem % d;
      rem /= d;
      if (kept[static_cast<std::size_t>(i)]) {
        k_idx += digit * k_mul;
        k_mul *= d;
      } else {
        t_idx += digit * t_mul;
        t_mul *= d;
      }
    }
    groups[static_cast<std::size_t>(t_idx * keep_size + k_idx)] = idx;
  }

  Matrix<Scalar> out = Matrix<Scalar>::Zero(keep_size, keep_size);
  const auto& m = rho.matrix();
  for (Eigen::Index t = 0; t < trace_size; ++t) {
    const Eigen::Index* g = &groups[static_cast<std::size_t>(t * keep_size)];
    for (Eigen::Index c = 0; c < keep_size; ++c)
      for (Eigen::Index r = 0; r < keep_size; ++r) out(r, c) += m(g[r], g[c]);
  }
  return DensityOperator<Scalar>(std::move(out), std::move(keep_dims), rho.truncation_deficit());
}

// Eigendecomposition of a Hermitian matrix that should be PSD. Eigenvalues
// in [-negative_tolerance, 0) are clipped to 0 and counted; anything more
// negative throws InvariantError.
struct HermitianSpectrum {
  Eigen::VectorXd values;
  MatrixXc vectors;
  int clipped = 0;
};
HermitianSpectrum psd_spectrum(const MatrixXc& m, double negative_tolerance = kNegativeEigenvalueTolerance);

// Eigenvalues at rounding-noise level (dim * eps * largest) count as zero.
MatrixXc psd_sqrt(const MatrixXc& m);

// Schatten 1-norm of a Hermitian matrix.
double trace_norm(const MatrixXc& hermitian);

// Full one-norm ||rho - sigma||_1 (ranges over [0, 2]).
double trace_distance(const State& rho, const State& sigma);

// F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1^2, clamped to [0, 1].
double fidelity(const State& rho, const State& sigma);

// Throws InvariantError when the spectrum is below -1e-9 anywhere.
void validate_spectrum(const State& rho);

// Unitary re-floor: clip tiny negative eigenvalues, renormalize the trace.
State refloor(const MatrixXc& m, std::vector<int> dims, double deficit);

using SingleModeChannel = std::function<State(const State&)>;

// Beam-splitter coupling of the signal to a thermal environment:
// tau = cos^2(theta), unitary exp(theta (a^dag b - a b^dag)), environment in
// thermal(nbar) on env_cutoff levels, environment traced out afterwards.
struct LossyThermalChannel {
  double transmissivity = 1.0;
  double nbar = 0.0;
  int cutoff = 1;
  int env_cutoff = 1;

  // Environment cutoff from the geometric quantile (tail below env_tail).
  static LossyThermalChannel with_auto_env(double transmissivity, double nbar, int cutoff,
                                           double env_tail = 1e-8);
  void validate() const;
};

// Two-mode unitary on signal (x) environment, basis index n_a * env_cutoff + n_b.
// The generator is truncated to the two-mode space before exponentiation.
MatrixXc beam_splitter_unitary(double transmissivity, int cutoff, int env_cutoff);

// Dilation of the channel on a single-mode input. Each photon-number block
// of the beam splitter is exponentiated in full, so the environment output is
// never truncated. Combined deficit is input deficit, environment tail, and
// output signal mass pushed above the cutoff; above policy.ket_tolerance it
// throws unless allowed.
State apply_lossy_thermal(const LossyThermalChannel& channel, const State& rho,
                          const TruncationPolicy& policy = {});

// Image of D(beta)thermal(N)D(beta)^dag under the same channel, in closed
// form: beta -> sqrt(tau) beta, N -> tau N + (1 - tau) nbar.
DisplacedThermalParams through_lossy_thermal(double transmissivity, double nbar_env,
                                             const DisplacedThermalParams& input);

}  // namespace covq
