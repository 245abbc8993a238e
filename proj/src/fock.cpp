#include "covq/fock.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace covq {

Ket::Ket(VectorXc amplitudes, std::vector<int> dims, double truncation_deficit)
    : amplitudes_(std::move(amplitudes)), dims_(std::move(dims)), truncation_deficit_(truncation_deficit) {
  if (dims_.empty() || static_cast<Eigen::Index>(detail::product(dims_)) != amplitudes_.size())
    throw DimensionError("ket mode dimensions do not match amplitude count");
  if (truncation_deficit_ < 0.0) throw ValidationError("truncation deficit must be nonnegative");
  if (std::abs(amplitudes_.squaredNorm() - 1.0) > 1e-12) throw InvariantError("ket is not normalized");
}

Ket Ket::from_truncated(VectorXc raw, std::vector<int> dims) {
  const double norm2 = raw.squaredNorm();
  if (!(norm2 > 0.0)) throw ValidationError("cannot normalize a zero vector");
  raw /= std::sqrt(norm2);
  return Ket(std::move(raw), std::move(dims), std::max(0.0, 1.0 - norm2));
}

int Ket::cutoff() const {
  if (dims_.size() != 1) throw DimensionError("cutoff() is defined for single-mode kets only");
  return dims_.front();
}

State pure_state(const Ket& ket) {
  MatrixXc m = ket.amplitudes() * ket.amplitudes().adjoint();
  return State(std::move(m), ket.dims(), ket.truncation_deficit());
}

Ket fock_ket(int n, int cutoff) {
  if (cutoff < 1) throw ValidationError("cutoff must be at least 1");
  if (n < 0 || n >= cutoff) throw ValidationError("Fock level outside the truncated space");
  VectorXc v = VectorXc::Zero(cutoff);
  v(n) = 1.0;
  return Ket(std::move(v), {cutoff}, 0.0);
}

double poisson_tail(double mean, int cutoff) {
  if (mean < 0.0) throw ValidationError("Poisson mean must be nonnegative");
  if (cutoff <= 0) return 1.0;
  if (mean == 0.0) return 0.0;
  // Sum upward from the cutoff in log space; terms decay once n > mean.
  double tail = 0.0;
  const double log_mean = std::log(mean);
  for (int n = cutoff; n < cutoff + 100000; ++n) {
    const double term = std::exp(n * log_mean - mean - std::lgamma(n + 1.0));
    tail += term;
    if (n > mean && term < 1e-18 * std::max(tail, 1e-300)) break;
  }
  return std::min(tail, 1.0);
}

int thermal_cutoff_for_tail(double nbar, double tail) {
  if (nbar < 0.0) throw ValidationError("mean photon number must be nonnegative");
  if (!(tail > 0.0 && tail < 1.0)) throw ValidationError("tail threshold must lie in (0, 1)");
  if (nbar == 0.0) return 1;
  const double ratio = nbar / (1.0 + nbar);
  int d = static_cast<int>(std::ceil(std::log(tail) / std::log(ratio)));
  d = std::max(d, 1);
  while (std::pow(ratio, d) >= tail) ++d;
  return d;
}

Ket coherent_ket(Complex alpha, int cutoff, const TruncationPolicy& policy) {
  if (cutoff < 1) throw ValidationError("cutoff must be at least 1");
  const double mean = std::norm(alpha);
  VectorXc raw(cutoff);
  Complex amp = std::exp(-mean / 2.0);
  for (int n = 0; n < cutoff; ++n) {
    raw(n) = amp;
    amp *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  // The tail is evaluated directly; 1 - |raw|^2 loses everything below 1e-16.
  const double deficit = poisson_tail(mean, cutoff);
  if (deficit > policy.ket_tolerance && !policy.allow_truncation)
    throw CutoffError("coherent state tail mass " + std::to_string(deficit) + " exceeds tolerance at cutoff " +
                          std::to_string(cutoff),
                      deficit);
  raw /= raw.norm();
  return Ket(std::move(raw), {cutoff}, deficit);
}

Ket tensor(const Ket& a, const Ket& b) {
  VectorXc v = Eigen::kroneckerProduct(a.amplitudes(), b.amplitudes()).eval();
  std::vector<int> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  v /= v.norm();
  return Ket(std::move(v), std::move(dims),
             detail::combine_deficits(a.truncation_deficit(), b.truncation_deficit()));
}

Ket tensor(std::span<const Ket> factors) {
  if (factors.empty()) throw DimensionError("tensor product of zero factors");
  Ket out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = tensor(out, factors[i]);
  return out;
}

MatrixXc displacement_operator(Complex beta, int cutoff) {
  const MatrixXc a = annihilation<Complex>(cutoff);
  const MatrixXc generator = beta * a.adjoint() - std::conj(beta) * a;
  MatrixXc hermitian = Complex(0.0, 1.0) * generator;
  hermitian = 0.5 * (hermitian + hermitian.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(hermitian);
  if (es.info() != Eigen::Success) throw ConvergenceError("displacement generator eigensolver failed");
  // exp(G) = exp(-i H) with H = i G.
  const VectorXc phases = (Complex(0.0, -1.0) * es.eigenvalues().cast<Complex>()).array().exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

State displaced_thermal(Complex beta, double nbar, int cutoff, const TruncationPolicy& policy) {
  const State thermal = thermal_state<Complex>(nbar, cutoff, TruncationPolicy::permissive());
  const double coherent_tail = poisson_tail(std::norm(beta), cutoff);
  const double deficit = detail::combine_deficits(thermal.truncation_deficit(), coherent_tail);
  if (!policy.allow_truncation &&
      (thermal.truncation_deficit() > policy.thermal_tolerance || coherent_tail > policy.ket_tolerance))
    throw CutoffError("displaced thermal state is not resolved at cutoff " + std::to_string(cutoff), deficit);
  const MatrixXc d = displacement_operator(beta, cutoff);
  MatrixXc m = d * thermal.matrix() * d.adjoint();
  m = 0.5 * (m + m.adjoint()).eval();
  m /= m.trace();
  return State(std::move(m), {cutoff}, deficit);
}

HermitianSpectrum psd_spectrum(const MatrixXc& m, double negative_tolerance) {
  const MatrixXc h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h);
  if (es.info() != Eigen::Success) throw ConvergenceError("Hermitian eigensolver failed");
  HermitianSpectrum out{es.eigenvalues(), es.eigenvectors(), 0};
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    double& v = out.values(i);
    if (v < -negative_tolerance)
      throw InvariantError("eigenvalue " + std::to_string(v) + " below the negative tolerance");
    if (v < 0.0) {
      v = 0.0;
      ++out.clipped;
    }
  }
  return out;
}

namespace {

// Square roots with eigenvalues at rounding-noise level (dim * eps * max)
// sent to zero; sqrt would otherwise amplify 1e-16 noise to 1e-8.
Eigen::VectorXd noise_floored_sqrt(const Eigen::VectorXd& values) {
  const double floor = static_cast<double>(values.size()) * std::numeric_limits<double>::epsilon() *
                       std::max(values.maxCoeff(), 0.0);
  return values.unaryExpr([floor](double v) { return v > floor ? std::sqrt(v) : 0.0; });
}

}  // namespace

MatrixXc psd_sqrt(const MatrixXc& m) {
  const HermitianSpectrum s = psd_spectrum(m);
  const Eigen::VectorXd roots = noise_floored_sqrt(s.values);
  return s.vectors * roots.cast<Complex>().asDiagonal() * s.vectors.adjoint();
}

double trace_norm(const MatrixXc& hermitian) {
  const MatrixXc h = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("Hermitian eigensolver failed");
  return es.eigenvalues().cwiseAbs().sum();
}

namespace {

void require_same_shape(const State& a, const State& b) {
  if (a.dims() != b.dims()) throw DimensionError("states live on different mode structures");
}

}  // namespace

double trace_distance(const State& rho, const State& sigma) {
  require_same_shape(rho, sigma);
  return trace_norm(rho.matrix() - sigma.matrix());
}

double fidelity(const State& rho, const State& sigma) {
  require_same_shape(rho, sigma);
  // Singular values of sqrt(rho) sqrt(sigma) stay on the scale of the
  // eigenvalues themselves, where sqrt(sqrt(rho) sigma sqrt(rho)) would square them first.
  const MatrixXc prod = psd_sqrt(rho.matrix()) * psd_sqrt(sigma.matrix());
  Eigen::BDCSVD<MatrixXc> svd(prod);
  if (svd.info() != Eigen::Success) throw ConvergenceError("singular value decomposition failed");
  const double root_fid = svd.singularValues().sum();
  return std::clamp(root_fid * root_fid, 0.0, 1.0);
}

void validate_spectrum(const State& rho) { (void)psd_spectrum(rho.matrix()); }

State refloor(const MatrixXc& m, std::vector<int> dims, double deficit) {
  const HermitianSpectrum s = psd_spectrum(m);
  MatrixXc out = s.vectors * s.values.cast<Complex>().asDiagonal() * s.vectors.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  out /= out.trace().real();
  return State(std::move(out), std::move(dims), deficit);
}

LossyThermalChannel LossyThermalChannel::with_auto_env(double transmissivity, double nbar, int cutoff,
                                                       double env_tail) {
  LossyThermalChannel ch{transmissivity, nbar, cutoff, thermal_cutoff_for_tail(nbar, env_tail)};
  ch.validate();
  return ch;
}

void LossyThermalChannel::validate() const {
  if (!std::isfinite(transmissivity) || transmissivity < 0.0 || transmissivity > 1.0)
    throw ValidationError("transmissivity must lie in [0, 1]");
  if (!std::isfinite(nbar) || nbar < 0.0) throw ValidationError("environment mean photon number must be >= 0");
  if (cutoff < 1 || env_cutoff < 1) throw ValidationError("channel cutoffs must be at least 1");
}

namespace {

// Beam-splitter block on the total-photon-number-N subspace. Basis: signal
// photons j from lo to hi, environment photons N - j. `unitary` holds the
// leading keep x keep corner (local indices) of the block.
struct PhotonBlock {
  int lo = 0;
  int hi = -1;
  Eigen::MatrixXd unitary;
};

// The generator G = theta (a^dag b - a b^dag) is real antisymmetric and
// tridiagonal with G(r+1, r) = c_r. With S = diag(i^r), S^-1 (iG) S is the
// real symmetric tridiagonal T with off-diagonal c_r, so
// exp(G) = S exp(-iT) S^-1 and exp(G)(r, s) = i^(r-s) sum_k Q_rk Q_sk e^(-i w_k).
PhotonBlock beam_splitter_block(double theta, int total, int lo, int hi, int keep) {
  PhotonBlock b{lo, hi, {}};
  const int size = hi - lo + 1;
  if (size <= 0) return b;
  keep = std::min(keep, size);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(size);
  Eigen::VectorXd off(std::max(size - 1, 0));
  for (int r = 0; r + 1 < size; ++r) {
    const int j = lo + r;
    off(r) = theta * std::sqrt(static_cast<double>(j + 1) * static_cast<double>(total - j));
  }
  if (size == 1) {
    b.unitary = Eigen::MatrixXd::Ones(1, 1);
    return b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw ConvergenceError("beam-splitter block eigensolver failed");
  const Eigen::MatrixXd q = es.eigenvectors().topRows(keep);
  const Eigen::VectorXd w = es.eigenvalues();
  const Eigen::MatrixXd re = q * w.array().cos().matrix().asDiagonal() * q.transpose();
  const Eigen::MatrixXd im = q * w.array().sin().matrix().asDiagonal() * q.transpose();
  // e^(-i w) = cos w - i sin w; multiply by i^(r-s) and keep the real part.
  b.unitary.resize(keep, keep);
  for (int s = 0; s < keep; ++s) {
    for (int r = 0; r < keep; ++r) {
      switch (((r - s) % 4 + 4) % 4) {
        case 0: b.unitary(r, s) = re(r, s); break;
        case 1: b.unitary(r, s) = im(r, s); break;
        case 2: b.unitary(r, s) = -re(r, s); break;
        default: b.unitary(r, s) = -im(r, s); break;
      }
    }
  }
  return b;
}

double mixing_angle(double transmissivity) { return std::acos(std::sqrt(transmissivity)); }

}  // namespace

MatrixXc beam_splitter_unitary(double transmissivity, int cutoff, int env_cutoff) {
  LossyThermalChannel{transmissivity, 0.0, cutoff, env_cutoff}.validate();
  const double theta = mixing_angle(transmissivity);
  const Eigen::Index dim = static_cast<Eigen::Index>(cutoff) * env_cutoff;
  MatrixXc u = MatrixXc::Zero(dim, dim);
  for (int total = 0; total <= cutoff + env_cutoff - 2; ++total) {
    const int lo = std::max(0, total - (env_cutoff - 1));
    const int hi = std::min(cutoff - 1, total);
    const PhotonBlock b = beam_splitter_block(theta, total, lo, hi, hi - lo + 1);
    for (int c = b.lo; c <= b.hi; ++c)
      for (int r = b.lo; r <= b.hi; ++r)
        u(static_cast<Eigen::Index>(r) * env_cutoff + (total - r), static_cast<Eigen::Index>(c) * env_cutoff + (total - c)) =
            b.unitary(r - b.lo, c - b.lo);
  }
  return u;
}

State apply_lossy_thermal(const LossyThermalChannel& channel, const State& rho, const TruncationPolicy& policy) {
  channel.validate();
  if (rho.mode_count() != 1 || rho.cutoff() != channel.cutoff)
    throw DimensionError("channel expects a single-mode state at its input cutoff");
  const int d = channel.cutoff;
  const int de = channel.env_cutoff;
  const State env = thermal_state<Complex>(channel.nbar, de, TruncationPolicy::permissive());
  const double theta = mixing_angle(channel.transmissivity);

  // |i> (x) |k> spans the whole photon-number block i + k; the environment
  // output is traced, so only signal levels j < d are kept. Blocks are not
  // truncated on the environment side.
  std::vector<PhotonBlock> blocks;
  blocks.reserve(static_cast<std::size_t>(d + de - 1));
  for (int total = 0; total <= d + de - 2; ++total) blocks.push_back(beam_splitter_block(theta, total, 0, total, d));

  MatrixXc out = MatrixXc::Zero(d, d);
  const MatrixXc& in = rho.matrix();
  for (int k = 0; k < de; ++k) {
    const double pk = env.matrix()(k, k).real();
    if (pk == 0.0) continue;
    for (int i = 0; i < d; ++i) {
      const Eigen::MatrixXd& ui = blocks[static_cast<std::size_t>(i + k)].unitary;
      for (int ip = 0; ip < d; ++ip) {
        const Complex rii = in(i, ip);
        if (rii == Complex(0.0)) continue;
        const Eigen::MatrixXd& uip = blocks[static_cast<std::size_t>(ip + k)].unitary;
        // Environment output i + k - j must equal ip + k - jp.
        const int j_hi = std::min(i + k, d - 1);
        for (int j = 0; j <= j_hi; ++j) {
          const int jp = j - i + ip;
          if (jp < 0 || jp > std::min(ip + k, d - 1)) continue;
          out(j, jp) += pk * rii * ui(j, i) * uip(jp, ip);
        }
      }
    }
  }
  const double lost = std::max(0.0, 1.0 - out.trace().real());
  const double deficit = detail::combine_deficits(
      detail::combine_deficits(rho.truncation_deficit(), env.truncation_deficit()), lost);
  if (deficit > policy.ket_tolerance && !policy.allow_truncation)
    throw CutoffError("lossy-thermal dilation deficit " + std::to_string(deficit) + " exceeds tolerance", deficit);
  return refloor(out, {d}, deficit);
}

DisplacedThermalParams through_lossy_thermal(double transmissivity, double nbar_env,
                                             const DisplacedThermalParams& input) {
  if (transmissivity < 0.0 || transmissivity > 1.0) throw ValidationError("transmissivity must lie in [0, 1]");
  if (nbar_env < 0.0 || input.nbar < 0.0) throw ValidationError("mean photon numbers must be >= 0");
  return {std::sqrt(transmissivity) * input.beta, transmissivity * input.nbar + (1.0 - transmissivity) * nbar_env};
}

}  // namespace covq
