#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

#include "covq/errors.hpp"
#include "covq/fock.hpp"
#include "covq/oracle.hpp"

using namespace covq;
using testing::max_abs_diff;

TEST_CASE("coherent ket amplitudes and truncation") {
  const Ket vac = coherent_ket(Complex(0.0), 7);
  CHECK(vac.truncation_deficit() == 0.0);
  CHECK(std::abs(vac.amplitudes()(0) - 1.0) < 1e-15);
  CHECK(vac.amplitudes().tail(6).norm() == 0.0);

  // pre-normalization amplitude e^{-|alpha|^2/2}
  const Ket k = coherent_ket(Complex(0.6, 0.0), 30);
  const double raw0 = k.amplitudes()(0).real() * std::sqrt(1.0 - k.truncation_deficit());
  CHECK(std::abs(raw0 - 0.83527021141127202) < 1e-12);
  CHECK(std::abs(k.amplitudes().squaredNorm() - 1.0) < 1e-12);

  CHECK_THROWS_AS(coherent_ket(Complex(0.6, 0.0), 2), CutoffError);
  const Ket loose = coherent_ket(Complex(0.6, 0.0), 2, TruncationPolicy::permissive());
  CHECK(std::abs(loose.truncation_deficit() - 0.051160196543397762) < 1e-12);
}

TEST_CASE("truncation deficit shrinks as the cutoff grows") {
  double prev = 1.0;
  for (int d = 2; d <= 20; ++d) {
    const double def = coherent_ket(Complex(1.5, 0.4), d, TruncationPolicy::permissive()).truncation_deficit();
    CHECK(def < prev);
    prev = def;
  }
  prev = 1.0;
  for (int d = 2; d <= 40; d += 2) {
    const double def = thermal_state(2.0, d, TruncationPolicy::permissive()).truncation_deficit();
    CHECK(def < prev);
    prev = def;
  }
}

TEST_CASE("thermal states") {
  const State zero = thermal_state(0.0, 5);
  CHECK(max_abs_diff(zero.matrix(), pure_state(vacuum_ket(5)).matrix()) == 0.0);

  const State half = thermal_state(1.0, 60);
  for (int n = 0; n < 60; ++n) CHECK(std::abs(half.matrix()(n, n).real() - std::pow(0.5, n + 1)) < 1e-15);

  const State big = thermal_state(11.0, 230);
  CHECK(big.truncation_deficit() < 1e-8);
  CHECK(std::abs(big.truncation_deficit() - 2.0353120106559424e-9) < 1e-20);
  CHECK_THROWS_AS(thermal_state(11.0, 200), CutoffError);
}

TEST_CASE("displaced thermal limits") {
  const State a = displaced_thermal(Complex(0.0), 0.4, 40);
  CHECK(max_abs_diff(a.matrix(), thermal_state(0.4, 40).matrix()) < 1e-14);

  const State b = displaced_thermal(Complex(0.7, -0.2), 0.0, 30);
  CHECK(max_abs_diff(b.matrix(), pure_state(coherent_ket(Complex(0.7, -0.2), 30)).matrix()) < 1e-8);
}

TEST_CASE("displacement operator is unitary and matches the real-arithmetic series") {
  const MatrixXc d = displacement_operator(Complex(0.8, 0.0), 25);
  CHECK(max_abs_diff(d * d.adjoint(), MatrixXc::Identity(25, 25)) < 1e-12);
  const Eigen::MatrixXd r = displacement_operator_real(0.8, 25);
  CHECK(max_abs_diff(d, r.cast<Complex>()) < 1e-12);
}

TEST_CASE("trace distance and fidelity basics") {
  std::mt19937_64 rng = trial_rng(11, 0);
  const State rho = random_mixed_state(4, rng);
  CHECK(std::abs(fidelity(rho, rho) - 1.0) < 1e-10);
  CHECK(trace_distance(rho, rho) < 1e-12);

  const State e0 = pure_state(fock_ket(0, 3));
  const State e2 = pure_state(fock_ket(2, 3));
  CHECK(std::abs(trace_distance(e0, e2) - 2.0) < 1e-12);
  CHECK(fidelity(e0, e2) < 1e-12);

  CHECK_THROWS_AS(trace_distance(rho, e0), DimensionError);
}

TEST_CASE("pure states: trace distance from the overlap") {
  for (int t = 0; t < 50; ++t) {
    std::mt19937_64 rng = trial_rng(12, t);
    const int dim = 2 + t % 5;
    const VectorXc u = random_unit_vector(dim, rng);
    const VectorXc v = random_unit_vector(dim, rng);
    const double overlap = std::norm(u.dot(v));
    const State a(u * u.adjoint(), {dim});
    const State b(v * v.adjoint(), {dim});
    CHECK(std::abs(trace_distance(a, b) - 2.0 * std::sqrt(1.0 - overlap)) < 1e-8);
    CHECK(std::abs(fidelity(a, b) - overlap) < 1e-8);
  }
}

TEST_CASE("fidelity is symmetric, bounded, and multiplicative") {
  for (int t = 0; t < 20; ++t) {
    std::mt19937_64 rng = trial_rng(13, t);
    const State r1 = random_mixed_state(2, rng), s1 = random_mixed_state(2, rng);
    const State r2 = random_mixed_state(3, rng), s2 = random_mixed_state(3, rng);
    const double f = fidelity(r1, s1);
    CHECK(f >= -1e-9);
    CHECK(f <= 1.0 + 1e-9);
    CHECK(std::abs(f - fidelity(s1, r1)) < 1e-9);
    CHECK(std::abs(fidelity(tensor(r1, r2), tensor(s1, s2)) - f * fidelity(r2, s2)) < 1e-8);
  }
}

TEST_CASE("partial trace undoes a tensor product") {
  std::mt19937_64 rng = trial_rng(14, 0);
  const State a = random_mixed_state(3, rng);
  const State b = random_mixed_state(2, rng);
  const State c = random_mixed_state(2, rng);
  const State ab = tensor(a, b);
  CHECK(max_abs_diff(partial_trace(ab, {0}).matrix(), a.matrix()) < 1e-12);
  CHECK(max_abs_diff(partial_trace(ab, {1}).matrix(), b.matrix()) < 1e-12);
  const State abc = tensor(ab, c);
  CHECK(max_abs_diff(partial_trace(abc, {0, 2}).matrix(), tensor(a, c).matrix()) < 1e-12);
}

TEST_CASE("density operator invariants are enforced") {
  MatrixXc m = MatrixXc::Zero(2, 2);
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  m(0, 1) = 0.1;
  CHECK_THROWS_AS(State(m, {2}), InvariantError);
  m(0, 1) = 0.0;
  m(1, 1) = 0.6;
  CHECK_THROWS_AS(State(m, {2}), InvariantError);
  CHECK_THROWS_AS(State(MatrixXc::Identity(2, 2) * 0.5, {3}), DimensionError);

  MatrixXc neg = MatrixXc::Zero(2, 2);
  neg(0, 0) = 1.0 + 1e-3;
  neg(1, 1) = -1e-3;
  CHECK_THROWS_AS(validate_spectrum(State(neg, {2})), InvariantError);
  const HermitianSpectrum sp = psd_spectrum(MatrixXc(Eigen::Vector2cd(Complex(1.0 + 1e-10), Complex(-1e-10)).asDiagonal()));
  CHECK(sp.clipped == 1);
  CHECK(sp.values.minCoeff() == 0.0);
}

TEST_CASE("beam splitter unitary") {
  const int d = 8, de = 6;
  const MatrixXc u = beam_splitter_unitary(0.7, d, de);
  // columns with at most (d + de) / 2 photons in total
  std::vector<int> cols;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < de; ++b)
      if (a + b <= (d + de) / 2) cols.push_back(a * de + b);
  MatrixXc sub(u.rows(), static_cast<int>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) sub.col(static_cast<int>(i)) = u.col(cols[i]);
  CHECK(max_abs_diff(sub.adjoint() * sub, MatrixXc::Identity(sub.cols(), sub.cols())) < 1e-8);

  CHECK(max_abs_diff(beam_splitter_unitary(1.0, d, de), MatrixXc::Identity(d * de, d * de)) < 1e-14);
}

TEST_CASE("lossy thermal channel limits") {
  std::mt19937_64 rng = trial_rng(15, 0);
  const State rho = random_mixed_state(5, rng);
  const auto id = LossyThermalChannel::with_auto_env(1.0, 0.3, 5);
  CHECK(max_abs_diff(apply_lossy_thermal(id, rho).matrix(), rho.matrix()) < 1e-10);

  // full replacement by the environment
  const int d = 14;
  const State coh = pure_state(coherent_ket(Complex(0.5, 0.0), d));
  const auto swap = LossyThermalChannel::with_auto_env(0.0, 0.2, d);
  CHECK(max_abs_diff(apply_lossy_thermal(swap, coh).matrix(), thermal_state(0.2, d).matrix()) < 1e-8);

  // pure loss keeps coherent states coherent
  for (double alpha : {0.0, 0.9}) {
    const State in = pure_state(coherent_ket(Complex(alpha, 0.0), 20));
    const double tau = 0.6;
    const auto loss = LossyThermalChannel::with_auto_env(tau, 0.0, 20);
    const State out = apply_lossy_thermal(loss, in);
    const State expect = pure_state(coherent_ket(Complex(std::sqrt(tau) * alpha, 0.0), 20));
    CHECK(fidelity(out, expect) >= 1.0 - 1e-8);
  }
}

TEST_CASE("closed-form parameters agree with the dilation at small noise") {
  const double tau = 0.8, nbar = 0.3;
  const Complex alpha(0.7, 0.0);
  const int d = 24;
  const auto ch = LossyThermalChannel::with_auto_env(tau, nbar, d);
  const State dil = apply_lossy_thermal(ch, pure_state(coherent_ket(alpha, d)));
  const DisplacedThermalParams p = through_lossy_thermal(tau, nbar, {alpha, 0.0});
  CHECK(std::abs(p.beta - std::sqrt(tau) * alpha) < 1e-15);
  CHECK(std::abs(p.nbar - (1.0 - tau) * nbar) < 1e-15);
  CHECK(trace_distance(dil, displaced_thermal(p.beta, p.nbar, d)) < 1e-8);
}

TEST_CASE("dilation reproduces the displaced thermal probe output at the example parameters") {
  const double tau = 0.9994, nbar = 11.0;
  const Complex alpha(0.6, 0.0);
  const int d = 20;
  const auto ch = LossyThermalChannel::with_auto_env(tau, nbar, d);
  CHECK(ch.env_cutoff >= 200);
  const State dil = apply_lossy_thermal(ch, pure_state(coherent_ket(alpha, d)));
  const DisplacedThermalParams p = through_lossy_thermal(tau, nbar, {alpha, 0.0});
  CHECK(std::abs(std::abs(p.beta) - 0.59981997299189696) < 1e-14);
  CHECK(std::abs(p.nbar - 0.0066) < 1e-15);
  CHECK(trace_distance(dil, displaced_thermal(p.beta, p.nbar, d)) < 1e-6);

  const State idle = apply_lossy_thermal(ch, pure_state(vacuum_ket(d)));
  CHECK(trace_distance(idle, thermal_state(p.nbar, d)) < 1e-6);
}

TEST_CASE("channel validation") {
  LossyThermalChannel bad;
  bad.transmissivity = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  const auto ch = LossyThermalChannel::with_auto_env(0.5, 0.1, 4);
  CHECK_THROWS_AS(apply_lossy_thermal(ch, pure_state(vacuum_ket(6))), DimensionError);
}
