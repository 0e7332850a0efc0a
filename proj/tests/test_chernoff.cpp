#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "zzb/chernoff.hpp"
#include "zzb/parallel.hpp"

using namespace zzb;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Scenario random_scenario(std::size_t m, std::size_t n, std::size_t k, std::mt19937_64& rng) {
  Scenario s = make_ula_scenario(m, n, k, -60 * kDeg, 60 * kDeg, 1.5);
  std::normal_distribution<double> g;
  ComplexMatrix w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double re = g(rng);
    const double im = g(rng);
    w(i) = cplx{re, im};
  }
  ComplexMatrix sigma = w * w.adjoint() + ComplexMatrix::Identity(w.rows(), w.cols());
  s.set_tx_covariance(1.5 * (0.5 * (sigma + sigma.adjoint())) / (sigma.trace().real() / static_cast<double>(n)));
  return s;
}

}  // namespace

TEST_SUITE("chernoff") {
  TEST_CASE("mu(1/2) vanishes at delta = 0 and is symmetric under swap") {
    std::mt19937_64 rng(41);
    const Scenario s = random_scenario(4, 3, 2, rng);
    const AmplitudeDraw b = AmplitudeDraw::sample(2, 0.5, rng);
    const HypothesisPair same{{-0.3, 0.2}, {0.0, 0.0}};
    CHECK(std::abs(mu_half_exact(same, s, b)) <= 1e-12);
    CHECK(std::abs(mu_ddot_half_exact(same, s, b)) <= 1e-12);

    const HypothesisPair fwd{{-0.3, 0.2}, {0.05, -0.1}};
    const HypothesisPair back{fwd.phi_plus_delta(), {-0.05, 0.1}};
    CHECK(std::abs(mu_half_exact(fwd, s, b) - mu_half_exact(back, s, b)) <= 1e-12);
    CHECK(mu_half_exact(fwd, s, b) < 0.0);
  }

  TEST_CASE("mu(1/2) matches a Monte Carlo Bhattacharyya estimate") {
    std::mt19937_64 rng(42);
    const Scenario s = random_scenario(4, 3, 1, rng);
    const AmplitudeDraw b = AmplitudeDraw::sample(1, 0.5, rng);
    const std::vector<double> phi{0.1}, other{0.1 + 2.0 * kDeg};
    const HermitianPD r0 = conditional_snapshot_covariance(phi, s, b);
    const HermitianPD r1 = conditional_snapshot_covariance(other, s, b);
    const double exact = exact_chernoff(r0, r1, s.snapshots).mu_half;
    const auto mc = oracle::mu_half_monte_carlo(r0.matrix(), r1.matrix(), s.snapshots, 400000, 99);
    CAPTURE(exact);
    CAPTURE(mc.value);
    CAPTURE(mc.stderr_);
    CHECK(std::abs(exact - mc.value) <= 3.0 * mc.stderr_);
  }

  TEST_CASE("mu''(1/2)") {
    // 1×1 case: 4L((r0 − r1)/(r0 + r1))².
    const HermitianPD a(ComplexMatrix::Constant(1, 1, 3.0));
    const HermitianPD c(ComplexMatrix::Constant(1, 1, 1.2));
    CHECK(exact_chernoff(a, c, 40).mu_ddot_half == doctest::Approx(4.0 * 40 * std::pow(1.8 / 4.2, 2)));

    // Second difference in s of the closed-form μ(s).
    std::mt19937_64 rng(43);
    const Scenario s = random_scenario(5, 3, 2, rng);
    const AmplitudeDraw b = AmplitudeDraw::sample(2, 0.5, rng);
    const std::vector<double> p0{-0.4, 0.3}, p1{-0.35, 0.28};
    const HermitianPD r0 = conditional_snapshot_covariance(p0, s, b);
    const HermitianPD r1 = conditional_snapshot_covariance(p1, s, b);
    const double h = 1e-3;
    const double fd = (mu_exact(r0, r1, s.snapshots, 0.5 + h) - 2.0 * mu_exact(r0, r1, s.snapshots, 0.5) +
                       mu_exact(r0, r1, s.snapshots, 0.5 - h)) / (h * h);
    const double closed = exact_chernoff(r0, r1, s.snapshots).mu_ddot_half;
    CHECK(std::abs(fd - closed) <= 1e-6 * std::abs(closed));
    CHECK(mu_exact(r0, r1, s.snapshots, 0.5) == doctest::Approx(exact_chernoff(r0, r1, s.snapshots).mu_half).epsilon(1e-12));
  }

  TEST_CASE("alpha_G") {
    Scenario s = make_ula_scenario(1, 1, 1, -1, 1, 1.0);
    s.snapshots = 1;
    CHECK(std::abs(alpha_g(s, 2.0) - 2.0) <= 1e-12);
    CHECK(alpha_g(s.at_snr(0.0), 2.0) == 0.0);

    // Diagonal Σ: sum of per-eigenvalue scalar reductions.
    Scenario d = make_ula_scenario(3, 3, 2, -1, 1, 1.0);
    ComplexMatrix sigma = ComplexMatrix::Zero(3, 3);
    sigma(0, 0) = 0.5;
    sigma(1, 1) = 2.0;
    sigma(2, 2) = 3.5;
    d.set_tx_covariance(sigma);
    const double energy = 2.0 * d.amplitude_variance;
    double sum = 0.0;
    for (double lam : {0.5, 2.0, 3.5}) {
      const double c = 3.0 * energy * lam / d.noise_power;
      sum += 4.0 * static_cast<double>(d.snapshots) *
             (c * c / 2.0 + std::pow(c, 4) / (8.0 * std::pow(1 + c / 2, 2)) - std::pow(c, 3) / (2.0 * (1 + c / 2)));
    }
    CHECK(alpha_g(d, energy) == doctest::Approx(sum).epsilon(1e-12));

    // Factored and literal three-term forms agree on a dense Σ.
    std::mt19937_64 rng(44);
    const Scenario r = random_scenario(6, 4, 2, rng);
    const double e = plug_in_energy(r);
    const double c = static_cast<double>(r.rx_size()) * e / r.noise_power;
    CHECK(alpha_g(r, e) == doctest::Approx(oracle::alpha_g_expanded(r.tx_covariance(), c, r.snapshots)).epsilon(1e-10));
  }

  TEST_CASE("P_L") {
    Scenario s = make_ula_scenario(1, 1, 1, -1, 1, 1.0);
    s.snapshots = 1;
    CHECK(p_large(s.at_snr(0.0), 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    // c = 2: exp{ln(3/4) + 1/4}·Q(√2/2), frozen from a 30-digit evaluation.
    CHECK(std::abs(p_large(s, 2.0) - 0.2308838790723472) <= 1e-13);

    // P_L itself underflows once ln P_L drops below about −745; the log stays finite.
    const Scenario g = make_ula_scenario(20, 8, 2, -60 * kDeg, 60 * kDeg);
    double previous = std::log(0.5);
    for (double db = -40; db <= 30; db += 1.0) {
      const Scenario at = g.at_snr(std::pow(10.0, db / 10));
      const double lp = log_p_large(at, plug_in_energy(at));
      CHECK(std::isfinite(lp));
      CHECK(lp <= previous);
      CHECK(p_large(at) == std::exp(lp));
      previous = lp;
    }
  }

  TEST_CASE("amplitude conventions") {
    const Scenario s = make_ula_scenario(8, 4, 2, -60 * kDeg, 60 * kDeg, 0.3);
    const LargeErrorTerms plug = large_error_terms(s, {});
    CHECK(plug.alpha_g == alpha_g(s));
    AmplitudeConvention avg;
    avg.kind = AmplitudeConvention::Kind::average;
    const LargeErrorTerms mean = large_error_terms(s, avg);
    CHECK(mean.p_large > 0.0);
    CHECK(mean.p_large <= 0.5);
    CHECK(mean.alpha_g > 0.0);
    CHECK(large_error_terms(s, avg).p_large == mean.p_large);
  }

  TEST_CASE("P_S and the delta region") {
    FisherMatrix j;
    j.entries = RealMatrix::Identity(2, 2);
    const std::vector<double> zero{0.0, 0.0}, e1{1.0, 0.0}, e2{2.0, 0.0};
    CHECK(p_small(zero, j) == 0.5);
    CHECK(std::abs(p_small(e1, j) - 0.3085375387259869) <= 1e-14);
    CHECK(p_small(e2, j) < p_small(e1, j));
    CHECK(in_delta_region(zero, j, 0.0));
    CHECK(in_delta_region(e1, j, 1.0));
    CHECK_FALSE(in_delta_region(e2, j, 1.0));

    RealMatrix w = RealMatrix::Random(3, 3);
    FisherMatrix r;
    r.entries = w * w.transpose();
    const std::vector<double> d{0.3, -0.2, 0.7};
    const Eigen::Map<const RealVector> dv(d.data(), 3);
    const double direct = dv.dot(r.entries * dv);
    CHECK(quadratic_form(d, r) == doctest::Approx(direct).epsilon(1e-14));
    const double q = quadratic_form(d, r);
    CHECK(in_delta_region(d, r, q));
    CHECK_FALSE(in_delta_region(d, r, q * (1 - 1e-12)));
    CHECK_THROWS_AS(quadratic_form(e1, r), DimensionMismatch);
  }

  TEST_CASE("chernoff_terms bundles consistent values") {
    std::mt19937_64 rng(46);
    const Scenario s = random_scenario(6, 3, 2, rng);
    const AmplitudeDraw b = AmplitudeDraw::sample(2, 0.5, rng);
    const HypothesisPair pair{{-0.2, 0.4}, {0.001, 0.002}};
    const ChernoffTerms t = chernoff_terms(pair, s, b);
    CHECK(t.mu_half <= 0.0);
    CHECK(t.mu_ddot_half >= 0.0);
    CHECK(t.p_large > 0.0);
    CHECK(t.p_large <= 0.5);
    CHECK(t.in_delta_region);
    const HypothesisPair far{{-0.2, 0.4}, {0.5, 0.3}};
    CHECK_FALSE(chernoff_terms(far, s, b).in_delta_region);
  }

  TEST_CASE("approximation diagnostics") {
    const Scenario n1 = make_ula_scenario(6, 1, 2, -60 * kDeg, 60 * kDeg);
    const ApproximationReport r1 = validate_approximation(n1, 50, 3);
    CHECK(r1.max_frobenius_error <= 1e-12);

    // K = 1, N = 4: v*vᵀ has a unit diagonal and N² − N unit-modulus off-diagonal entries.
    const Scenario k1 = make_ula_scenario(6, 4, 1, -60 * kDeg, 60 * kDeg);
    const ApproximationReport rk = validate_approximation(k1, 20, 4);
    for (double e : rk.frobenius_error) CHECK(e == doctest::Approx(std::sqrt(12.0)).epsilon(1e-12));

    const Scenario k2 = make_ula_scenario(6, 4, 2, -60 * kDeg, 60 * kDeg);
    const Scenario k32 = make_ula_scenario(6, 4, 32, -60 * kDeg, 60 * kDeg);
    CHECK(validate_approximation(k32, 200, 5).median_frobenius_error <
          validate_approximation(k2, 200, 5).median_frobenius_error);
  }
}
