#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "zzb/numerics.hpp"

using namespace zzb;

namespace {

ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  ComplexMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = n(rng);
      const double im = n(rng);
      m(i, j) = cplx{re, im};
    }
  return m;
}

ComplexMatrix random_hpd(Eigen::Index n, std::mt19937_64& rng) {
  const ComplexMatrix w = random_complex(n, n, rng);
  ComplexMatrix a = w * w.adjoint() + 0.5 * ComplexMatrix::Identity(n, n);
  return 0.5 * (a + a.adjoint());
}

}  // namespace

TEST_SUITE("numerics") {
  TEST_CASE("HermitianPD rejects non-finite, non-Hermitian and indefinite input") {
    ComplexMatrix a = ComplexMatrix::Identity(2, 2);
    a(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(HermitianPD{a}, NotPositiveDefinite);

    ComplexMatrix b = ComplexMatrix::Identity(2, 2);
    b(0, 1) = 0.5;
    CHECK_THROWS_AS(HermitianPD{b}, NotPositiveDefinite);

    ComplexMatrix c = ComplexMatrix::Identity(2, 2);
    c(1, 1) = -1.0;
    CHECK_THROWS_AS(HermitianPD{c}, NotPositiveDefinite);

    CHECK_THROWS_AS(HermitianPD{ComplexMatrix(2, 3)}, DimensionMismatch);
  }

  TEST_CASE("is_hermitian uses a 1e-12 relative tolerance") {
    ComplexMatrix a = ComplexMatrix::Identity(3, 3);
    a(0, 1) = cplx{1.0, 1.0};
    a(1, 0) = cplx{1.0, -1.0};
    CHECK(is_hermitian(a));
    a(1, 0) += 1e-9;
    CHECK_FALSE(is_hermitian(a));
  }

  TEST_CASE("semidefinite input is accepted after one jitter retry") {
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(0, 0) = 1.0;  // rank one
    const HermitianPD h(a);
    CHECK(h.jittered());
    CHECK(h.min_pivot() > 0.0);
  }

  TEST_CASE("logdet_hpd") {
    CHECK(logdet_hpd(HermitianPD(ComplexMatrix::Identity(3, 3))) == doctest::Approx(0.0));
    CHECK(logdet_hpd(HermitianPD(2.0 * ComplexMatrix::Identity(2, 2))) == doctest::Approx(2.0 * std::log(2.0)));
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
      const ComplexMatrix a = random_hpd(4, rng);
      CHECK(std::abs(logdet_hpd(HermitianPD(a)) - oracle::logabsdet_lu(a)) <= 1e-10);
    }
  }

  TEST_CASE("solve_hpd") {
    std::mt19937_64 rng(6);
    const ComplexMatrix b = random_complex(3, 2, rng);
    CHECK((solve_hpd(HermitianPD(ComplexMatrix::Identity(3, 3)), b) - b).norm() == doctest::Approx(0.0));
    const ComplexMatrix half = solve_hpd(HermitianPD(2.0 * ComplexMatrix::Identity(2, 2)), ComplexMatrix::Identity(2, 2));
    CHECK((half - 0.5 * ComplexMatrix::Identity(2, 2)).norm() <= 1e-15);
    const ComplexMatrix a = random_hpd(5, rng);
    const ComplexMatrix rhs = random_complex(5, 3, rng);
    const ComplexMatrix x = solve_hpd(HermitianPD(a), rhs);
    CHECK((a * x - rhs).norm() / rhs.norm() <= 1e-10);
    CHECK_THROWS_AS(solve_hpd(HermitianPD(a), random_complex(4, 1, rng)), DimensionMismatch);
  }

  TEST_CASE("trace_product_squared") {
    CHECK(trace_product_squared(ComplexMatrix::Zero(3, 3)).value == 0.0);
    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    CHECK(trace_product_squared(d).value == doctest::Approx(2.0));

    std::mt19937_64 rng(7);
    const ComplexMatrix rp = random_hpd(4, rng), r0 = random_hpd(4, rng), r1 = random_hpd(4, rng);
    const ComplexMatrix a = solve_hpd(HermitianPD(r0 + r1), r0 - r1);
    cplx naive = 0.0;
    for (Eigen::Index i = 0; i < 4; ++i)
      for (Eigen::Index j = 0; j < 4; ++j) naive += a(i, j) * a(j, i);
    const TraceSquare t = trace_product_squared(a);
    CHECK(std::abs(t.value - naive.real()) <= 1e-10 * std::max(1.0, std::abs(naive.real())));
    CHECK(std::abs(t.imag_residual - std::abs(naive.imag())) <= 1e-10);
    (void)rp;
  }

  TEST_CASE("q_function") {
    CHECK(q_function(0.0) == 0.5);
    CHECK(q_function(50.0) < 1e-300);
    CHECK(q_function(std::numeric_limits<double>::infinity()) == 0.0);
    // Frozen from a 30-digit evaluation of erfc.
    CHECK(std::abs(q_function(0.7071) - 0.2397521679898636) <= 1e-14);
    CHECK(std::abs(q_function(0.7071) - oracle::q_quadrature(0.7071)) <= 1e-12);
    CHECK(std::abs(q_function(8.0) / 6.220960574271784e-16 - 1.0) <= 1e-12);
  }

  TEST_CASE("log_q_function stays finite in the far tail") {
    CHECK(std::abs(log_q_function(40.0) - (-804.6084420137538)) <= 1e-9);
    for (double z : {-3.0, -0.5, 0.0, 0.3, 2.0, 4.99, 5.0, 5.01, 12.0}) {
      CAPTURE(z);
      CHECK(std::abs(log_q_function(z) - std::log(q_function(z))) <= 1e-12 * std::max(1.0, std::abs(std::log(q_function(z)))));
    }
  }

  TEST_CASE("gamma_32") {
    CHECK(gamma_32(0.0) == 0.0);
    CHECK(gamma_32(-1.0) == 0.0);
    CHECK(gamma_32(1e6) == 1.0);
    CHECK(gamma_32(std::numeric_limits<double>::infinity()) == 1.0);
    CHECK(std::abs(gamma_32(0.5) - 0.1987480430987992) <= 1e-14);
    CHECK(std::abs(gamma_32(0.5) - oracle::gamma_32_quadrature(0.5)) <= 1e-10);
    CHECK(std::abs(gamma_32(3.0) - 0.8883897749052874) <= 1e-14);
    // Continuity across the series / continued-fraction switch.
    CHECK(std::abs(gamma_32(10.0 - 1e-9) - gamma_32(10.0 + 1e-9)) <= 1e-12);
    CHECK(std::abs(gamma_32(10.0) - oracle::gamma_32_quadrature(10.0)) <= 1e-12);
  }
}
