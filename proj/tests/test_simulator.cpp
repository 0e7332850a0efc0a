#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "zzb/fisher.hpp"
#include "zzb/parallel.hpp"
#include "zzb/reference.hpp"
#include "zzb/simulator.hpp"
#include "zzb/zzb.hpp"

using namespace zzb;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("noise-only data has covariance close to the noise floor") {
    Scenario s = make_ula_scenario(4, 2, 1, -60 * kDeg, 60 * kDeg, 0.0);
    s.snapshots = 4000;
    s.noise_power = 2.0;
    const std::vector<double> th{0.1};
    const SnapshotBlock blk = synthesize(s, th, 11);
    CHECK(blk.data.rows() == 4);
    CHECK(blk.data.cols() == 4000);
    const ComplexMatrix r = sample_covariance(blk.data);
    CHECK((r - 2.0 * ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 0.2);
  }

  TEST_CASE("same seed gives identical data") {
    const Scenario s = make_ula_scenario(6, 3, 2, -60 * kDeg, 60 * kDeg, 2.0);
    const std::vector<double> th{-0.2, 0.5};
    const SnapshotBlock a = synthesize(s, th, 77);
    const SnapshotBlock b = synthesize(s, th, 77);
    const SnapshotBlock c = synthesize(s, th, 78);
    CHECK(a.data == b.data);
    CHECK(a.amplitudes.values == b.amplitudes.values);
    CHECK(a.data != c.data);
    CHECK(a.true_thetas == th);
  }

  TEST_CASE("estimator recovers angles at very high SNR") {
    const Scenario s = make_ula_scenario(8, 4, 1, -60 * kDeg, 60 * kDeg, db_to_linear(60.0));
    std::mt19937_64 rng(3);
    int good = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
      const std::vector<double> th{s.prior_min + s.zeta() * unit_uniform(rng)};
      const SnapshotBlock blk = synthesize(s, th, derive_seed(5, static_cast<std::uint64_t>(t)));
      const TrialResult r = ml_estimate(blk, s);
      if (std::abs(r.estimated_thetas[0] - th[0]) <= 2.0 * kDefaultGridStep) ++good;
    }
    CHECK(good >= 198);
  }

  TEST_CASE("two-target estimates are sorted and near the truth at high SNR") {
    const Scenario s = make_ula_scenario(10, 4, 2, -60 * kDeg, 60 * kDeg, db_to_linear(40.0));
    const std::vector<double> th{-20 * kDeg, 25 * kDeg};
    const SnapshotBlock blk = synthesize(s, th, 9);
    const TrialResult r = ml_estimate(blk, s);
    REQUIRE(r.estimated_thetas.size() == 2);
    CHECK(r.estimated_thetas[0] <= r.estimated_thetas[1]);
    CHECK(std::abs(r.estimated_thetas[0] - th[0]) <= 2.0 * kDefaultGridStep);
    CHECK(std::abs(r.estimated_thetas[1] - th[1]) <= 2.0 * kDefaultGridStep);
  }

  TEST_CASE("ties go to the smaller angle") {
    // One element at the origin: every candidate angle gives the same objective.
    Scenario s = make_ula_scenario(1, 1, 1, -60 * kDeg, 60 * kDeg, 1.0);
    s.snapshots = 4;
    SnapshotBlock blk;
    blk.data = ComplexMatrix::Zero(1, 4);
    blk.data(0, 0) = 2.0;
    blk.true_thetas = {0.0};
    const TrialResult r = ml_estimate(blk, s);
    CHECK(r.estimated_thetas[0] == s.prior_min);
  }

  TEST_CASE("grid objective matches the dense objective") {
    const Scenario s = make_ula_scenario(6, 3, 2, -60 * kDeg, 60 * kDeg, 1.5);
    const std::vector<double> th{-0.4, 0.3};
    const ComplexMatrix s_hat = sample_covariance(synthesize(s, th, 21).data);
    const SmlGrid grid(s_hat, s, kDefaultGridStep);
    CHECK(grid.size() == 601);
    const std::vector<std::vector<std::size_t>> picks{{0, 1}, {10, 300}, {150, 151}, {42, 599}, {200, 600}};
    for (const auto& idx : picks) {
      const std::vector<double> angles{grid.angle(idx[0]), grid.angle(idx[1])};
      const double dense = oracle::sml_objective_dense(angles, s_hat, s);
      CHECK(grid.objective(idx) == doctest::Approx(dense).epsilon(1e-9));
      CHECK(sml_objective(angles, s_hat, s) == doctest::Approx(dense).epsilon(1e-9));
    }
  }

  TEST_CASE("grid step guard") {
    const Scenario s = make_ula_scenario(6, 3, 1, -10 * kDeg, 10 * kDeg);
    const ComplexMatrix s_hat = ComplexMatrix::Identity(6, 6);
    CHECK_THROWS_AS(SmlGrid(s_hat, s, 0.0), GridTooCoarse);
    CHECK_THROWS_AS(SmlGrid(s_hat, s, 2.1 * kDeg), GridTooCoarse);
    CHECK_NOTHROW(SmlGrid(s_hat, s, 2.0 * kDeg));
  }

  TEST_CASE("MSE at zero SNR is not below the a-priori bound") {
    const Scenario s = make_ula_scenario(8, 4, 1, -60 * kDeg, 60 * kDeg);
    const MseEstimate m = simulate_mse(s, 0.0, 300, kDefaultGridStep, 4);
    CHECK(m.trials == 300);
    CHECK(m.mse + 2.0 * m.stderr_ >= apb(1, s.zeta()));
    CHECK_THROWS(simulate_mse(s, 0.0, 5, kDefaultGridStep, 4));
  }

  TEST_CASE("typical high-SNR error is at the CRB level") {
    // The mean is dominated by rare deep amplitude fades, so the median is compared.
    const Scenario s = make_ula_scenario(8, 4, 1, -60 * kDeg, 60 * kDeg);
    const Scenario hi = s.at_snr(db_to_linear(20.0));
    std::vector<double> errors(300);
    for (std::size_t t = 0; t < errors.size(); ++t) errors[t] = detail::trial_error(hi, t, kDefaultGridStep, 8);
    std::nth_element(errors.begin(), errors.begin() + 150, errors.end());
    const double median = errors[150];
    const double ecrb = expected_crb(hi, 2000, 1);
    CAPTURE(median);
    CAPTURE(ecrb);
    CHECK(median <= 3.0 * ecrb);
    CHECK(median >= ecrb / 10.0);
  }

  TEST_CASE("summarize_errors") {
    const std::vector<double> e{1.0, 2.0, 3.0, 4.0};
    const MseEstimate m = detail::summarize_errors(e);
    CHECK(m.mse == 2.5);
    CHECK(m.stderr_ == doctest::Approx(std::sqrt((5.0 / 3.0) / 4.0)).epsilon(1e-15));
  }

  TEST_CASE("parallel MSE equals the serial reference bit for bit") {
    const Scenario s = make_ula_scenario(8, 4, 2, -60 * kDeg, 60 * kDeg);
    const MseEstimate a = simulate_mse(s, db_to_linear(0.0), 40, kDefaultGridStep, 12);
    const MseEstimate b = reference::simulate_mse(s, db_to_linear(0.0), 40, kDefaultGridStep, 12);
    CHECK(a.mse == b.mse);
    CHECK(a.stderr_ == b.stderr_);
  }
}
