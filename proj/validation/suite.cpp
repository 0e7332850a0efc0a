#include "suite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "zzb/chernoff.hpp"
#include "zzb/experiment.hpp"
#include "zzb/fisher.hpp"
#include "zzb/parallel.hpp"
#include "zzb/radar_model.hpp"
#include "zzb/simulator.hpp"
#include "zzb/zzb.hpp"

namespace zzb::validation {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

struct RandomInstance {
  Scenario scenario;
  std::vector<double> thetas;
  AmplitudeDraw b;
};

// Small random problem: arbitrary PD transmit covariance, random angles and amplitudes.
RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> m_dist(2, 8), n_dist(1, 5), k_dist(1, 3);
  const auto m = static_cast<std::size_t>(m_dist(rng));
  const auto n = static_cast<std::size_t>(n_dist(rng));
  const auto k = static_cast<std::size_t>(k_dist(rng));
  RandomInstance inst;
  inst.scenario = make_ula_scenario(m, n, k, -60.0 * kDeg, 60.0 * kDeg);
  inst.scenario.snapshots = 40;
  std::normal_distribution<double> normal;
  ComplexMatrix w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      w(i, j) = cplx{re, im};
    }
  const double snr = std::pow(10.0, -1.0 + 2.0 * unit_uniform(rng));
  ComplexMatrix sigma = w * w.adjoint() + ComplexMatrix::Identity(w.rows(), w.cols());
  sigma *= snr * inst.scenario.noise_power / (sigma.trace().real() / static_cast<double>(n));
  inst.scenario.set_tx_covariance(0.5 * (sigma + sigma.adjoint()));
  inst.thetas.resize(k);
  for (auto& t : inst.thetas) t = inst.scenario.prior_min + inst.scenario.zeta() * unit_uniform(rng);
  std::sort(inst.thetas.begin(), inst.thetas.end());
  inst.b = AmplitudeDraw::sample(k, inst.scenario.amplitude_variance, rng);
  return inst;
}

double relative_error(const ComplexMatrix& a, const ComplexMatrix& ref) {
  return (a - ref).norm() / ref.norm();
}

ExperimentConfig with_grid(ExperimentConfig c, double start, double stop, double step) {
  c.snr_grid = {start, stop, step};
  return c;
}

// Start of the CRB-limited regime: the first grid SNR from which zzb ≤ 2·expected CRB
// holds at every higher grid point. +∞ if the last point still violates it.
double threshold_snr(const ResultTable& t, const std::string& label) {
  double th = std::numeric_limits<double>::infinity();
  for (const auto& r : t.rows) {
    if (r.sweep_value != label) continue;
    if (r.zzb <= 2.0 * r.expected_crb) {
      if (std::isinf(th)) th = r.snr_db;
    } else {
      th = std::numeric_limits<double>::infinity();
    }
  }
  return th;
}

// First grid SNR where zzb ≤ 2·expected CRB, regardless of what follows.
double first_crossing(const ResultTable& t, const std::string& label) {
  for (const auto& r : t.rows)
    if (r.sweep_value == label && r.zzb <= 2.0 * r.expected_crb) return r.snr_db;
  return std::numeric_limits<double>::infinity();
}

}  // namespace

// ---------------------------------------------------------------------------
// Property suites

CheckResult covariance_derivative_property(std::uint64_t seed, int instances) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const RandomInstance inst = random_instance(rng);
    const Scenario& s = inst.scenario;
    const std::size_t i = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(inst.thetas.size()));
    auto cond = [&](std::span<const double> t) { return oracle::conditional_covariance(t, s, inst.b.values); };
    auto mean = [&](std::span<const double> t) { return oracle::mean_covariance(t, s); };
    const ComplexMatrix fd_c = oracle::central_difference(cond, inst.thetas, i, 1e-4);
    const ComplexMatrix fd_m = oracle::central_difference(mean, inst.thetas, i, 1e-4);
    worst = std::max(worst, relative_error(covariance_derivative(inst.thetas, s, inst.b, i), fd_c));
    worst = std::max(worst, relative_error(mean_covariance_derivative(inst.thetas, s, i), fd_m));
  }
  return {"7a covariance derivative vs finite differences", worst <= 1e-6,
          "max relative error " + fmt(worst) + " over " + std::to_string(instances) + " instances (tol 1e-6)"};
}

CheckResult fisher_property(std::uint64_t seed, int instances) {
  std::mt19937_64 rng(seed);
  bool symmetric = true, psd = true, scaling = true;
  double worst_oracle = 0.0;
  for (int n = 0; n < instances; ++n) {
    RandomInstance inst = random_instance(rng);
    for (int model = 0; model < 2; ++model) {
      const FisherMatrix j = model == 0 ? fisher_matrix(inst.thetas, inst.scenario)
                                        : fisher_matrix(inst.thetas, inst.scenario, inst.b);
      symmetric = symmetric && j.entries == j.entries.transpose();
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(j.entries);
      const double lmax = es.eigenvalues().maxCoeff();
      psd = psd && es.eigenvalues().minCoeff() >= -1e-12 * std::max(lmax, 1.0);

      Scenario doubled = inst.scenario;
      doubled.snapshots = 2 * inst.scenario.snapshots;
      const FisherMatrix j2 = model == 0 ? fisher_matrix(inst.thetas, doubled)
                                         : fisher_matrix(inst.thetas, doubled, inst.b);
      scaling = scaling && j2.entries == 2.0 * j.entries;
      if (model == 0) {
        const RealMatrix ref = oracle::fisher_dense(inst.thetas, inst.scenario);
        worst_oracle = std::max(worst_oracle, (j.entries - ref).norm() / ref.norm());
      }
    }
  }
  const bool ok = symmetric && psd && scaling && worst_oracle <= 1e-6;
  return {"7b Fisher symmetry, PSD and linearity in L", ok,
          std::string("symmetric=") + (symmetric ? "yes" : "no") + " psd=" + (psd ? "yes" : "no") +
              " J(2L)==2J(L)=" + (scaling ? "yes" : "no") + " dense-oracle rel err " + fmt(worst_oracle)};
}

CheckResult chernoff_sign_property(std::uint64_t seed, int draws) {
  std::mt19937_64 rng(seed);
  double max_mu = -std::numeric_limits<double>::infinity();
  double min_mudd = std::numeric_limits<double>::infinity();
  for (int n = 0; n < draws; ++n) {
    const RandomInstance inst = random_instance(rng);
    std::vector<double> other = inst.thetas;
    // Offsets spanning local (≈0.01°) to global (tens of degrees) separations.
    const double scale = std::pow(10.0, -4.0 + 4.0 * unit_uniform(rng));
    for (auto& t : other)
      t = std::clamp(t + scale * (2.0 * unit_uniform(rng) - 1.0), inst.scenario.prior_min, inst.scenario.prior_max);
    const HermitianPD r0 = conditional_snapshot_covariance(inst.thetas, inst.scenario, inst.b);
    const HermitianPD r1 = conditional_snapshot_covariance(other, inst.scenario, inst.b);
    const ExactChernoff c = exact_chernoff(r0, r1, inst.scenario.snapshots);
    max_mu = std::max(max_mu, c.mu_half);
    min_mudd = std::min(min_mudd, c.mu_ddot_half);
  }
  const bool ok = max_mu <= 0.0 && min_mudd >= 0.0;
  return {"7c mu(1/2) <= 0 and mu''(1/2) >= 0", ok,
          "max mu " + fmt(max_mu) + ", min mu'' " + fmt(min_mudd) + " over " + std::to_string(draws) + " draws"};
}

CheckResult special_function_property() {
  double worst_q = 0.0, worst_g = 0.0;
  for (double z = -6.0; z <= 30.0; z += 0.125) {
    const double ref = oracle::q_quadrature(z);
    worst_q = std::max(worst_q, std::abs(q_function(z) - ref) / ref);
    worst_q = std::max(worst_q, std::abs(std::exp(log_q_function(z)) - ref) / ref);
  }
  for (double e = -6.0; e <= 2.5; e += 0.0625) {
    const double u = std::pow(10.0, e);
    const double ref = oracle::gamma_32_quadrature(u);
    worst_g = std::max(worst_g, std::abs(gamma_32(u) - ref) / ref);
  }
  const bool ok = worst_q <= 1e-10 && worst_g <= 1e-10;
  return {"7d gamma_32 and Q vs quadrature", ok,
          "max relative error Q " + fmt(worst_q) + ", gamma_32 " + fmt(worst_g) + " (tol 1e-10)"};
}

CheckResult alpha_scalar_property() {
  // N = M = 1, σ_n² = 1, Σ = 1 and ‖B‖² = 2 give c = M‖B‖²σ_s²/σ_n² = 2.
  Scenario s = make_ula_scenario(1, 1, 1, -60.0 * kDeg, 60.0 * kDeg, 1.0);
  s.snapshots = 1;
  const double factored = alpha_g(s, 2.0);
  const double expanded = oracle::alpha_g_expanded(ComplexMatrix::Identity(1, 1), 2.0, 1);
  const bool ok = std::abs(factored - 2.0) <= 1e-12 && std::abs(expanded - 2.0) <= 1e-12;
  return {"7e alpha_G scalar reduction", ok,
          "factored " + fmt(factored) + ", expanded " + fmt(expanded) + " (expect 2, tol 1e-12)"};
}

std::vector<CheckResult> property_suite() {
  return {covariance_derivative_property(), fisher_property(), chernoff_sign_property(),
          special_function_property(), alpha_scalar_property()};
}

// ---------------------------------------------------------------------------
// Acceptance criteria

CheckResult zero_snr_collapse() {
  double worst = 0.0;
  for (const char* name : {"fig1", "fig2"}) {
    const ResultTable t = run_experiment(with_grid(preset_config(name), -80.0, -80.0, 1.0));
    for (const auto& r : t.rows) worst = std::max(worst, std::abs(r.zzb / r.apb - 1.0));
  }
  return {"1 zero-SNR collapse to APB", worst <= 0.01,
          "max |zzb/apb - 1| at -80 dB over fig1 and fig2: " + fmt(worst) + " (tol 0.01)"};
}

CheckResult high_snr_collapse() {
  ExperimentConfig c = preset_config("fig1");
  c.sweep.values = {32};
  const ResultTable t = run_experiment(c);
  const ResultRow* chosen = nullptr;
  for (const auto& r : t.rows)
    if (r.gamma_term > 1.0 - 1e-6) chosen = &r;  // rows ascend in SNR
  if (!chosen) return {"2 high-SNR collapse to expected CRB", false, "no grid point with gamma > 1 - 1e-6"};
  const double ratio = chosen->zzb / chosen->expected_crb;
  return {"2 high-SNR collapse to expected CRB", ratio >= 0.99 && ratio <= 1.001,
          "zzb/ecrb = " + fmt(ratio) + " at " + fmt(chosen->snr_db) + " dB (N = 32; want [0.99, 1.001])"};
}

CheckResult threshold_compression() {
  const ExperimentConfig c = preset_config("fig1");
  const ResultTable t = run_experiment(c);
  std::string detail = "thresholds (dB):";
  std::string first = "; first crossings:";
  bool ok = true;
  double previous = std::numeric_limits<double>::infinity();
  for (double n : c.sweep.values) {
    std::ostringstream label;
    label << n;
    const double th = threshold_snr(t, label.str());
    detail += " N=" + label.str() + ":" + fmt(th);
    first += " " + fmt(first_crossing(t, label.str()));
    if (std::isinf(th) || th > previous) ok = false;
    previous = th;
  }
  return {"3 threshold nonincreasing in N", ok, detail + first};
}

CheckResult apb_monotonic_in_k() {
  const double zeta = 120.0 * kDeg;
  bool decreasing = true;
  for (std::size_t k = 1; k < 8; ++k) decreasing = decreasing && apb(k + 1, zeta) < apb(k, zeta);
  const double e1 = std::abs(apb(1, zeta) - zeta * zeta / 12.0);
  const double e2 = std::abs(apb(2, zeta) - zeta * zeta / 18.0);
  const bool ok = decreasing && e1 <= 1e-12 && e2 <= 1e-12;
  return {"4 APB strictly decreasing in K with exact K=1,2 values", ok,
          std::string("decreasing=") + (decreasing ? "yes" : "no") + " |K=1 err| " + fmt(e1) + " |K=2 err| " +
              fmt(e2)};
}

CheckResult closed_form_vs_exact() {
  const Scenario s = make_ula_scenario(8, 1, 1, -60.0 * kDeg, 60.0 * kDeg);
  const PriorSamples samples = draw_prior_samples(s, 2000, 1);
  double worst = 0.0, at = 0.0;
  for (int db = -20; db <= 20; ++db) {
    const double snr = db_to_linear(db);
    const double closed = zzb(s, snr, samples).value;
    const double exact = zzb_exact_1d(s.at_snr(snr)).value;
    const double gap = std::abs(linear_to_db(closed) - linear_to_db(exact));
    if (gap > worst) {
      worst = gap;
      at = db;
    }
  }
  return {"5 closed form vs exact single-target integral", worst <= 1.5,
          "max gap " + fmt(worst) + " dB at " + fmt(at) + " dB (tol 1.5 dB)"};
}

CheckResult simulation_bound_validity() {
  const Scenario s = make_ula_scenario(8, 4, 1, -60.0 * kDeg, 60.0 * kDeg);
  const PriorSamples samples = draw_prior_samples(s, 2000, 1);
  bool ok = true;
  std::string detail;
  for (int db = -10; db <= 20; db += 5) {
    const double snr = db_to_linear(db);
    const double bound = zzb(s, snr, samples).value;
    const MseEstimate m = simulate_mse(s, snr, 500, kDefaultGridStep, derive_seed(7, static_cast<std::uint64_t>(db + 100)));
    const double margin = (m.mse + 2.0 * m.stderr_) / bound;
    if (margin < 1.0) ok = false;
    detail += " " + std::to_string(db) + "dB:(mse+2se)/zzb=" + fmt(margin);
  }
  return {"6 simulated MSE respects the bound", ok, detail};
}

CheckResult numerical_properties() {
  const auto results = property_suite();
  bool ok = true;
  std::string detail;
  for (const auto& r : results) {
    ok = ok && r.passed;
    detail += (detail.empty() ? "" : "; ") + r.name.substr(0, 2) + (r.passed ? " ok" : " FAIL");
  }
  return {"7 numerical property suites", ok, detail};
}

CheckResult thread_determinism() {
  const int saved = max_threads();
  const ExperimentConfig c = preset_config("fig2");
  set_threads(1);
  const std::string one = to_csv(run_experiment(c));
  const int many = std::max(4, saved);
  set_threads(many);
  const std::string more = to_csv(run_experiment(c));
  set_threads(saved);
  return {"8 fig2 CSV identical across thread counts", one == more,
          "1 thread vs " + std::to_string(many) + " threads, " + std::to_string(one.size()) + " bytes"};
}

std::vector<CheckResult> acceptance_suite(bool include_slow) {
  std::vector<CheckResult> out;
  out.push_back(zero_snr_collapse());
  out.push_back(high_snr_collapse());
  if (include_slow) out.push_back(threshold_compression());
  out.push_back(apb_monotonic_in_k());
  out.push_back(closed_form_vs_exact());
  if (include_slow) out.push_back(simulation_bound_validity());
  out.push_back(numerical_properties());
  if (include_slow) out.push_back(thread_determinism());
  return out;
}

}  // namespace zzb::validation
