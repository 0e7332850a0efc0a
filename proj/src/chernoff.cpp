#include "zzb/chernoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zzb/parallel.hpp"

namespace zzb {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

// Y = (M·energy / (2σ_n²))·Σ
ComplexMatrix half_snr_matrix(const Scenario& scenario, double energy) {
  const double m = static_cast<double>(scenario.rx_size());
  return (m * energy / (2.0 * scenario.noise_power)) * scenario.tx_covariance();
}

// L·ln(|I + 2Y| / |I + Y|²), the large-offset exponent.
double large_offset_exponent(const ComplexMatrix& y, std::size_t snapshots) {
  const auto n = y.rows();
  const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
  const double num = logdet_hpd(HermitianPD(eye + 2.0 * y));
  const double den = logdet_hpd(HermitianPD(eye + y));
  return static_cast<double>(snapshots) * (num - 2.0 * den);
}

}  // namespace

std::vector<double> HypothesisPair::phi_plus_delta() const {
  std::vector<double> out(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) out[k] = phi[k] + delta[k];
  return out;
}

double mu_exact(const HermitianPD& r0, const HermitianPD& r1, std::size_t snapshots, double s) {
  const HermitianPD blend(s * r0.matrix() + (1.0 - s) * r1.matrix());
  return static_cast<double>(snapshots) *
         (s * logdet_hpd(r0) + (1.0 - s) * logdet_hpd(r1) - logdet_hpd(blend));
}

ExactChernoff exact_chernoff(const HermitianPD& r0, const HermitianPD& r1, std::size_t snapshots) {
  const double l = static_cast<double>(snapshots);
  const HermitianPD plus(r0.matrix() + r1.matrix());
  const ComplexMatrix minus = r0.matrix() - r1.matrix();
  const auto n = static_cast<double>(r0.size());

  ExactChernoff out;
  // ln|R₊/2| = ln|R₊| − n·ln 2
  const double half_plus = logdet_hpd(plus) - n * std::log(2.0);
  out.mu_half = l * (0.5 * (logdet_hpd(r0) + logdet_hpd(r1)) - half_plus);
  out.mu_ddot_half = 4.0 * l * trace_product_squared(solve_hpd(plus, minus)).value;
  return out;
}

double mu_half_exact(const HypothesisPair& pair, const Scenario& scenario, const AmplitudeDraw& b) {
  const HermitianPD r0 = conditional_snapshot_covariance(pair.phi, scenario, b);
  const HermitianPD r1 = conditional_snapshot_covariance(pair.phi_plus_delta(), scenario, b);
  return exact_chernoff(r0, r1, scenario.snapshots).mu_half;
}

double mu_ddot_half_exact(const HypothesisPair& pair, const Scenario& scenario,
                          const AmplitudeDraw& b) {
  const HermitianPD r0 = conditional_snapshot_covariance(pair.phi, scenario, b);
  const HermitianPD r1 = conditional_snapshot_covariance(pair.phi_plus_delta(), scenario, b);
  return exact_chernoff(r0, r1, scenario.snapshots).mu_ddot_half;
}

double log_error_probability_bound(double mu_half, double mu_ddot_half) {
  const double dd = std::max(mu_ddot_half, 0.0);
  return mu_half + dd / 8.0 + log_q_function(0.5 * std::sqrt(dd));
}

double plug_in_energy(const Scenario& scenario) {
  return static_cast<double>(scenario.num_targets) * scenario.amplitude_variance;
}

double alpha_g(const Scenario& scenario, double energy) {
  const ComplexMatrix y = half_snr_matrix(scenario, energy);
  const auto n = y.rows();
  const HermitianPD one_plus_y(ComplexMatrix::Identity(n, n) + y);
  const ComplexMatrix ratio = solve_hpd(one_plus_y, y);  // (I+Y)⁻¹Y, commutes with Y
  const double tr = trace_product_squared(ratio).value;
  return 8.0 * static_cast<double>(scenario.snapshots) * std::max(tr, 0.0);
}

double alpha_g(const Scenario& scenario) { return alpha_g(scenario, plug_in_energy(scenario)); }

double log_p_large(const Scenario& scenario, double energy) {
  const ComplexMatrix y = half_snr_matrix(scenario, energy);
  const double alpha = alpha_g(scenario, energy);
  const double exponent = std::min(large_offset_exponent(y, scenario.snapshots), 0.0);
  return exponent + alpha / 8.0 + log_q_function(0.5 * std::sqrt(alpha));
}

double p_large(const Scenario& scenario, double energy) {
  return std::exp(log_p_large(scenario, energy));
}

double p_large(const Scenario& scenario) { return p_large(scenario, plug_in_energy(scenario)); }

LargeErrorTerms large_error_terms(const Scenario& scenario, const AmplitudeConvention& convention) {
  if (convention.kind == AmplitudeConvention::Kind::plug_in) {
    const double e = plug_in_energy(scenario);
    return {alpha_g(scenario, e), p_large(scenario, e)};
  }
  const std::size_t n = std::max<std::size_t>(convention.draws, 1);
  std::vector<double> alphas(n), probs(n);
  for (std::size_t d = 0; d < n; ++d) {
    std::mt19937_64 rng(derive_seed(convention.seed, d));
    const double e =
        AmplitudeDraw::sample(scenario.num_targets, scenario.amplitude_variance, rng).frobenius_sq();
    alphas[d] = alpha_g(scenario, e);
    probs[d] = p_large(scenario, e);
  }
  return {pairwise_sum(alphas) / static_cast<double>(n), pairwise_sum(probs) / static_cast<double>(n)};
}

double quadratic_form(std::span<const double> delta, const FisherMatrix& fisher) {
  const auto k = fisher.entries.rows();
  if (static_cast<Eigen::Index>(delta.size()) != k)
    throw DimensionMismatch("offset length does not match Fisher matrix");
  const Eigen::Map<const RealVector> d(delta.data(), k);
  return std::max(d.dot(fisher.entries * d), 0.0);
}

double p_small(std::span<const double> delta, const FisherMatrix& fisher) {
  return q_function(0.5 * std::sqrt(quadratic_form(delta, fisher)));
}

bool in_delta_region(std::span<const double> delta, const FisherMatrix& fisher, double alpha) {
  return quadratic_form(delta, fisher) <= alpha;
}

ChernoffTerms chernoff_terms(const HypothesisPair& pair, const Scenario& scenario,
                             const AmplitudeDraw& b) {
  const HermitianPD r0 = conditional_snapshot_covariance(pair.phi, scenario, b);
  const HermitianPD r1 = conditional_snapshot_covariance(pair.phi_plus_delta(), scenario, b);
  const ExactChernoff exact = exact_chernoff(r0, r1, scenario.snapshots);
  const double energy = b.frobenius_sq();

  ChernoffTerms t;
  t.mu_half = exact.mu_half;
  t.mu_ddot_half = exact.mu_ddot_half;
  t.alpha_g = alpha_g(scenario, energy);
  t.p_large = p_large(scenario, energy);
  t.in_delta_region = in_delta_region(pair.delta, fisher_matrix(pair.phi, scenario, b), t.alpha_g);
  return t;
}

ApproximationReport validate_approximation(const Scenario& scenario, std::size_t trials,
                                           std::uint64_t seed) {
  const std::size_t k = scenario.num_targets;
  const auto n = static_cast<Eigen::Index>(scenario.tx_size());
  ApproximationReport rep;
  rep.frobenius_error.assign(trials, 0.0);
  rep.mu_relative_error.assign(trials, 0.0);
  const ComplexMatrix eye = ComplexMatrix::Identity(n, n);

#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(trials); ++t) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    auto draw_angles = [&] {
      std::vector<double> th(k);
      for (auto& x : th) x = scenario.prior_min + scenario.zeta() * unit_uniform(rng);
      std::sort(th.begin(), th.end());
      return th;
    };
    const std::vector<double> phi = draw_angles();
    const std::vector<double> other = draw_angles();
    const AmplitudeDraw b = AmplitudeDraw::sample(k, scenario.amplitude_variance, rng);
    const double energy = b.frobenius_sq();
    const auto ti = static_cast<std::size_t>(t);

    const ComplexMatrix v = steering_matrix(phi, scenario.tx);
    const ComplexMatrix bd = b.diag();
    const ComplexMatrix g = v.conjugate() * bd.adjoint() * bd * v.transpose();
    rep.frobenius_error[ti] = (g - energy * eye).norm() / energy;

    const HermitianPD r0 = conditional_snapshot_covariance(phi, scenario, b);
    const HermitianPD r1 = conditional_snapshot_covariance(other, scenario, b);
    const double exact = exact_chernoff(r0, r1, scenario.snapshots).mu_half;
    const double approx = large_offset_exponent(half_snr_matrix(scenario, energy), scenario.snapshots);
    if (approx != 0.0) {
      rep.mu_relative_error[ti] = std::abs(exact - approx) / std::abs(approx);
    } else {
      rep.mu_relative_error[ti] = exact == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
  }

  rep.median_frobenius_error = median(rep.frobenius_error);
  rep.median_mu_error = median(rep.mu_relative_error);
  rep.max_frobenius_error =
      rep.frobenius_error.empty() ? 0.0
                                  : *std::max_element(rep.frobenius_error.begin(), rep.frobenius_error.end());
  return rep;
}

}  // namespace zzb
