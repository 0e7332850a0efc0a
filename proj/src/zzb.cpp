#include "zzb/zzb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zzb/parallel.hpp"

namespace zzb {

double ZzbDiagnostics::value() const {
  if (gamma_term == 0.0) return apriori_term;
  return apriori_term + crb_term * gamma_term;
}

HTilde h_tilde(double quad_form, double alpha, std::size_t k, double zeta) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("h_tilde: alpha must be non-negative");
  if (!(zeta > 0.0)) throw std::invalid_argument("h_tilde: zeta must be positive");
  const double kd = static_cast<double>(k);
  const double cap = std::sqrt(kd) * zeta;
  const double free = std::sqrt(quad_form * alpha / kd);
  if (free < cap) return {free, false};
  return {cap, true};
}

HTilde h_tilde(const CrbSummary& crb, double alpha, std::size_t k, double zeta) {
  if (!crb.valid) throw InvalidCrb("h_tilde: CRB summary is flagged invalid");
  return h_tilde(crb.quad_form, alpha, k, zeta);
}

double apb(std::size_t k, double zeta) {
  const double kd = static_cast<double>(k);
  return kd * zeta * zeta / ((kd + 1.0) * (kd + 1.0) * (kd + 2.0));
}

ZzbResult zzb_from_terms(const Scenario& scenario, const CrbAverage& crb, const LargeErrorTerms& large) {
  const std::size_t k = scenario.num_targets;
  const double kd = static_cast<double>(k);
  const double zeta = scenario.zeta();

  ZzbDiagnostics d;
  d.p_large = large.p_large;
  d.alpha_g = large.alpha_g;
  d.apriori_term = 2.0 * large.p_large * apb(k, zeta);
  d.crb_term = crb.expected_crb();
  d.crb_rejection_rate = crb.rejection_rate();

  const HTilde h = h_tilde(crb.mean_quad_form, large.alpha_g, k, zeta);
  d.h_tilde = h.value;
  d.capped = h.capped;
  // On the uncapped branch K·h̃²/(8·1ᵀJ⁻¹1) reduces to α_G/8.
  d.u_tilde = h.capped ? kd * h.value * h.value / (8.0 * crb.mean_quad_form) : large.alpha_g / 8.0;
  d.gamma_term = gamma_32(d.u_tilde);
  d.pre_permutation_value = large.p_large * kd * zeta * zeta / ((kd + 1.0) * (kd + 2.0)) +
                            (d.gamma_term == 0.0 ? 0.0 : d.gamma_term * d.crb_term);
  return {d.value(), d};
}

namespace {

// Zero signal power leaves J ≡ 0; the bound is then the a-priori term alone.
ZzbResult zero_snr_result(const Scenario& s, const LargeErrorTerms& large) {
  ZzbDiagnostics d;
  d.p_large = large.p_large;
  d.alpha_g = large.alpha_g;
  d.apriori_term = 2.0 * large.p_large * apb(s.num_targets, s.zeta());
  d.crb_term = std::numeric_limits<double>::infinity();
  d.gamma_term = 0.0;
  d.capped = true;
  d.h_tilde = std::sqrt(static_cast<double>(s.num_targets)) * s.zeta();
  const double kd = static_cast<double>(s.num_targets);
  d.pre_permutation_value = large.p_large * kd * s.zeta() * s.zeta() / ((kd + 1.0) * (kd + 2.0));
  return {d.value(), d};
}

bool signal_free(const Scenario& s) { return s.snr == 0.0 || s.amplitude_variance == 0.0; }

}  // namespace

ZzbResult zzb(const Scenario& scenario, double snr, const PriorSamples& samples,
              const AmplitudeConvention& amplitude) {
  if (!(snr >= 0.0)) throw std::invalid_argument("zzb: snr must be non-negative");
  const Scenario s = scenario.at_snr(snr);
  s.validate();
  const LargeErrorTerms large = large_error_terms(s, amplitude);
  if (signal_free(s)) return zero_snr_result(s, large);
  return zzb_from_terms(s, average_crb(s, samples), large);
}

ZzbResult zzb(const Scenario& scenario, double snr, const ZzbOptions& options) {
  if (options.fixed_theta) return zzb(scenario, snr, fixed_samples(*options.fixed_theta), options.amplitude);
  return zzb(scenario, snr, draw_prior_samples(scenario, options.crb_samples, options.seed),
             options.amplitude);
}

double averaged_error_probability(const Scenario& scenario, double h, std::size_t phi_points) {
  if (scenario.num_targets != 1)
    throw std::invalid_argument("averaged_error_probability: single-target scenarios only");
  const AmplitudeDraw b = AmplitudeDraw::plug_in(1, scenario.amplitude_variance);
  const double span = std::max(scenario.zeta() - h, 0.0);
  const std::size_t n = std::max<std::size_t>(phi_points, 2);
  std::vector<double> pe(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double phi = scenario.prior_min + span * static_cast<double>(j) / static_cast<double>(n - 1);
    const double shifted = phi + h;
    const HermitianPD r0 = conditional_snapshot_covariance(std::span<const double>(&phi, 1), scenario, b);
    const HermitianPD r1 = conditional_snapshot_covariance(std::span<const double>(&shifted, 1), scenario, b);
    const ExactChernoff c = exact_chernoff(r0, r1, scenario.snapshots);
    pe[j] = std::exp(log_error_probability_bound(c.mu_half, c.mu_ddot_half));
  }
  return pairwise_sum(pe) / static_cast<double>(n);
}

namespace {

// Integrand in t with h = ζt²: P̄_e(h)(1 − h/ζ)·h·dh/dt.
double exact_integrand(const Scenario& s, double t) {
  const double zeta = s.zeta();
  const double h = zeta * t * t;
  if (t <= 0.0) return 0.0;
  return averaged_error_probability(s, h) * (1.0 - t * t) * h * 2.0 * zeta * t;
}

double simpson(std::span<const double> f, double step) {
  const std::size_t n = f.size() - 1;
  std::vector<double> w(f.size());
  for (std::size_t i = 0; i <= n; ++i) {
    const double c = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w[i] = c * f[i];
  }
  return pairwise_sum(w) * step / 3.0;
}

}  // namespace

ExactZzb zzb_exact_1d(const Scenario& scenario, std::size_t quadrature_points) {
  if (scenario.num_targets != 1) throw std::invalid_argument("zzb_exact_1d: requires K = 1");
  if (quadrature_points < 64) throw std::invalid_argument("zzb_exact_1d: need >= 64 quadrature points");
  scenario.validate();
  constexpr std::size_t kMaxIntervals = std::size_t{1} << 16;
  constexpr double kRelTol = 1e-4;

  std::size_t n = quadrature_points + (quadrature_points % 2);
  std::vector<double> f(n + 1);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i <= static_cast<std::ptrdiff_t>(n); ++i)
    f[static_cast<std::size_t>(i)] = exact_integrand(scenario, static_cast<double>(i) / static_cast<double>(n));
  double previous = simpson(f, 1.0 / static_cast<double>(n));

  while (2 * n <= kMaxIntervals) {
    const std::size_t m = 2 * n;
    std::vector<double> g(m + 1);
    for (std::size_t i = 0; i <= n; ++i) g[2 * i] = f[i];
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      const std::size_t idx = 2 * static_cast<std::size_t>(i) + 1;
      g[idx] = exact_integrand(scenario, static_cast<double>(idx) / static_cast<double>(m));
    }
    const double current = simpson(g, 1.0 / static_cast<double>(m));
    f = std::move(g);
    n = m;
    if (std::abs(current - previous) <= kRelTol * std::abs(current)) return {current, n};
    previous = current;
  }
  throw QuadratureNotConverged("zzb_exact_1d: no convergence within " + std::to_string(kMaxIntervals) +
                               " intervals");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }

std::uint64_t scenario_fingerprint(const Scenario& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix_bytes = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  auto mix = [&](double x) { mix_bytes(&x, sizeof x); };
  auto mix_size = [&](std::size_t x) {
    const std::uint64_t v = x;
    mix_bytes(&v, sizeof v);
  };
  for (const auto* g : {&s.rx, &s.tx}) {
    mix_size(g->size());
    for (double p : g->positions) mix(p);
    mix(g->wavelength);
  }
  mix_size(s.num_targets);
  mix_size(s.snapshots);
  mix(s.noise_power);
  mix(s.amplitude_variance);
  mix(s.prior_min);
  mix(s.prior_max);
  for (Eigen::Index j = 0; j < s.tx_shape.cols(); ++j)
    for (Eigen::Index i = 0; i < s.tx_shape.rows(); ++i) {
      mix(s.tx_shape(i, j).real());
      mix(s.tx_shape(i, j).imag());
    }
  return h;
}

BoundCurve bound_curve(const Scenario& scenario, std::span<const double> snr_grid_db,
                       const ZzbOptions& options) {
  if (snr_grid_db.empty()) throw std::invalid_argument("bound_curve: empty SNR grid");
  for (std::size_t i = 1; i < snr_grid_db.size(); ++i)
    if (!(snr_grid_db[i] > snr_grid_db[i - 1]))
      throw std::invalid_argument("bound_curve: SNR grid must be strictly increasing");

  const PriorSamples samples = options.fixed_theta
                                   ? fixed_samples(*options.fixed_theta)
                                   : draw_prior_samples(scenario, options.crb_samples, options.seed);
  BoundCurve c;
  c.apb = apb(scenario.num_targets, scenario.zeta());
  c.fingerprint = scenario_fingerprint(scenario);
  for (double db : snr_grid_db) {
    const double snr = db_to_linear(db);
    const ZzbResult r = zzb(scenario, snr, samples, options.amplitude);
    c.snr_db.push_back(db);
    c.snr_linear.push_back(snr);
    c.zzb.push_back(r.value);
    c.expected_crb.push_back(r.diagnostics.crb_term);
    c.diagnostics.push_back(r.diagnostics);
  }
  return c;
}

}  // namespace zzb
