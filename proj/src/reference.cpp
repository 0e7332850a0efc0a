#include "zzb/reference.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "zzb/parallel.hpp"

namespace zzb::reference {

CrbAverage average_crb(const Scenario& scenario, const PriorSamples& samples) {
  const std::size_t n = samples.size();
  std::vector<double> trace(n, 0.0), quad(n, 0.0);
  CrbAverage avg;
  avg.num_targets = samples.num_targets;
  for (std::size_t s = 0; s < n; ++s) {
    const auto r = detail::evaluate_prior_sample(samples.thetas[s], scenario);
    if (r.accepted) {
      trace[s] = r.trace_inv;
      quad[s] = r.quad_form;
      ++avg.accepted;
    }
  }
  avg.rejected = n - avg.accepted;
  if (avg.accepted == 0) throw AllDrawsRejected("every prior draw was rejected for the CRB average");
  const double a = static_cast<double>(avg.accepted);
  avg.mean_trace_inv = pairwise_sum(trace) / a;
  avg.mean_quad_form = pairwise_sum(quad) / a;
  return avg;
}

MseEstimate simulate_mse(const Scenario& scenario, double snr, std::size_t trials, double grid_step,
                         std::uint64_t seed) {
  if (trials < 10) throw std::invalid_argument("simulate_mse: need at least 10 trials");
  const Scenario s = scenario.at_snr(snr);
  s.validate();
  std::vector<double> errors(trials);
  for (std::size_t t = 0; t < trials; ++t) errors[t] = detail::trial_error(s, t, grid_step, seed);
  return detail::summarize_errors(errors);
}

namespace {

double integrand(const Scenario& s, double t) {
  if (t <= 0.0) return 0.0;
  const double zeta = s.zeta();
  const double h = zeta * t * t;
  return averaged_error_probability(s, h) * (1.0 - t * t) * h * 2.0 * zeta * t;
}

double simpson(const std::vector<double>& f, double step) {
  const std::size_t n = f.size() - 1;
  std::vector<double> w(f.size());
  for (std::size_t i = 0; i <= n; ++i)
    w[i] = ((i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0)) * f[i];
  return pairwise_sum(w) * step / 3.0;
}

}  // namespace

ExactZzb zzb_exact_1d(const Scenario& scenario, std::size_t quadrature_points) {
  if (scenario.num_targets != 1) throw std::invalid_argument("zzb_exact_1d: requires K = 1");
  if (quadrature_points < 64) throw std::invalid_argument("zzb_exact_1d: need >= 64 quadrature points");
  scenario.validate();
  constexpr std::size_t kMaxIntervals = std::size_t{1} << 16;

  std::size_t n = quadrature_points + (quadrature_points % 2);
  std::vector<double> f(n + 1);
  for (std::size_t i = 0; i <= n; ++i) f[i] = integrand(scenario, static_cast<double>(i) / static_cast<double>(n));
  double previous = simpson(f, 1.0 / static_cast<double>(n));
  while (2 * n <= kMaxIntervals) {
    const std::size_t m = 2 * n;
    std::vector<double> g(m + 1);
    for (std::size_t i = 0; i <= m; ++i)
      g[i] = i % 2 == 0 ? f[i / 2] : integrand(scenario, static_cast<double>(i) / static_cast<double>(m));
    const double current = simpson(g, 1.0 / static_cast<double>(m));
    f = std::move(g);
    n = m;
    if (std::abs(current - previous) <= 1e-4 * std::abs(current)) return {current, n};
    previous = current;
  }
  throw QuadratureNotConverged("zzb_exact_1d: no convergence within " + std::to_string(kMaxIntervals) +
                               " intervals");
}

}  // namespace zzb::reference
