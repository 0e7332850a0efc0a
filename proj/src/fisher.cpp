#include "zzb/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include "zzb/parallel.hpp"

namespace zzb {

FisherMatrix fisher_from_derivatives(const HermitianPD& r, std::span<const ComplexMatrix> derivatives,
                                     std::size_t snapshots) {
  const auto k = static_cast<Eigen::Index>(derivatives.size());
  std::vector<ComplexMatrix> x;
  x.reserve(derivatives.size());
  for (const auto& d : derivatives) x.push_back(solve_hpd(r, d));  // R⁻¹ ∂R_i

  FisherMatrix f;
  f.snapshots = snapshots;
  f.entries.resize(k, k);
  const double l = static_cast<double>(snapshots);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      const auto& xi = x[static_cast<std::size_t>(i)];
      const auto& xj = x[static_cast<std::size_t>(j)];
      const cplx t = (xi.array() * xj.transpose().array()).sum();
      f.entries(i, j) = l * t.real();
      f.entries(j, i) = f.entries(i, j);
      f.max_imag_residual = std::max(f.max_imag_residual, l * std::abs(t.imag()));
    }
  }
  return f;
}

FisherMatrix fisher_matrix(std::span<const double> thetas, const Scenario& scenario) {
  const HermitianPD r = mean_snapshot_covariance(thetas, scenario);
  std::vector<ComplexMatrix> d;
  d.reserve(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i)
    d.push_back(mean_covariance_derivative(thetas, scenario, i));
  FisherMatrix f = fisher_from_derivatives(r, d, scenario.snapshots);
  f.theta.assign(thetas.begin(), thetas.end());
  return f;
}

FisherMatrix fisher_matrix(std::span<const double> thetas, const Scenario& scenario,
                           const AmplitudeDraw& b) {
  const HermitianPD r = conditional_snapshot_covariance(thetas, scenario, b);
  std::vector<ComplexMatrix> d;
  d.reserve(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i)
    d.push_back(covariance_derivative(thetas, scenario, b, i));
  FisherMatrix f = fisher_from_derivatives(r, d, scenario.snapshots);
  f.theta.assign(thetas.begin(), thetas.end());
  return f;
}

CrbSummary crb_summary(const FisherMatrix& fisher) {
  const RealMatrix& j = fisher.entries;
  const Eigen::Index k = j.rows();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(j, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmax > 0.0) || lmin == 0.0) throw SingularFisher("Fisher matrix is singular");

  CrbSummary s;
  if (lmin < 0.0) {
    s.condition_estimate = std::numeric_limits<double>::infinity();
    s.trace_inv = std::numeric_limits<double>::infinity();
    s.quad_form = std::numeric_limits<double>::infinity();
    s.valid = false;
    return s;
  }
  s.condition_estimate = lmax / lmin;
  s.inverse = j.ldlt().solve(RealMatrix::Identity(k, k));
  s.inverse = (0.5 * (s.inverse + s.inverse.transpose())).eval();
  s.trace_inv = s.inverse.trace();
  s.quad_form = s.inverse.sum();
  s.valid = s.condition_estimate <= kMaxFisherCondition && s.trace_inv > 0.0 && s.quad_form > 0.0;
  return s;
}

CrbSummary crb_summary(std::span<const double> thetas, const Scenario& scenario) {
  return crb_summary(fisher_matrix(thetas, scenario));
}

PriorSamples draw_prior_samples(const Scenario& scenario, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("draw_prior_samples: need at least one sample");
  const std::size_t k = scenario.num_targets;
  PriorSamples out;
  out.num_targets = k;
  out.thetas.assign(count, std::vector<double>(k));
  const double lo = scenario.prior_min;
  const double width = scenario.zeta();
  const double n = static_cast<double>(count);

  for (std::size_t d = 0; d < k; ++d) {
    std::mt19937_64 perm_rng(derive_seed(seed, d));
    std::vector<std::size_t> strata(count);
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    for (std::size_t i = count - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(unit_uniform(perm_rng) * static_cast<double>(i + 1));
      std::swap(strata[i], strata[std::min(j, i)]);
    }
    for (std::size_t s = 0; s < count; ++s) {
      std::mt19937_64 rng(derive_seed(seed ^ 0xa5a5a5a5a5a5a5a5ULL, s * k + d));
      const double u = (static_cast<double>(strata[s]) + unit_uniform(rng)) / n;
      out.thetas[s][d] = lo + width * u;
    }
  }
  for (auto& t : out.thetas) std::sort(t.begin(), t.end());
  return out;
}

PriorSamples fixed_samples(std::span<const double> thetas) {
  PriorSamples out;
  out.num_targets = thetas.size();
  out.thetas.emplace_back(thetas.begin(), thetas.end());
  return out;
}

namespace detail {

SampleCrb evaluate_prior_sample(std::span<const double> thetas, const Scenario& scenario) {
  std::vector<double> sorted(thetas.begin(), thetas.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] - sorted[i - 1] < kMinTargetSeparation) return {};
  try {
    const CrbSummary s = crb_summary(thetas, scenario);
    if (!s.valid) return {};
    return {true, s.trace_inv, s.quad_form};
  } catch (const SingularFisher&) {
    return {};
  }
}

}  // namespace detail

CrbAverage average_crb(const Scenario& scenario, const PriorSamples& samples) {
  const std::size_t n = samples.size();
  std::vector<double> trace(n, 0.0), quad(n, 0.0);
  std::vector<unsigned char> ok(n, 0);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(n); ++s) {
    try {
      const auto r = detail::evaluate_prior_sample(samples.thetas[static_cast<std::size_t>(s)], scenario);
      trace[static_cast<std::size_t>(s)] = r.trace_inv;
      quad[static_cast<std::size_t>(s)] = r.quad_form;
      ok[static_cast<std::size_t>(s)] = r.accepted ? 1 : 0;
    } catch (...) {
#pragma omp critical(zzb_crb_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  CrbAverage avg;
  avg.num_targets = samples.num_targets;
  avg.accepted = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
  avg.rejected = n - avg.accepted;
  if (avg.accepted == 0) throw AllDrawsRejected("every prior draw was rejected for the CRB average");
  const double a = static_cast<double>(avg.accepted);
  avg.mean_trace_inv = pairwise_sum(trace) / a;
  avg.mean_quad_form = pairwise_sum(quad) / a;
  return avg;
}

double expected_crb(const Scenario& scenario, std::size_t samples, std::uint64_t seed) {
  return average_crb(scenario, draw_prior_samples(scenario, samples, seed)).expected_crb();
}

}  // namespace zzb
