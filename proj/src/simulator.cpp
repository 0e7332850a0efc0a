#include "zzb/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include "zzb/parallel.hpp"

namespace zzb {

namespace {

ComplexMatrix circular_gaussian(Eigen::Index rows, Eigen::Index cols, double variance,
                                std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
  ComplexMatrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(i, j) = cplx{re, im};
    }
  return out;
}

ComplexMatrix psd_sqrt(const ComplexMatrix& sigma) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sigma);
  const RealVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

// Woodbury pieces for R̄ = σ²I + A P A†: C = I + P½(A†A)P½/σ², W = P½(A†ŜA)P½/σ².
double woodbury_objective(const ComplexMatrix& gram_a, const ComplexMatrix& gram_s,
                          std::span<const double> power, double trace_s, double noise,
                          std::size_t rx, std::size_t snapshots) {
  const auto k = gram_a.rows();
  RealVector root(k);
  for (Eigen::Index i = 0; i < k; ++i) root(i) = std::sqrt(power[static_cast<std::size_t>(i)]);
  const ComplexMatrix scale = root.cast<cplx>().asDiagonal();
  ComplexMatrix c = scale * gram_a * scale / noise;
  c.diagonal().array() += 1.0;
  const ComplexMatrix w = scale * gram_s * scale / noise;
  Eigen::LLT<ComplexMatrix> llt(c);
  const double logdet_c = 2.0 * llt.matrixLLT().diagonal().real().array().log().sum();
  const double logdet_r = static_cast<double>(rx) * std::log(noise) + logdet_c;
  const double tr = (trace_s - llt.solve(w).trace().real()) / noise;
  return -static_cast<double>(snapshots) * (logdet_r + tr);
}

}  // namespace

SnapshotBlock synthesize(const Scenario& scenario, std::span<const double> thetas, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SnapshotBlock block;
  block.seed = seed;
  block.true_thetas.assign(thetas.begin(), thetas.end());
  std::sort(block.true_thetas.begin(), block.true_thetas.end());

  const auto m = static_cast<Eigen::Index>(scenario.rx_size());
  const auto n = static_cast<Eigen::Index>(scenario.tx_size());
  const auto l = static_cast<Eigen::Index>(scenario.snapshots);

  block.amplitudes = AmplitudeDraw::sample(block.true_thetas.size(), scenario.amplitude_variance, rng);
  const ComplexMatrix phi = psd_sqrt(scenario.tx_covariance()) * circular_gaussian(n, l, 1.0, rng);
  const ComplexMatrix noise = circular_gaussian(m, l, scenario.noise_power, rng);

  const ComplexMatrix a = steering_matrix(block.true_thetas, scenario.rx);
  const ComplexMatrix v = steering_matrix(block.true_thetas, scenario.tx);
  block.data = a * block.amplitudes.diag() * v.transpose() * phi + noise;
  return block;
}

ComplexMatrix sample_covariance(const ComplexMatrix& x) {
  return x * x.adjoint() / static_cast<double>(x.cols());
}

double sml_objective(std::span<const double> thetas, const ComplexMatrix& s_hat, const Scenario& scenario) {
  const ComplexMatrix a = steering_matrix(thetas, scenario.rx);
  std::vector<double> power(thetas.size());
  for (std::size_t k = 0; k < thetas.size(); ++k)
    power[k] = scenario.amplitude_variance * transmit_gain(thetas[k], scenario);
  return woodbury_objective(a.adjoint() * a, a.adjoint() * s_hat * a, power, s_hat.trace().real(),
                            scenario.noise_power, scenario.rx_size(), scenario.snapshots);
}

SmlGrid::SmlGrid(const ComplexMatrix& s_hat, const Scenario& scenario, double grid_step)
    : trace_s_(s_hat.trace().real()),
      noise_(scenario.noise_power),
      rx_(scenario.rx_size()),
      snapshots_(scenario.snapshots),
      step_(grid_step) {
  if (!(grid_step > 0.0)) throw GridTooCoarse("grid step must be positive");
  if (grid_step > scenario.zeta() / 10.0)
    throw GridTooCoarse("grid step exceeds a tenth of the prior width");
  const auto count = static_cast<std::size_t>(std::floor(scenario.zeta() / grid_step + 1e-9)) + 1;
  angles_.resize(count);
  power_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    angles_[i] = scenario.prior_min + grid_step * static_cast<double>(i);
    power_[i] = scenario.amplitude_variance * transmit_gain(angles_[i], scenario);
  }
  const ComplexMatrix a = steering_matrix(angles_, scenario.rx);
  gram_a_ = a.adjoint() * a;
  gram_s_ = a.adjoint() * s_hat * a;
}

double SmlGrid::objective(std::span<const std::size_t> idx) const {
  const auto k = static_cast<Eigen::Index>(idx.size());
  ComplexMatrix ga(k, k), gs(k, k);
  std::vector<double> p(idx.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    p[static_cast<std::size_t>(i)] = power_[idx[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto gi = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]);
      const auto gj = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]);
      ga(i, j) = gram_a_(gi, gj);
      gs(i, j) = gram_s_(gi, gj);
    }
  }
  return woodbury_objective(ga, gs, p, trace_s_, noise_, rx_, snapshots_);
}

namespace {

struct GridOptimum {
  std::vector<std::size_t> idx;
  double value = -std::numeric_limits<double>::infinity();
};

GridOptimum exhaustive_search(const SmlGrid& grid, std::size_t k) {
  GridOptimum best;
  const std::size_t n = grid.size();
  if (k == 1) {
    std::size_t i0 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx[1] = {i};
      const double f = grid.objective(idx);
      if (f > best.value) {
        best.value = f;
        i0 = i;
      }
    }
    best.idx = {i0};
    return best;
  }
  std::size_t b0 = 0, b1 = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const std::size_t idx[2] = {i, j};
      const double f = grid.objective(idx);
      if (f > best.value) {
        best.value = f;
        b0 = i;
        b1 = j;
      }
    }
  best.idx = {b0, b1};
  return best;
}

GridOptimum coordinate_search(const SmlGrid& grid, std::size_t k, std::uint64_t seed) {
  constexpr std::size_t kRestarts = 8;
  constexpr int kMaxSweeps = 50;
  GridOptimum best;
  const std::size_t n = grid.size();
  for (std::size_t r = 0; r < kRestarts; ++r) {
    std::mt19937_64 rng(derive_seed(seed, 0x1000 + r));
    std::vector<std::size_t> idx(k);
    for (auto& i : idx) i = std::min(n - 1, static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)));
    std::sort(idx.begin(), idx.end());
    double current = grid.objective(idx);
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      bool moved = false;
      for (std::size_t c = 0; c < k; ++c) {
        std::size_t keep = idx[c];
        for (std::size_t g = 0; g < n; ++g) {
          idx[c] = g;
          const double f = grid.objective(idx);
          if (f > current) {
            current = f;
            keep = g;
            moved = true;
          }
        }
        idx[c] = keep;
      }
      if (!moved) break;
    }
    std::sort(idx.begin(), idx.end());
    if (current > best.value) {
      best.value = current;
      best.idx = idx;
    }
  }
  return best;
}

}  // namespace

TrialResult ml_estimate(const SnapshotBlock& block, const Scenario& scenario, double grid_step) {
  const std::size_t k = scenario.num_targets;
  const ComplexMatrix s_hat = sample_covariance(block.data);
  const SmlGrid grid(s_hat, scenario, grid_step);

  GridOptimum opt = k <= 2 ? exhaustive_search(grid, k) : coordinate_search(grid, k, block.seed);

  std::vector<double> est(k);
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t g = opt.idx[c];
    est[c] = grid.angle(g);
    if (g == 0 || g + 1 >= grid.size()) continue;
    std::vector<std::size_t> probe = opt.idx;
    probe[c] = g - 1;
    const double fm = grid.objective(probe);
    probe[c] = g + 1;
    const double fp = grid.objective(probe);
    const double f0 = opt.value;
    const double curvature = fm - 2.0 * f0 + fp;
    if (curvature < 0.0) {
      const double offset = std::clamp(0.5 * (fm - fp) / curvature, -0.5, 0.5);
      est[c] += offset * grid.step();
    }
  }
  std::sort(est.begin(), est.end());

  TrialResult r;
  r.estimated_thetas = est;
  r.squared_error.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double e = est[c] - block.true_thetas[c];
    r.squared_error[c] = e * e;
  }
  r.log_likelihood = sml_objective(est, s_hat, scenario);
  return r;
}

namespace detail {

double trial_error(const Scenario& scenario_at_snr, std::size_t trial, double grid_step,
                   std::uint64_t seed) {
  const std::uint64_t trial_seed = derive_seed(seed, trial);
  std::mt19937_64 rng(trial_seed);
  std::vector<double> thetas(scenario_at_snr.num_targets);
  for (auto& t : thetas) t = scenario_at_snr.prior_min + scenario_at_snr.zeta() * unit_uniform(rng);
  std::sort(thetas.begin(), thetas.end());
  const SnapshotBlock block = synthesize(scenario_at_snr, thetas, derive_seed(trial_seed, 1));
  const TrialResult r = ml_estimate(block, scenario_at_snr, grid_step);
  return pairwise_sum(r.squared_error) / static_cast<double>(r.squared_error.size());
}

MseEstimate summarize_errors(std::span<const double> errors) {
  MseEstimate out;
  out.trials = errors.size();
  const double n = static_cast<double>(errors.size());
  out.mse = pairwise_sum(errors) / n;
  std::vector<double> dev(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) dev[i] = (errors[i] - out.mse) * (errors[i] - out.mse);
  const double var = errors.size() > 1 ? pairwise_sum(dev) / (n - 1.0) : 0.0;
  out.stderr_ = std::sqrt(var / n);
  return out;
}

}  // namespace detail

MseEstimate simulate_mse(const Scenario& scenario, double snr, std::size_t trials, double grid_step,
                         std::uint64_t seed) {
  if (trials < 10) throw std::invalid_argument("simulate_mse: need at least 10 trials");
  const Scenario s = scenario.at_snr(snr);
  s.validate();
  std::vector<double> errors(trials);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(trials); ++t) {
    try {
      errors[static_cast<std::size_t>(t)] = detail::trial_error(s, static_cast<std::size_t>(t), grid_step, seed);
    } catch (...) {
#pragma omp critical(zzb_sim_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return detail::summarize_errors(errors);
}

}  // namespace zzb
