#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zzb/numerics.hpp"
#include "zzb/radar_model.hpp"

namespace zzb {

class SingularFisher : public std::runtime_error {
 public:
  explicit SingularFisher(const std::string& what) : std::runtime_error(what) {}
};

class AllDrawsRejected : public std::runtime_error {
 public:
  explicit AllDrawsRejected(const std::string& what) : std::runtime_error(what) {}
};

/// Condition-number ceiling above which a Fisher matrix is treated as degenerate.
inline constexpr double kMaxFisherCondition = 1e12;
/// Prior draws with two targets closer than this (radians, 0.1°) are rejected.
inline constexpr double kMinTargetSeparation = 0.1 * 3.14159265358979323846 / 180.0;

/// J_ij = L·Re tr{R⁻¹ ∂R/∂θ_i R⁻¹ ∂R/∂θ_j}.
struct FisherMatrix {
  RealMatrix entries;
  std::vector<double> theta;
  std::size_t snapshots = 0;
  double max_imag_residual = 0.0;  // largest |Im tr{…}| seen while filling the entries
};

struct CrbSummary {
  double trace_inv = 0.0;  // tr(J⁻¹)
  double quad_form = 0.0;  // 1ᵀJ⁻¹1
  double condition_estimate = 0.0;
  bool valid = false;
  RealMatrix inverse;
};

/// Fisher matrix from a covariance and its per-angle derivatives.
FisherMatrix fisher_from_derivatives(const HermitianPD& r, std::span<const ComplexMatrix> derivatives,
                                     std::size_t snapshots);

/// Fisher matrix of the amplitude-averaged Gaussian snapshot model.
FisherMatrix fisher_matrix(std::span<const double> thetas, const Scenario& scenario);

/// Fisher matrix of the model conditioned on one amplitude realization.
FisherMatrix fisher_matrix(std::span<const double> thetas, const Scenario& scenario,
                           const AmplitudeDraw& b);

/// Inverts J through its eigendecomposition. Throws SingularFisher when J has no
/// positive eigenvalue or an exactly zero one; marks the summary invalid when the
/// condition estimate exceeds kMaxFisherCondition.
CrbSummary crb_summary(const FisherMatrix& fisher);
CrbSummary crb_summary(std::span<const double> thetas, const Scenario& scenario);

/// Angle vectors drawn from the uniform prior, one row per sample.
struct PriorSamples {
  std::size_t num_targets = 0;
  std::vector<std::vector<double>> thetas;
  std::size_t size() const { return thetas.size(); }
};

/// Latin-hypercube draws on [ϑ_min, ϑ_max]^K: each dimension is cut into `count`
/// equal-probability strata, one point per stratum, strata shuffled independently per
/// dimension. Each sample is sorted ascending.
PriorSamples draw_prior_samples(const Scenario& scenario, std::size_t count, std::uint64_t seed);

/// Single degenerate "prior" at θ₀, used for fixed-angle evaluation.
PriorSamples fixed_samples(std::span<const double> thetas);

/// Prior averages of tr(J⁻¹) and 1ᵀJ⁻¹1 over accepted draws.
struct CrbAverage {
  double mean_trace_inv = 0.0;
  double mean_quad_form = 0.0;
  std::size_t num_targets = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;

  /// (1/K)·E[tr J⁻¹]
  double expected_crb() const { return mean_trace_inv / static_cast<double>(num_targets); }
  double rejection_rate() const {
    return static_cast<double>(rejected) / static_cast<double>(accepted + rejected);
  }
};

/// OpenMP over samples; throws AllDrawsRejected when nothing survives.
CrbAverage average_crb(const Scenario& scenario, const PriorSamples& samples);

/// (1/K)·tr E_θ[J⁻¹(θ)] by stratified Monte Carlo over the prior.
double expected_crb(const Scenario& scenario, std::size_t samples, std::uint64_t seed);

namespace detail {

struct SampleCrb {
  bool accepted = false;
  double trace_inv = 0.0;
  double quad_form = 0.0;
};

/// Evaluates one prior draw, applying the separation and conditioning rejections.
SampleCrb evaluate_prior_sample(std::span<const double> thetas, const Scenario& scenario);

}  // namespace detail

}  // namespace zzb
