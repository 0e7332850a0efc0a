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

class GridTooCoarse : public std::invalid_argument {
 public:
  explicit GridTooCoarse(const std::string& what) : std::invalid_argument(what) {}
};

inline constexpr double kDefaultGridStep = 0.2 * 3.14159265358979323846 / 180.0;

/// One observation X = A B Vᵀ Φ + Z (M×L) and the truth that produced it.
struct SnapshotBlock {
  ComplexMatrix data;
  std::vector<double> true_thetas;  // ascending
  AmplitudeDraw amplitudes;
  std::uint64_t seed = 0;
};

struct TrialResult {
  std::vector<double> estimated_thetas;  // ascending
  std::vector<double> squared_error;     // (θ̂_(k) − θ_(k))²
  double log_likelihood = 0.0;
};

/// Draws b ~ CN(0, σ_b² I), Φ columns ~ CN(0, Σ), Z entries ~ CN(0, σ_n²).
SnapshotBlock synthesize(const Scenario& scenario, std::span<const double> thetas, std::uint64_t seed);

/// Ŝ = X X† / L.
ComplexMatrix sample_covariance(const ComplexMatrix& x);

/// Stochastic-ML objective −L[ln|R̄(θ)| + tr(R̄(θ)⁻¹Ŝ)] with the amplitude-averaged
/// covariance, evaluated through the K×K Woodbury reduction.
double sml_objective(std::span<const double> thetas, const ComplexMatrix& s_hat, const Scenario& scenario);

/// Precomputed grid for the SML search: steering Gram matrices A_g†A_g and A_g†ŜA_g
/// and per-angle reflected powers, so each candidate costs O(K³).
class SmlGrid {
 public:
  SmlGrid(const ComplexMatrix& s_hat, const Scenario& scenario, double grid_step);

  std::size_t size() const { return angles_.size(); }
  double angle(std::size_t i) const { return angles_[i]; }
  double step() const { return step_; }
  double objective(std::span<const std::size_t> idx) const;

 private:
  std::vector<double> angles_;
  std::vector<double> power_;  // σ_b²·v(θ)ᵀΣv(θ)*
  ComplexMatrix gram_a_;
  ComplexMatrix gram_s_;
  double trace_s_ = 0.0;
  double noise_ = 1.0;
  std::size_t rx_ = 0;
  std::size_t snapshots_ = 1;
  double step_ = 0.0;
};

/// Grid-search SML estimate. K ≤ 2: exhaustive search over θ₁ ≤ θ₂; K ≥ 3:
/// coordinate-wise ascent from 8 random restarts. Ties go to the smaller angle.
/// One parabolic refinement per coordinate around the best cell.
TrialResult ml_estimate(const SnapshotBlock& block, const Scenario& scenario,
                        double grid_step = kDefaultGridStep);

struct MseEstimate {
  double mse = 0.0;
  double stderr_ = 0.0;
  std::size_t trials = 0;
};

/// Order-statistic MSE (1/K)·Σ_k E[(θ̂_(k) − θ_(k))²] over `trials` prior draws.
MseEstimate simulate_mse(const Scenario& scenario, double snr, std::size_t trials,
                         double grid_step, std::uint64_t seed);

namespace detail {

/// Per-trial error, identical whichever thread runs it.
double trial_error(const Scenario& scenario_at_snr, std::size_t trial, double grid_step,
                   std::uint64_t seed);

MseEstimate summarize_errors(std::span<const double> errors);

}  // namespace detail

}  // namespace zzb
