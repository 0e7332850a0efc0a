#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zzb/numerics.hpp"

namespace zzb {

class InvalidScenario : public std::invalid_argument {
 public:
  explicit InvalidScenario(const std::string& what) : std::invalid_argument(what) {}
};

/// Element positions (metres) of a linear array and its carrier wavelength.
struct ArrayGeometry {
  std::vector<double> positions;
  double wavelength = 1.0;

  /// Positions (m−1)·λ/2 for m = 1..n.
  static ArrayGeometry half_wavelength_ula(std::size_t n, double wavelength = 1.0);

  std::size_t size() const { return positions.size(); }
  void validate() const;
};

/// One problem instance of the co-located MIMO radar DoA model.
///
/// The transmit covariance is stored as a shape Σ₀ with unit average diagonal
/// and an SNR σ_s²/σ_n², so that Σ = snr·σ_n²·Σ₀. Sweeps only touch `snr`.
struct Scenario {
  ArrayGeometry rx;  // M elements
  ArrayGeometry tx;  // N elements
  std::size_t num_targets = 1;
  std::size_t snapshots = 40;
  double noise_power = 1.0;
  double amplitude_variance = 0.5;  // σ_b² = E|b_k|²
  ComplexMatrix tx_shape;           // Σ₀, N×N, unit average diagonal
  double snr = 1.0;                 // σ_s²/σ_n², linear
  double prior_min = -1.0;          // radians
  double prior_max = 1.0;

  std::size_t rx_size() const { return rx.size(); }
  std::size_t tx_size() const { return tx.size(); }
  double zeta() const { return prior_max - prior_min; }
  double signal_power() const { return snr * noise_power; }

  /// Σ = snr·σ_n²·Σ₀.
  ComplexMatrix tx_covariance() const;
  /// Splits an arbitrary Hermitian PSD Σ into shape and SNR.
  void set_tx_covariance(const ComplexMatrix& sigma);
  Scenario at_snr(double linear_snr) const;

  /// Throws InvalidScenario naming the first violated invariant.
  void validate() const;
};

/// Half-wavelength ULAs on both sides with Σ₀ = I_N.
Scenario make_ula_scenario(std::size_t rx_elements, std::size_t tx_elements,
                           std::size_t num_targets, double prior_min, double prior_max,
                           double snr = 1.0);

/// One realization of the target reflection coefficients.
struct AmplitudeDraw {
  std::vector<cplx> values;

  double frobenius_sq() const;
  ComplexMatrix diag() const;

  /// b_k = √σ_b² for all k: the deterministic plug-in with ‖B‖_F² = K·σ_b².
  static AmplitudeDraw plug_in(std::size_t k, double amplitude_variance);
  /// b ~ CN(0, σ_b² I_K).
  static AmplitudeDraw sample(std::size_t k, double amplitude_variance, std::mt19937_64& rng);
};

/// a(θ)_m = exp(−j·2π/λ·d_m·sin θ).
ComplexVector steering_vector(double theta, const ArrayGeometry& geometry);

ComplexMatrix steering_matrix(std::span<const double> thetas, const ArrayGeometry& geometry);

/// ∂A/∂θ_i; only column i is nonzero. `i` is zero-based.
ComplexMatrix steering_derivative(std::span<const double> thetas, const ArrayGeometry& geometry,
                                  std::size_t i);

/// v(θ)ᵀ Σ v(θ)*, the transmit power illuminating direction θ.
double transmit_gain(double theta, const Scenario& scenario);

/// R̄ = σ_b²·Σ_k (v_kᵀΣv_k*)·a_k a_k† + σ_n² I, i.e. R averaged over the amplitudes.
HermitianPD mean_snapshot_covariance(std::span<const double> thetas, const Scenario& scenario);

/// R = A B Vᵀ Σ V* B† A† + σ_n² I for a realized amplitude vector.
HermitianPD conditional_snapshot_covariance(std::span<const double> thetas,
                                            const Scenario& scenario, const AmplitudeDraw& b);

/// ∂R/∂θ_i of the conditional covariance by the four-term product rule.
ComplexMatrix covariance_derivative(std::span<const double> thetas, const Scenario& scenario,
                                    const AmplitudeDraw& b, std::size_t i);

/// ∂R̄/∂θ_i of the amplitude-averaged covariance.
ComplexMatrix mean_covariance_derivative(std::span<const double> thetas, const Scenario& scenario,
                                         std::size_t i);

}  // namespace zzb
