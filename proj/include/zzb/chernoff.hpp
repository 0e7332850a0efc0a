#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "zzb/fisher.hpp"
#include "zzb/numerics.hpp"
#include "zzb/radar_model.hpp"

namespace zzb {

/// H₀: θ = φ against H₁: θ = φ + δ.
struct HypothesisPair {
  std::vector<double> phi;
  std::vector<double> delta;

  std::vector<double> phi_plus_delta() const;
};

struct ChernoffTerms {
  double mu_half = 0.0;       // μ(½; δ) ≤ 0
  double mu_ddot_half = 0.0;  // μ̈(½; δ) ≥ 0
  double alpha_g = 0.0;
  double p_large = 0.5;
  bool in_delta_region = true;
};

/// Semi-invariant MGF of L i.i.d. zero-mean complex Gaussian snapshots:
/// μ(s) = L[s ln|R₀| + (1−s) ln|R₁| − ln|sR₀ + (1−s)R₁|].
double mu_exact(const HermitianPD& r0, const HermitianPD& r1, std::size_t snapshots, double s);

struct ExactChernoff {
  double mu_half = 0.0;
  double mu_ddot_half = 0.0;
};

/// μ(½) = L[½ ln(|R₀||R₁|) − ln|R₊/2|] and μ̈(½) = 4L tr{(R₊⁻¹R₋)²}, sharing one factorization of R₊.
ExactChernoff exact_chernoff(const HermitianPD& r0, const HermitianPD& r1, std::size_t snapshots);

double mu_half_exact(const HypothesisPair& pair, const Scenario& scenario, const AmplitudeDraw& b);
double mu_ddot_half_exact(const HypothesisPair& pair, const Scenario& scenario,
                          const AmplitudeDraw& b);

/// ln of exp{μ + μ̈/8}·Q(√μ̈/2), the Chernoff-type lower bound on the minimum error probability.
double log_error_probability_bound(double mu_half, double mu_ddot_half);

/// ‖B‖_F² under the deterministic plug-in convention: K·σ_b².
double plug_in_energy(const Scenario& scenario);

/// α_G for a given ‖B‖_F². With Y = (M‖B‖_F²/(2σ_n²))·Σ this equals
/// 8L·tr{[Y(I+Y)⁻¹]²}, which is how it is evaluated.
double alpha_g(const Scenario& scenario, double energy);
double alpha_g(const Scenario& scenario);

/// ln P_L = L[ln|I + 2Y| − 2 ln|I + Y|] + α_G/8 + ln Q(√α_G/2).
double log_p_large(const Scenario& scenario, double energy);
double p_large(const Scenario& scenario, double energy);
double p_large(const Scenario& scenario);

/// How ‖B‖_F² enters α_G and P_L.
struct AmplitudeConvention {
  enum class Kind { plug_in, average };
  Kind kind = Kind::plug_in;
  std::size_t draws = 256;  // average mode only
  std::uint64_t seed = 1;
};

struct LargeErrorTerms {
  double alpha_g = 0.0;
  double p_large = 0.5;
};

/// Plug-in, or the Monte Carlo mean of α_G and P_L over amplitude draws.
LargeErrorTerms large_error_terms(const Scenario& scenario, const AmplitudeConvention& convention);

/// δᵀJδ, clamped at zero.
double quadratic_form(std::span<const double> delta, const FisherMatrix& fisher);

/// P_S(δ) = Q(½√(δᵀJδ)).
double p_small(std::span<const double> delta, const FisherMatrix& fisher);

/// δ ∈ Δ ⇔ δᵀJδ ≤ α (boundary inclusive).
bool in_delta_region(std::span<const double> delta, const FisherMatrix& fisher, double alpha);

/// Exact μ, μ̈ for one pair together with the large-error terms and Δ membership.
ChernoffTerms chernoff_terms(const HypothesisPair& pair, const Scenario& scenario,
                             const AmplitudeDraw& b);

/// Diagnostics for V*(φ)B†BVᵀ(φ) ≈ ‖B‖_F² I_N.
struct ApproximationReport {
  std::vector<double> frobenius_error;  // ‖V*B†BVᵀ − ‖B‖²I‖_F / ‖B‖²  per trial
  std::vector<double> mu_relative_error;  // |μ_exact − μ_large| / |μ_large|  per trial
  double median_frobenius_error = 0.0;
  double median_mu_error = 0.0;
  double max_frobenius_error = 0.0;
};

/// Draws φ and φ+δ independently from the prior and b from CN(0, σ_b² I).
/// Diagnostic only; nothing here feeds the bound.
ApproximationReport validate_approximation(const Scenario& scenario, std::size_t trials,
                                           std::uint64_t seed);

}  // namespace zzb
