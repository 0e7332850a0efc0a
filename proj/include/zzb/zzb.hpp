#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zzb/chernoff.hpp"
#include "zzb/fisher.hpp"
#include "zzb/radar_model.hpp"

namespace zzb {

class InvalidCrb : public std::invalid_argument {
 public:
  explicit InvalidCrb(const std::string& what) : std::invalid_argument(what) {}
};

class QuadratureNotConverged : public std::runtime_error {
 public:
  explicit QuadratureNotConverged(const std::string& what) : std::runtime_error(what) {}
};

struct ZzbDiagnostics {
  double h_tilde = 0.0;
  double u_tilde = 0.0;
  double gamma_term = 0.0;    // Γ_{3/2}(ũ)
  double apriori_term = 0.0;  // 2·P_L·Kζ²/((K+1)²(K+2))
  double crb_term = 0.0;      // E[tr J⁻¹]/K
  double p_large = 0.5;
  double alpha_g = 0.0;
  double crb_rejection_rate = 0.0;
  bool capped = false;        // h̃ took the √K·ζ branch
  /// Bound before the permutation correction: P_L·Kζ²/((K+1)(K+2)) + Γ·E[tr J⁻¹]/K.
  double pre_permutation_value = 0.0;

  /// apriori_term + crb_term·gamma_term; the CRB part is dropped when Γ is exactly 0
  /// (zero SNR, where the CRB itself is infinite).
  double value() const;
};

struct ZzbResult {
  double value = 0.0;  // radians²
  ZzbDiagnostics diagnostics;
};

struct HTilde {
  double value = 0.0;
  bool capped = false;
};

/// h̃ = min(√(1ᵀJ⁻¹1·α/K), √K·ζ).
HTilde h_tilde(double quad_form, double alpha, std::size_t k, double zeta);
/// Throws InvalidCrb when the summary is flagged invalid.
HTilde h_tilde(const CrbSummary& crb, double alpha, std::size_t k, double zeta);

/// A-priori bound Kζ²/((K+1)²(K+2)).
double apb(std::size_t k, double zeta);

struct ZzbOptions {
  std::size_t crb_samples = 2000;
  std::uint64_t seed = 1;
  AmplitudeConvention amplitude;
  /// Evaluate J at these angles instead of averaging over the prior.
  std::optional<std::vector<double>> fixed_theta;
};

/// Composes the bound from already-evaluated CRB averages and large-error terms.
ZzbResult zzb_from_terms(const Scenario& scenario, const CrbAverage& crb, const LargeErrorTerms& large);

/// Closed-form ZZB at one SNR using a caller-supplied prior sample set.
ZzbResult zzb(const Scenario& scenario, double snr, const PriorSamples& samples,
              const AmplitudeConvention& amplitude = {});

/// Closed-form ZZB at one SNR (σ_s²/σ_n², linear).
ZzbResult zzb(const Scenario& scenario, double snr, const ZzbOptions& options = {});

struct ExactZzb {
  double value = 0.0;
  std::size_t intervals = 0;  // quadrature intervals at convergence
};

inline constexpr std::size_t kExactPhiGrid = 33;

/// Error probability bound exp{μ+μ̈/8}·Q(√μ̈/2) for a single target offset by h,
/// averaged over an evenly spaced φ-grid on [ϑ_min, ϑ_max − h].
double averaged_error_probability(const Scenario& scenario, double h,
                                  std::size_t phi_points = kExactPhiGrid);

/// Single-target ZZB by direct integration: ∫₀^ζ P̄_e(h)(1 − h/ζ) h dh, using exact
/// μ and μ̈. Composite Simpson on h = ζt², doubling from `quadrature_points`
/// intervals until successive estimates agree to 1e-4.
ExactZzb zzb_exact_1d(const Scenario& scenario, std::size_t quadrature_points = 64);

struct BoundCurve {
  std::vector<double> snr_db;
  std::vector<double> snr_linear;
  std::vector<double> zzb;
  std::vector<double> expected_crb;
  double apb = 0.0;
  std::vector<ZzbDiagnostics> diagnostics;
  std::uint64_t fingerprint = 0;
};

/// Evaluates ZZB, expected CRB and APB over an SNR grid (dB). One prior sample set is
/// drawn per curve and reused at every point.
BoundCurve bound_curve(const Scenario& scenario, std::span<const double> snr_grid_db,
                       const ZzbOptions& options = {});

/// FNV-1a hash over every scenario field that affects a bound.
std::uint64_t scenario_fingerprint(const Scenario& scenario);

double db_to_linear(double db);
double linear_to_db(double x);

}  // namespace zzb
