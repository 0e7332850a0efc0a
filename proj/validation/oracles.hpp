#pragma once

// Independent reference computations used only by tests and the validate command.
// Nothing here shares code paths with the library kernels beyond the Scenario type.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "zzb/numerics.hpp"
#include "zzb/radar_model.hpp"

namespace zzb::oracle {

/// ln|det A| by Gaussian elimination with partial pivoting.
double logabsdet_lu(ComplexMatrix a);

/// Steering vector written out element by element.
ComplexVector steering(double theta, const ArrayGeometry& g);

/// R = Σ_k Σ_k' b_k b_k'* (v_kᵀΣv_k'*) a_k a_k'† + σ_n² I by explicit loops.
ComplexMatrix conditional_covariance(std::span<const double> thetas, const Scenario& s,
                                     const std::vector<cplx>& b);

/// R̄ = σ_b² Σ_k (v_kᵀΣv_k*) a_k a_k† + σ_n² I by explicit loops.
ComplexMatrix mean_covariance(std::span<const double> thetas, const Scenario& s);

/// Five-point central difference of a matrix-valued function of θ_i.
ComplexMatrix central_difference(const std::function<ComplexMatrix(std::span<const double>)>& f,
                                 std::span<const double> thetas, std::size_t i, double h);

/// Fisher matrix with finite-difference derivatives of R̄ and an explicit LU inverse.
RealMatrix fisher_dense(std::span<const double> thetas, const Scenario& s, double h = 1e-4);

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);

/// Q(z) for z ≥ 0 as e^{-z²/2}/√(2π)·∫₀^∞ e^{-zs - s²/2} ds.
double q_quadrature(double z);

/// P(3/2, u) = (2/Γ(3/2))·∫₀^{√u} s² e^{-s²} ds.
double gamma_32_quadrature(double u);

/// The three-term expression 4L·tr{c²/2·Σ̃² + c⁴/8·[Σ̃²(I + c/2·Σ̃)⁻¹]² − c³/2·Σ̃³(I + c/2·Σ̃)⁻¹}
/// with c = M‖B‖²/σ_n² and Σ̃ = Σ, evaluated term by term with an LU inverse.
double alpha_g_expanded(const ComplexMatrix& sigma, double c, std::size_t snapshots);

/// L·ln E₀[√(p₁(x)/p₀(x))] by sampling x ~ CN(0, R₀).
struct MonteCarloMu {
  double value = 0.0;
  double stderr_ = 0.0;
};
MonteCarloMu mu_half_monte_carlo(const ComplexMatrix& r0, const ComplexMatrix& r1, std::size_t snapshots,
                                 std::size_t draws, std::uint64_t seed);

/// −L[ln|R̄| + tr(R̄⁻¹Ŝ)] with R̄ built densely and inverted by LU.
double sml_objective_dense(std::span<const double> thetas, const ComplexMatrix& s_hat, const Scenario& s);

}  // namespace zzb::oracle
