#include "zzb/numerics.hpp"

#include <cmath>
#include <limits>

namespace zzb {

bool all_finite(const ComplexMatrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
  return true;
}

bool is_hermitian(const ComplexMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(a.norm(), std::numeric_limits<double>::min());
  return (a - a.adjoint()).norm() <= rel_tol * scale;
}

namespace {

bool factor_ok(const Eigen::LLT<ComplexMatrix>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const auto l = llt.matrixLLT().diagonal();
  for (Eigen::Index i = 0; i < l.size(); ++i)
    if (!(l(i).real() > 0.0) || !std::isfinite(l(i).real())) return false;
  return true;
}

}  // namespace

HermitianPD::HermitianPD(ComplexMatrix a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols())
    throw DimensionMismatch("HermitianPD: matrix is " + std::to_string(a_.rows()) + "x" +
                            std::to_string(a_.cols()));
  if (!all_finite(a_)) throw NotPositiveDefinite("HermitianPD: non-finite entry");
  if (!is_hermitian(a_)) throw NotPositiveDefinite("HermitianPD: matrix is not Hermitian");
  if (a_.rows() == 0) return;

  llt_.compute(a_);
  if (factor_ok(llt_)) return;

  const double n = static_cast<double>(a_.rows());
  const double jitter = 1e-12 * std::abs(a_.trace().real()) / n;
  ComplexMatrix loaded = a_;
  loaded.diagonal().array() += jitter;
  llt_.compute(loaded);
  if (!factor_ok(llt_))
    throw NotPositiveDefinite("HermitianPD: Cholesky failed after diagonal loading");
  jittered_ = true;
}

double HermitianPD::min_pivot() const {
  if (a_.rows() == 0) return std::numeric_limits<double>::infinity();
  return llt_.matrixLLT().diagonal().real().array().square().minCoeff();
}

double logdet_hpd(const HermitianPD& a) {
  double acc = 0.0;
  const auto d = a.factor().matrixLLT().diagonal();
  for (Eigen::Index i = 0; i < d.size(); ++i) acc += std::log(d(i).real());
  return 2.0 * acc;
}

ComplexMatrix solve_hpd(const HermitianPD& a, const ComplexMatrix& b) {
  if (b.rows() != a.size())
    throw DimensionMismatch("solve_hpd: rhs has " + std::to_string(b.rows()) +
                            " rows, matrix is " + std::to_string(a.size()));
  return a.factor().solve(b);
}

TraceSquare trace_product_squared(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("trace_product_squared: matrix is not square");
  // tr(A·A) = Σ_ij A_ij A_ji
  const cplx t = (a.array() * a.transpose().array()).sum();
  return {t.real(), std::abs(t.imag())};
}

double q_function(double z) {
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

namespace {

// Mills ratio Q(z)/φ(z) by backward evaluation of the Laplace continued fraction.
double mills_ratio(double z) {
  double t = z;
  for (int k = 300; k >= 1; --k) t = z + k / t;
  return 1.0 / t;
}

}  // namespace

double log_q_function(double z) {
  if (z < 0.0) return std::log1p(-q_function(-z));
  if (z < 5.0) return std::log(q_function(z));
  constexpr double kLogSqrt2Pi = 0.91893853320467274178;
  return -0.5 * z * z - kLogSqrt2Pi + std::log(mills_ratio(z));
}

double gamma_32(double u) {
  constexpr double a = 1.5;
  if (!(u > 0.0)) return 0.0;
  if (std::isinf(u)) return 1.0;
  const double log_prefactor = -u + a * std::log(u) - std::lgamma(a);

  if (u < 10.0) {
    // P(a,u) = e^{-u} u^a / Γ(a+1) · Σ u^n / ((a+1)…(a+n))
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 500; ++n) {
      term *= u / (a + n);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return std::min(1.0, std::exp(log_prefactor) * sum);
  }

  // Q(a,u) by modified Lentz on the Legendre continued fraction.
  constexpr double tiny = 1e-300;
  double b = u + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  const double upper = std::exp(log_prefactor) * h;
  return 1.0 - upper;
}

}  // namespace zzb
