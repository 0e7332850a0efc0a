#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace zzb {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

class NotPositiveDefinite : public std::runtime_error {
 public:
  explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// True when every entry is finite.
bool all_finite(const ComplexMatrix& a);

/// ‖A − A†‖_F ≤ tol·max(‖A‖_F, tiny).
bool is_hermitian(const ComplexMatrix& a, double rel_tol = 1e-12);

/// Hermitian positive-definite matrix with a cached Cholesky factor.
///
/// Construction factorizes once. If the first attempt fails, the diagonal is
/// loaded with 1e-12·tr(A)/n and the factorization retried; a second failure
/// throws NotPositiveDefinite.
class HermitianPD {
 public:
  explicit HermitianPD(ComplexMatrix a);

  const ComplexMatrix& matrix() const { return a_; }
  Eigen::Index size() const { return a_.rows(); }
  const Eigen::LLT<ComplexMatrix>& factor() const { return llt_; }
  bool jittered() const { return jittered_; }
  /// Smallest squared pivot of the Cholesky factor (diag(L)²).
  double min_pivot() const;

 private:
  ComplexMatrix a_;
  Eigen::LLT<ComplexMatrix> llt_;
  bool jittered_ = false;
};

/// ln|A| from the Cholesky factor: 2·Σ ln L_ii.
double logdet_hpd(const HermitianPD& a);

/// Solves A X = B.
ComplexMatrix solve_hpd(const HermitianPD& a, const ComplexMatrix& b);

struct TraceSquare {
  double value;         ///< Re tr(A·A)
  double imag_residual; ///< |Im tr(A·A)|
};

/// tr(A·A) without forming the product.
TraceSquare trace_product_squared(const ComplexMatrix& a);

/// Standard normal tail probability Q(z) = P(N(0,1) > z).
double q_function(double z);

/// ln Q(z), accurate where Q itself underflows.
double log_q_function(double z);

/// Lower regularized incomplete gamma function with shape 3/2.
double gamma_32(double u);

}  // namespace zzb
