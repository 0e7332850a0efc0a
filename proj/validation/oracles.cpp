#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace zzb::oracle {

namespace {

ComplexMatrix lu_inverse(const ComplexMatrix& a) {
  const Eigen::Index n = a.rows();
  ComplexMatrix m = a;
  ComplexMatrix inv = ComplexMatrix::Identity(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index p = c;
    for (Eigen::Index r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(p, c))) p = r;
    if (m(p, c) == cplx{0.0, 0.0}) throw std::runtime_error("lu_inverse: singular matrix");
    m.row(c).swap(m.row(p));
    inv.row(c).swap(inv.row(p));
    const cplx pivot = m(c, c);
    m.row(c) /= pivot;
    inv.row(c) /= pivot;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const cplx f = m(r, c);
      m.row(r) -= f * m.row(c);
      inv.row(r) -= f * inv.row(c);
    }
  }
  return inv;
}

double simpson_recursive(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                         double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_recursive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recursive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double logabsdet_lu(ComplexMatrix a) {
  const Eigen::Index n = a.rows();
  double acc = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index p = c;
    for (Eigen::Index r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
    if (a(p, c) == cplx{0.0, 0.0}) return -std::numeric_limits<double>::infinity();
    a.row(c).swap(a.row(p));
    acc += std::log(std::abs(a(c, c)));
    for (Eigen::Index r = c + 1; r < n; ++r) {
      const cplx f = a(r, c) / a(c, c);
      for (Eigen::Index k = c; k < n; ++k) a(r, k) -= f * a(c, k);
    }
  }
  return acc;
}

ComplexVector steering(double theta, const ArrayGeometry& g) {
  ComplexVector v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t m = 0; m < g.size(); ++m) {
    const double phase = -2.0 * std::numbers::pi / g.wavelength * g.positions[m] * std::sin(theta);
    v(static_cast<Eigen::Index>(m)) = cplx{std::cos(phase), std::sin(phase)};
  }
  return v;
}

ComplexMatrix conditional_covariance(std::span<const double> thetas, const Scenario& s,
                                     const std::vector<cplx>& b) {
  const auto m = static_cast<Eigen::Index>(s.rx_size());
  const ComplexMatrix sigma = s.tx_covariance();
  ComplexMatrix r = s.noise_power * ComplexMatrix::Identity(m, m);
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    const ComplexVector ak = steering(thetas[k], s.rx);
    const ComplexVector vk = steering(thetas[k], s.tx);
    for (std::size_t q = 0; q < thetas.size(); ++q) {
      const ComplexVector aq = steering(thetas[q], s.rx);
      const ComplexVector vq = steering(thetas[q], s.tx);
      cplx gain = 0.0;
      for (Eigen::Index i = 0; i < sigma.rows(); ++i)
        for (Eigen::Index j = 0; j < sigma.cols(); ++j) gain += vk(i) * sigma(i, j) * std::conj(vq(j));
      const cplx w = b[k] * std::conj(b[q]) * gain;
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) r(i, j) += w * ak(i) * std::conj(aq(j));
    }
  }
  return r;
}

ComplexMatrix mean_covariance(std::span<const double> thetas, const Scenario& s) {
  const auto m = static_cast<Eigen::Index>(s.rx_size());
  const ComplexMatrix sigma = s.tx_covariance();
  ComplexMatrix r = s.noise_power * ComplexMatrix::Identity(m, m);
  for (double th : thetas) {
    const ComplexVector a = steering(th, s.rx);
    const ComplexVector v = steering(th, s.tx);
    cplx gain = 0.0;
    for (Eigen::Index i = 0; i < sigma.rows(); ++i)
      for (Eigen::Index j = 0; j < sigma.cols(); ++j) gain += v(i) * sigma(i, j) * std::conj(v(j));
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) r(i, j) += s.amplitude_variance * gain * a(i) * std::conj(a(j));
  }
  return r;
}

ComplexMatrix central_difference(const std::function<ComplexMatrix(std::span<const double>)>& f,
                                 std::span<const double> thetas, std::size_t i, double h) {
  std::vector<double> t(thetas.begin(), thetas.end());
  auto at = [&](double offset) {
    t[i] = thetas[i] + offset;
    return f(t);
  };
  const ComplexMatrix p2 = at(2.0 * h), p1 = at(h), m1 = at(-h), m2 = at(-2.0 * h);
  return (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
}

RealMatrix fisher_dense(std::span<const double> thetas, const Scenario& s, double h) {
  const auto k = static_cast<Eigen::Index>(thetas.size());
  const ComplexMatrix r = mean_covariance(thetas, s);
  const ComplexMatrix rinv = lu_inverse(r);
  auto model = [&s](std::span<const double> t) { return mean_covariance(t, s); };
  std::vector<ComplexMatrix> d;
  for (std::size_t i = 0; i < thetas.size(); ++i) d.push_back(central_difference(model, thetas, i, h));
  RealMatrix j(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) {
      const ComplexMatrix prod =
          rinv * d[static_cast<std::size_t>(a)] * rinv * d[static_cast<std::size_t>(b)];
      j(a, b) = static_cast<double>(s.snapshots) * prod.trace().real();
    }
  return j;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recursive(f, a, b, fa, fm, fb, whole, tol, 50);
}

double q_quadrature(double z) {
  if (z < 0.0) return 1.0 - q_quadrature(-z);
  // e^{-zs - s²/2} < 1e-30 beyond s = 12 for every z ≥ 0.
  const double integral =
      adaptive_simpson([z](double s) { return std::exp(-z * s - 0.5 * s * s); }, 0.0, 12.0, 1e-15);
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) * integral;
}

double gamma_32_quadrature(double u) {
  if (u <= 0.0) return 0.0;
  const double upper = std::min(std::sqrt(u), 8.0);
  const double integral =
      adaptive_simpson([](double s) { return s * s * std::exp(-s * s); }, 0.0, upper,
                       1e-15 * std::min(1.0, upper * upper * upper / 3.0));
  // Γ(3/2) = √π/2
  return 2.0 * integral / (0.5 * std::sqrt(std::numbers::pi));
}

double alpha_g_expanded(const ComplexMatrix& sigma, double c, std::size_t snapshots) {
  const Eigen::Index n = sigma.rows();
  const ComplexMatrix inv = lu_inverse(ComplexMatrix::Identity(n, n) + 0.5 * c * sigma);
  const ComplexMatrix s2 = sigma * sigma;
  const ComplexMatrix s3 = s2 * sigma;
  const ComplexMatrix inner = s2 * inv;
  const ComplexMatrix term1 = 0.5 * c * c * s2;
  const ComplexMatrix term2 = (std::pow(c, 4) / 8.0) * (inner * inner);
  const ComplexMatrix term3 = 0.5 * std::pow(c, 3) * (s3 * inv);
  return 4.0 * static_cast<double>(snapshots) * (term1 + term2 - term3).trace().real();
}

MonteCarloMu mu_half_monte_carlo(const ComplexMatrix& r0, const ComplexMatrix& r1, std::size_t snapshots,
                                 std::size_t draws, std::uint64_t seed) {
  const Eigen::Index n = r0.rows();
  const ComplexMatrix inv0 = lu_inverse(r0), inv1 = lu_inverse(r1);
  const double ld0 = logabsdet_lu(r0), ld1 = logabsdet_lu(r1);
  Eigen::LLT<ComplexMatrix> chol(r0);
  const ComplexMatrix lower = chol.matrixL();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  // ratio √(p₁/p₀) = exp{½(ln|R₀| − ln|R₁|) − ½(x†R₁⁻¹x − x†R₀⁻¹x)}
  std::vector<double> w(draws);
  double mean = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    ComplexVector z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i) = cplx{re, im};
    }
    const ComplexVector x = lower * z;
    const double q0 = (x.adjoint() * inv0 * x)(0, 0).real();
    const double q1 = (x.adjoint() * inv1 * x)(0, 0).real();
    w[d] = std::exp(0.5 * (ld0 - ld1) - 0.5 * (q1 - q0));
    mean += w[d];
  }
  mean /= static_cast<double>(draws);
  double var = 0.0;
  for (double x : w) var += (x - mean) * (x - mean);
  var /= static_cast<double>(draws - 1);
  const double se_mean = std::sqrt(var / static_cast<double>(draws));
  const double l = static_cast<double>(snapshots);
  return {l * std::log(mean), l * se_mean / mean};
}

double sml_objective_dense(std::span<const double> thetas, const ComplexMatrix& s_hat, const Scenario& s) {
  const ComplexMatrix r = mean_covariance(thetas, s);
  const double logdet = logabsdet_lu(r);
  const double tr = (lu_inverse(r) * s_hat).trace().real();
  return -static_cast<double>(s.snapshots) * (logdet + tr);
}

}  // namespace zzb::oracle
