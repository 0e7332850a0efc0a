#include "zzb/radar_model.hpp"

#include <cmath>
#include <numbers>

namespace zzb {

namespace {

constexpr cplx kJ{0.0, 1.0};

void check_angles(std::span<const double> thetas) {
  for (double t : thetas)
    if (!(std::abs(t) < std::numbers::pi / 2))
      throw InvalidScenario("angle " + std::to_string(t) + " rad outside (-pi/2, pi/2)");
}

void check_index(std::span<const double> thetas, std::size_t i) {
  if (i >= thetas.size())
    throw std::out_of_range("target index " + std::to_string(i) + " out of range for " +
                            std::to_string(thetas.size()) + " targets");
}

ComplexMatrix finish_covariance(ComplexMatrix r, double noise_power) {
  r.diagonal().array() += noise_power;
  // Exact Hermitian symmetry; rounding in the triple products leaves ~1e-16 skew.
  r = (0.5 * (r + r.adjoint())).eval();
  return r;
}

}  // namespace

ArrayGeometry ArrayGeometry::half_wavelength_ula(std::size_t n, double wavelength) {
  ArrayGeometry g;
  g.wavelength = wavelength;
  g.positions.resize(n);
  for (std::size_t m = 0; m < n; ++m) g.positions[m] = 0.5 * wavelength * static_cast<double>(m);
  return g;
}

void ArrayGeometry::validate() const {
  if (positions.empty()) throw InvalidScenario("array has no elements");
  if (!(wavelength > 0.0) || !std::isfinite(wavelength))
    throw InvalidScenario("wavelength must be positive");
  for (std::size_t m = 1; m < positions.size(); ++m)
    if (!(positions[m] > positions[m - 1]))
      throw InvalidScenario("array positions must be strictly increasing");
}

ComplexMatrix Scenario::tx_covariance() const { return (snr * noise_power) * tx_shape; }

void Scenario::set_tx_covariance(const ComplexMatrix& sigma) {
  if (sigma.rows() != sigma.cols()) throw InvalidScenario("tx covariance must be square");
  const double n = static_cast<double>(sigma.rows());
  const double avg = sigma.trace().real() / n;
  if (avg > 0.0) {
    tx_shape = sigma / avg;
    snr = avg / noise_power;
  } else {
    tx_shape = ComplexMatrix::Identity(sigma.rows(), sigma.cols());
    snr = 0.0;
  }
}

Scenario Scenario::at_snr(double linear_snr) const {
  Scenario s = *this;
  s.snr = linear_snr;
  return s;
}

void Scenario::validate() const {
  rx.validate();
  tx.validate();
  if (num_targets < 1) throw InvalidScenario("num_targets must be >= 1");
  if (snapshots < 1) throw InvalidScenario("snapshots must be >= 1");
  if (!(noise_power > 0.0) || !std::isfinite(noise_power))
    throw InvalidScenario("noise_power must be positive");
  if (!(amplitude_variance >= 0.0) || !std::isfinite(amplitude_variance))
    throw InvalidScenario("amplitude_variance must be non-negative");
  if (!(snr >= 0.0) || !std::isfinite(snr)) throw InvalidScenario("snr must be non-negative");
  if (!(prior_max > prior_min)) throw InvalidScenario("prior support must have positive width");
  if (!(prior_min > -std::numbers::pi / 2) || !(prior_max < std::numbers::pi / 2))
    throw InvalidScenario("prior support must lie strictly inside (-90deg, 90deg)");
  const auto n = static_cast<Eigen::Index>(tx.size());
  if (tx_shape.rows() != n || tx_shape.cols() != n)
    throw InvalidScenario("tx covariance must be " + std::to_string(n) + "x" + std::to_string(n));
  if (!all_finite(tx_shape) || !is_hermitian(tx_shape, 1e-12))
    throw InvalidScenario("tx covariance must be Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(tx_shape, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw InvalidScenario("tx covariance must be positive semidefinite");
}

Scenario make_ula_scenario(std::size_t rx_elements, std::size_t tx_elements,
                           std::size_t num_targets, double prior_min, double prior_max,
                           double snr) {
  Scenario s;
  s.rx = ArrayGeometry::half_wavelength_ula(rx_elements);
  s.tx = ArrayGeometry::half_wavelength_ula(tx_elements);
  s.num_targets = num_targets;
  s.tx_shape = ComplexMatrix::Identity(static_cast<Eigen::Index>(tx_elements),
                                       static_cast<Eigen::Index>(tx_elements));
  s.snr = snr;
  s.prior_min = prior_min;
  s.prior_max = prior_max;
  return s;
}

double AmplitudeDraw::frobenius_sq() const {
  double acc = 0.0;
  for (const auto& b : values) acc += std::norm(b);
  return acc;
}

ComplexMatrix AmplitudeDraw::diag() const {
  ComplexVector d(static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) d(static_cast<Eigen::Index>(k)) = values[k];
  return d.asDiagonal();
}

AmplitudeDraw AmplitudeDraw::plug_in(std::size_t k, double amplitude_variance) {
  return AmplitudeDraw{std::vector<cplx>(k, cplx{std::sqrt(amplitude_variance), 0.0})};
}

AmplitudeDraw AmplitudeDraw::sample(std::size_t k, double amplitude_variance,
                                    std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * amplitude_variance));
  AmplitudeDraw d;
  d.values.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    d.values.emplace_back(re, im);
  }
  return d;
}

ComplexVector steering_vector(double theta, const ArrayGeometry& geometry) {
  const double k = 2.0 * std::numbers::pi / geometry.wavelength * std::sin(theta);
  ComplexVector a(static_cast<Eigen::Index>(geometry.size()));
  for (std::size_t m = 0; m < geometry.size(); ++m)
    a(static_cast<Eigen::Index>(m)) = std::polar(1.0, -k * geometry.positions[m]);
  return a;
}

ComplexMatrix steering_matrix(std::span<const double> thetas, const ArrayGeometry& geometry) {
  ComplexMatrix a(static_cast<Eigen::Index>(geometry.size()),
                  static_cast<Eigen::Index>(thetas.size()));
  for (std::size_t k = 0; k < thetas.size(); ++k)
    a.col(static_cast<Eigen::Index>(k)) = steering_vector(thetas[k], geometry);
  return a;
}

ComplexMatrix steering_derivative(std::span<const double> thetas, const ArrayGeometry& geometry,
                                  std::size_t i) {
  check_index(thetas, i);
  const auto rows = static_cast<Eigen::Index>(geometry.size());
  ComplexMatrix d = ComplexMatrix::Zero(rows, static_cast<Eigen::Index>(thetas.size()));
  // −j(2π cos θ_i/λ)·D·a(θ_i)
  const cplx scale = -kJ * (2.0 * std::numbers::pi * std::cos(thetas[i]) / geometry.wavelength);
  const ComplexVector a = steering_vector(thetas[i], geometry);
  for (Eigen::Index m = 0; m < rows; ++m)
    d(m, static_cast<Eigen::Index>(i)) = scale * geometry.positions[static_cast<std::size_t>(m)] * a(m);
  return d;
}

double transmit_gain(double theta, const Scenario& scenario) {
  const ComplexVector v = steering_vector(theta, scenario.tx);
  const ComplexMatrix sigma = scenario.tx_covariance();
  return (v.transpose() * sigma * v.conjugate())(0, 0).real();
}

HermitianPD mean_snapshot_covariance(std::span<const double> thetas, const Scenario& scenario) {
  check_angles(thetas);
  const auto m = static_cast<Eigen::Index>(scenario.rx_size());
  ComplexMatrix r = ComplexMatrix::Zero(m, m);
  for (double theta : thetas) {
    const ComplexVector a = steering_vector(theta, scenario.rx);
    const double power = scenario.amplitude_variance * transmit_gain(theta, scenario);
    r.noalias() += power * (a * a.adjoint());
  }
  return HermitianPD(finish_covariance(std::move(r), scenario.noise_power));
}

HermitianPD conditional_snapshot_covariance(std::span<const double> thetas,
                                            const Scenario& scenario, const AmplitudeDraw& b) {
  check_angles(thetas);
  if (b.values.size() != thetas.size())
    throw DimensionMismatch("amplitude draw size does not match target count");
  const ComplexMatrix a = steering_matrix(thetas, scenario.rx);
  const ComplexMatrix v = steering_matrix(thetas, scenario.tx);
  const ComplexMatrix bd = b.diag();
  const ComplexMatrix w = bd * v.transpose() * scenario.tx_covariance() * v.conjugate() * bd.adjoint();
  return HermitianPD(finish_covariance(a * w * a.adjoint(), scenario.noise_power));
}

ComplexMatrix covariance_derivative(std::span<const double> thetas, const Scenario& scenario,
                                    const AmplitudeDraw& b, std::size_t i) {
  check_index(thetas, i);
  if (b.values.size() != thetas.size())
    throw DimensionMismatch("amplitude draw size does not match target count");
  const ComplexMatrix a = steering_matrix(thetas, scenario.rx);
  const ComplexMatrix v = steering_matrix(thetas, scenario.tx);
  const ComplexMatrix da = steering_derivative(thetas, scenario.rx, i);
  const ComplexMatrix dv = steering_derivative(thetas, scenario.tx, i);
  const ComplexMatrix bd = b.diag();
  const ComplexMatrix sigma = scenario.tx_covariance();

  const ComplexMatrix inner = v.transpose() * sigma * v.conjugate();  // Vᵀ Σ V*
  const ComplexMatrix w = bd * inner * bd.adjoint();

  ComplexMatrix d = da * w * a.adjoint();                                                // ∂A
  d.noalias() += a * bd * dv.transpose() * sigma * v.conjugate() * bd.adjoint() * a.adjoint();  // ∂Vᵀ
  d.noalias() += a * bd * v.transpose() * sigma * dv.conjugate() * bd.adjoint() * a.adjoint();  // ∂V*
  d.noalias() += a * w * da.adjoint();                                                   // ∂A†
  return d;
}

ComplexMatrix mean_covariance_derivative(std::span<const double> thetas, const Scenario& scenario,
                                         std::size_t i) {
  check_index(thetas, i);
  const auto idx = static_cast<Eigen::Index>(i);
  const ComplexMatrix sigma = scenario.tx_covariance();
  const ComplexVector a = steering_vector(thetas[i], scenario.rx);
  const ComplexVector v = steering_vector(thetas[i], scenario.tx);
  const ComplexVector da = steering_derivative(thetas, scenario.rx, i).col(idx);
  const ComplexVector dv = steering_derivative(thetas, scenario.tx, i).col(idx);

  const cplx sv = (dv.transpose() * sigma * v.conjugate())(0, 0);  // dvᵀ Σ v*
  const double gain = (v.transpose() * sigma * v.conjugate())(0, 0).real();
  const double dgain = 2.0 * sv.real();

  const double sb = scenario.amplitude_variance;
  const ComplexMatrix cross = da * a.adjoint();
  ComplexMatrix d = (sb * dgain) * (a * a.adjoint());
  d.noalias() += (sb * gain) * (cross + cross.adjoint());
  return d;
}

}  // namespace zzb
