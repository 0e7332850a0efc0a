#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "zzb/chernoff.hpp"
#include "zzb/radar_model.hpp"

namespace zzb {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Carries every violation found, each prefixed with its field path.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by run_experiment; the message names the sweep value and SNR point.
class ExperimentError : public std::runtime_error {
 public:
  explicit ExperimentError(const std::string& what) : std::runtime_error(what) {}
};

enum class SweepVariable { none, tx_elements, num_targets, prior_support };

std::string_view to_string(SweepVariable v);

struct SweepAxis {
  SweepVariable variable = SweepVariable::none;
  /// tx_elements / num_targets: counts; prior_support: half-width in degrees.
  std::vector<double> values;
};

struct ScenarioConfig {
  std::size_t rx_elements = 0;
  std::size_t tx_elements = 0;
  std::size_t num_targets = 0;
  std::size_t snapshots = 40;
  double noise_power = 1.0;
  double amplitude_variance = 0.5;
  double element_spacing = 0.5;  // wavelengths
  double prior_min_deg = 0.0;
  double prior_max_deg = 0.0;
};

struct SnrGrid {
  double start_db = -30.0;
  double stop_db = 30.0;
  double step_db = 1.0;

  /// start + i·step for i = 0.. while ≤ stop (with a 1e-9·step allowance).
  std::vector<double> points() const;
};

struct CrbConfig {
  std::size_t samples = 2000;
  std::uint64_t seed = 1;
  AmplitudeConvention::Kind amplitude = AmplitudeConvention::Kind::plug_in;
  std::size_t amplitude_draws = 256;
};

struct SimulationConfig {
  bool enabled = false;
  std::size_t trials = 500;
  double grid_step_deg = 0.2;
  std::uint64_t seed = 1;
};

struct OracleConfig {
  bool enabled = false;
  std::size_t quadrature_points = 64;
};

struct ExperimentConfig {
  std::string preset;  // empty when none was applied
  ScenarioConfig scenario;
  SnrGrid snr_grid;
  SweepAxis sweep;
  std::optional<SweepAxis> sweep_by;  // inner axis for compound sweeps
  CrbConfig crb;
  SimulationConfig simulation;
  OracleConfig oracle;
  std::string output = "results.csv";
};

std::vector<std::string> preset_names();

/// Baked-in preset, already validated. Throws std::invalid_argument for unknown names.
ExperimentConfig preset_config(std::string_view name);

/// Reads a JSON config. A `preset` named in the file or passed here is applied first
/// and the file's fields override it key by key.
ExperimentConfig parse_config(const std::filesystem::path& path,
                              const std::optional<std::string>& preset = std::nullopt);
ExperimentConfig parse_config_text(std::string_view text,
                                   const std::optional<std::string>& preset = std::nullopt);

/// Sets the CRB and simulation seeds together.
void override_seed(ExperimentConfig& config, std::uint64_t seed);

struct SweepPoint {
  std::string label;  // "v" or "v/by" for compound sweeps
  Scenario scenario;  // radians, snr left at 1
};

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& config);

struct ResultRow {
  std::string sweep_value;
  double snr_db = 0.0;
  double zzb = 0.0;
  double expected_crb = 0.0;
  double apb = 0.0;
  std::optional<double> mse;
  std::optional<double> mse_stderr;
  double h_tilde = 0.0;
  double u_tilde = 0.0;
  double gamma_term = 0.0;
  double p_large = 0.0;
  double crb_rejection_rate = 0.0;
  std::optional<double> zzb_exact;
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

inline constexpr std::string_view kCsvVersionLine = "# zzb-mimo-doa v1";
const std::vector<std::string>& csv_columns();

using ProgressFn = std::function<void(std::string_view)>;

ResultTable run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Formats with 12 significant digits in the C locale.
std::string format_value(double x);

std::string to_csv(const ResultTable& table);
void write_csv(const ResultTable& table, const std::filesystem::path& path);
ResultTable read_csv(const std::filesystem::path& path);
ResultTable parse_csv(std::string_view text);

}  // namespace zzb
