#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "zzb/experiment.hpp"
#include "zzb/zzb.hpp"

using namespace zzb;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

constexpr const char* kMinimal = R"({
  "scenario": {"rx_elements": 8, "tx_elements": 4, "num_targets": 1, "prior_deg": [-60, 60]}
})";

bool mentions(const ValidationError& e, std::string_view field) {
  return std::any_of(e.violations().begin(), e.violations().end(),
                     [&](const std::string& v) { return v.rfind(std::string(field) + ":", 0) == 0; });
}

ExperimentConfig fast(ExperimentConfig c) {
  c.snr_grid = {-60.0, 30.0, 30.0};
  c.crb.samples = 100;
  return c;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("minimal config takes documented defaults") {
    const ExperimentConfig c = parse_config_text(kMinimal);
    CHECK(c.preset.empty());
    CHECK(c.scenario.rx_elements == 8);
    CHECK(c.scenario.snapshots == 40);
    CHECK(c.scenario.noise_power == 1.0);
    CHECK(c.scenario.amplitude_variance == 0.5);
    CHECK(c.scenario.element_spacing == 0.5);
    CHECK(c.snr_grid.points().size() == 61);
    CHECK(c.snr_grid.points().front() == -30.0);
    CHECK(c.snr_grid.points().back() == 30.0);
    CHECK(c.sweep.variable == SweepVariable::none);
    CHECK(c.crb.samples == 2000);
    CHECK(c.crb.amplitude == AmplitudeConvention::Kind::plug_in);
    CHECK_FALSE(c.simulation.enabled);
    CHECK(c.simulation.trials == 500);
    CHECK_FALSE(c.oracle.enabled);
    CHECK(c.output == "results.csv");

    const auto points = expand_sweep(c);
    REQUIRE(points.size() == 1);
    CHECK(points[0].label == "none");
    CHECK(points[0].scenario.prior_min == doctest::Approx(-60 * kDeg));
    CHECK(points[0].scenario.rx_size() == 8);
  }

  TEST_CASE("zero SNR step is reported by field path") {
    const std::string text = R"({
      "scenario": {"rx_elements": 8, "tx_elements": 4, "num_targets": 1, "prior_deg": [-60, 60]},
      "snr_grid": {"start_db": -10, "stop_db": 10, "step_db": 0}
    })";
    try {
      (void)parse_config_text(text);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(mentions(e, "snr_grid.step_db"));
    }
  }

  TEST_CASE("all violations are collected") {
    const std::string text = R"({
      "scenario": {"rx_elements": 0, "tx_elements": 4, "prior_deg": [-60, 60], "colour": 3},
      "snr_grid": {"step_db": -1},
      "simulation": {"trials": 3},
      "oracle": {"quadrature_points": 16},
      "crb": {"amplitude": "median"}
    })";
    try {
      (void)parse_config_text(text);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(mentions(e, "scenario.rx_elements"));
      CHECK(mentions(e, "scenario.num_targets"));
      CHECK(mentions(e, "scenario.colour"));
      CHECK(mentions(e, "snr_grid.step_db"));
      CHECK(mentions(e, "simulation.trials"));
      CHECK(mentions(e, "oracle.quadrature_points"));
      CHECK(mentions(e, "crb.amplitude"));
      CHECK(e.violations().size() >= 7);
    }
  }

  TEST_CASE("prior support must stay off endfire") {
    auto with_prior = [](double lo, double hi) {
      std::ostringstream os;
      os << R"({"scenario": {"rx_elements": 8, "tx_elements": 4, "num_targets": 1, "prior_deg": [)" << lo << ", "
         << hi << "]}}";
      return os.str();
    };
    CHECK_NOTHROW(parse_config_text(with_prior(-85, 85)));
    CHECK_THROWS_AS(parse_config_text(with_prior(-95, 95)), ValidationError);
    CHECK_THROWS_AS(parse_config_text(with_prior(10, -10)), ValidationError);
  }

  TEST_CASE("simulation grid step is checked per sweep point") {
    const std::string text = R"({
      "scenario": {"rx_elements": 8, "tx_elements": 4, "num_targets": 1},
      "sweep": {"variable": "prior_support", "values": [60, 5]},
      "simulation": {"enabled": true, "grid_step_deg": 1.5}
    })";
    CHECK_THROWS_AS(parse_config_text(text), ValidationError);
  }

  TEST_CASE("malformed JSON raises ParseError") {
    CHECK_THROWS_AS(parse_config_text("{ \"scenario\": "), ParseError);
    CHECK_THROWS_AS(parse_config("/nonexistent/zzb.json"), ParseError);
  }

  TEST_CASE("comments are accepted and presets are overridden key by key") {
    const std::string text = R"({
      // wider prior than the preset
      "preset": "fig2",
      "scenario": {"prior_deg": [-70, 70]},
      "snr_grid": {"start_db": 0, "stop_db": 2, "step_db": 1}
    })";
    const ExperimentConfig c = parse_config_text(text);
    CHECK(c.preset == "fig2");
    CHECK(c.scenario.tx_elements == 32);
    CHECK(c.scenario.prior_max_deg == 70.0);
    CHECK(c.sweep.variable == SweepVariable::num_targets);
    CHECK(c.snr_grid.points() == std::vector<double>{0.0, 1.0, 2.0});
    CHECK_THROWS(preset_config("fig9"));
    CHECK(preset_names() == std::vector<std::string>{"fig1", "fig2", "fig3"});
  }

  TEST_CASE("override_seed sets both seeds") {
    ExperimentConfig c = parse_config_text(kMinimal);
    override_seed(c, 99);
    CHECK(c.crb.seed == 99);
    CHECK(c.simulation.seed == 99);
  }

  TEST_CASE("fig1 preset: six transmit sizes share one APB plateau") {
    const ResultTable t = run_experiment(fast(preset_config("fig1")));
    std::map<std::string, std::vector<const ResultRow*>> groups;
    for (const auto& r : t.rows) groups[r.sweep_value].push_back(&r);
    CHECK(groups.size() == 6);
    const double plateau = apb(1, 120 * kDeg);
    for (const auto& [label, rows] : groups) {
      CAPTURE(label);
      REQUIRE(rows.size() == 4);
      for (const auto* r : rows) CHECK(r->apb == plateau);
      CHECK(std::abs(rows.front()->zzb / plateau - 1.0) <= 0.05);
      CHECK_FALSE(rows.front()->mse.has_value());
    }
  }

  TEST_CASE("fig2 preset: APB follows the target count") {
    const ResultTable t = run_experiment(fast(preset_config("fig2")));
    std::map<std::string, double> level;
    for (const auto& r : t.rows) level[r.sweep_value] = r.apb;
    REQUIRE(level.size() == 3);
    const double z = 120 * kDeg;
    CHECK(level["2"] == apb(2, z));
    CHECK(level["5"] == apb(5, z));
    CHECK(level["8"] == apb(8, z));
    CHECK(level["8"] < level["5"]);
    CHECK(level["5"] < level["2"]);
  }

  TEST_CASE("fig3 preset: wider prior gives a larger APB") {
    ExperimentConfig c = fast(preset_config("fig3"));
    c.snr_grid = {0.0, 0.0, 1.0};
    const auto points = expand_sweep(c);
    REQUIRE(points.size() == 6);
    CHECK(points[0].label == "60/2");
    const ResultTable t = run_experiment(c);
    std::map<std::string, double> level;
    for (const auto& r : t.rows) level[r.sweep_value] = r.apb;
    for (const char* k : {"2", "5", "8"})
      CHECK(level[std::string("85/") + k] > level[std::string("60/") + k]);
  }

  TEST_CASE("simulation and oracle columns") {
    ExperimentConfig c = parse_config_text(kMinimal);
    c.snr_grid = {0.0, 0.0, 1.0};
    c.crb.samples = 100;
    c.simulation.enabled = true;
    c.simulation.trials = 20;
    c.oracle.enabled = true;
    const ResultTable t = run_experiment(c);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].mse.has_value());
    CHECK(t.rows[0].mse_stderr.has_value());
    CHECK(t.rows[0].zzb_exact.has_value());
  }

  TEST_CASE("CSV layout") {
    const ResultTable empty;
    const std::string csv = to_csv(empty);
    std::istringstream is(csv);
    std::string first, second, rest;
    std::getline(is, first);
    std::getline(is, second);
    CHECK(first == kCsvVersionLine);
    CHECK(second ==
          "sweep_value,snr_db,zzb,expected_crb,apb,mse,mse_stderr,h_tilde,u_tilde,gamma_term,p_large,"
          "crb_rejection_rate,zzb_exact");
    CHECK_FALSE(std::getline(is, rest));
    CHECK(parse_csv(csv).rows.empty());
    CHECK(csv_columns().size() == 13);
  }

  TEST_CASE("format_value") {
    CHECK(format_value(0.1) == "0.1");
    CHECK(format_value(1.0 / 3.0) == "0.333333333333");
    CHECK(format_value(-30.0) == "-30");
    CHECK(format_value(1.5e-20) == "1.5e-20");
  }

  TEST_CASE("CSV round trip keeps 12 significant digits and disabled columns") {
    ExperimentConfig c = parse_config_text(kMinimal);
    c.snr_grid = {-10.0, 10.0, 10.0};
    c.crb.samples = 100;
    const ResultTable t = run_experiment(c);
    const ResultTable back = parse_csv(to_csv(t));
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const ResultRow& a = t.rows[i];
      const ResultRow& b = back.rows[i];
      CHECK(a.sweep_value == b.sweep_value);
      CHECK(a.snr_db == b.snr_db);
      for (auto [x, y] : {std::pair{a.zzb, b.zzb}, {a.expected_crb, b.expected_crb}, {a.apb, b.apb},
                          {a.h_tilde, b.h_tilde}, {a.u_tilde, b.u_tilde}, {a.gamma_term, b.gamma_term},
                          {a.p_large, b.p_large}})
        CHECK(std::abs(x - y) <= 1e-11 * std::abs(x));
      CHECK_FALSE(b.mse.has_value());
      CHECK_FALSE(b.zzb_exact.has_value());
    }
    CHECK(to_csv(back) == to_csv(t));

    const auto path = std::filesystem::temp_directory_path() / "zzb_roundtrip.csv";
    write_csv(t, path);
    CHECK(to_csv(read_csv(path)) == to_csv(t));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(parse_csv("not,a,header\n"), ParseError);
  }

  TEST_CASE("repeated runs are byte identical") {
    ExperimentConfig c = parse_config_text(kMinimal);
    c.snr_grid = {-10.0, 10.0, 5.0};
    c.crb.samples = 150;
    c.simulation.enabled = true;
    c.simulation.trials = 12;
    CHECK(to_csv(run_experiment(c)) == to_csv(run_experiment(c)));
  }

  TEST_CASE("progress callback sees every sweep point") {
    ExperimentConfig c = fast(preset_config("fig2"));
    int calls = 0;
    (void)run_experiment(c, [&](std::string_view) { ++calls; });
    CHECK(calls >= 3);
  }
}
