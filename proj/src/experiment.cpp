#include "zzb/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "zzb/parallel.hpp"
#include "zzb/simulator.hpp"
#include "zzb/zzb.hpp"

namespace zzb {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string join_messages(const std::vector<std::string>& v) {
  std::string out = "invalid experiment configuration:";
  for (const auto& s : v) out += "\n  " + s;
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(join_messages(violations)), violations_(std::move(violations)) {}

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::none: return "none";
    case SweepVariable::tx_elements: return "tx_elements";
    case SweepVariable::num_targets: return "num_targets";
    case SweepVariable::prior_support: return "prior_support";
  }
  return "none";
}

std::vector<double> SnrGrid::points() const {
  std::vector<double> out;
  if (!(step_db > 0.0) || !(stop_db >= start_db)) return out;
  const auto n = static_cast<std::size_t>(std::floor((stop_db - start_db) / step_db + 1e-9)) + 1;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(start_db + step_db * static_cast<double>(i));
  return out;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

json preset_json(std::string_view name) {
  const json base_scenario = {{"rx_elements", 20}, {"snapshots", 40}, {"amplitude_variance", 0.5},
                              {"noise_power", 1.0}, {"prior_deg", {-60.0, 60.0}}};
  if (name == "fig1") {
    json j = {{"scenario", base_scenario},
              {"sweep", {{"variable", "tx_elements"}, {"values", {1, 2, 4, 8, 16, 32}}}}};
    j["scenario"]["num_targets"] = 1;
    return j;
  }
  if (name == "fig2") {
    json j = {{"scenario", base_scenario}, {"sweep", {{"variable", "num_targets"}, {"values", {2, 5, 8}}}}};
    j["scenario"]["tx_elements"] = 32;
    return j;
  }
  if (name == "fig3") {
    json j = {{"scenario", base_scenario},
              {"sweep",
               {{"variable", "prior_support"},
                {"values", {60.0, 85.0}},
                {"by", {{"variable", "num_targets"}, {"values", {2, 5, 8}}}}}}};
    j["scenario"]["tx_elements"] = 32;
    return j;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// JSON reading with accumulated violations

class Reader {
 public:
  std::vector<std::string> errors;

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

  void add(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  void allow_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
        add(join(path, it.key()), "unknown field");
    }
  }

  const json* section(const json& obj, std::string_view key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) return nullptr;
    if (!it->is_object()) {
      add(join(path, key), "expected an object");
      return nullptr;
    }
    return &*it;
  }

  bool number(const json& obj, std::string_view key, const std::string& path, double& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number()) {
      add(join(path, key), "expected a number");
      return false;
    }
    out = it->get<double>();
    if (!std::isfinite(out)) {
      add(join(path, key), "must be finite");
      return false;
    }
    return true;
  }

  bool count(const json& obj, std::string_view key, const std::string& path, std::size_t& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number_integer() || (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
      add(join(path, key), "expected a non-negative integer");
      return false;
    }
    out = it->get<std::size_t>();
    return true;
  }

  bool seed(const json& obj, std::string_view key, const std::string& path, std::uint64_t& out) {
    std::size_t v = 0;
    if (!count(obj, key, path, v)) return false;
    out = v;
    return true;
  }

  bool boolean(const json& obj, std::string_view key, const std::string& path, bool& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_boolean()) {
      add(join(path, key), "expected true or false");
      return false;
    }
    out = it->get<bool>();
    return true;
  }

  bool string(const json& obj, std::string_view key, const std::string& path, std::string& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_string()) {
      add(join(path, key), "expected a string");
      return false;
    }
    out = it->get<std::string>();
    return true;
  }
};

std::optional<SweepVariable> parse_variable(std::string_view s) {
  for (auto v : {SweepVariable::none, SweepVariable::tx_elements, SweepVariable::num_targets,
                 SweepVariable::prior_support})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

SweepAxis read_axis(Reader& r, const json& obj, const std::string& path) {
  SweepAxis axis;
  std::string name;
  if (r.string(obj, "variable", path, name)) {
    if (auto v = parse_variable(name)) {
      axis.variable = *v;
    } else {
      r.add(Reader::join(path, "variable"),
            "must be one of none, tx_elements, num_targets, prior_support (got '" + name + "')");
    }
  }
  const auto it = obj.find("values");
  if (it != obj.end()) {
    if (!it->is_array()) {
      r.add(Reader::join(path, "values"), "expected an array of numbers");
    } else {
      for (std::size_t i = 0; i < it->size(); ++i) {
        const json& v = (*it)[i];
        if (!v.is_number()) {
          r.add(Reader::join(path, "values") + "[" + std::to_string(i) + "]", "expected a number");
          continue;
        }
        axis.values.push_back(v.get<double>());
      }
    }
  }
  return axis;
}

void check_axis(Reader& r, const SweepAxis& axis, const std::string& path) {
  const std::string vp = Reader::join(path, "values");
  if (axis.variable == SweepVariable::none) return;
  if (axis.values.empty()) {
    r.add(vp, "must be nonempty when a sweep variable is set");
    return;
  }
  for (std::size_t i = 0; i < axis.values.size(); ++i) {
    const double v = axis.values[i];
    const std::string ip = vp + "[" + std::to_string(i) + "]";
    if (axis.variable == SweepVariable::prior_support) {
      if (!(v > 0.0 && v < 90.0)) r.add(ip, "prior half-width must lie in (0, 90) degrees (endfire excluded)");
    } else if (!(v >= 1.0 && v == std::floor(v) && v < 1e6)) {
      r.add(ip, "must be a positive integer");
    }
  }
}

ExperimentConfig read_config(const json& root, const std::string& preset_name) {
  Reader r;
  ExperimentConfig c;
  c.preset = preset_name;
  r.allow_keys(root, "",
               {"preset", "description", "scenario", "snr_grid", "sweep", "crb", "simulation", "oracle", "output"});

  bool have_rx = false, have_tx = false, have_k = false, have_prior = false;
  if (const json* s = r.section(root, "scenario", "")) {
    const std::string p = "scenario";
    r.allow_keys(*s, p,
                 {"rx_elements", "tx_elements", "num_targets", "snapshots", "noise_power", "amplitude_variance",
                  "element_spacing", "prior_deg"});
    have_rx = r.count(*s, "rx_elements", p, c.scenario.rx_elements);
    have_tx = r.count(*s, "tx_elements", p, c.scenario.tx_elements);
    have_k = r.count(*s, "num_targets", p, c.scenario.num_targets);
    r.count(*s, "snapshots", p, c.scenario.snapshots);
    r.number(*s, "noise_power", p, c.scenario.noise_power);
    r.number(*s, "amplitude_variance", p, c.scenario.amplitude_variance);
    r.number(*s, "element_spacing", p, c.scenario.element_spacing);
    if (const auto it = s->find("prior_deg"); it != s->end()) {
      if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
        r.add("scenario.prior_deg", "expected [min_deg, max_deg]");
      } else {
        c.scenario.prior_min_deg = (*it)[0].get<double>();
        c.scenario.prior_max_deg = (*it)[1].get<double>();
        have_prior = true;
      }
    }
  } else if (root.find("scenario") == root.end()) {
    r.add("scenario", "required section missing");
  }

  if (const json* g = r.section(root, "snr_grid", "")) {
    r.allow_keys(*g, "snr_grid", {"start_db", "stop_db", "step_db"});
    r.number(*g, "start_db", "snr_grid", c.snr_grid.start_db);
    r.number(*g, "stop_db", "snr_grid", c.snr_grid.stop_db);
    r.number(*g, "step_db", "snr_grid", c.snr_grid.step_db);
  }

  if (const json* sw = r.section(root, "sweep", "")) {
    r.allow_keys(*sw, "sweep", {"variable", "values", "by"});
    c.sweep = read_axis(r, *sw, "sweep");
    if (const json* by = r.section(*sw, "by", "sweep")) {
      r.allow_keys(*by, "sweep.by", {"variable", "values"});
      c.sweep_by = read_axis(r, *by, "sweep.by");
    }
  }

  if (const json* k = r.section(root, "crb", "")) {
    r.allow_keys(*k, "crb", {"samples", "seed", "amplitude", "amplitude_draws"});
    r.count(*k, "samples", "crb", c.crb.samples);
    r.seed(*k, "seed", "crb", c.crb.seed);
    r.count(*k, "amplitude_draws", "crb", c.crb.amplitude_draws);
    std::string mode;
    if (r.string(*k, "amplitude", "crb", mode)) {
      if (mode == "plug_in") {
        c.crb.amplitude = AmplitudeConvention::Kind::plug_in;
      } else if (mode == "average") {
        c.crb.amplitude = AmplitudeConvention::Kind::average;
      } else {
        r.add("crb.amplitude", "must be plug_in or average (got '" + mode + "')");
      }
    }
  }

  if (const json* s = r.section(root, "simulation", "")) {
    r.allow_keys(*s, "simulation", {"enabled", "trials", "grid_step_deg", "seed"});
    r.boolean(*s, "enabled", "simulation", c.simulation.enabled);
    r.count(*s, "trials", "simulation", c.simulation.trials);
    r.number(*s, "grid_step_deg", "simulation", c.simulation.grid_step_deg);
    r.seed(*s, "seed", "simulation", c.simulation.seed);
  }

  if (const json* o = r.section(root, "oracle", "")) {
    r.allow_keys(*o, "oracle", {"enabled", "quadrature_points"});
    r.boolean(*o, "enabled", "oracle", c.oracle.enabled);
    r.count(*o, "quadrature_points", "oracle", c.oracle.quadrature_points);
  }

  r.string(root, "output", "", c.output);
  if (root.contains("description") && !root["description"].is_string()) r.add("description", "expected a string");

  // Semantic checks.
  auto swept = [&](SweepVariable v) {
    return c.sweep.variable == v || (c.sweep_by && c.sweep_by->variable == v);
  };
  if (!have_rx) r.add("scenario.rx_elements", "required field missing");
  else if (c.scenario.rx_elements < 1) r.add("scenario.rx_elements", "must be >= 1");
  if (!have_tx && !swept(SweepVariable::tx_elements)) r.add("scenario.tx_elements", "required field missing");
  else if (have_tx && c.scenario.tx_elements < 1) r.add("scenario.tx_elements", "must be >= 1");
  if (!have_k && !swept(SweepVariable::num_targets)) r.add("scenario.num_targets", "required field missing");
  else if (have_k && c.scenario.num_targets < 1) r.add("scenario.num_targets", "must be >= 1");
  if (!have_prior && !swept(SweepVariable::prior_support)) r.add("scenario.prior_deg", "required field missing");
  if (have_prior) {
    const double lo = c.scenario.prior_min_deg, hi = c.scenario.prior_max_deg;
    if (!(lo < hi)) r.add("scenario.prior_deg", "min must be below max");
    if (!(lo > -90.0 && hi < 90.0)) r.add("scenario.prior_deg", "support must lie strictly inside (-90, 90) degrees (endfire excluded)");
  }
  if (c.scenario.snapshots < 1) r.add("scenario.snapshots", "must be >= 1");
  if (!(c.scenario.noise_power > 0.0)) r.add("scenario.noise_power", "must be > 0");
  if (!(c.scenario.amplitude_variance >= 0.0)) r.add("scenario.amplitude_variance", "must be >= 0");
  if (!(c.scenario.element_spacing > 0.0)) r.add("scenario.element_spacing", "must be > 0");

  if (!(c.snr_grid.step_db > 0.0)) r.add("snr_grid.step_db", "must be > 0");
  if (!(c.snr_grid.stop_db >= c.snr_grid.start_db)) r.add("snr_grid.stop_db", "must be >= snr_grid.start_db");

  check_axis(r, c.sweep, "sweep");
  if (c.sweep_by) {
    check_axis(r, *c.sweep_by, "sweep.by");
    if (c.sweep.variable == SweepVariable::none) r.add("sweep.by", "requires an outer sweep variable");
    if (c.sweep_by->variable == SweepVariable::none) r.add("sweep.by.variable", "must name a sweep variable");
    else if (c.sweep_by->variable == c.sweep.variable) r.add("sweep.by.variable", "must differ from sweep.variable");
  }

  if (c.crb.samples < 1) r.add("crb.samples", "must be >= 1");
  if (c.crb.amplitude_draws < 1) r.add("crb.amplitude_draws", "must be >= 1");
  if (c.simulation.trials < 10) r.add("simulation.trials", "must be >= 10");
  if (!(c.simulation.grid_step_deg > 0.0)) r.add("simulation.grid_step_deg", "must be > 0");
  if (c.oracle.quadrature_points < 64) r.add("oracle.quadrature_points", "must be >= 64");
  if (c.output.empty()) r.add("output", "must be a nonempty path");

  if (r.errors.empty()) {
    // Cross-field checks on every concrete scenario.
    for (const auto& p : expand_sweep(c)) {
      const std::string where = c.sweep.variable == SweepVariable::none ? "scenario" : "sweep[" + p.label + "]";
      try {
        p.scenario.validate();
      } catch (const std::exception& e) {
        r.add(where, e.what());
      }
      if (c.simulation.enabled && c.simulation.grid_step_deg * kDeg > p.scenario.zeta() / 10.0)
        r.add("simulation.grid_step_deg", "exceeds a tenth of the prior width at " + where);
    }
  }

  if (!r.errors.empty()) throw ValidationError(std::move(r.errors));
  return c;
}

std::string format_label(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void apply_axis(ScenarioConfig& s, SweepVariable var, double v) {
  switch (var) {
    case SweepVariable::none: break;
    case SweepVariable::tx_elements: s.tx_elements = static_cast<std::size_t>(v); break;
    case SweepVariable::num_targets: s.num_targets = static_cast<std::size_t>(v); break;
    case SweepVariable::prior_support:
      s.prior_min_deg = -v;
      s.prior_max_deg = v;
      break;
  }
}

ArrayGeometry uniform_array(std::size_t n, double spacing) {
  ArrayGeometry g;
  g.wavelength = 1.0;
  g.positions.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.positions[i] = spacing * static_cast<double>(i);
  return g;
}

Scenario build_scenario(const ScenarioConfig& sc) {
  Scenario s;
  s.rx = uniform_array(sc.rx_elements, sc.element_spacing);
  s.tx = uniform_array(sc.tx_elements, sc.element_spacing);
  s.num_targets = sc.num_targets;
  s.snapshots = sc.snapshots;
  s.noise_power = sc.noise_power;
  s.amplitude_variance = sc.amplitude_variance;
  s.tx_shape = ComplexMatrix::Identity(static_cast<Eigen::Index>(sc.tx_elements),
                                       static_cast<Eigen::Index>(sc.tx_elements));
  s.snr = 1.0;
  s.prior_min = sc.prior_min_deg * kDeg;
  s.prior_max = sc.prior_max_deg * kDeg;
  return s;
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3"}; }

ExperimentConfig parse_config_text(std::string_view text, const std::optional<std::string>& preset) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed config: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("malformed config: top level must be an object");

  std::string name;
  if (preset) {
    name = *preset;
  } else if (const auto it = root.find("preset"); it != root.end()) {
    if (!it->is_string()) throw ValidationError({"preset: expected a string"});
    name = it->get<std::string>();
  }
  json merged = json::object();
  if (!name.empty()) {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw ValidationError({"preset: unknown preset '" + name + "' (expected fig1, fig2 or fig3)"});
    merged = preset_json(name);
  }
  merged.merge_patch(root);
  return read_config(merged, name);
}

ExperimentConfig parse_config(const std::filesystem::path& path, const std::optional<std::string>& preset) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), preset);
}

ExperimentConfig preset_config(std::string_view name) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  return parse_config_text("{}", std::string(name));
}

void override_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.crb.seed = seed;
  config.simulation.seed = seed;
}

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& config) {
  std::vector<SweepPoint> out;
  const std::vector<double> outer =
      config.sweep.variable == SweepVariable::none ? std::vector<double>{0.0} : config.sweep.values;
  for (double v : outer) {
    ScenarioConfig sc = config.scenario;
    apply_axis(sc, config.sweep.variable, v);
    const std::string label = config.sweep.variable == SweepVariable::none ? "none" : format_label(v);
    if (config.sweep_by && config.sweep_by->variable != SweepVariable::none) {
      for (double w : config.sweep_by->values) {
        ScenarioConfig inner = sc;
        apply_axis(inner, config.sweep_by->variable, w);
        out.push_back({label + "/" + format_label(w), build_scenario(inner)});
      }
    } else {
      out.push_back({label, build_scenario(sc)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Orchestration

ResultTable run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  const std::vector<SweepPoint> points = expand_sweep(config);
  const std::vector<double> grid = config.snr_grid.points();
  AmplitudeConvention amplitude;
  amplitude.kind = config.crb.amplitude;
  amplitude.draws = config.crb.amplitude_draws;
  amplitude.seed = config.crb.seed;

  ResultTable table;
  table.rows.reserve(points.size() * grid.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const SweepPoint& p = points[i];
    if (progress)
      progress("sweep_value " + p.label + " (" + std::to_string(i + 1) + "/" + std::to_string(points.size()) + ")");
    const std::string where = "sweep_value " + p.label;
    PriorSamples samples;
    try {
      samples = draw_prior_samples(p.scenario, config.crb.samples, config.crb.seed);
    } catch (const std::exception& e) {
      throw ExperimentError(where + ": " + e.what());
    }
    const double prior_apb = apb(p.scenario.num_targets, p.scenario.zeta());

    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double db = grid[j];
      const double snr = db_to_linear(db);
      ResultRow row;
      row.sweep_value = p.label;
      row.snr_db = db;
      row.apb = prior_apb;
      try {
        const ZzbResult z = zzb(p.scenario, snr, samples, amplitude);
        row.zzb = z.value;
        row.expected_crb = z.diagnostics.crb_term;
        row.h_tilde = z.diagnostics.h_tilde;
        row.u_tilde = z.diagnostics.u_tilde;
        row.gamma_term = z.diagnostics.gamma_term;
        row.p_large = z.diagnostics.p_large;
        row.crb_rejection_rate = z.diagnostics.crb_rejection_rate;
        if (config.simulation.enabled) {
          const std::uint64_t seed = derive_seed(derive_seed(config.simulation.seed, i), j);
          const MseEstimate m = simulate_mse(p.scenario, snr, config.simulation.trials,
                                             config.simulation.grid_step_deg * kDeg, seed);
          row.mse = m.mse;
          row.mse_stderr = m.stderr_;
        }
        if (config.oracle.enabled && p.scenario.num_targets == 1)
          row.zzb_exact = zzb_exact_1d(p.scenario.at_snr(snr), config.oracle.quadrature_points).value;
      } catch (const std::exception& e) {
        throw ExperimentError(where + ", snr_db " + format_value(db) + ": " + e.what());
      }
      table.rows.push_back(std::move(row));
    }
  }
  // Rows are generated in (sweep index, snr) order already; keep that order stable.
  return table;
}

// ---------------------------------------------------------------------------
// CSV

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "sweep_value", "snr_db",  "zzb",        "expected_crb", "apb",     "mse",
      "mse_stderr",  "h_tilde", "u_tilde",    "gamma_term",   "p_large", "crb_rejection_rate",
      "zzb_exact"};
  return cols;
}

std::string format_value(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

namespace {

std::string optional_value(const std::optional<double>& x) { return x ? format_value(*x) : std::string(); }

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("csv line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  return v;
}

std::optional<double> parse_optional(std::string_view s, std::size_t line_no) {
  if (s.empty()) return std::nullopt;
  return parse_double(s, line_no);
}

}  // namespace

std::string to_csv(const ResultTable& table) {
  std::string out(kCsvVersionLine);
  out += '\n';
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (const auto& r : table.rows) {
    const std::string fields[] = {r.sweep_value,
                                  format_value(r.snr_db),
                                  format_value(r.zzb),
                                  format_value(r.expected_crb),
                                  format_value(r.apb),
                                  optional_value(r.mse),
                                  optional_value(r.mse_stderr),
                                  format_value(r.h_tilde),
                                  format_value(r.u_tilde),
                                  format_value(r.gamma_term),
                                  format_value(r.p_large),
                                  format_value(r.crb_rejection_rate),
                                  optional_value(r.zzb_exact)};
    for (std::size_t i = 0; i < std::size(fields); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  }
  return out;
}

void write_csv(const ResultTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const std::string text = to_csv(table);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ResultTable parse_csv(std::string_view text) {
  ResultTable table;
  bool header_seen = false;
  std::size_t line_no = 0;
  const auto& cols = csv_columns();
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, ',');
    if (!header_seen) {
      if (fields.size() != cols.size() || !std::equal(fields.begin(), fields.end(), cols.begin()))
        throw ParseError("csv line " + std::to_string(line_no) + ": unexpected header");
      header_seen = true;
      continue;
    }
    if (fields.size() != cols.size())
      throw ParseError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(cols.size()) +
                       " fields");
    ResultRow r;
    r.sweep_value = std::string(fields[0]);
    r.snr_db = parse_double(fields[1], line_no);
    r.zzb = parse_double(fields[2], line_no);
    r.expected_crb = parse_double(fields[3], line_no);
    r.apb = parse_double(fields[4], line_no);
    r.mse = parse_optional(fields[5], line_no);
    r.mse_stderr = parse_optional(fields[6], line_no);
    r.h_tilde = parse_double(fields[7], line_no);
    r.u_tilde = parse_double(fields[8], line_no);
    r.gamma_term = parse_double(fields[9], line_no);
    r.p_large = parse_double(fields[10], line_no);
    r.crb_rejection_rate = parse_double(fields[11], line_no);
    r.zzb_exact = parse_optional(fields[12], line_no);
    table.rows.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError("csv: missing header row");
  return table;
}

ResultTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace zzb
