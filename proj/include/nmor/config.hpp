#pragma once
//
// Run configuration: one JSON document, every key optional (defaults are the
// standard colliding-probe operating point), unknown keys rejected with their full path.
//

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <set>
#include <string>

#include "json.hpp"
#include "nmor/colliding_probe.hpp"
#include "nmor/signal.hpp"
#include "nmor/sweep.hpp"

namespace nmor {

using json = nlohmann::json;

struct SingleSettings {
  double eta_max = 5.0;
  int steps = 100;
  bool operator==(const SingleSettings&) const = default;
};

struct AngleScanSettings {
  double theta0_min = 0.0;
  double theta0_max = 2.0 * std::numbers::pi;
  int points = 181;
  bool operator==(const AngleScanSettings&) const = default;
};

struct SweepSettings {
  std::string preset;  ///< empty: use `axes`
  std::vector<AxisSpec> axes{{"eta", 0.0, 5.0, 101, {}}, {"d_B", -3.0, 3.0, 101, {}}};
  unsigned workers = 0;
  bool operator==(const SweepSettings&) const = default;
};

struct SignalSettings {
  double duration_s = 2.0;
  double sample_rate_hz = 500.0;
  double noise_sigma = 0.02;
  bool operator==(const SignalSettings&) const = default;
};

struct RunConfig {
  Scenario scenario = Scenario::colliding;
  ModelParams model = figure_params();
  CpBoundary boundary = figure_boundary();
  MagneticFieldSpec field;
  CpOptions solver;
  IntegratorTolerances integrator;
  SingleSettings single;
  SweepSettings sweep;
  AngleScanSettings angle_scan;
  SignalSettings signal;
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  void validate() const {
    model.validate();
    boundary.validate();
    field.validate();
    solver.validate();
    if (!(integrator.rtol > 0.0)) throw ConfigError("solver.rtol", "must be > 0");
    if (!(integrator.atol > 0.0)) throw ConfigError("solver.atol", "must be > 0");
    if (!(single.eta_max > 0.0)) throw ConfigError("single.eta_max", "must be > 0");
    if (single.steps < 2) throw ConfigError("single.steps", "must be >= 2");
    if (angle_scan.points < 2) throw ConfigError("angle_scan.points", "must be >= 2");
    if (!(angle_scan.theta0_max > angle_scan.theta0_min)) throw ConfigError("angle_scan.theta0_max", "must exceed theta0_min");
    if (!(signal.duration_s > 0.0)) throw ConfigError("signal.duration_s", "must be > 0");
    if (!(signal.sample_rate_hz > 0.0)) throw ConfigError("signal.sample_rate_hz", "must be > 0");
    if (!(signal.noise_sigma >= 0.0)) throw ConfigError("signal.noise_sigma", "must be >= 0");
    if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
  }

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

/// Reads known keys out of one JSON object and rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    known_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    const json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(full(key), "expected true or false");
    } else if constexpr (std::is_arithmetic_v<T>) {
      if (!v.is_number()) throw ConfigError(full(key), "expected a number");
      if constexpr (std::is_integral_v<T>)
        if (!v.is_number_integer()) throw ConfigError(full(key), "expected an integer");
      if constexpr (std::is_unsigned_v<T>)
        if (v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(full(key), "must be >= 0");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(full(key), "expected a string");
    }
    out = v.get<T>();
  }

  bool explicit_null(const std::string& key) const { return j_.contains(key) && j_.at(key).is_null(); }

  /// Child object, or nullptr when absent/null.
  const json* child(const std::string& key) {
    known_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return nullptr;
    return &j_.at(key);
  }

  std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!known_.count(it.key())) throw ConfigError(full(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

template <class Fn>
void with_child(ObjectReader& parent, const std::string& key, Fn fn) {
  if (const json* c = parent.child(key)) {
    ObjectReader r(*c, parent.full(key));
    fn(r);
    r.finish();
  }
}

inline void read_probe(ObjectReader& r, ProbeBoundary& b) {
  r.get("S_plus", b.S_plus);
  r.get("S_minus", b.S_minus);
  r.get("phase_plus", b.phase_plus);
  r.get("phase_minus", b.phase_minus);
}

inline json probe_json(const ProbeBoundary& b) {
  return {{"S_plus", b.S_plus}, {"S_minus", b.S_minus}, {"phase_plus", b.phase_plus}, {"phase_minus", b.phase_minus}};
}

}  // namespace detail

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig3", "fig4", "fig5", "ratio", "fig1-demo"};
  return names;
}

/// Overwrites the fields a named preset pins down; everything else keeps its
/// current value.
inline void apply_preset(RunConfig& c, const std::string& name) {
  if (name == "fig1-demo") {
    const auto d = fig1_demo();
    c.model = d.model.params;
    c.boundary = d.model.boundary;
    c.field = d.series.field;
    c.signal = {d.series.duration_s, d.series.sample_rate_hz, d.series.noise_sigma};
    c.seed = d.seed;
  } else {
    const SweepSpec s = sweep_preset(name);
    c.scenario = s.scenario;
    c.model = s.params;
    c.boundary = s.boundary;
    c.field.d_B = s.d_B;
    c.sweep.axes = s.axes;
    if (name == "fig5") c.angle_scan = {s.axes[0].min, s.axes[0].max, s.axes[0].points};
  }
  c.sweep.preset = name;
}

/// Reads `root` on top of `c`.
inline RunConfig config_from_json(const json& root, RunConfig c = {}) {
  detail::ObjectReader r(root, "");
  std::string text = to_string(c.scenario);
  r.get("scenario", text);
  c.scenario = scenario_from_string(text);

  detail::with_child(r, "model", [&](detail::ObjectReader& m) {
    m.get("gamma", c.model.ground_decay);
    m.get("Gamma", c.model.excited_decay);
    m.get("d_p1", c.model.d_p1);
    m.get("d_p2", c.model.d_p2);
    m.get("alpha_p1", c.model.alpha_p1);
    m.get("alpha_p2", c.model.alpha_p2);
    m.get("far_detuned", c.model.far_detuned);
  });
  detail::with_child(r, "boundary", [&](detail::ObjectReader& b) {
    detail::with_child(b, "p1", [&](detail::ObjectReader& p) { detail::read_probe(p, c.boundary.probe1); });
    detail::with_child(b, "p2", [&](detail::ObjectReader& p) { detail::read_probe(p, c.boundary.probe2); });
    b.get("theta0", c.boundary.cross_angle);
    b.get("L", c.boundary.length);
  });
  detail::with_child(r, "field", [&](detail::ObjectReader& f) {
    f.get("d_B", c.field.d_B);
    if (f.explicit_null("physical")) c.field.physical.reset();
    if (f.explicit_null("modulation")) c.field.modulation.reset();
    detail::with_child(f, "physical", [&](detail::ObjectReader& p) {
      PhysicalField ph;
      p.get("B_tesla", ph.B_tesla);
      p.get("g_mu0", ph.g_mu0);
      p.get("gamma_rate", ph.gamma_rate);
      c.field.physical = ph;
    });
    detail::with_child(f, "modulation", [&](detail::ObjectReader& m) {
      Modulation mod;
      std::string w = to_string(mod.waveform);
      m.get("waveform", w);
      mod.waveform = waveform_from_string(w);
      m.get("frequency_hz", mod.frequency_hz);
      m.get("amplitude", mod.amplitude);
      c.field.modulation = mod;
    });
  });
  detail::with_child(r, "solver", [&](detail::ObjectReader& s) {
    s.get("tol", c.solver.tol);
    s.get("grid", c.solver.grid_size);
    s.get("max_iter", c.solver.max_iter);
    s.get("relaxation", c.solver.relaxation);
    std::string v = to_string(c.solver.mirror);
    s.get("mirror", v);
    c.solver.mirror = mirror_rule_from_string(v);
    v = to_string(c.solver.phase_law);
    s.get("phase_law", v);
    c.solver.phase_law = phase_law_from_string(v);
    v = to_string(c.solver.cross_angle_mode);
    s.get("cross_angle_mode", v);
    c.solver.cross_angle_mode = cross_angle_mode_from_string(v);
    s.get("rtol", c.integrator.rtol);
    s.get("atol", c.integrator.atol);
  });
  detail::with_child(r, "single", [&](detail::ObjectReader& s) {
    s.get("eta_max", c.single.eta_max);
    s.get("steps", c.single.steps);
  });
  detail::with_child(r, "sweep", [&](detail::ObjectReader& s) {
    s.get("preset", c.sweep.preset);
    s.get("workers", c.sweep.workers);
    if (const json* axes = s.child("axes")) {
      if (!axes->is_array()) throw ConfigError("sweep.axes", "expected an array");
      c.sweep.axes.clear();
      for (std::size_t k = 0; k < axes->size(); ++k) {
        detail::ObjectReader a((*axes)[k], "sweep.axes[" + std::to_string(k) + "]");
        AxisSpec ax;
        a.get("name", ax.name);
        a.get("min", ax.min);
        a.get("max", ax.max);
        a.get("points", ax.points);
        if (const json* vals = a.child("values")) {
          if (!vals->is_array()) throw ConfigError(a.full("values"), "expected an array of numbers");
          for (const auto& v : *vals) {
            if (!v.is_number()) throw ConfigError(a.full("values"), "expected an array of numbers");
            ax.values.push_back(v.get<double>());
          }
        }
        a.finish();
        c.sweep.axes.push_back(ax);
      }
    }
  });
  detail::with_child(r, "angle_scan", [&](detail::ObjectReader& s) {
    s.get("theta0_min", c.angle_scan.theta0_min);
    s.get("theta0_max", c.angle_scan.theta0_max);
    s.get("points", c.angle_scan.points);
  });
  detail::with_child(r, "signal", [&](detail::ObjectReader& s) {
    s.get("duration_s", c.signal.duration_s);
    s.get("sample_rate_hz", c.signal.sample_rate_hz);
    s.get("noise_sigma", c.signal.noise_sigma);
  });
  r.get("output_dir", c.output_dir);
  r.get("seed", c.seed);
  r.finish();
  c.validate();
  return c;
}

/// Parses JSON text; empty text yields the defaults.  A preset (the
/// argument, else sweep.preset in the text) supplies the starting values and
/// explicit keys refine them.
inline RunConfig parse_config(const std::string& text, const std::string& preset = "") {
  json root = json::object();
  if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("<syntax>", e.what());
    }
  }
  std::string name = preset;
  if (name.empty() && root.is_object() && root.contains("sweep") && root["sweep"].is_object() &&
      root["sweep"].contains("preset") && root["sweep"]["preset"].is_string())
    name = root["sweep"]["preset"].get<std::string>();
  RunConfig base;
  if (!name.empty()) {
    if (std::find(preset_names().begin(), preset_names().end(), name) == preset_names().end())
      throw ConfigError("preset", "unknown preset '" + name + "'");
    apply_preset(base, name);
  }
  RunConfig c = config_from_json(root, base);
  c.sweep.preset = name;
  return c;
}

inline json config_to_json(const RunConfig& c) {
  json field = {{"d_B", c.field.d_B}, {"physical", nullptr}, {"modulation", nullptr}};
  if (c.field.physical)
    field["physical"] = {{"B_tesla", c.field.physical->B_tesla},
                         {"g_mu0", c.field.physical->g_mu0},
                         {"gamma_rate", c.field.physical->gamma_rate}};
  if (c.field.modulation)
    field["modulation"] = {{"waveform", to_string(c.field.modulation->waveform)},
                           {"frequency_hz", c.field.modulation->frequency_hz},
                           {"amplitude", c.field.modulation->amplitude}};
  json axes = json::array();
  for (const auto& a : c.sweep.axes) {
    json ax = {{"name", a.name}, {"min", a.min}, {"max", a.max}, {"points", a.points}};
    if (!a.values.empty()) ax["values"] = a.values;
    axes.push_back(ax);
  }
  return {
      {"scenario", to_string(c.scenario)},
      {"model",
       {{"gamma", c.model.ground_decay},
        {"Gamma", c.model.excited_decay},
        {"d_p1", c.model.d_p1},
        {"d_p2", c.model.d_p2},
        {"alpha_p1", c.model.alpha_p1},
        {"alpha_p2", c.model.alpha_p2},
        {"far_detuned", c.model.far_detuned}}},
      {"boundary",
       {{"p1", detail::probe_json(c.boundary.probe1)},
        {"p2", detail::probe_json(c.boundary.probe2)},
        {"theta0", c.boundary.cross_angle},
        {"L", c.boundary.length}}},
      {"field", field},
      {"solver",
       {{"tol", c.solver.tol},
        {"grid", c.solver.grid_size},
        {"max_iter", c.solver.max_iter},
        {"relaxation", c.solver.relaxation},
        {"mirror", to_string(c.solver.mirror)},
        {"phase_law", to_string(c.solver.phase_law)},
        {"cross_angle_mode", to_string(c.solver.cross_angle_mode)},
        {"rtol", c.integrator.rtol},
        {"atol", c.integrator.atol}}},
      {"single", {{"eta_max", c.single.eta_max}, {"steps", c.single.steps}}},
      {"sweep", {{"preset", c.sweep.preset}, {"axes", axes}, {"workers", c.sweep.workers}}},
      {"angle_scan",
       {{"theta0_min", c.angle_scan.theta0_min},
        {"theta0_max", c.angle_scan.theta0_max},
        {"points", c.angle_scan.points}}},
      {"signal",
       {{"duration_s", c.signal.duration_s},
        {"sample_rate_hz", c.signal.sample_rate_hz},
        {"noise_sigma", c.signal.noise_sigma}}},
      {"output_dir", c.output_dir},
      {"seed", c.seed},
  };
}

inline std::string serialize_config(const RunConfig& c) { return config_to_json(c).dump(2) + "\n"; }

}  // namespace nmor
