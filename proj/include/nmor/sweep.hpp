#pragma once
//
// One- and two-axis parameter sweeps over the single-probe and colliding
// solvers, plus the figure presets.
//
// The eta axis is special: it indexes positions along one propagation run
// rather than separate runs, so every combination of the *other* axes is one
// job and the job returns a whole column over eta.  Jobs run on a worker pool
// and land at fixed indices, so the result never depends on scheduling.  A
// job that throws is recorded and its cells are left NaN; the rest of the
// sweep carries on.
//

#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "nmor/colliding_probe.hpp"
#include "nmor/detail/parallel.hpp"
#include "nmor/model.hpp"
#include "nmor/single_probe.hpp"

namespace nmor {

enum class Scenario { single_probe, colliding };

inline std::string to_string(Scenario s) { return s == Scenario::single_probe ? "single" : "colliding"; }

inline Scenario scenario_from_string(const std::string& s) {
  if (s == "single") return Scenario::single_probe;
  if (s == "colliding") return Scenario::colliding;
  throw ConfigError("scenario", "expected single|colliding, got '" + s + "'");
}

/// Known axis names.  S_p1 / S_p2 set both circular components of that probe;
/// ratio sets d_p2 = d_p1 / ratio.
inline const std::set<std::string>& axis_names() {
  static const std::set<std::string> names{"eta", "d_B", "theta0", "d_p1", "d_p2", "S_p1", "S_p2", "ratio"};
  return names;
}

struct AxisSpec {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  int points = 2;
  std::vector<double> values;  ///< explicit values override min/max/points

  std::vector<double> grid() const { return values.empty() ? detail::linspace(min, max, static_cast<std::size_t>(points)) : values; }
  bool operator==(const AxisSpec&) const = default;
};

struct SweepSpec {
  std::string preset;  ///< informational tag, empty for ad-hoc sweeps
  Scenario scenario = Scenario::colliding;
  std::vector<AxisSpec> axes;
  ModelParams params;
  CpBoundary boundary;
  double d_B = 1.0;
  CpOptions solver;
  IntegratorTolerances integrator;
  unsigned workers = 0;

  void validate() const {
    params.validate();
    boundary.validate();
    solver.validate();
    if (axes.empty() || axes.size() > 2) throw ConfigError("sweep.axes", "need one or two axes");
    std::set<std::string> seen;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const auto& a = axes[k];
      const std::string key = "sweep.axes[" + std::to_string(k) + "]";
      if (!axis_names().count(a.name)) throw ConfigError(key + ".name", "unknown axis '" + a.name + "'");
      if (!seen.insert(a.name).second) throw ConfigError(key + ".name", "duplicate axis '" + a.name + "'");
      if (a.grid().size() < 2) throw ConfigError(key + ".points", "must be >= 2");
      if (a.name == "eta") {
        const auto g = a.grid();
        if (g.front() != 0.0) throw ConfigError(key + ".min", "eta axis must start at 0");
        for (std::size_t i = 1; i < g.size(); ++i)
          if (!(g[i] > g[i - 1])) throw ConfigError(key, "eta axis must be increasing");
      }
      if (scenario == Scenario::single_probe && (a.name == "theta0" || a.name == "S_p2" || a.name == "d_p2" || a.name == "ratio"))
        throw ConfigError(key + ".name", "axis '" + a.name + "' has no meaning for the single-probe scenario");
    }
  }
};

struct SweepFailure {
  std::size_t job = 0;
  std::vector<std::pair<std::string, double>> coords;
  std::string message;
};

struct SweepResult {
  std::string preset;
  Scenario scenario = Scenario::colliding;
  std::vector<std::string> axis_names;  ///< 1 or 2
  std::vector<std::vector<double>> axis_values;
  /// observable -> values flattened row-major over (axis0, axis1)
  std::map<std::string, std::vector<double>> data;
  std::vector<SweepFailure> failures;
  double wall_seconds = 0.0;

  std::size_t rows() const { return axis_values[0].size(); }
  std::size_t cols() const { return axis_values.size() > 1 ? axis_values[1].size() : 1; }
  double at(const std::string& obs, std::size_t i, std::size_t j = 0) const { return data.at(obs)[i * cols() + j]; }
};

inline std::vector<std::string> sweep_observables(Scenario s) {
  if (s == Scenario::single_probe) return {"S_plus", "S_minus", "DeltaS", "Theta", "Theta_sp"};
  return {"S_p1_plus", "S_p1_minus", "S_p2_plus", "S_p2_minus", "DeltaS_p1", "DeltaTheta",
          "DeltaPhi",  "G",          "circulation_index", "DeltaPhi_exit", "iterations"};
}

namespace detail {

struct JobContext {
  ModelParams params;
  CpBoundary boundary;
  double d_B = 0.0;
};

inline void apply_axis(JobContext& c, const std::string& name, double v) {
  if (name == "d_B") c.d_B = v;
  else if (name == "theta0") c.boundary.cross_angle = v;
  else if (name == "d_p1") c.params.d_p1 = v;
  else if (name == "d_p2") c.params.d_p2 = v;
  else if (name == "S_p1") c.boundary.probe1.S_plus = c.boundary.probe1.S_minus = v;
  else if (name == "S_p2") c.boundary.probe2.S_plus = c.boundary.probe2.S_minus = v;
  else if (name == "ratio") {
    if (v == 0.0) throw ConfigError("ratio", "must be non-zero");
    c.params.d_p2 = c.params.d_p1 / v;
  }
}

/// Smallest refinement of `requested` nodes on which every eta sample is a node.
inline int aligned_grid(int requested, std::size_t samples) {
  const int intervals = static_cast<int>(samples) - 1;
  const int k = std::max(1, (requested - 1 + intervals - 1) / intervals);
  return intervals * k + 1;
}

}  // namespace detail

inline SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();

  SweepResult res;
  res.preset = spec.preset;
  res.scenario = spec.scenario;
  for (const auto& a : spec.axes) {
    res.axis_names.push_back(a.name);
    res.axis_values.push_back(a.grid());
  }
  const std::size_t nr = res.rows(), nc = res.cols();
  const auto obs = sweep_observables(spec.scenario);
  for (const auto& o : obs) res.data[o].assign(nr * nc, std::numeric_limits<double>::quiet_NaN());

  // eta samples along a run: the eta axis if present, else the cell exit only
  int eta_axis = -1;
  for (std::size_t k = 0; k < spec.axes.size(); ++k)
    if (spec.axes[k].name == "eta") eta_axis = static_cast<int>(k);
  const std::vector<double> etas = eta_axis >= 0 ? res.axis_values[eta_axis] : std::vector<double>{spec.boundary.length};

  // jobs enumerate the non-eta axes
  std::vector<std::size_t> job_dims;
  for (std::size_t k = 0; k < spec.axes.size(); ++k)
    if (static_cast<int>(k) != eta_axis) job_dims.push_back(k);
  std::size_t n_jobs = 1;
  for (auto k : job_dims) n_jobs *= res.axis_values[k].size();

  std::vector<std::string> errors(n_jobs);
  std::vector<std::vector<std::pair<std::string, double>>> coords(n_jobs);

  detail::parallel_for(
      n_jobs,
      [&](std::size_t job) {
        std::array<std::size_t, 2> idx{0, 0};
        std::size_t rem = job;
        for (auto it = job_dims.rbegin(); it != job_dims.rend(); ++it) {
          const std::size_t n = res.axis_values[*it].size();
          idx[*it] = rem % n;
          rem /= n;
        }
        detail::JobContext ctx{spec.params, spec.boundary, spec.d_B};
        for (auto k : job_dims) {
          const double v = res.axis_values[k][idx[k]];
          coords[job].emplace_back(spec.axes[k].name, v);
          detail::apply_axis(ctx, spec.axes[k].name, v);
        }
        auto cell = [&](std::size_t e) {
          if (eta_axis >= 0) idx[eta_axis] = e;
          return idx[0] * nc + (spec.axes.size() > 1 ? idx[1] : 0);
        };
        try {
          ctx.params.validate();
          if (spec.scenario == Scenario::single_probe) {
            SpState st;
            st.S_plus = ctx.boundary.probe1.S_plus;
            st.S0 = ctx.boundary.probe1.S_plus + ctx.boundary.probe1.S_minus;
            st.theta_plus = ctx.boundary.probe1.phase_plus;
            st.theta_minus = ctx.boundary.probe1.phase_minus;
            const int steps = detail::aligned_grid(spec.solver.grid_size, etas.size() + (eta_axis >= 0 ? 0 : 1)) - 1;
            const double eta_max = etas.back();
            const auto tr = sp_integrate(st, eta_max, steps, ctx.params, ctx.d_B, spec.integrator);
            const std::size_t stride = static_cast<std::size_t>(steps) / (eta_axis >= 0 ? etas.size() - 1 : 1);
            for (std::size_t e = 0; e < etas.size(); ++e) {
              const auto& nd = tr[eta_axis >= 0 ? e * stride : tr.size() - 1];
              const std::size_t c = cell(e);
              res.data.at("S_plus")[c] = nd.S_plus;
              res.data.at("S_minus")[c] = nd.S_minus;
              res.data.at("DeltaS")[c] = nd.delta_S;
              res.data.at("Theta")[c] = nd.theta;
              res.data.at("Theta_sp")[c] = sp_rotation(nd.eta, st.S0, ctx.params, ctx.d_B);
            }
          } else {
            CpBoundary b = ctx.boundary;
            CpOptions opt = spec.solver;
            if (eta_axis >= 0) {
              b.length = etas.back();
              opt.grid_size = detail::aligned_grid(opt.grid_size, etas.size());
            }
            const auto pr = cp_solve_bvp(b, ctx.params, ctx.d_B, opt);
            const auto ob = cp_observables(pr, b, ctx.params, ctx.d_B, opt);
            const std::size_t last = pr.points.size() - 1;
            const std::size_t stride = eta_axis >= 0 ? last / (etas.size() - 1) : 0;
            const auto& exit2 = pr.points.front().p2;
            for (std::size_t e = 0; e < etas.size(); ++e) {
              const std::size_t node = eta_axis >= 0 ? e * stride : last;
              const auto& y = pr.points[node];
              const std::size_t c = cell(e);
              res.data.at("S_p1_plus")[c] = y.p1[0];
              res.data.at("S_p1_minus")[c] = y.p1[1];
              res.data.at("S_p2_plus")[c] = y.p2[0];
              res.data.at("S_p2_minus")[c] = y.p2[1];
              res.data.at("DeltaS_p1")[c] = ob.delta_S_p1[node];
              res.data.at("DeltaTheta")[c] = ob.delta_theta[node];
              res.data.at("DeltaPhi")[c] = y.p2[2] - y.p2[3];
              res.data.at("G")[c] = ob.gain[node];
              res.data.at("circulation_index")[c] = ob.circulation_index;
              res.data.at("DeltaPhi_exit")[c] = exit2[2] - exit2[3];
              res.data.at("iterations")[c] = pr.iterations;
            }
          }
        } catch (const std::exception& ex) {
          errors[job] = ex.what();
          for (std::size_t e = 0; e < etas.size(); ++e)
            for (auto& [name, v] : res.data) v[cell(e)] = std::numeric_limits<double>::quiet_NaN();
        }
      },
      spec.workers);

  for (std::size_t j = 0; j < n_jobs; ++j)
    if (!errors[j].empty()) res.failures.push_back({j, coords[j], errors[j]});
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// ---------------------------------------------------------------- presets

inline ModelParams figure_params() {
  ModelParams p;
  p.d_p1 = 10.0;
  p.d_p2 = 5.0;
  p.alpha_p1 = p.alpha_p2 = 0.0065;
  p.far_detuned = true;
  return p;
}

inline CpBoundary figure_boundary() {
  CpBoundary b;
  b.probe1 = {25.0, 25.0, 0.0, 0.0};
  b.probe2 = {25.0, 25.0, 0.0, 0.0};
  b.cross_angle = 0.0;
  b.length = 5.0;
  return b;
}

/// Single-probe blockade maps: S+-(0) = 25, d_p = 10, alpha = 0.0065.
inline SweepSpec preset_fig3(int points = 101) {
  SweepSpec s;
  s.preset = "fig3";
  s.scenario = Scenario::single_probe;
  s.params = figure_params();
  s.boundary = figure_boundary();
  s.boundary.probe2 = {0.0, 0.0, 0.0, 0.0};
  s.axes = {{"eta", 0.0, 5.0, points, {}}, {"d_B", -3.0, 3.0, points, {}}};
  return s;
}

/// Colliding maps: S_p1+-(0) = S_p2+-(0) = 25, d_p1 = 10, d_p2 = 5, cos 2theta0 = 1.
inline SweepSpec preset_fig4(int points = 101) {
  SweepSpec s;
  s.preset = "fig4";
  s.scenario = Scenario::colliding;
  s.params = figure_params();
  s.boundary = figure_boundary();
  s.axes = {{"eta", 0.0, 5.0, points, {}}, {"d_B", -3.0, 3.0, points, {}}};
  return s;
}

/// Cross-angle scan at d_B = 1, eta = 5 over two periods of 2theta0.
inline SweepSpec preset_fig5(int points = 181) {
  SweepSpec s = preset_fig4();
  s.preset = "fig5";
  s.d_B = 1.0;
  s.axes = {{"theta0", 0.0, 2.0 * std::numbers::pi, points, {}}};
  return s;
}

/// Detuning-ratio study d_p1/d_p2 in {0.5, 1, 2, 3, 4} at d_p1 = 10.
inline SweepSpec preset_ratio() {
  SweepSpec s = preset_fig4();
  s.preset = "ratio";
  s.d_B = 1.0;
  s.axes = {{"ratio", 0.0, 0.0, 0, {0.5, 1.0, 2.0, 3.0, 4.0}}};
  return s;
}

inline SweepSpec sweep_preset(const std::string& name) {
  if (name == "fig3") return preset_fig3();
  if (name == "fig4") return preset_fig4();
  if (name == "fig5") return preset_fig5();
  if (name == "ratio") return preset_ratio();
  throw ConfigError("preset", "unknown sweep preset '" + name + "'");
}

}  // namespace nmor
