// nmor: command-line front end for the colliding-probe magnetometer model.
//
//   nmor single | colliding | sweep | angle-scan | signal | validate
//        [--config FILE] [--preset NAME] [--out DIR] [--seed N] [--tol X]
//        [--grid N] [--max-iter N] [--far-detuned true|false] [--d-B X]
//
// Precedence: CLI flags > config file > preset > built-in defaults.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "nmor/nmor.hpp"

namespace fs = std::filesystem;
using namespace nmor;

namespace {

struct Overrides {
  std::string config_path;
  std::string preset;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> grid;
  std::optional<int> max_iter;
  std::optional<std::string> far_detuned;
  std::optional<double> d_B;
  std::optional<unsigned> workers;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = parse_config(o.config_path.empty() ? "" : slurp(o.config_path), o.preset);
  if (o.out) c.output_dir = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.tol) c.solver.tol = *o.tol;
  if (o.grid) c.solver.grid_size = *o.grid;
  if (o.max_iter) c.solver.max_iter = *o.max_iter;
  if (o.far_detuned) {
    if (*o.far_detuned == "true") c.model.far_detuned = true;
    else if (*o.far_detuned == "false") c.model.far_detuned = false;
    else throw ConfigError("--far-detuned", "expected true or false");
  }
  if (o.d_B) {
    c.field.d_B = *o.d_B;
    c.field.physical.reset();
  }
  if (o.workers) c.sweep.workers = *o.workers;
  c.validate();
  return c;
}

SweepSpec sweep_spec(const RunConfig& c) {
  SweepSpec s;
  s.preset = c.sweep.preset;
  s.scenario = c.scenario;
  s.axes = c.sweep.axes;
  s.params = c.model;
  s.boundary = c.boundary;
  s.d_B = c.field.static_d_B();
  s.solver = c.solver;
  s.integrator = c.integrator;
  s.workers = c.sweep.workers;
  return s;
}

class Run {
 public:
  Run(std::string sub, RunConfig c) : m_{std::move(sub), std::move(c), {}, 0.0, json::object()} {
    dir_ = m_.config.output_dir;
    fs::create_directories(dir_);
    hash_ = m_.hash();
  }

  fs::path file(const std::string& name) {
    m_.outputs.push_back(name);
    return dir_ / name;
  }
  const std::string& hash() const { return hash_; }
  const RunConfig& config() const { return m_.config; }
  json& summary() { return m_.extra; }

  void finish(double seconds) {
    m_.wall_seconds = seconds;
    m_.write(dir_ / "manifest.json");
  }

 private:
  Manifest m_;
  fs::path dir_;
  std::string hash_;
};

int cmd_single(Run& run) {
  const auto& c = run.config();
  SpState st;
  st.S_plus = c.boundary.probe1.S_plus;
  st.S0 = c.boundary.probe1.S_plus + c.boundary.probe1.S_minus;
  st.theta_plus = c.boundary.probe1.phase_plus;
  st.theta_minus = c.boundary.probe1.phase_minus;
  const double d_B = c.field.static_d_B();
  const auto tr = sp_integrate(st, c.single.eta_max, c.single.steps, c.model, d_B, c.integrator);
  write_sp_trajectory(run.file("trajectory.csv"), run.hash(), tr);
  double worst = 0.0, blockade = 0.0;
  for (const auto& n : tr) {
    const double cf = sp_closed_form(st.S_plus, st.S0, n.eta, c.model, d_B);
    worst = std::max(worst, std::abs(n.S_plus - cf) / std::max(std::abs(cf), 1e-300));
    if (st.S0 > 0) blockade = std::max(blockade, std::abs(n.delta_S) / st.S0);
  }
  run.summary() = {{"closed_form_max_rel_error", worst},
                   {"max_abs_DeltaS_over_S0", blockade},
                   {"Theta_integrated", tr.back().theta},
                   {"Theta_linear_law", sp_rotation(tr.back().eta, st.S0, c.model, d_B)}};
  std::printf("single: eta=%g S+=%.10g S-=%.10g Theta=%.6e (linear law %.6e)\n", tr.back().eta, tr.back().S_plus,
              tr.back().S_minus, tr.back().theta, sp_rotation(tr.back().eta, st.S0, c.model, d_B));
  return 0;
}

int cmd_colliding(Run& run) {
  const auto& c = run.config();
  const double d_B = c.field.static_d_B();
  const auto pr = cp_solve_bvp(c.boundary, c.model, d_B, c.solver);
  const auto ob = cp_observables(pr, c.boundary, c.model, d_B, c.solver);
  write_cp_profiles(run.file("profiles.csv"), run.hash(), pr, ob);
  run.summary() = {{"iterations", pr.iterations},
                   {"residual", pr.residual},
                   {"DeltaTheta_exit", ob.delta_theta.back()},
                   {"circulation_index", ob.circulation_index},
                   {"enhancement_ratio", ob.enhancement_ratio},
                   {"entry_slope_ratio", ob.entry_slope_ratio}};
  std::printf("colliding: converged in %d iterations (residual %.3e); DeltaTheta(L)=%.6e enhancement=%.6f\n",
              pr.iterations, pr.residual, ob.delta_theta.back(), ob.enhancement_ratio);
  return 0;
}

int cmd_sweep(Run& run) {
  const auto spec = sweep_spec(run.config());
  const auto r = run_sweep(spec);
  std::vector<std::string> maps;
  if (r.axis_names.size() == 2) {
    maps = spec.scenario == Scenario::single_probe ? std::vector<std::string>{"S_plus", "S_minus", "Theta"}
                                                   : std::vector<std::string>{"S_p1_plus", "S_p2_plus", "DeltaTheta"};
    for (const auto& m : maps) write_grid(run.file("map_" + m + ".csv"), run.hash(), r, m);
  } else {
    std::vector<std::string> header{r.axis_names[0]};
    const auto obs = sweep_observables(spec.scenario);
    header.insert(header.end(), obs.begin(), obs.end());
    CsvWriter w(run.file("sweep.csv"), run.hash(), header);
    for (std::size_t i = 0; i < r.rows(); ++i) {
      std::vector<double> row{r.axis_values[0][i]};
      for (const auto& o : obs) row.push_back(r.at(o, i));
      w.row(row);
    }
  }
  json fails = json::array();
  for (const auto& f : r.failures) {
    json coords = json::object();
    for (const auto& [k, v] : f.coords) coords[k] = v;
    fails.push_back({{"job", f.job}, {"coords", coords}, {"message", f.message}});
  }
  run.summary() = {{"points", r.rows() * r.cols()}, {"failures", fails}, {"sweep_wall_time_s", r.wall_seconds}};
  std::printf("sweep: %zu x %zu grid, %zu failed job(s)\n", r.rows(), r.cols(), r.failures.size());
  for (const auto& f : r.failures) std::fprintf(stderr, "  failed job %zu: %s\n", f.job, f.message.c_str());
  return r.failures.empty() ? 0 : 3;
}

int cmd_angle_scan(Run& run) {
  const auto& c = run.config();
  const auto grid = detail::linspace(c.angle_scan.theta0_min, c.angle_scan.theta0_max,
                                     static_cast<std::size_t>(c.angle_scan.points));
  const auto scan = angle_scan(c.boundary, c.model, c.field.static_d_B(), grid, c.solver, c.sweep.workers);
  write_angle_scan(run.file("angle_scan.csv"), run.hash(), scan);
  double lo = scan.front().delta_theta, hi = lo;
  for (const auto& s : scan) lo = std::min(lo, s.delta_theta), hi = std::max(hi, s.delta_theta);
  run.summary() = {{"DeltaTheta_min", lo}, {"DeltaTheta_max", hi}};
  std::printf("angle-scan: %zu angles, DeltaTheta in [%.6e, %.6e]\n", scan.size(), lo, hi);
  return 0;
}

int cmd_signal(Run& run) {
  const auto& c = run.config();
  TimeSeriesSpec spec;
  spec.field = c.field;
  if (!spec.field.modulation) spec.field.modulation = Modulation{};
  spec.duration_s = c.signal.duration_s;
  spec.sample_rate_hz = c.signal.sample_rate_hz;
  spec.noise_sigma = c.signal.noise_sigma;
  const SignalModel model{c.model, c.boundary, c.solver};
  const auto cp = synthesize(spec, SignalScenario::colliding, model, c.seed, c.sweep.workers);
  const auto sp = synthesize(spec, SignalScenario::single_probe, model, c.seed, c.sweep.workers);
  const auto s_cp = spectrum(cp, spec, "colliding");
  const auto s_sp = spectrum(sp, spec, "single");
  write_series(run.file("series.csv"), run.hash(), spec, cp, sp);
  write_spectrum(run.file("spectrum_colliding.csv"), run.hash(), s_cp);
  write_spectrum(run.file("spectrum_single.csv"), run.hash(), s_sp);
  run.summary() = {{"label", "qualitative demonstration; experimental magnitudes are not reproduced"},
                   {"snr_db_colliding", s_cp.snr_db},
                   {"snr_db_single", s_sp.snr_db},
                   {"snr_gain_db", s_cp.snr_db - s_sp.snr_db}};
  std::printf("signal (qualitative): SNR colliding %.2f dB, single %.2f dB, gain %.2f dB\n", s_cp.snr_db, s_sp.snr_db,
              s_cp.snr_db - s_sp.snr_db);
  return 0;
}

int cmd_validate(Run& run) {
  const auto& c = run.config();
  OracleSuiteSpec spec;
  spec.seed = c.seed;
  const auto rows = oracle_suite(spec, c.sweep.workers);
  write_oracle_report(run.file("oracle_report.csv"), run.hash(), rows);
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.rel_error);
  const bool ok = worst <= 0.05;
  run.summary() = {{"sets", spec.sets}, {"max_rel_error", worst}, {"tolerance", 0.05}, {"pass", ok}};
  std::printf("validate: %d random sets, worst relative error %.3e (tolerance 5e-2): %s\n", spec.sets, worst,
              ok ? "ok" : "FAILED");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Colliding-probe bi-atomic magnetometer model"};
  app.set_version_flag("--version", std::string(NMOR_VERSION));
  app.require_subcommand(1);

  Overrides o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--preset", o.preset, "parameter preset")
        ->check(CLI::IsMember({"fig3", "fig4", "fig5", "ratio", "fig1-demo"}));
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--tol", o.tol, "BVP tolerance");
    sub->add_option("--grid", o.grid, "spatial grid size");
    sub->add_option("--max-iter", o.max_iter, "BVP iteration cap");
    sub->add_option("--far-detuned", o.far_detuned, "drop light shift and broadening (true|false)");
    sub->add_option("--d-B", o.d_B, "static Zeeman parameter d_B");
    sub->add_option("--workers", o.workers, "worker threads (0 = hardware)");
  };

  using Handler = int (*)(Run&);
  const std::vector<std::tuple<std::string, std::string, Handler>> subs{
      {"single", "single-probe trajectory", cmd_single},
      {"colliding", "colliding-probe boundary-value solve", cmd_colliding},
      {"sweep", "1-D/2-D parameter sweep (figure maps)", cmd_sweep},
      {"angle-scan", "rotation versus cross-polarisation angle", cmd_angle_scan},
      {"signal", "modulated-field spectrum and SNR", cmd_signal},
      {"validate", "perturbative vs first-principles comparison", cmd_validate},
  };
  std::string chosen;
  Handler handler = nullptr;
  for (const auto& [name, help, fn] : subs) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
    sub->callback([&chosen, &handler, name = name, fn = fn] {
      chosen = name;
      handler = fn;
    });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const auto t0 = std::chrono::steady_clock::now();
    Run run(chosen, resolve(o));
    int rc = 0;
    try {
      rc = handler(run);
    } catch (const ConvergenceError& e) {
      run.summary() = {{"error", e.what()}, {"iterations", e.iterations()}, {"residual", e.residual()}};
      run.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
    run.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return rc;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 64;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
