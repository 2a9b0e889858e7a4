#pragma once
//
// First-principles check of the perturbative coherences: direct time
// integration of the four-level amplitude equations
//
//   A1' =  i dB A1 + i Om12 A2 + i Om14 A4 - gamma A1
//   A3' = -i dB A3 + i Om32 A2 + i Om34 A4 - gamma A3
//   A2' =  i dp1 A2 + i Om21 A1 + i Om23 A3 - Gamma A2
//   A4' =  i dp2 A4 + i Om41 A1 + i Om43 A3 - Gamma A4
//
// with Om_nm = conj(Om_mn), Om21 = p1+, Om23 = p1-, Om41 = p2-, Om43 = p2+.
//
// As written the model only decays, so it has no steady state.  For the
// coherence comparison the ground amplitudes are instead pinned: each relaxes
// back to its initial value at rate gamma, which is what the perturbative
// treatment assumes of the zeroth order.  The two ground states are run as
// separate incoherent components and each is normalised by its own ground
// population before the density matrix is assembled.
//

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "nmor/detail/ode.hpp"
#include "nmor/detail/parallel.hpp"
#include "nmor/model.hpp"
#include "nmor/susceptibility.hpp"

namespace nmor {

struct AmplitudeState {
  complex A1{1.0, 0.0};
  complex A2{};
  complex A3{};
  complex A4{};
  double t = 0.0;

  double population() const { return std::norm(A1) + std::norm(A2) + std::norm(A3) + std::norm(A4); }
};

enum class Repopulation { none, pinned };

struct FpControl {
  double dt = 0.0;               ///< 0 selects the resolution limit
  double sample_interval = 0.1;  ///< trajectory spacing, 1/Gamma units
  Repopulation repopulation = Repopulation::none;
};

/// Largest step that resolves the fastest algebraic oscillation.
inline double fp_max_step(const FieldState& fs, const ModelParams& p, double d_B) {
  const double fastest = std::max({1.0, std::abs(p.d_p1) * p.excited_decay, std::abs(p.d_p2) * p.excited_decay,
                                   std::abs(d_B) * p.ground_decay, fs.p1_plus.amplitude, fs.p1_minus.amplitude,
                                   fs.p2_plus.amplitude, fs.p2_minus.amplitude, p.excited_decay});
  return 0.01 / fastest;
}

namespace detail {

using Amp4 = std::array<complex, 4>;  // A1, A2, A3, A4

struct AmplitudeSystem {
  complex o21, o23, o41, o43;
  double dB, dp1, dp2, g, G;
  Amp4 pin{};
  bool pinned = false;

  void operator()(const Amp4& a, Amp4& da, double) const {
    const complex i{0.0, 1.0};
    da[0] = i * dB * a[0] + i * std::conj(o21) * a[1] + i * std::conj(o41) * a[3] - g * a[0];
    da[2] = -i * dB * a[2] + i * std::conj(o23) * a[1] + i * std::conj(o43) * a[3] - g * a[2];
    da[1] = i * dp1 * a[1] + i * o21 * a[0] + i * o23 * a[2] - G * a[1];
    da[3] = i * dp2 * a[3] + i * o41 * a[0] + i * o43 * a[2] - G * a[3];
    if (pinned) {
      da[0] += (g - i * dB) * pin[0];
      da[2] += (g + i * dB) * pin[2];
    }
  }
};

inline AmplitudeSystem make_system(const FieldState& fs, const ModelParams& p, double d_B) {
  AmplitudeSystem s;
  s.o21 = fs.p1_plus.rabi();
  s.o23 = fs.p1_minus.rabi();
  s.o41 = fs.p2_minus.rabi();
  s.o43 = fs.p2_plus.rabi();
  s.dB = d_B * p.ground_decay;
  s.dp1 = p.d_p1 * p.excited_decay;
  s.dp2 = p.d_p2 * p.excited_decay;
  s.g = p.ground_decay;
  s.G = p.excited_decay;
  return s;
}

}  // namespace detail

/// Fixed-step RK4 trajectory sampled every control.sample_interval.
inline std::vector<AmplitudeState> fp_evolve(const AmplitudeState& initial, const FieldState& fs, const ModelParams& p,
                                             double d_B, double t_end, const FpControl& control = {}) {
  p.validate();
  if (!(t_end > 0.0)) throw ConfigError("t_end", "must be > 0");
  if (!(control.sample_interval > 0.0)) throw ConfigError("sample_interval", "must be > 0");
  const double limit = fp_max_step(fs, p, d_B);
  if (control.dt > limit)
    throw StepSizeError("step " + std::to_string(control.dt) + " does not resolve the fastest rate (limit " +
                            std::to_string(limit) + ")",
                        initial.t);
  const double dt_max = control.dt > 0.0 ? control.dt : limit;

  auto sys = detail::make_system(fs, p, d_B);
  detail::Amp4 a{initial.A1, initial.A2, initial.A3, initial.A4};
  sys.pin = a;
  sys.pinned = control.repopulation == Repopulation::pinned;

  const auto samples = static_cast<std::size_t>(std::ceil(t_end / control.sample_interval - 1e-12));
  std::vector<AmplitudeState> out;
  out.reserve(samples + 1);
  out.push_back(initial);
  double t = initial.t;
  for (std::size_t k = 1; k <= samples; ++k) {
    const double target = initial.t + std::min(t_end, static_cast<double>(k) * control.sample_interval);
    const auto steps = static_cast<long>(std::ceil((target - t) / dt_max - 1e-12));
    const double h = (target - t) / static_cast<double>(std::max(steps, 1L));
    for (long s = 0; s < steps; ++s) {
      detail::rk4_step(sys, a, t, h);
      t += h;
    }
    t = target;
    for (const auto& z : a)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw StepSizeError("amplitude integration became non-finite", t);
    out.push_back({a[0], a[1], a[2], a[3], t});
  }
  return out;
}

/// Excited amplitudes with their time derivatives set to zero.
inline std::pair<complex, complex> fp_adiabatic(const FieldState& fs, const ModelParams& p, double d_B, complex A1,
                                                complex A3) {
  (void)d_B;
  const complex i{0.0, 1.0};
  const complex A2 = i * (fs.p1_plus.rabi() * A1 + fs.p1_minus.rabi() * A3) /
                     (p.excited_decay - i * p.d_p1 * p.excited_decay);
  const complex A4 = i * (fs.p2_minus.rabi() * A1 + fs.p2_plus.rabi() * A3) /
                     (p.excited_decay - i * p.d_p2 * p.excited_decay);
  return {A2, A4};
}

struct FpCoherences {
  CoherenceSet nonlinear;  ///< coherences with the linear (population) response removed
  double plateau_drift = 0.0;  ///< relative change of the coherences over the last 5/gamma
};

/// Quasi-steady optical coherences from the pinned amplitude model, with the
/// linear response i Om rho_nn / (Gamma (1 - i d)) subtracted so the result
/// compares with the third-order set.
inline FpCoherences fp_steady_coherences(const FieldState& fs, const ModelParams& p, double d_B,
                                         double t_end = 0.0) {
  if (t_end <= 0.0) t_end = 40.0 / std::min(p.ground_decay, p.excited_decay);
  const double tail = 5.0 / p.ground_decay;
  FpControl ctl;
  ctl.repopulation = Repopulation::pinned;
  ctl.sample_interval = tail;

  using Mat = std::array<std::array<complex, 4>, 4>;
  auto density = [&](std::size_t back, const std::vector<AmplitudeState>& tr1, const std::vector<AmplitudeState>& tr3) {
    Mat rho{};
    for (const auto* tr : {&tr1, &tr3}) {
      const auto& s = (*tr)[tr->size() - 1 - back];
      const std::array<complex, 4> a{s.A1, s.A2, s.A3, s.A4};
      const double pop = std::norm(s.A1) + std::norm(s.A3);
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) rho[m][n] += 0.5 * a[m] * std::conj(a[n]) / pop;
    }
    return rho;
  };

  AmplitudeState from1{{1.0, 0.0}, {}, {}, {}, 0.0};
  AmplitudeState from3{{}, {}, {1.0, 0.0}, {}, 0.0};
  const auto tr1 = fp_evolve(from1, fs, p, d_B, t_end, ctl);
  const auto tr3 = fp_evolve(from3, fs, p, d_B, t_end, ctl);

  const complex i{0.0, 1.0};
  const complex l1 = p.excited_decay * (1.0 - i * p.d_p1);
  const complex l2 = p.excited_decay * (1.0 - i * p.d_p2);
  auto extract = [&](const Mat& r) {
    // index order: 0 -> |1>, 1 -> |2>, 2 -> |3>, 3 -> |4>
    return CoherenceSet{
        r[1][0] - i * fs.p1_plus.rabi() * r[0][0] / l1,
        r[1][2] - i * fs.p1_minus.rabi() * r[2][2] / l1,
        r[3][0] - i * fs.p2_minus.rabi() * r[0][0] / l2,
        r[3][2] - i * fs.p2_plus.rabi() * r[2][2] / l2,
    };
  };
  const auto now = extract(density(0, tr1, tr3));
  const auto before = extract(density(1, tr1, tr3));
  double drift = 0.0;
  const std::array<std::pair<complex, complex>, 4> pairs{
      {{now.rho21, before.rho21}, {now.rho23, before.rho23}, {now.rho41, before.rho41}, {now.rho43, before.rho43}}};
  for (const auto& [a, b] : pairs)
    if (std::abs(a) > 0.0) drift = std::max(drift, std::abs(a - b) / std::abs(a));
  return {now, drift};
}

struct OracleRow {
  double S_p1_plus = 0, S_p1_minus = 0, S_p2_plus = 0, S_p2_minus = 0;
  double d_p1 = 0, d_p2 = 0, d_B = 0;
  int component = 0;  ///< 0: rho21, 1: rho23, 2: rho41, 3: rho43
  double pert_abs = 0;
  double fp_abs = 0;
  double rel_error = 0;
};

inline const char* coherence_name(int k) {
  static const char* names[] = {"rho21", "rho23", "rho41", "rho43"};
  return names[k];
}

/// Componentwise |rho| comparison of the perturbative set against the oracle.
/// Components whose fields are both off (zero on both sides) are skipped.
inline std::vector<OracleRow> oracle_compare(const FieldState& fs, const ModelParams& p, double d_B) {
  const auto pert = coherence_set(fs, p, d_B);
  const auto fp = fp_steady_coherences(fs, p, d_B).nonlinear;
  const auto s = saturation_set(fs, p);
  const std::array<complex, 4> a{pert.rho21, pert.rho23, pert.rho41, pert.rho43};
  const std::array<complex, 4> b{fp.rho21, fp.rho23, fp.rho41, fp.rho43};
  std::vector<OracleRow> rows;
  for (int k = 0; k < 4; ++k) {
    if (std::abs(a[k]) == 0.0 && std::abs(b[k]) < 1e-300) continue;
    OracleRow r{s.p1_plus, s.p1_minus, s.p2_plus, s.p2_minus, p.d_p1, p.d_p2, d_B, k, std::abs(a[k]), std::abs(b[k]),
                0.0};
    r.rel_error = std::abs(r.pert_abs - r.fp_abs) / r.fp_abs;
    rows.push_back(r);
  }
  return rows;
}

struct OracleSuiteSpec {
  int sets = 20;
  std::uint64_t seed = 20240607;
  double S_max = 0.1;
  double d_min = 10.0;
  double d_max = 50.0;
  double d_B_max = 3.0;
  bool far_detuned = false;
};

struct OracleDraw {
  FieldState fields;
  ModelParams params;
  double d_B = 0.0;
};

/// Seeded random parameter sets in the weak-field, far-detuned regime.
inline std::vector<OracleDraw> oracle_draws(const OracleSuiteSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> sat(0.0, spec.S_max), phase(0.0, 2.0 * std::numbers::pi),
      det(spec.d_min, spec.d_max), field(-spec.d_B_max, spec.d_B_max);
  std::bernoulli_distribution sign(0.5);
  std::vector<OracleDraw> out;
  for (int k = 0; k < spec.sets; ++k) {
    OracleDraw d;
    for (auto* c : {&d.fields.p1_plus, &d.fields.p1_minus, &d.fields.p2_plus, &d.fields.p2_minus}) {
      c->amplitude = std::sqrt(sat(rng));
      c->phase = phase(rng);
    }
    d.params.far_detuned = spec.far_detuned;
    d.params.d_p1 = (sign(rng) ? 1.0 : -1.0) * det(rng);
    d.params.d_p2 = (sign(rng) ? 1.0 : -1.0) * det(rng);
    d.d_B = field(rng);
    out.push_back(d);
  }
  return out;
}

/// Runs every draw (in parallel) and returns all comparison rows in draw order.
inline std::vector<OracleRow> oracle_suite(const OracleSuiteSpec& spec, unsigned workers = 0) {
  const auto draws = oracle_draws(spec);
  std::vector<std::vector<OracleRow>> per(draws.size());
  detail::parallel_for_rethrow(
      draws.size(), [&](std::size_t k) { per[k] = oracle_compare(draws[k].fields, draws[k].params, draws[k].d_B); },
      workers);
  std::vector<OracleRow> rows;
  for (auto& v : per) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

}  // namespace nmor
