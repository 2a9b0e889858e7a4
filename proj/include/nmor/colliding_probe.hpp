#pragma once
//
// Colliding-probe system.  Probe 1 enters at eta = 0 travelling +z, probe 2
// enters at eta = L travelling -z; both drive the same ground-state Zeeman
// coherence, so each probe's intensity and phase equations carry the
// cross-probe factor {1 + G cos 2theta0}, with probe 2 seeing 1/G.
//
// Probe-1 equations (d/deta, D1 = (1+d1^2)(1+d_B^2)):
//
//   dS1+-   = 2 a1 (1 +- d1 d_B) S1+ S1- {1 + G c} / D1
//   dtheta+- =  a1 (d1 -+ d_B) [S1-+ + (S1+ + S1-) G c] / D1
//
// The phase law above is the one whose difference reproduces the rotation
// enhancement 1 + (1 + S1+/S1-) G; PhaseLaw::per_component keeps the
// alternative S1-+ {1 + G c} grouping.  G S1+ S1- is evaluated as
// ((1+d1^2)/(1+d2^2)) sqrt(S1+ S1- S2+ S2-), which stays finite when probe 1
// fades.  Probe 2 obeys the mirrored set in d/d(-eta).
//
// The boundary values sit at opposite ends, so the pair is solved by
// alternating relaxation sweeps: probe 1 left to right with probe 2 frozen,
// then probe 2 right to left with probe 1 frozen.  Frozen profiles are read
// through cubic Hermite interpolation so the RK4 midpoints stay fourth order.
//

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nmor/detail/ode.hpp"
#include "nmor/detail/parallel.hpp"
#include "nmor/model.hpp"

namespace nmor {

/// How the probe-2 equations are obtained from the probe-1 set.
enum class MirrorRule {
  label_exchange,   ///< p1 <-> p2 (d1 <-> d2, a1 <-> a2, G -> 1/G)
  level_structure,  ///< as label_exchange but with d_B -> -d_B (p2- shares |1> with p1+)
};

enum class PhaseLaw { rotation_consistent, per_component };

/// fixed: cos 2theta0 is a constant factor.  tracking: the local cross angle
/// follows half of each probe's accumulated differential phase.
enum class CrossAngleMode { fixed, tracking };

inline std::string to_string(MirrorRule m) {
  return m == MirrorRule::label_exchange ? "label_exchange" : "level_structure";
}
inline std::string to_string(PhaseLaw l) {
  return l == PhaseLaw::rotation_consistent ? "rotation_consistent" : "per_component";
}
inline std::string to_string(CrossAngleMode m) { return m == CrossAngleMode::fixed ? "fixed" : "tracking"; }

inline MirrorRule mirror_rule_from_string(const std::string& s) {
  if (s == "label_exchange") return MirrorRule::label_exchange;
  if (s == "level_structure") return MirrorRule::level_structure;
  throw ConfigError("solver.mirror", "expected label_exchange|level_structure, got '" + s + "'");
}
inline PhaseLaw phase_law_from_string(const std::string& s) {
  if (s == "rotation_consistent") return PhaseLaw::rotation_consistent;
  if (s == "per_component") return PhaseLaw::per_component;
  throw ConfigError("solver.phase_law", "expected rotation_consistent|per_component, got '" + s + "'");
}
inline CrossAngleMode cross_angle_mode_from_string(const std::string& s) {
  if (s == "fixed") return CrossAngleMode::fixed;
  if (s == "tracking") return CrossAngleMode::tracking;
  throw ConfigError("solver.cross_angle_mode", "expected fixed|tracking, got '" + s + "'");
}

struct ProbeBoundary {
  double S_plus = 25.0;
  double S_minus = 25.0;
  double phase_plus = 0.0;
  double phase_minus = 0.0;

  bool absent() const { return S_plus == 0.0 && S_minus == 0.0; }
  bool operator==(const ProbeBoundary&) const = default;
};

struct CpBoundary {
  ProbeBoundary probe1;  ///< at eta = 0
  ProbeBoundary probe2;  ///< at eta = L
  double cross_angle = 0.0;
  double length = 5.0;

  void validate() const {
    if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("boundary.L", "must be finite and > 0");
    auto check = [](const ProbeBoundary& b, const std::string& key) {
      if (!(b.S_plus >= 0.0) || !std::isfinite(b.S_plus)) throw ConfigError(key + ".S_plus", "must be finite and >= 0");
      if (!(b.S_minus >= 0.0) || !std::isfinite(b.S_minus)) throw ConfigError(key + ".S_minus", "must be finite and >= 0");
      if (!std::isfinite(b.phase_plus) || !std::isfinite(b.phase_minus)) throw ConfigError(key, "phases must be finite");
    };
    check(probe1, "boundary.p1");
    check(probe2, "boundary.p2");
    if (!std::isfinite(cross_angle)) throw ConfigError("boundary.theta0", "must be finite");
  }
  bool operator==(const CpBoundary&) const = default;
};

struct CpOptions {
  int grid_size = 101;
  double tol = 1e-8;
  int max_iter = 500;
  double relaxation = 0.5;
  MirrorRule mirror = MirrorRule::label_exchange;
  PhaseLaw phase_law = PhaseLaw::rotation_consistent;
  CrossAngleMode cross_angle_mode = CrossAngleMode::fixed;

  void validate() const {
    if (grid_size < 16) throw ConfigError("solver.grid", "must be >= 16");
    if (!(tol > 0.0)) throw ConfigError("solver.tol", "must be > 0");
    if (max_iter < 1) throw ConfigError("solver.max_iter", "must be >= 1");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw ConfigError("solver.relaxation", "must lie in (0, 1]");
  }
  bool operator==(const CpOptions&) const = default;
};

/// {S+, S-, phase+, phase-} of one probe.
using ProbeVec = std::array<double, 4>;

struct CpPoint {
  ProbeVec p1{};  ///< S_p1+, S_p1-, theta+, theta-
  ProbeVec p2{};  ///< S_p2+, S_p2-, phi+, phi-
};

struct CpRates {
  ProbeVec p1{};  ///< d/deta
  ProbeVec p2{};  ///< d/d(-eta)
};

namespace detail {

inline bool vec_absent(const ProbeVec& v) { return v[0] == 0.0 && v[1] == 0.0; }

/// Rates of one probe along its own propagation direction given the other.
inline ProbeVec probe_rates(const ProbeVec& self, const ProbeVec& other, double alpha, double d_self,
                            double d_other, double d_B, double c, PhaseLaw law) {
  ProbeVec r{};
  if (vec_absent(self)) return r;
  const double prod = self[0] * self[1];
  const double D = (1.0 + d_self * d_self) * (1.0 + d_B * d_B);
  double cross = 0.0;  // G S+ S-
  double G = 0.0;
  if (!vec_absent(other)) {
    if (!(prod > 0.0))
      throw SingularGainError("gain function undefined: a probe saturation product vanished inside the cell");
    const double ratio = (1.0 + d_self * d_self) / (1.0 + d_other * d_other);
    const double root_other = std::sqrt(other[0] * other[1]);
    cross = ratio * std::sqrt(prod) * root_other;
    G = ratio * root_other / std::sqrt(prod);
  }
  const double core = prod + cross * c;
  r[0] = 2.0 * alpha * (1.0 + d_self * d_B) * core / D;
  r[1] = 2.0 * alpha * (1.0 - d_self * d_B) * core / D;
  if (law == PhaseLaw::rotation_consistent) {
    const double shared = (self[0] + self[1]) * G * c;
    r[2] = alpha * (d_self - d_B) * (self[1] + shared) / D;
    r[3] = alpha * (d_self + d_B) * (self[0] + shared) / D;
  } else {
    r[2] = alpha * (d_self - d_B) * self[1] * (1.0 + G * c) / D;
    r[3] = alpha * (d_self + d_B) * self[0] * (1.0 + G * c) / D;
  }
  return r;
}

inline ProbeVec to_vec(const ProbeBoundary& b) { return {b.S_plus, b.S_minus, b.phase_plus, b.phase_minus}; }

inline double effective_angle(const CpBoundary& b, const CpPoint& y, CrossAngleMode mode) {
  if (mode == CrossAngleMode::fixed) return b.cross_angle;
  const double rot1 = (y.p1[2] - y.p1[3]) - (b.probe1.phase_plus - b.probe1.phase_minus);
  const double rot2 = (y.p2[2] - y.p2[3]) - (b.probe2.phase_plus - b.probe2.phase_minus);
  return b.cross_angle - 0.5 * (rot1 + rot2);
}

inline ProbeVec hermite(const ProbeVec& y0, const ProbeVec& m0, const ProbeVec& y1, const ProbeVec& m1, double h,
                        double t) {
  if (t <= 0.0) return y0;
  if (t >= 1.0) return y1;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  ProbeVec r;
  for (int k = 0; k < 4; ++k) r[k] = h00 * y0[k] + h10 * h * m0[k] + h01 * y1[k] + h11 * h * m1[k];
  return r;
}

inline double relative_change(const std::vector<ProbeVec>& next, const std::vector<ProbeVec>& prev) {
  double worst = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i)
    for (int k = 0; k < 4; ++k) {
      const double d = std::abs(next[i][k] - prev[i][k]) / std::max(1.0, std::abs(next[i][k]));
      if (!(d <= worst)) worst = d;  // NaN propagates
    }
  return worst;
}

}  // namespace detail

inline CpRates cp_rhs(const CpPoint& y, const ModelParams& p, double d_B, double theta0, const CpOptions& opt = {}) {
  const double c = std::cos(2.0 * theta0);
  const double d_B2 = opt.mirror == MirrorRule::label_exchange ? d_B : -d_B;
  return {detail::probe_rates(y.p1, y.p2, p.alpha_p1, p.d_p1, p.d_p2, d_B, c, opt.phase_law),
          detail::probe_rates(y.p2, y.p1, p.alpha_p2, p.d_p2, p.d_p1, d_B2, c, opt.phase_law)};
}

struct CpProfiles {
  std::vector<double> eta;
  std::vector<CpPoint> points;
  int iterations = 0;
  double residual = 0.0;
  double relaxation = 0.5;  ///< final under-relaxation factor
};

inline CpProfiles cp_solve_bvp(const CpBoundary& b, const ModelParams& p, double d_B, const CpOptions& opt = {}) {
  p.validate();
  b.validate();
  opt.validate();
  if (!std::isfinite(d_B)) throw ConfigError("d_B", "must be finite");

  const std::size_t n = static_cast<std::size_t>(opt.grid_size);
  const auto eta = detail::linspace(0.0, b.length, n);
  const double h = eta[1] - eta[0];
  const ProbeVec in1 = detail::to_vec(b.probe1);
  const ProbeVec in2 = detail::to_vec(b.probe2);
  std::vector<ProbeVec> P1(n, in1), P2(n, in2), D1(n), D2(n);

  auto rates = [&](const ProbeVec& a, const ProbeVec& c) {
    const CpPoint y{a, c};
    return cp_rhs(y, p, d_B, detail::effective_angle(b, y, opt.cross_angle_mode), opt);
  };

  auto forward = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = rates(P1[i], P2[i]).p2;  // d/d(-eta)
      D2[i] = {-r[0], -r[1], -r[2], -r[3]};
    }
    std::vector<ProbeVec> out(n);
    out[0] = in1;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ProbeVec x = out[i];
      auto sys = [&](const ProbeVec& s, ProbeVec& ds, double z) {
        ds = rates(s, detail::hermite(P2[i], D2[i], P2[i + 1], D2[i + 1], h, (z - eta[i]) / h)).p1;
      };
      detail::rk4_step(sys, x, eta[i], h);
      out[i + 1] = x;
    }
    return out;
  };

  auto backward = [&] {
    for (std::size_t i = 0; i < n; ++i) D1[i] = rates(P1[i], P2[i]).p1;
    std::vector<ProbeVec> out(n);
    out[n - 1] = in2;
    for (std::size_t i = n - 1; i > 0; --i) {
      ProbeVec x = out[i];
      // integrate in s = L - eta
      auto sys = [&](const ProbeVec& s, ProbeVec& ds, double sz) {
        const double z = b.length - sz;
        ds = rates(detail::hermite(P1[i - 1], D1[i - 1], P1[i], D1[i], h, (z - eta[i - 1]) / h), s).p2;
      };
      detail::rk4_step(sys, x, b.length - eta[i], h);
      out[i - 1] = x;
    }
    return out;
  };

  auto blend = [](std::vector<ProbeVec>& cur, const std::vector<ProbeVec>& next, double w) {
    for (std::size_t i = 0; i < cur.size(); ++i)
      for (int k = 0; k < 4; ++k) cur[i][k] = (1.0 - w) * cur[i][k] + w * next[i][k];
  };

  const bool decoupled = b.probe1.absent() || b.probe2.absent();
  double omega = opt.relaxation;
  double prev = std::numeric_limits<double>::infinity();
  int rising = 0;
  double res = prev;
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    const double w = iter == 1 ? 1.0 : omega;
    const auto f1 = forward();
    const double r1 = detail::relative_change(f1, P1);
    blend(P1, f1, w);
    const auto f2 = backward();
    const double r2 = detail::relative_change(f2, P2);
    blend(P2, f2, w);
    res = std::max(r1, r2);
    if (!std::isfinite(res)) throw ConvergenceError("BVP diverged (non-finite profile)", iter, res);

    if (decoupled) res = 0.0;  // one sweep each way is exact when nothing couples back
    if (res < opt.tol) {
      CpProfiles out{eta, {}, iter, res, omega};
      out.points.reserve(n);
      for (std::size_t i = 0; i < n; ++i) out.points.push_back({P1[i], P2[i]});
      return out;
    }
    // oscillation guard: tighten the relaxation after two rising residuals
    rising = res > prev ? rising + 1 : 0;
    if (rising >= 2) {
      omega = std::max(omega * 0.5, 1.0 / 64.0);
      rising = 0;
    }
    prev = res;
  }
  throw ConvergenceError("non-convergence after " + std::to_string(opt.max_iter) + " iterations (residual " +
                             std::to_string(res) + ")",
                         opt.max_iter, res);
}

struct CpObservables {
  std::vector<double> eta;
  std::vector<double> delta_S_p1;      ///< S_p1+ - S_p1-
  std::vector<double> delta_theta;     ///< theta+ - theta-
  std::vector<double> gain;            ///< local G (0 where a probe is absent)
  std::vector<double> growth_p1_plus;  ///< dS_p1+/deta
  std::vector<double> growth_p2_plus;  ///< dS_p2+/d(-eta)
  /// Probe-1 imbalance generated through the cross-probe channel alone,
  /// int 4 a1 d1 d_B G S1+ S1- cos2theta0 / D1 deta, over the input S_p1 total.
  double circulation_index = 0.0;
  /// {1 + (1 + S_p1+/S_p1-) G cos2theta0} with G from the two input boundaries.
  double enhancement_ratio = 1.0;
  /// First-cell slope of delta_theta over the single-probe slope
  /// -a1 d_B S0 / D1; equals enhancement_ratio when that slope vanishes.
  double entry_slope_ratio = 1.0;
};

inline CpObservables cp_observables(const CpProfiles& pr, const CpBoundary& b, const ModelParams& p, double d_B,
                                    const CpOptions& opt = {}) {
  CpObservables o;
  const std::size_t n = pr.points.size();
  o.eta = pr.eta;
  const double D1 = (1.0 + p.d_p1 * p.d_p1) * (1.0 + d_B * d_B);
  const double ratio = (1.0 + p.d_p1 * p.d_p1) / (1.0 + p.d_p2 * p.d_p2);
  std::vector<double> integrand(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& y = pr.points[i];
    o.delta_S_p1.push_back(y.p1[0] - y.p1[1]);
    o.delta_theta.push_back(y.p1[2] - y.p1[3]);
    const double prod1 = y.p1[0] * y.p1[1];
    const double prod2 = y.p2[0] * y.p2[1];
    o.gain.push_back(prod1 > 0.0 ? ratio * std::sqrt(prod2) / std::sqrt(prod1) : 0.0);
    const double theta0 = detail::effective_angle(b, y, opt.cross_angle_mode);
    const auto r = cp_rhs(y, p, d_B, theta0, opt);
    o.growth_p1_plus.push_back(r.p1[0]);
    o.growth_p2_plus.push_back(r.p2[0]);
    integrand[i] = 4.0 * p.alpha_p1 * p.d_p1 * d_B * ratio * std::sqrt(prod1 * prod2) * std::cos(2.0 * theta0) / D1;
  }
  const double S0 = b.probe1.S_plus + b.probe1.S_minus;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) acc += 0.5 * (integrand[i] + integrand[i + 1]) * (o.eta[i + 1] - o.eta[i]);
  o.circulation_index = S0 > 0.0 ? acc / S0 : 0.0;

  const double c = std::cos(2.0 * b.cross_angle);
  if (b.probe1.S_minus > 0.0 && b.probe1.S_plus > 0.0 && !b.probe2.absent()) {
    const double G = gain_function({b.probe1.S_plus, b.probe1.S_minus, b.probe2.S_plus, b.probe2.S_minus}, p);
    o.enhancement_ratio = 1.0 + (1.0 + b.probe1.S_plus / b.probe1.S_minus) * G * c;
  }
  const double sp_slope = -p.alpha_p1 * d_B * S0 / D1;
  if (n >= 2 && sp_slope != 0.0)
    o.entry_slope_ratio = (o.delta_theta[1] - o.delta_theta[0]) / (o.eta[1] - o.eta[0]) / sp_slope;
  else
    o.entry_slope_ratio = o.enhancement_ratio;
  return o;
}

/// Reduced-model growth rates (dS_p1+/deta, dS_p2+/d(-eta)) from the
/// cross-probe terms alone.  The probe-2 sign follows the mirror rule so the
/// diagnostic agrees with the solver in use.
inline std::pair<double, double> cp_reduced_growth(const SaturationSet& s, const ModelParams& p, double d_B,
                                                   MirrorRule mirror = MirrorRule::label_exchange) {
  const double G = gain_function(s, p);
  const double zb = 1.0 + d_B * d_B;
  const double sign = mirror == MirrorRule::level_structure ? -1.0 : 1.0;
  const double g1 = 2.0 * p.alpha_p1 * p.d_p1 * d_B / ((1.0 + p.d_p2 * p.d_p2) * zb) * s.p1_product() * G;
  const double g2 = 2.0 * p.alpha_p1 * sign * p.d_p2 * d_B / ((1.0 + p.d_p1 * p.d_p1) * zb) * s.p2_product() / G;
  return {g1, g2};
}

struct AngleScanPoint {
  double theta0 = 0.0;
  double delta_theta = 0.0;  ///< theta+ - theta- at eta = L
  int iterations = 0;
};

/// Rotation at the cell exit versus the cross angle; one BVP per angle.
inline std::vector<AngleScanPoint> angle_scan(const CpBoundary& b, const ModelParams& p, double d_B,
                                              const std::vector<double>& theta0_grid, const CpOptions& opt = {},
                                              unsigned workers = 0) {
  if (theta0_grid.size() < 2) throw ConfigError("theta0_grid", "needs at least two points");
  std::vector<AngleScanPoint> out(theta0_grid.size());
  detail::parallel_for_rethrow(
      theta0_grid.size(),
      [&](std::size_t i) {
        CpBoundary bi = b;
        bi.cross_angle = theta0_grid[i];
        const auto pr = cp_solve_bvp(bi, p, d_B, opt);
        const auto& y = pr.points.back();
        out[i] = {theta0_grid[i], y.p1[2] - y.p1[3], pr.iterations};
      },
      workers);
  return out;
}

/// Probe 1 alone (G = 0) on the same uniform grid, by adaptive integration.
/// This is the single-probe limit of the colliding equations.
inline std::vector<ProbeVec> probe1_alone(const ProbeBoundary& in, double length, int grid_size, const ModelParams& p,
                                          double d_B, PhaseLaw law = PhaseLaw::rotation_consistent,
                                          const IntegratorTolerances& tol = {}) {
  const auto grid = detail::linspace(0.0, length, static_cast<std::size_t>(grid_size));
  auto sys = [&](const ProbeVec& x, ProbeVec& dx, double) {
    dx = detail::probe_rates(x, ProbeVec{}, p.alpha_p1, p.d_p1, p.d_p2, d_B, 1.0, law);
  };
  std::vector<ProbeVec> out;
  out.reserve(grid.size());
  detail::integrate_sampled(sys, detail::to_vec(in), grid, tol, [&](const ProbeVec& x, double) { out.push_back(x); });
  return out;
}

}  // namespace nmor
