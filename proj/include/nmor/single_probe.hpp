#pragma once
//
// Single-probe magnetometer: one linearly polarised probe whose two circular
// components share a fixed total saturation S0 = S+ + S-.  The gain term is
// clamped by (S0 - S+) S+, which is the blockade.
//

#include <cmath>
#include <vector>

#include "nmor/detail/ode.hpp"
#include "nmor/model.hpp"

namespace nmor {

struct SpState {
  double S_plus = 25.0;
  double theta_plus = 0.0;
  double theta_minus = 0.0;
  double S0 = 50.0;  ///< conserved S+ + S-
  double eta = 0.0;

  void validate() const {
    if (!(S0 >= 0.0)) throw ConfigError("S0", "must be >= 0");
    if (!(S_plus >= 0.0 && S_plus <= S0)) throw ConfigError("S_plus", "must lie in [0, S0]");
  }
};

struct SpRates {
  double dS_plus = 0.0;
  double dtheta_plus = 0.0;
  double dtheta_minus = 0.0;
};

struct SpNode {
  double eta = 0.0;
  double S_plus = 0.0;
  double S_minus = 0.0;
  double theta_plus = 0.0;
  double theta_minus = 0.0;
  double delta_S = 0.0;  ///< S+ - S-
  double theta = 0.0;    ///< theta+ - theta-
};

using SpTrajectory = std::vector<SpNode>;

/// Blockade coefficient A = 2 (1 + d_p1 d_B) / ((1 + d_p1^2)(1 + d_B^2)).
inline double blockade_coefficient(const ModelParams& p, double d_B) {
  return 2.0 * (1.0 + p.d_p1 * d_B) / ((1.0 + p.d_p1 * p.d_p1) * (1.0 + d_B * d_B));
}

inline SpRates sp_rhs(const SpState& st, const ModelParams& p, double d_B) {
  const double a = p.alpha_p1;
  const double d = p.d_p1;
  const double den = (1.0 + d * d) * (1.0 + d_B * d_B);
  const double s_minus = st.S0 - st.S_plus;
  SpRates r;
  r.dS_plus = -a * st.S_plus + 2.0 * a * (1.0 + d * d_B) * s_minus * st.S_plus / den;
  // -a d {1 - S-(1 - d_B/d)/den}, multiplied out so d = 0 is regular
  r.dtheta_plus = -a * d + a * (d - d_B) * s_minus / den;
  r.dtheta_minus = -a * d + a * (d + d_B) * st.S_plus / den;
  return r;
}

/// Logistic solution of the S+ equation.
inline double sp_closed_form(double S_plus0, double S0, double eta, const ModelParams& p, double d_B) {
  const double A = blockade_coefficient(p, d_B);
  const double x = 1.0 - A * S0;
  const double a = p.alpha_p1;
  // (1 - e^{-a x eta}) / x, with its x -> 0 limit
  const double growth = std::abs(x) < 1e-14 ? a * eta : -std::expm1(-a * x * eta) / x;
  return S_plus0 * std::exp(-a * x * eta) / (1.0 + A * S_plus0 * growth);
}

/// Linear-in-eta rotation with power broadening neglected.
inline double sp_rotation(double eta, double S0, const ModelParams& p, double d_B) {
  const double d = p.d_p1;
  return -p.alpha_p1 * d_B * S0 * eta / ((1.0 + d * d) * (1.0 + d_B * d_B));
}

/// Integrates S+ and both phases on `steps` equal intervals of [eta0, eta_max].
/// S- is algebraic (S0 - S+), so the total is conserved exactly.
inline SpTrajectory sp_integrate(const SpState& initial, double eta_max, int steps, const ModelParams& p,
                                 double d_B, const IntegratorTolerances& tol = {}) {
  if (!(eta_max > initial.eta)) throw ConfigError("eta_max", "must exceed the initial eta");
  if (steps < 2) throw ConfigError("steps", "must be >= 2");
  initial.validate();

  using State = std::array<double, 3>;
  const double S0 = initial.S0;
  auto sys = [&](const State& x, State& dxdt, double eta) {
    const auto r = sp_rhs({x[0], x[1], x[2], S0, eta}, p, d_B);
    dxdt = {r.dS_plus, r.dtheta_plus, r.dtheta_minus};
  };

  const auto grid = detail::linspace(initial.eta, eta_max, static_cast<std::size_t>(steps) + 1);
  SpTrajectory out;
  out.reserve(grid.size());
  detail::integrate_sampled(sys, State{initial.S_plus, initial.theta_plus, initial.theta_minus}, grid, tol,
                            [&](const State& x, double eta) {
                              const double s_minus = S0 - x[0];
                              out.push_back({eta, x[0], s_minus, x[1], x[2], x[0] - s_minus, x[1] - x[2]});
                            });
  return out;
}

}  // namespace nmor
