#pragma once

#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "nmor/errors.hpp"

namespace nmor {

struct IntegratorTolerances {
  double rtol = 1e-9;
  double atol = 1e-12;
  /// Steps without reaching the next sample before declaring underflow.
  int max_steps_per_sample = 20000;

  bool operator==(const IntegratorTolerances&) const = default;
};

namespace detail {

namespace odeint = boost::numeric::odeint;

/// Adaptive Dormand-Prince integration of `sys` sampled at the monotone
/// `times`; `observe(x, t)` is called once per sample.
template <class State, class System, class Observer>
void integrate_sampled(System sys, State x, const std::vector<double>& times,
                       const IntegratorTolerances& tol, Observer observe) {
  if (times.size() < 2) {
    for (double t : times) observe(x, t);
    return;
  }
  auto stepper = odeint::make_dense_output(tol.atol, tol.rtol, odeint::runge_kutta_dopri5<State>());
  double last = times.front();
  auto obs = [&](const State& s, double t) {
    last = t;
    observe(s, t);
  };
  const double dt0 = (times[1] - times[0]) * 0.1;
  try {
    odeint::integrate_times(stepper, sys, x, times.begin(), times.end(), dt0, obs,
                            odeint::max_step_checker(tol.max_steps_per_sample));
  } catch (const odeint::odeint_error& e) {
    throw StepSizeError(std::string("step-size underflow (stiff or singular system): ") + e.what(), last);
  }
}

/// One classical RK4 step of size dt from t.
template <class State, class System>
void rk4_step(System sys, State& x, double t, double dt) {
  odeint::runge_kutta4<State> stepper;
  stepper.do_step(sys, x, t, dt);
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i)
    v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

}  // namespace detail
}  // namespace nmor
