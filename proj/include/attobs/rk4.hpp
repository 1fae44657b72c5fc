#pragma once

#include <utility>

namespace attobs {

/// Classical 4th-order Runge-Kutta step for an autonomous field f(x).
/// State needs x + y and double * x.
template <class State, class Field>
State rk4_step(const State& x, double dt, Field&& f)
{
  const State k1 = f(x);
  const State k2 = f(x + (0.5 * dt) * k1);
  const State k3 = f(x + (0.5 * dt) * k2);
  const State k4 = f(x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Time-dependent variant, f(t, x).
template <class State, class Field>
State rk4_step(double t, const State& x, double dt, Field&& f)
{
  const double half = 0.5 * dt;
  const State k1 = f(t, x);
  const State k2 = f(t + half, x + half * k1);
  const State k3 = f(t + half, x + half * k2);
  const State k4 = f(t + dt, x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace attobs
