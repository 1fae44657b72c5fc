/**
 * @file error_system.hpp
 * @brief Estimation-error dynamics of the observer, in body axes
 *        (e = estimate - truth) and in inertial axes (E = R e).
 *
 * Rotated system, filtered mode:
 *
 *     dE_a/dt = E_b x (alpha_i + E_a) - k_a E_a
 *     dE_c/dt = E_b x (beta_i + E_c)  - k_b E_c        (E_c: beta channel)
 *     dE_b/dt = Omega x E_b + l_a E_a x alpha_i + l_b E_c x beta_i
 *
 * In the linear variant the first two lines become E_b x alpha_i + E_a x B - k_a E_a
 * with B = R b the rotated true bias, which obeys dB/dt = Omega x B for constant b.
 */
#pragma once

#include "gains.hpp"
#include "observer.hpp"
#include "rk4.hpp"
#include "so3.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace attobs {

/// Scalar gains as plain numbers; unlike Gains no positivity is enforced, so
/// degenerate choices can be fed to the certificate routines.
struct ScalarGains
{
  double k_alpha = 0.0;
  double k_beta = 0.0;
  double l_alpha = 0.0;
  double l_beta = 0.0;

  /// Throws std::invalid_argument for matrix gains.
  static ScalarGains from(const Gains& g)
  {
    if (!g.all_scalar())
      throw std::invalid_argument("matrix gains are not supported here; scalar gains required");
    return {g.k_alpha.value(), g.k_beta.value(), g.l_alpha.value(), g.l_beta.value()};
  }
};

struct ErrorState
{
  Vec3 E_alpha = Vec3::Zero();
  Vec3 E_beta = Vec3::Zero();
  Vec3 E_b = Vec3::Zero();

  double norm() const
  {
    return std::sqrt(E_alpha.squaredNorm() + E_beta.squaredNorm() + E_b.squaredNorm());
  }
  bool finite() const { return E_alpha.allFinite() && E_beta.allFinite() && E_b.allFinite(); }

  friend ErrorState operator+(const ErrorState& a, const ErrorState& b)
  {
    return {a.E_alpha + b.E_alpha, a.E_beta + b.E_beta, a.E_b + b.E_b};
  }
  friend ErrorState operator*(double s, const ErrorState& a) { return {s * a.E_alpha, s * a.E_beta, s * a.E_b}; }
};

/// Rotate a body-frame error (e_alpha, e_beta, e_b) into inertial axes.
inline ErrorState rotate_error(const RotationMatrix& r, const ErrorState& e)
{
  return {r * e.E_alpha, r * e.E_beta, r * e.E_b};
}

/// Body-frame error of an observer state against the truth.
inline ErrorState body_error(const ObserverState& s, const Vec3& alpha, const Vec3& beta, const Vec3& b)
{
  return {s.alpha_hat - alpha, s.beta_hat - beta, s.b_hat - b};
}

inline ErrorState rotated_error_derivative(const ErrorState& e, const Vec3& big_omega, const Vec3& rotated_bias,
                                           const Vec3& alpha_i, const Vec3& beta_i, const ScalarGains& g,
                                           ObserverMode mode)
{
  ErrorState d;
  if (mode == ObserverMode::filtered) {
    d.E_alpha = e.E_b.cross(alpha_i + e.E_alpha) - g.k_alpha * e.E_alpha;
    d.E_beta = e.E_b.cross(beta_i + e.E_beta) - g.k_beta * e.E_beta;
  } else {
    d.E_alpha = e.E_b.cross(alpha_i) + e.E_alpha.cross(rotated_bias) - g.k_alpha * e.E_alpha;
    d.E_beta = e.E_b.cross(beta_i) + e.E_beta.cross(rotated_bias) - g.k_beta * e.E_beta;
  }
  d.E_b = big_omega.cross(e.E_b) + g.l_alpha * e.E_alpha.cross(alpha_i) + g.l_beta * e.E_beta.cross(beta_i);
  return d;
}

/// Body-frame counterpart; alpha, beta, omega, b are the true body quantities.
inline ErrorState body_error_derivative(const ErrorState& e, const Vec3& alpha, const Vec3& beta, const Vec3& omega,
                                        const Vec3& b, const ScalarGains& g, ObserverMode mode)
{
  ErrorState d;
  if (mode == ObserverMode::filtered) {
    d.E_alpha = e.E_alpha.cross(omega) - (alpha + e.E_alpha).cross(e.E_b) - g.k_alpha * e.E_alpha;
    d.E_beta = e.E_beta.cross(omega) - (beta + e.E_beta).cross(e.E_b) - g.k_beta * e.E_beta;
  } else {
    d.E_alpha = e.E_alpha.cross(omega) + e.E_alpha.cross(b) - alpha.cross(e.E_b) - g.k_alpha * e.E_alpha;
    d.E_beta = e.E_beta.cross(omega) + e.E_beta.cross(b) - beta.cross(e.E_b) - g.k_beta * e.E_beta;
  }
  d.E_b = g.l_alpha * e.E_alpha.cross(alpha) + g.l_beta * e.E_beta.cross(beta);
  return d;
}

namespace detail {

struct RotatedAugmented
{
  ErrorState e;
  Vec3 bias = Vec3::Zero();

  friend RotatedAugmented operator+(const RotatedAugmented& a, const RotatedAugmented& b)
  {
    return {a.e + b.e, a.bias + b.bias};
  }
  friend RotatedAugmented operator*(double s, const RotatedAugmented& a) { return {s * a.e, s * a.bias}; }
};

}  // namespace detail

/**
 * @brief RK4 samples of the rotated error system at spacing dt over
 *        [0, duration]; returns floor(duration/dt) + 1 states.
 *
 * big_omega(t) is the inertial-frame angular rate R(t) omega(t).
 * rotated_bias0 is R(0) b; it only enters the linear variant.
 */
template <class OmegaFn>
std::vector<ErrorState> integrate_error_trajectory(const ErrorState& e0, const Vec3& rotated_bias0, OmegaFn&& big_omega,
                                                   const Vec3& alpha_i, const Vec3& beta_i, const ScalarGains& g,
                                                   ObserverMode mode, double duration, double dt)
{
  if (!(dt > 0.0) || !(duration >= 0.0))
    throw std::invalid_argument("integrate_error_trajectory: need dt > 0 and duration >= 0");
  const auto steps = static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
  std::vector<ErrorState> out;
  out.reserve(steps + 1);
  detail::RotatedAugmented x{e0, rotated_bias0};
  out.push_back(x.e);
  auto field = [&](double t, const detail::RotatedAugmented& s) {
    const Vec3 w = big_omega(t);
    return detail::RotatedAugmented{rotated_error_derivative(s.e, w, s.bias, alpha_i, beta_i, g, mode), w.cross(s.bias)};
  };
  for (std::size_t k = 0; k < steps; ++k) {
    x = rk4_step(static_cast<double>(k) * dt, x, dt, field);
    if (!x.e.finite())
      throw NonFiniteError("error trajectory diverged at step " + std::to_string(k));
    out.push_back(x.e);
  }
  return out;
}

}  // namespace attobs
