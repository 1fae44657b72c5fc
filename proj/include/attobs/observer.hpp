/**
 * @file observer.hpp
 * @brief Geometry-free observer of body-frame reference directions and gyro
 *        bias.
 *
 * For every vector channel (v_m measured, v_hat estimated):
 *
 *     d/dt v_hat = v_hat x (omega_m - b_hat) - K (v_hat - v_m)          (filtered)
 *     d/dt v_hat = v_hat x omega_m - v_m x b_hat - K (v_hat - v_m)      (linear_variant)
 *     d/dt b_hat = sum_j L_j (v_hat_j x v_m_j)
 *
 * The estimates live in R^3 and are never renormalized; inertial references
 * are not inputs. Attitude is rebuilt separately (see reconstruct.hpp).
 */
#pragma once

#include "gains.hpp"
#include "rk4.hpp"
#include "so3.hpp"
#include "truth.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace attobs {

enum class ObserverMode
{
  filtered,
  linear_variant,
};

inline const char* to_string(ObserverMode m)
{
  return m == ObserverMode::filtered ? "filtered" : "linear_variant";
}

struct ObserverState
{
  Vec3 alpha_hat = Vec3::Zero();
  Vec3 beta_hat = Vec3::Zero();
  Vec3 b_hat = Vec3::Zero();

  bool finite() const { return alpha_hat.allFinite() && beta_hat.allFinite() && b_hat.allFinite(); }

  friend ObserverState operator+(const ObserverState& a, const ObserverState& b)
  {
    return {a.alpha_hat + b.alpha_hat, a.beta_hat + b.beta_hat, a.b_hat + b.b_hat};
  }
  friend ObserverState operator*(double s, const ObserverState& a)
  {
    return {s * a.alpha_hat, s * a.beta_hat, s * a.b_hat};
  }
  bool operator==(const ObserverState&) const = default;
};

/// Raised when a step receives or produces non-finite numbers.
class NonFiniteError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline Vec3 channel_rate(const Vec3& v_hat, const Vec3& v_m, const Vec3& omega_m, const Vec3& rate,
                         const Vec3& b_hat, const Gain& k, ObserverMode mode)
{
  // rate == omega_m - b_hat, shared across channels.
  if (mode == ObserverMode::filtered)
    return v_hat.cross(rate) - k.apply(v_hat - v_m);
  return v_hat.cross(omega_m) - v_m.cross(b_hat) - k.apply(v_hat - v_m);
}

}  // namespace detail

inline ObserverState observer_derivative(const ObserverState& s, const Measurement& m, const Gains& g,
                                         ObserverMode mode)
{
  const Vec3 rate = m.omega_m - s.b_hat;
  ObserverState d;
  d.alpha_hat = detail::channel_rate(s.alpha_hat, m.alpha_m, m.omega_m, rate, s.b_hat, g.k_alpha, mode);
  d.beta_hat = detail::channel_rate(s.beta_hat, m.beta_m, m.omega_m, rate, s.b_hat, g.k_beta, mode);
  d.b_hat = Vec3::Zero();
  d.b_hat += g.l_alpha.apply(s.alpha_hat.cross(m.alpha_m));
  d.b_hat += g.l_beta.apply(s.beta_hat.cross(m.beta_m));
  return d;
}

/// One RK4 step with the measurement held over [t, t + dt].
inline ObserverState observer_step(const ObserverState& s, const Measurement& m, const Gains& g,
                                   ObserverMode mode, double dt)
{
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("observer_step: dt must be positive");
  if (!m.finite())
    throw NonFiniteError("observer_step: non-finite measurement at t=" + std::to_string(m.t));
  if (!s.finite())
    throw NonFiniteError("observer_step: non-finite observer state");
  ObserverState next = rk4_step(s, dt, [&](const ObserverState& x) { return observer_derivative(x, m, g, mode); });
  if (!next.finite())
    throw NonFiniteError("observer_step: state diverged to non-finite values");
  return next;
}

/// Measurement channel for the n-vector observer.
struct VectorChannel
{
  Vec3 v_m = Vec3::Zero();
  Vec3 v_hat = Vec3::Zero();
  Gain k = Gain::scalar(1.0);
  Gain l = Gain::scalar(1.0);
};

struct ChannelUpdate
{
  std::vector<VectorChannel> channels;
  Vec3 b_hat = Vec3::Zero();
};

namespace detail {

struct MultiState
{
  std::vector<Vec3> v_hat;
  Vec3 b_hat = Vec3::Zero();

  friend MultiState operator+(const MultiState& a, const MultiState& b)
  {
    MultiState r;
    r.v_hat.resize(a.v_hat.size());
    for (std::size_t j = 0; j < a.v_hat.size(); ++j)
      r.v_hat[j] = a.v_hat[j] + b.v_hat[j];
    r.b_hat = a.b_hat + b.b_hat;
    return r;
  }
  friend MultiState operator*(double s, const MultiState& a)
  {
    MultiState r;
    r.v_hat.resize(a.v_hat.size());
    for (std::size_t j = 0; j < a.v_hat.size(); ++j)
      r.v_hat[j] = s * a.v_hat[j];
    r.b_hat = s * a.b_hat;
    return r;
  }
};

}  // namespace detail

/// Generalization to any number of vector channels sharing one bias
/// estimate. With the two channels (alpha, beta) it reduces to observer_step.
inline ChannelUpdate observer_step_n(std::span<const VectorChannel> channels, const Vec3& omega_m,
                                     const Vec3& b_hat, ObserverMode mode, double dt)
{
  if (channels.empty())
    throw std::invalid_argument("observer_step_n: at least one channel required");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("observer_step_n: dt must be positive");
  if (!omega_m.allFinite() || !b_hat.allFinite())
    throw NonFiniteError("observer_step_n: non-finite rate or bias");

  detail::MultiState x;
  x.v_hat.reserve(channels.size());
  for (const auto& c : channels) {
    if (!c.v_m.allFinite() || !c.v_hat.allFinite())
      throw NonFiniteError("observer_step_n: non-finite channel");
    x.v_hat.push_back(c.v_hat);
  }
  x.b_hat = b_hat;

  auto field = [&](const detail::MultiState& s) {
    detail::MultiState d;
    d.v_hat.resize(channels.size());
    const Vec3 rate = omega_m - s.b_hat;
    d.b_hat = Vec3::Zero();
    for (std::size_t j = 0; j < channels.size(); ++j) {
      const auto& c = channels[j];
      d.v_hat[j] = detail::channel_rate(s.v_hat[j], c.v_m, omega_m, rate, s.b_hat, c.k, mode);
      d.b_hat += c.l.apply(s.v_hat[j].cross(c.v_m));
    }
    return d;
  };
  const detail::MultiState next = rk4_step(x, dt, field);

  ChannelUpdate out;
  out.channels.assign(channels.begin(), channels.end());
  for (std::size_t j = 0; j < channels.size(); ++j) {
    if (!next.v_hat[j].allFinite())
      throw NonFiniteError("observer_step_n: channel diverged");
    out.channels[j].v_hat = next.v_hat[j];
  }
  out.b_hat = next.b_hat;
  return out;
}

}  // namespace attobs
