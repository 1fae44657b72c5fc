/**
 * @file truth.hpp
 * @brief Ground-truth rigid-body trajectory and the biased, noisy sensor
 *        streams it produces (rate gyro plus two vector sensors).
 */
#pragma once

#include "signal.hpp"
#include "so3.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace attobs {

struct TruthState
{
  double t = 0.0;
  RotationMatrix R;
  Vec3 omega = Vec3::Zero();  ///< body rate, rad/s
  Vec3 b = Vec3::Zero();      ///< gyro bias, rad/s
  Vec3 alpha_i = Vec3::UnitZ();
  Vec3 beta_i = Vec3::UnitX();

  Vec3 alpha() const { return R.matrix().transpose() * alpha_i; }
  Vec3 beta() const { return R.matrix().transpose() * beta_i; }
};

struct Measurement
{
  double t = 0.0;
  Vec3 omega_m = Vec3::Zero();
  Vec3 alpha_m = Vec3::Zero();
  Vec3 beta_m = Vec3::Zero();

  bool finite() const
  {
    return std::isfinite(t) && omega_m.allFinite() && alpha_m.allFinite() && beta_m.allFinite();
  }
};

/// Time-varying inputs of the truth model. The inertial references are
/// nominal values; beta_i additionally receives beta_disturbance(t).
struct TruthProfile
{
  Vec3Signal omega = Vec3Signal::constant(Vec3::Zero());
  Vec3Signal bias = Vec3Signal::constant(Vec3::Zero());
  Vec3Signal beta_disturbance = Vec3Signal::constant(Vec3::Zero());
  Vec3 alpha_i = Vec3::UnitZ();
  Vec3 beta_i = Vec3::UnitX();

  void validate() const
  {
    omega.validate();
    bias.validate();
    beta_disturbance.validate();
    if (!alpha_i.allFinite() || !beta_i.allFinite())
      throw std::invalid_argument("reference vectors must be finite");
  }

  bool operator==(const TruthProfile&) const = default;
};

/// Band-limited white noise: each sample is N(0, power / sample_time) and is
/// held for sample_time.
struct NoiseSpec
{
  double sample_time = 1e-3;
  double power_alpha = 0.0;
  double power_beta = 0.0;
  double power_omega = 0.0;
  std::uint64_t seed = 0;

  void validate() const
  {
    if (!(sample_time > 0.0) || !std::isfinite(sample_time))
      throw std::invalid_argument("sample_time must be positive");
    if (!(power_alpha >= 0.0) || !(power_beta >= 0.0) || !(power_omega >= 0.0))
      throw std::invalid_argument("noise powers must be non-negative");
  }

  double std_alpha() const { return std::sqrt(power_alpha / sample_time); }
  double std_beta() const { return std::sqrt(power_beta / sample_time); }
  double std_omega() const { return std::sqrt(power_omega / sample_time); }

  bool operator==(const NoiseSpec&) const = default;
};

/// Truth state at time t with R given, inputs read from the profile.
inline TruthState truth_at(const TruthProfile& profile, double t, const RotationMatrix& r)
{
  TruthState s;
  s.t = t;
  s.R = r;
  s.omega = profile.omega.eval(t);
  s.b = profile.bias.eval(t);
  s.alpha_i = profile.alpha_i;
  s.beta_i = profile.beta_i + profile.beta_disturbance.eval(t);
  return s;
}

/// Advance by dt: R follows the exact exponential of the mid-step rate, the
/// remaining fields are re-read from the profile at t + dt.
inline TruthState propagate_truth(const TruthState& state, const TruthProfile& profile, double dt)
{
  if (!(dt > 0.0))
    throw std::invalid_argument("propagate_truth: dt must be positive");
  const Vec3 omega_mid = profile.omega.eval(state.t + 0.5 * dt);
  return truth_at(profile, state.t + dt, rotate_exp(state.R, omega_mid, dt));
}

/// Same as propagate_truth with an explicit end time, so long runs can use
/// t_k = k dt instead of an accumulated sum.
inline TruthState propagate_truth_to(const TruthState& state, const TruthProfile& profile, double t_next)
{
  const double dt = t_next - state.t;
  if (!(dt > 0.0))
    throw std::invalid_argument("propagate_truth_to: time must increase");
  const Vec3 omega_mid = profile.omega.eval(state.t + 0.5 * dt);
  return truth_at(profile, t_next, rotate_exp(state.R, omega_mid, dt));
}

/// One draw of the sensor noise vectors.
struct NoiseSample
{
  Vec3 omega = Vec3::Zero();
  Vec3 alpha = Vec3::Zero();
  Vec3 beta = Vec3::Zero();
};

template <class Urbg>
NoiseSample draw_noise(const NoiseSpec& noise, Urbg& rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  NoiseSample s;
  // Fixed draw order keeps streams identical across noise powers.
  for (int i = 0; i < 3; ++i)
    s.omega[i] = n(rng);
  for (int i = 0; i < 3; ++i)
    s.alpha[i] = n(rng);
  for (int i = 0; i < 3; ++i)
    s.beta[i] = n(rng);
  s.omega *= noise.std_omega();
  s.alpha *= noise.std_alpha();
  s.beta *= noise.std_beta();
  return s;
}

inline Measurement measure(const TruthState& state, const NoiseSample& n)
{
  Measurement m;
  m.t = state.t;
  m.omega_m = state.omega + state.b + n.omega;
  m.alpha_m = state.alpha() + n.alpha;
  m.beta_m = state.beta() + n.beta;
  return m;
}

/// omega_m = omega + b + n_w, alpha_m = R^T alpha_i + n_a, beta_m = R^T beta_i + n_b.
template <class Urbg>
Measurement sample_sensors(const TruthState& state, const NoiseSpec& noise, Urbg& rng)
{
  return measure(state, draw_noise(noise, rng));
}

/**
 * @brief Stateful sampler for a stream stepped at dt: draws fresh noise every
 *        sample_time and holds it in between.
 *
 * sample_time must be an integer multiple of dt.
 */
class SensorSampler
{
public:
  SensorSampler(const NoiseSpec& noise, double dt) : noise_(noise), rng_(noise.seed)
  {
    noise.validate();
    const double ratio = noise.sample_time / dt;
    hold_steps_ = static_cast<long>(std::llround(ratio));
    if (hold_steps_ < 1 || std::abs(static_cast<double>(hold_steps_) - ratio) > 1e-9 * ratio)
      throw std::invalid_argument("noise sample_time must be an integer multiple of dt");
  }

  Measurement operator()(const TruthState& state)
  {
    if (step_ % hold_steps_ == 0)
      held_ = draw_noise(noise_, rng_);
    ++step_;
    return measure(state, held_);
  }

private:
  NoiseSpec noise_;
  std::mt19937_64 rng_;
  long hold_steps_ = 1;
  long step_ = 0;
  NoiseSample held_;
};

}  // namespace attobs
