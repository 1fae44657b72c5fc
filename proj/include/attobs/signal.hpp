/**
 * @file signal.hpp
 * @brief Scalar and per-axis waveform descriptions used to drive the truth
 *        simulation (angular rate, gyro bias drift, reference disturbances).
 */
#pragma once

#include "so3.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace attobs {

struct SinusoidTerm
{
  double amplitude = 0.0;
  double frequency_hz = 0.0;
  double phase = 0.0;

  bool operator==(const SinusoidTerm&) const = default;
};

struct TimeWindow
{
  double start = 0.0;
  double end = 0.0;

  bool contains(double t) const { return t >= start && t <= end; }
  bool operator==(const TimeWindow&) const = default;
};

/**
 * @brief offset + ramp_rate * tau + sum_k a_k sin(2 pi f_k t + phase_k).
 *
 * Without a window tau = t. With a window the signal is zero outside it and
 * tau = t - window.start inside.
 */
struct SignalSpec
{
  double offset = 0.0;
  std::vector<SinusoidTerm> terms;
  double ramp_rate = 0.0;
  std::optional<TimeWindow> window;

  static SignalSpec constant(double value) { return SignalSpec{value, {}, 0.0, std::nullopt}; }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const
  {
    if (!std::isfinite(offset) || !std::isfinite(ramp_rate))
      throw std::invalid_argument("offset/ramp must be finite");
    for (const auto& term : terms) {
      if (!std::isfinite(term.amplitude) || !std::isfinite(term.phase) || !std::isfinite(term.frequency_hz))
        throw std::invalid_argument("sinusoid term must be finite");
      if (term.frequency_hz < 0.0)
        throw std::invalid_argument("sinusoid frequency must be non-negative");
    }
    if (window && !(window->start <= window->end))
      throw std::invalid_argument("window start must not exceed window end");
  }

  double eval(double t) const
  {
    double tau = t;
    if (window) {
      if (!window->contains(t))
        return 0.0;
      tau = t - window->start;
    }
    double v = offset + ramp_rate * tau;
    for (const auto& term : terms)
      v += term.amplitude * std::sin(2.0 * std::numbers::pi * term.frequency_hz * t + term.phase);
    return v;
  }

  /// Upper bound on |eval(t)| over [0, horizon].
  double bound(double horizon) const
  {
    double b = std::abs(offset) + std::abs(ramp_rate) * horizon;
    for (const auto& term : terms)
      b += std::abs(term.amplitude);
    return b;
  }

  bool operator==(const SignalSpec&) const = default;
};

/// One SignalSpec per body/inertial axis.
struct Vec3Signal
{
  std::array<SignalSpec, 3> axes;

  static Vec3Signal constant(const Vec3& v)
  {
    return Vec3Signal{{SignalSpec::constant(v.x()), SignalSpec::constant(v.y()), SignalSpec::constant(v.z())}};
  }

  Vec3 eval(double t) const { return Vec3(axes[0].eval(t), axes[1].eval(t), axes[2].eval(t)); }

  void validate() const
  {
    for (const auto& a : axes)
      a.validate();
  }

  /// Bound on the Euclidean norm over [0, horizon].
  double norm_bound(double horizon) const
  {
    const double x = axes[0].bound(horizon), y = axes[1].bound(horizon), z = axes[2].bound(horizon);
    return std::sqrt(x * x + y * y + z * z);
  }

  bool operator==(const Vec3Signal&) const = default;
};

}  // namespace attobs
