// Randomized trajectories shared by the unit tests and the acceptance run.
#pragma once

#include "oracles.hpp"

#include <attobs/error_system.hpp>
#include <attobs/lyapunov.hpp>
#include <attobs/observer.hpp>
#include <attobs/signal.hpp>
#include <attobs/truth.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

namespace harness {

using namespace attobs;

inline const Vec3 kAlphaI{0.0, 0.0, 1.0};
inline const Vec3 kBetaI{1.0 / std::numbers::sqrt2, 0.0, 1.0 / std::numbers::sqrt2};
inline const Gains kPaperGains = Gains::scalar(10.0, 10.0, 0.15, 0.15);
inline const ScalarGains kPaperScalar{10.0, 10.0, 0.15, 0.15};

template <class Urbg>
ScalarGains random_gains(Urbg& rng)
{
  std::uniform_real_distribution<double> k(0.5, 20.0), l(0.01, 2.0);
  return {k(rng), k(rng), l(rng), l(rng)};
}

inline Mat3 coupling_oracle(const Vec3& a, const Vec3& b, const ScalarGains& g)
{
  // -[a]x^2 = |a|^2 I - a a^T
  return g.l_alpha / g.k_alpha * (a.squaredNorm() * Mat3::Identity() - a * a.transpose()) +
         g.l_beta / g.k_beta * (b.squaredNorm() * Mat3::Identity() - b * b.transpose());
}

/// Two sinusoids per axis, total amplitude per axis bound / sqrt(3), so the
/// vector norm never exceeds bound.
template <class Urbg>
Vec3Signal random_rate(Urbg& rng, double bound)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec3Signal s = Vec3Signal::constant(Vec3::Zero());
  const double axis_max = bound / std::sqrt(3.0);
  for (auto& axis : s.axes) {
    const double split = u(rng);
    for (double share : {split, 1.0 - split}) {
      const double freq = 0.002 + 0.2 * u(rng);
      axis.terms.push_back({axis_max * share * u(rng), freq, 2.0 * std::numbers::pi * u(rng)});
    }
  }
  return s;
}

/// Uniform sample from the 9-dimensional ball of the given radius.
template <class Urbg>
ErrorState random_error(Urbg& rng, double radius)
{
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::Matrix<double, 9, 1> x;
  for (int i = 0; i < 9; ++i)
    x[i] = n(rng);
  x *= radius * std::pow(u(rng), 1.0 / 9.0) / x.norm();
  return {x.segment<3>(0), x.segment<3>(3), x.segment<3>(6)};
}

template <class Urbg>
Vec3 random_in_ball(Urbg& rng, double radius)
{
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  return v * (radius * std::cbrt(u(rng)) / v.norm());
}

struct ErrorTrajectory
{
  std::vector<ErrorState> samples;
  ErrorState e0;
};

/// Noiseless rotated-error trajectory with |Omega| <= c_omega and
/// |B(0)| <= 0.05 (B enters only the linear variant).
template <class Urbg>
ErrorTrajectory random_error_trajectory(Urbg& rng, double e_radius, double c_omega, ObserverMode mode,
                                        double duration, double dt, const ScalarGains& g = kPaperScalar,
                                        const Vec3& ai = kAlphaI, const Vec3& bi = kBetaI,
                                        bool on_sphere = false)
{
  const Vec3Signal rate = random_rate(rng, c_omega);
  const Vec3 b0 = random_in_ball(rng, 0.05);
  ErrorTrajectory t;
  t.e0 = random_error(rng, e_radius);
  if (on_sphere)
    t.e0 = (e_radius / t.e0.norm()) * t.e0;
  t.samples = integrate_error_trajectory(
      t.e0, b0, [&](double time) { return rate.eval(time); }, ai, bi, g, mode, duration, dt);
  return t;
}

/// Line fit of log|e| against t over the samples before |e| first drops
/// below the floor.
inline oracle::LineFit pre_floor_fit(const std::vector<ErrorState>& samples, double dt, double floor = 1e-12,
                                     std::size_t stride = 10)
{
  std::vector<double> x, y;
  for (std::size_t k = 0; k < samples.size(); k += stride) {
    const double n = samples[k].norm();
    if (n < floor)
      break;
    x.push_back(static_cast<double>(k) * dt);
    y.push_back(std::log(n));
  }
  return oracle::fit_line(x, y);
}

struct ConvergenceTrial
{
  ErrorState final_error;
  /// Time after which |e_alpha|, |e_beta|, |e_b| all stay below the threshold.
  std::optional<double> settled;
  double max_final() const
  {
    return std::max({final_error.E_alpha.norm(), final_error.E_beta.norm(), final_error.E_b.norm()});
  }
};

/// Noiseless truth + observer loop started at truth + e0 (body frame).
inline ConvergenceTrial run_convergence_trial(const TruthProfile& profile, const RotationMatrix& r0,
                                              const ErrorState& e0, const Gains& g, ObserverMode mode,
                                              double duration, double dt, double threshold)
{
  TruthState truth = truth_at(profile, 0.0, r0);
  ObserverState s{truth.alpha() + e0.E_alpha, truth.beta() + e0.E_beta, truth.b + e0.E_b};
  const auto steps = static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
  ConvergenceTrial out;
  std::optional<double> last_above;
  for (std::size_t k = 0;; ++k) {
    const ErrorState e = body_error(s, truth.alpha(), truth.beta(), truth.b);
    if (e.E_alpha.norm() >= threshold || e.E_beta.norm() >= threshold || e.E_b.norm() >= threshold)
      last_above = truth.t;
    if (k == steps) {
      out.final_error = e;
      if (!last_above)
        out.settled = 0.0;
      else if (*last_above < truth.t)
        out.settled = *last_above + dt;
      break;
    }
    const Measurement m = measure(truth, NoiseSample{});
    s = observer_step(s, m, g, mode, dt);
    truth = propagate_truth_to(truth, profile, static_cast<double>(k + 1) * dt);
  }
  return out;
}

/// Random constant-bias profile with |omega| <= 1 rad/s and |b| <= 0.05 rad/s.
template <class Urbg>
TruthProfile random_profile(Urbg& rng)
{
  TruthProfile p;
  p.omega = random_rate(rng, 1.0);
  p.bias = Vec3Signal::constant(random_in_ball(rng, 0.05));
  p.alpha_i = kAlphaI;
  p.beta_i = kBetaI;
  return p;
}

}  // namespace harness
