/**
 * @file scenario.hpp
 * @brief Closed-loop run: truth model, sensors, observer and attitude
 *        reconstruction stepped together, one trace row per sample.
 */
#pragma once

#include "config.hpp"
#include "error_system.hpp"
#include "lyapunov.hpp"
#include "observer.hpp"
#include "reconstruct.hpp"
#include "truth.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace attobs {

class ScenarioError : public std::runtime_error
{
public:
  ScenarioError(std::size_t sample, const std::string& msg)
      : std::runtime_error("sample " + std::to_string(sample) + ": " + msg), sample_(sample)
  {
  }
  std::size_t sample() const { return sample_; }

private:
  std::size_t sample_;
};

struct TraceRow
{
  double t = 0.0;
  Vec3 omega = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  EulerAngles euler;
  Measurement meas;
  ObserverState est;
  EulerAngles euler_hat;
  double err_alpha = 0.0;
  double err_beta = 0.0;
  double err_b = 0.0;
  double att_err = 0.0;  ///< geodesic angle between R_hat and R, rad
  /// Lyapunov function of the rotated error; NaN when no certificate is active.
  double V = std::numeric_limits<double>::quiet_NaN();
  Degeneracy degeneracy = Degeneracy::none;
  ErrorState body_err;
};

struct ScenarioSummary
{
  std::size_t samples = 0;
  double final_err_alpha = 0.0;
  double final_err_beta = 0.0;
  double final_err_b = 0.0;
  double final_att_err = 0.0;
  /// Earliest time after which the error stays below the threshold.
  std::optional<double> converged_alpha;
  std::optional<double> converged_beta;
  std::optional<double> converged_b;
  std::optional<LyapunovCertificate> certificate;
};

namespace detail {

struct ConvergenceTracker
{
  double threshold = 0.0;
  std::optional<double> since;

  void update(double t, double err)
  {
    if (err < threshold) {
      if (!since)
        since = t;
    } else {
      since.reset();
    }
  }
};

}  // namespace detail

/**
 * @brief Runs cfg and hands every sample to sink(const TraceRow&).
 *
 * Per sample k (t = k dt): apply reinit events due at k, read sensors,
 * emit the row, then advance observer and truth to (k + 1) dt.
 * The observer uses the measurement taken at the start of the step.
 */
template <class Sink>
ScenarioSummary run_scenario(const ScenarioConfig& cfg, Sink&& sink)
{
  cfg.validate();
  NoiseSpec noise = cfg.noise;
  noise.seed = cfg.seed;
  SensorSampler sampler(noise, cfg.dt);
  const ReferenceBasis basis(cfg.truth.alpha_i, cfg.truth.beta_i);

  ScenarioSummary summary;
  std::optional<ScalarGains> sg;
  if (cfg.certificate.enabled) {
    sg = ScalarGains::from(cfg.gains);
    summary.certificate = find_certificate(cfg.certificate.c_omega, *sg, cfg.truth.alpha_i, cfg.truth.beta_i);
  }

  TruthState truth = truth_at(cfg.truth, 0.0, euler_to_rot(cfg.initial_attitude));
  ObserverState est;
  if (cfg.initial_state)
    est = *cfg.initial_state;
  else
    est = ObserverState{truth.alpha(), truth.beta(), truth.b};

  std::vector<std::pair<std::size_t, ObserverState>> events;
  for (const auto& e : cfg.reinit)
    events.emplace_back(static_cast<std::size_t>(std::llround(e.time / cfg.dt)), e.state);

  detail::ConvergenceTracker ca{cfg.convergence_threshold}, cb{cfg.convergence_threshold},
      cbias{cfg.convergence_threshold};

  const std::size_t n = cfg.sample_count();
  TraceRow row;
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& [step, state] : events)
      if (step == k)
        est = state;

    const Measurement m = sampler(truth);
    const Vec3 alpha = truth.alpha();
    const Vec3 beta = truth.beta();

    row.t = truth.t;
    row.omega = truth.omega;
    row.b = truth.b;
    row.euler = rot_to_euler(truth.R);
    row.meas = m;
    row.est = est;
    row.body_err = body_error(est, alpha, beta, truth.b);
    row.err_alpha = row.body_err.E_alpha.norm();
    row.err_beta = row.body_err.E_beta.norm();
    row.err_b = row.body_err.E_b.norm();
    const ReconstructedAttitude rec = reconstruct_attitude(est.alpha_hat, est.beta_hat, basis);
    row.euler_hat = rot_to_euler(rec.R_hat);
    row.degeneracy = rec.degeneracy;
    row.att_err = attitude_error_angle(rec.R_hat, truth.R);
    if (summary.certificate)
      row.V = lyapunov_value(rotate_error(truth.R, row.body_err), summary.certificate->params, cfg.truth.alpha_i,
                             cfg.truth.beta_i, *sg);
    ca.update(row.t, row.err_alpha);
    cb.update(row.t, row.err_beta);
    cbias.update(row.t, row.err_b);
    sink(static_cast<const TraceRow&>(row));

    if (k + 1 < n) {
      try {
        est = observer_step(est, m, cfg.gains, cfg.mode, cfg.dt);
      } catch (const NonFiniteError& e) {
        throw ScenarioError(k, e.what());
      }
      truth = propagate_truth_to(truth, cfg.truth, static_cast<double>(k + 1) * cfg.dt);
    }
  }

  summary.samples = n;
  summary.final_err_alpha = row.err_alpha;
  summary.final_err_beta = row.err_beta;
  summary.final_err_b = row.err_b;
  summary.final_att_err = row.att_err;
  summary.converged_alpha = ca.since;
  summary.converged_beta = cb.since;
  summary.converged_b = cbias.since;
  return summary;
}

inline ScenarioSummary run_scenario(const ScenarioConfig& cfg)
{
  return run_scenario(cfg, [](const TraceRow&) {});
}

// ---------------------------------------------------------------------------
// CSV trace

inline constexpr const char* kTraceHeader =
    "t,omega_x,omega_y,omega_z,b_x,b_y,b_z,phi,theta,psi,"
    "omega_m_x,omega_m_y,omega_m_z,alpha_m_x,alpha_m_y,alpha_m_z,beta_m_x,beta_m_y,beta_m_z,"
    "alpha_hat_x,alpha_hat_y,alpha_hat_z,beta_hat_x,beta_hat_y,beta_hat_z,b_hat_x,b_hat_y,b_hat_z,"
    "phi_hat,theta_hat,psi_hat,err_alpha,err_beta,err_b,att_err,V,degenerate";

inline constexpr int kTraceColumns = 37;

class CsvTraceWriter
{
public:
  /// Writes every `decimate`-th row; the last row is always written.
  explicit CsvTraceWriter(std::ostream& out, std::size_t decimate = 1, std::size_t total = 0)
      : out_(out), decimate_(decimate == 0 ? 1 : decimate), total_(total)
  {
    out_ << kTraceHeader << '\n';
  }

  void operator()(const TraceRow& r)
  {
    const std::size_t k = index_++;
    if (k % decimate_ != 0 && !(total_ != 0 && k + 1 == total_))
      return;
    line_.clear();
    put(r.t);
    put(r.omega);
    put(r.b);
    put(r.euler);
    put(r.meas.omega_m);
    put(r.meas.alpha_m);
    put(r.meas.beta_m);
    put(r.est.alpha_hat);
    put(r.est.beta_hat);
    put(r.est.b_hat);
    put(r.euler_hat);
    put(r.err_alpha);
    put(r.err_beta);
    put(r.err_b);
    put(r.att_err);
    put(r.V);
    line_ += std::to_string(static_cast<int>(r.degeneracy));
    line_ += '\n';
    out_ << line_;
    if (!out_)
      throw std::runtime_error("failed to write trace row");
  }

  std::size_t rows_seen() const { return index_; }

private:
  void put(double v)
  {
    if (std::isnan(v)) {
      line_ += "nan,";
      return;
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    line_.append(buf, res.ptr);
    line_ += ',';
  }
  void put(const Vec3& v)
  {
    put(v.x());
    put(v.y());
    put(v.z());
  }
  void put(const EulerAngles& e)
  {
    put(e.phi);
    put(e.theta);
    put(e.psi);
  }

  std::ostream& out_;
  std::size_t decimate_;
  std::size_t total_;
  std::size_t index_ = 0;
  std::string line_;
};

}  // namespace attobs
