/**
 * @file config.hpp
 * @brief Scenario description, its TOML form, and the built-in reference
 *        scenario preset.
 */
#pragma once

#include "gains.hpp"
#include "observer.hpp"
#include "reconstruct.hpp"
#include "signal.hpp"
#include "so3.hpp"
#include "toml_lite.hpp"
#include "truth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace attobs {

/// Invalid scenario file; what() starts with the dotted field path.
class ConfigError : public std::runtime_error
{
public:
  ConfigError(const std::string& path, const std::string& msg)
      : std::runtime_error(path.empty() ? msg : path + ": " + msg), path_(path)
  {
  }
  const std::string& path() const { return path_; }

private:
  std::string path_;
};

struct ReinitEvent
{
  double time = 0.0;
  ObserverState state;

  bool operator==(const ReinitEvent&) const = default;
};

struct CertificateSpec
{
  bool enabled = false;
  double c_omega = 1.0;

  bool operator==(const CertificateSpec&) const = default;
};

struct ScenarioConfig
{
  double duration = 10.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  ObserverMode mode = ObserverMode::filtered;
  /// Threshold for the summary's convergence times.
  double convergence_threshold = 1e-2;

  /// Nominal references live in truth.alpha_i / truth.beta_i.
  TruthProfile truth;
  EulerAngles initial_attitude;
  Gains gains = Gains::scalar(10.0, 10.0, 0.15, 0.15);
  NoiseSpec noise;

  /// Empty: start from the exact truth.
  std::optional<ObserverState> initial_state;
  std::vector<ReinitEvent> reinit;
  CertificateSpec certificate;

  bool operator==(const ScenarioConfig& o) const
  {
    return duration == o.duration && dt == o.dt && seed == o.seed && mode == o.mode &&
           convergence_threshold == o.convergence_threshold && truth == o.truth &&
           initial_attitude.phi == o.initial_attitude.phi && initial_attitude.theta == o.initial_attitude.theta &&
           initial_attitude.psi == o.initial_attitude.psi && gains == o.gains && noise == o.noise &&
           initial_state == o.initial_state && reinit == o.reinit && certificate == o.certificate;
  }

  /// Number of trace rows, floor(duration / dt) + 1.
  std::size_t sample_count() const
  {
    return static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
  }

  /// Throws ConfigError with the field path of the first violated constraint.
  void validate() const;
};

namespace detail {

inline void require(bool ok, const std::string& path, const std::string& msg)
{
  if (!ok)
    throw ConfigError(path, msg);
}

inline std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

inline void validate_signal(const Vec3Signal& s, const std::string& path)
{
  static const char* axes[] = {"x", "y", "z"};
  for (int k = 0; k < 3; ++k) {
    try {
      s.axes[k].validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(join(path, axes[k]), e.what());
    }
  }
}

}  // namespace detail

inline void ScenarioConfig::validate() const
{
  using detail::require;
  require(std::isfinite(duration) && duration > 0.0, "duration", "must be positive");
  require(std::isfinite(dt) && dt > 0.0, "dt", "must be positive");
  require(dt <= duration, "dt", "must not exceed duration");
  require(std::isfinite(convergence_threshold) && convergence_threshold > 0.0, "convergence_threshold",
          "must be positive");
  require(truth.alpha_i.allFinite(), "references.alpha_i", "must be finite");
  require(truth.beta_i.allFinite(), "references.beta_i", "must be finite");
  require(truth.alpha_i.cross(truth.beta_i).norm() > kReferenceIndependenceTol, "references",
          "alpha_i and beta_i must be linearly independent");
  detail::validate_signal(truth.omega, "signals.omega");
  detail::validate_signal(truth.bias, "signals.bias");
  detail::validate_signal(truth.beta_disturbance, "signals.beta_disturbance");
  require(std::isfinite(noise.sample_time) && noise.sample_time > 0.0, "noise.sample_time", "must be positive");
  require(noise.power_alpha >= 0.0 && std::isfinite(noise.power_alpha), "noise.power_alpha", "must be non-negative");
  require(noise.power_beta >= 0.0 && std::isfinite(noise.power_beta), "noise.power_beta", "must be non-negative");
  require(noise.power_omega >= 0.0 && std::isfinite(noise.power_omega), "noise.power_omega", "must be non-negative");
  const double ratio = noise.sample_time / dt;
  require(std::llround(ratio) >= 1 && std::abs(static_cast<double>(std::llround(ratio)) - ratio) <= 1e-9 * ratio,
          "noise.sample_time", "must be an integer multiple of dt");
  require(gains.k_alpha.positive(), "gains.k_alpha", "must be strictly positive");
  require(gains.k_beta.positive(), "gains.k_beta", "must be strictly positive");
  require(gains.l_alpha.positive(), "gains.l_alpha", "must be strictly positive");
  require(gains.l_beta.positive(), "gains.l_beta", "must be strictly positive");
  if (initial_state)
    require(initial_state->finite(), "initial_state", "must be finite");
  for (std::size_t k = 0; k < reinit.size(); ++k) {
    const std::string p = "reinit[" + std::to_string(k) + "]";
    require(std::isfinite(reinit[k].time) && reinit[k].time >= 0.0 && reinit[k].time <= duration,
            p + ".time", "must lie in [0, duration]");
    require(reinit[k].state.finite(), p, "state must be finite");
  }
  if (certificate.enabled) {
    require(gains.all_scalar(), "certificate.enabled", "requires scalar gains");
    require(std::isfinite(certificate.c_omega) && certificate.c_omega >= 0.0, "certificate.c_omega",
            "must be non-negative");
  }
}

// ---------------------------------------------------------------------------
// TOML <-> ScenarioConfig

namespace detail {

using toml::Table;
using toml::Value;

class TableReader
{
public:
  TableReader(const Table& t, std::string path) : t_(t), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  std::string field(const std::string& key) const { return join(path_, key); }

  const Value* find(const std::string& key)
  {
    used_.push_back(key);
    const auto it = t_.find(key);
    return it == t_.end() ? nullptr : &it->second;
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt)
  {
    const Value* v = find(key);
    if (!v) {
      if (fallback)
        return *fallback;
      throw ConfigError(field(key), "missing required number");
    }
    if (!v->is_number())
      throw ConfigError(field(key), std::string("expected a number, found ") + toml::kind_name(v->kind));
    return v->as_number();
  }

  bool boolean(const std::string& key, bool fallback)
  {
    const Value* v = find(key);
    if (!v)
      return fallback;
    if (v->kind != Value::Kind::boolean)
      throw ConfigError(field(key), "expected true or false");
    return v->b;
  }

  std::optional<std::string> string(const std::string& key)
  {
    const Value* v = find(key);
    if (!v)
      return std::nullopt;
    if (v->kind != Value::Kind::string)
      throw ConfigError(field(key), "expected a string");
    return v->s;
  }

  std::optional<Vec3> vec3(const std::string& key)
  {
    const Value* v = find(key);
    if (!v)
      return std::nullopt;
    return to_vec3(*v, field(key));
  }

  Vec3 vec3_required(const std::string& key)
  {
    auto v = vec3(key);
    if (!v)
      throw ConfigError(field(key), "missing required 3-vector");
    return *v;
  }

  std::optional<TableReader> table(const std::string& key)
  {
    const Value* v = find(key);
    if (!v)
      return std::nullopt;
    if (v->kind != Value::Kind::table)
      throw ConfigError(field(key), "expected a table");
    return TableReader(v->tbl, field(key));
  }

  /// Rejects keys that were never looked up.
  void finish() const
  {
    for (const auto& [k, v] : t_)
      if (std::find(used_.begin(), used_.end(), k) == used_.end())
        throw ConfigError(field(k), "unknown key");
  }

  static Vec3 to_vec3(const Value& v, const std::string& path)
  {
    if (v.kind != Value::Kind::array || v.arr.size() != 3)
      throw ConfigError(path, "expected an array of 3 numbers");
    Vec3 out;
    for (int k = 0; k < 3; ++k) {
      if (!v.arr[k].is_number())
        throw ConfigError(path, "expected an array of 3 numbers");
      out[k] = v.arr[k].as_number();
    }
    return out;
  }

private:
  const Table& t_;
  std::string path_;
  std::vector<std::string> used_;
};

inline Gain read_gain(TableReader& r, const std::string& key)
{
  const Value* v = r.find(key);
  const std::string path = r.field(key);
  if (!v)
    throw ConfigError(path, "missing required gain");
  try {
    if (v->is_number())
      return Gain::scalar(v->as_number());
    if (v->kind == Value::Kind::array && v->arr.size() == 3) {
      Mat3 m;
      for (int row = 0; row < 3; ++row)
        m.row(row) = TableReader::to_vec3(v->arr[row], path).transpose();
      return Gain::matrix(m);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path, "expected a positive number or a 3x3 symmetric positive-definite matrix");
}

inline SignalSpec read_signal(TableReader r)
{
  SignalSpec s;
  s.offset = r.number("offset", 0.0);
  s.ramp_rate = r.number("ramp_rate", 0.0);
  if (const Value* terms = r.find("terms")) {
    if (terms->kind != Value::Kind::array)
      throw ConfigError(r.field("terms"), "expected an array of [amplitude, frequency_hz, phase]");
    for (std::size_t k = 0; k < terms->arr.size(); ++k) {
      const Vec3 t = TableReader::to_vec3(terms->arr[k], r.field("terms") + "[" + std::to_string(k) + "]");
      s.terms.push_back({t[0], t[1], t[2]});
    }
  }
  if (const Value* w = r.find("window")) {
    if (w->kind != Value::Kind::array || w->arr.size() != 2 || !w->arr[0].is_number() || !w->arr[1].is_number())
      throw ConfigError(r.field("window"), "expected [start, end]");
    s.window = TimeWindow{w->arr[0].as_number(), w->arr[1].as_number()};
  }
  r.finish();
  return s;
}

inline Vec3Signal read_vec3_signal(std::optional<TableReader> r)
{
  Vec3Signal out = Vec3Signal::constant(Vec3::Zero());
  if (!r)
    return out;
  static const char* axes[] = {"x", "y", "z"};
  for (int k = 0; k < 3; ++k)
    if (auto axis = r->table(axes[k]))
      out.axes[k] = read_signal(*axis);
  r->finish();
  return out;
}

inline ObserverState read_observer_state(TableReader& r)
{
  ObserverState s;
  s.alpha_hat = r.vec3_required("alpha_hat");
  s.beta_hat = r.vec3_required("beta_hat");
  s.b_hat = r.vec3_required("b_hat");
  return s;
}

}  // namespace detail

inline ScenarioConfig config_from_toml(const toml::Table& root)
{
  using detail::TableReader;
  ScenarioConfig c;
  TableReader r(root, "");
  c.duration = r.number("duration");
  c.dt = r.number("dt");
  if (const auto* seed = r.find("seed")) {
    if (seed->kind != toml::Value::Kind::integer || seed->i < 0)
      throw ConfigError("seed", "expected a non-negative integer");
    c.seed = static_cast<std::uint64_t>(seed->i);
  }
  if (const auto mode = r.string("mode")) {
    if (*mode == "filtered")
      c.mode = ObserverMode::filtered;
    else if (*mode == "linear_variant")
      c.mode = ObserverMode::linear_variant;
    else
      throw ConfigError("mode", "expected \"filtered\" or \"linear_variant\", got \"" + *mode + "\"");
  }
  c.convergence_threshold = r.number("convergence_threshold", 1e-2);

  auto refs = r.table("references");
  if (!refs)
    throw ConfigError("references", "missing required table");
  c.truth.alpha_i = refs->vec3_required("alpha_i");
  c.truth.beta_i = refs->vec3_required("beta_i");
  refs->finish();

  auto gains = r.table("gains");
  if (!gains)
    throw ConfigError("gains", "missing required table");
  c.gains.k_alpha = detail::read_gain(*gains, "k_alpha");
  c.gains.k_beta = detail::read_gain(*gains, "k_beta");
  c.gains.l_alpha = detail::read_gain(*gains, "l_alpha");
  c.gains.l_beta = detail::read_gain(*gains, "l_beta");
  gains->finish();

  if (auto noise = r.table("noise")) {
    c.noise.sample_time = noise->number("sample_time", c.dt);
    c.noise.power_alpha = noise->number("power_alpha", 0.0);
    c.noise.power_beta = noise->number("power_beta", 0.0);
    c.noise.power_omega = noise->number("power_omega", 0.0);
    noise->finish();
  } else {
    c.noise.sample_time = c.dt;
  }

  if (auto att = r.table("initial_attitude")) {
    c.initial_attitude.phi = att->number("phi", 0.0);
    c.initial_attitude.theta = att->number("theta", 0.0);
    c.initial_attitude.psi = att->number("psi", 0.0);
    att->finish();
  }

  if (auto init = r.table("initial_state")) {
    const bool from_truth = init->boolean("from_truth", false);
    if (!from_truth)
      c.initial_state = detail::read_observer_state(*init);
    init->finish();
  }

  if (const auto* ev = r.find("reinit")) {
    if (ev->kind != toml::Value::Kind::array)
      throw ConfigError("reinit", "expected [[reinit]] tables");
    for (std::size_t k = 0; k < ev->arr.size(); ++k) {
      const std::string p = "reinit[" + std::to_string(k) + "]";
      if (ev->arr[k].kind != toml::Value::Kind::table)
        throw ConfigError(p, "expected a table");
      TableReader er(ev->arr[k].tbl, p);
      ReinitEvent e;
      e.time = er.number("time");
      e.state = detail::read_observer_state(er);
      er.finish();
      c.reinit.push_back(e);
    }
  }

  if (auto cert = r.table("certificate")) {
    c.certificate.enabled = cert->boolean("enabled", false);
    c.certificate.c_omega = cert->number("c_omega", 1.0);
    cert->finish();
  }

  if (auto signals = r.table("signals")) {
    c.truth.omega = detail::read_vec3_signal(signals->table("omega"));
    c.truth.bias = detail::read_vec3_signal(signals->table("bias"));
    c.truth.beta_disturbance = detail::read_vec3_signal(signals->table("beta_disturbance"));
    signals->finish();
  }
  r.finish();
  c.noise.seed = c.seed;
  c.validate();
  return c;
}

/// Parses scenario text; syntax errors surface as ConfigError with a line number.
inline ScenarioConfig parse_config(std::string_view text)
{
  toml::Table root;
  try {
    root = toml::parse(text);
  } catch (const toml::ParseError& e) {
    throw ConfigError("", std::string("syntax error, ") + e.what());
  }
  return config_from_toml(root);
}

inline ScenarioConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace detail {

inline toml::Value vec3_value(const Vec3& v)
{
  return toml::Value::array({toml::Value::floating(v.x()), toml::Value::floating(v.y()), toml::Value::floating(v.z())});
}

inline toml::Value gain_value(const Gain& g)
{
  if (g.is_scalar())
    return toml::Value::floating(g.value());
  toml::Array rows;
  for (int r = 0; r < 3; ++r)
    rows.push_back(vec3_value(g.as_matrix().row(r).transpose()));
  return toml::Value::array(std::move(rows));
}

inline void put_state(toml::Table& t, const ObserverState& s)
{
  t["alpha_hat"] = vec3_value(s.alpha_hat);
  t["beta_hat"] = vec3_value(s.beta_hat);
  t["b_hat"] = vec3_value(s.b_hat);
}

inline bool is_zero_signal(const SignalSpec& s)
{
  return s.offset == 0.0 && s.ramp_rate == 0.0 && s.terms.empty() && !s.window;
}

inline toml::Value signal_value(const Vec3Signal& sig)
{
  static const char* axes[] = {"x", "y", "z"};
  toml::Table out;
  for (int k = 0; k < 3; ++k) {
    const SignalSpec& s = sig.axes[k];
    if (is_zero_signal(s))
      continue;
    toml::Table a;
    a["offset"] = toml::Value::floating(s.offset);
    a["ramp_rate"] = toml::Value::floating(s.ramp_rate);
    toml::Array terms;
    for (const auto& t : s.terms)
      terms.push_back(vec3_value(Vec3(t.amplitude, t.frequency_hz, t.phase)));
    a["terms"] = toml::Value::array(std::move(terms));
    if (s.window)
      a["window"] = toml::Value::array({toml::Value::floating(s.window->start), toml::Value::floating(s.window->end)});
    out[axes[k]] = toml::Value::table(std::move(a));
  }
  return toml::Value::table(std::move(out));
}

}  // namespace detail

inline toml::Table config_to_toml(const ScenarioConfig& c)
{
  using toml::Value;
  toml::Table root;
  root["duration"] = Value::floating(c.duration);
  root["dt"] = Value::floating(c.dt);
  root["seed"] = Value::integer(static_cast<std::int64_t>(c.seed));
  root["mode"] = Value::string(to_string(c.mode));
  root["convergence_threshold"] = Value::floating(c.convergence_threshold);

  root["references"] = Value::table({{"alpha_i", detail::vec3_value(c.truth.alpha_i)},
                                     {"beta_i", detail::vec3_value(c.truth.beta_i)}});
  root["gains"] = Value::table({{"k_alpha", detail::gain_value(c.gains.k_alpha)},
                                {"k_beta", detail::gain_value(c.gains.k_beta)},
                                {"l_alpha", detail::gain_value(c.gains.l_alpha)},
                                {"l_beta", detail::gain_value(c.gains.l_beta)}});
  root["noise"] = Value::table({{"sample_time", Value::floating(c.noise.sample_time)},
                                {"power_alpha", Value::floating(c.noise.power_alpha)},
                                {"power_beta", Value::floating(c.noise.power_beta)},
                                {"power_omega", Value::floating(c.noise.power_omega)}});
  root["initial_attitude"] = Value::table({{"phi", Value::floating(c.initial_attitude.phi)},
                                           {"theta", Value::floating(c.initial_attitude.theta)},
                                           {"psi", Value::floating(c.initial_attitude.psi)}});
  toml::Table init;
  if (c.initial_state)
    detail::put_state(init, *c.initial_state);
  else
    init["from_truth"] = Value::boolean(true);
  root["initial_state"] = Value::table(std::move(init));

  if (!c.reinit.empty()) {
    toml::Array events;
    for (const auto& e : c.reinit) {
      toml::Table t;
      t["time"] = Value::floating(e.time);
      detail::put_state(t, e.state);
      Value v = Value::table(std::move(t));
      v.table_array = true;
      events.push_back(std::move(v));
    }
    root["reinit"] = Value::array(std::move(events));
  }
  root["certificate"] = Value::table({{"enabled", Value::boolean(c.certificate.enabled)},
                                      {"c_omega", Value::floating(c.certificate.c_omega)}});
  root["signals"] = Value::table({{"omega", detail::signal_value(c.truth.omega)},
                                  {"bias", detail::signal_value(c.truth.bias)},
                                  {"beta_disturbance", detail::signal_value(c.truth.beta_disturbance)}});
  return root;
}

inline std::string serialize_config(const ScenarioConfig& c) { return toml::serialize(config_to_toml(c)); }

// ---------------------------------------------------------------------------
// Reference scenario

namespace detail {

inline SignalSpec sines(std::initializer_list<SinusoidTerm> terms, double offset = 0.0, double ramp = 0.0)
{
  SignalSpec s;
  s.offset = offset;
  s.ramp_rate = ramp;
  s.terms = terms;
  return s;
}

inline double hz(double period_s) { return 1.0 / period_s; }

}  // namespace detail

/**
 * @brief 1000 s gravity/magnetic-like scenario: references (0,0,1) and
 *        (1,0,1)/sqrt(2), gains (10, 10, 0.15, 0.15), noise powers 2e-6
 *        (vectors) and 2e-7 (gyro) at 1 ms, observer started on the truth and
 *        reset to zero at t = 100, beta_i disturbed on [500, 700].
 *
 * The rate, bias and disturbance waveforms are hand-tuned. Heading swings
 * through several turns while roll and pitch stay within about 35 degrees,
 * clear of the Euler singularity. The bias is a few 1e-2 rad/s with slow
 * drift; the disturbance sinusoids have amplitude up to 0.5.
 */
inline ScenarioConfig paper_preset()
{
  using detail::hz;
  using detail::sines;
  ScenarioConfig c;
  c.duration = 1000.0;
  c.dt = 1e-3;
  c.seed = 42;
  c.mode = ObserverMode::filtered;
  c.convergence_threshold = 1e-2;

  c.truth.alpha_i = Vec3(0.0, 0.0, 1.0);
  c.truth.beta_i = Vec3(1.0 / std::numbers::sqrt2, 0.0, 1.0 / std::numbers::sqrt2);

  c.truth.omega.axes[0] = sines({{0.05, hz(20.0), 0.0}, {0.02, hz(7.0), 1.0}});
  c.truth.omega.axes[1] = sines({{0.04, hz(25.0), 0.0}, {0.02, hz(11.0), 2.0}});
  c.truth.omega.axes[2] = sines({{0.20, hz(200.0), 0.0}, {0.05, hz(40.0), 0.0}});

  c.truth.bias.axes[0] = sines({{0.010, hz(800.0), 0.0}}, 0.020, 5e-6);
  c.truth.bias.axes[1] = sines({{0.008, hz(600.0), 1.0}}, -0.015, -4e-6);
  c.truth.bias.axes[2] = sines({{0.005, hz(1000.0), 2.0}}, 0.030, 3e-6);

  const TimeWindow window{500.0, 700.0};
  c.truth.beta_disturbance.axes[0] = sines({{0.30, hz(40.0), 0.0}, {0.10, hz(7.0), 0.0}});
  c.truth.beta_disturbance.axes[1] = sines({{0.50, hz(25.0), 0.0}});
  c.truth.beta_disturbance.axes[2] = sines({{0.20, hz(60.0), 0.0}, {0.05, hz(5.0), 0.0}});
  for (auto& axis : c.truth.beta_disturbance.axes)
    axis.window = window;

  c.initial_attitude = EulerAngles{};
  c.gains = Gains::scalar(10.0, 10.0, 0.15, 0.15);

  c.noise.sample_time = 1e-3;
  c.noise.power_alpha = 2e-6;
  c.noise.power_beta = 2e-6;
  c.noise.power_omega = 2e-7;
  c.noise.seed = c.seed;

  c.initial_state.reset();
  c.reinit.push_back(ReinitEvent{100.0, ObserverState{}});
  c.certificate = CertificateSpec{true, 1.0};
  return c;
}

}  // namespace attobs
