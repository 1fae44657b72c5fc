#include <attobs/config.hpp>
#include <attobs/toml_lite.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace attobs;

namespace {

std::string error_of(const std::string& text)
{
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"(
duration = 5.0
dt = 0.01
[references]
alpha_i = [0, 0, 1]
beta_i = [1, 0, 0]
[gains]
k_alpha = 10
k_beta = 10
l_alpha = 0.15
l_beta = 0.15
)";

}  // namespace

TEST(Toml, ScalarsArraysAndTables)
{
  const toml::Table t = toml::parse(R"(
# comment
a = 1
b = -2.5e-3
c = "text \"quoted\" \n"
d = true
e = [1, 2.0, [3, 4]]
f = [
  1,   # trailing comments inside arrays
  2,
]
g = 1_000
h = inf
[s.t]
"odd key" = 3
[[list]]
x = 1
[[list]]
x = 2
)");
  EXPECT_EQ(t.at("a").i, 1);
  EXPECT_DOUBLE_EQ(t.at("b").d, -2.5e-3);
  EXPECT_EQ(t.at("c").s, "text \"quoted\" \n");
  EXPECT_TRUE(t.at("d").b);
  EXPECT_EQ(t.at("e").arr.size(), 3u);
  EXPECT_EQ(t.at("e").arr[2].arr[1].i, 4);
  EXPECT_EQ(t.at("f").arr.size(), 2u);
  EXPECT_EQ(t.at("g").i, 1000);
  EXPECT_TRUE(std::isinf(t.at("h").d));
  EXPECT_EQ(t.at("s").tbl.at("t").tbl.at("odd key").i, 3);
  EXPECT_EQ(t.at("list").arr.size(), 2u);
  EXPECT_EQ(t.at("list").arr[1].tbl.at("x").i, 2);
}

TEST(Toml, SyntaxErrorsCarryLineNumbers)
{
  try {
    toml::parse("a = 1\nb = \n");
    FAIL();
  } catch (const toml::ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(toml::parse("a = 1\na = 2\n"), toml::ParseError);
  EXPECT_THROW(toml::parse("a = [1, 2\n"), toml::ParseError);
  EXPECT_THROW(toml::parse("a = \"open\n"), toml::ParseError);
  EXPECT_THROW(toml::parse("[t]\nx = 1\n[t]\ny = 2\n"), toml::ParseError);
}

TEST(Toml, SerializeRoundTripsFloatsExactly)
{
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  toml::Table t;
  toml::Array arr;
  for (int i = 0; i < 200; ++i)
    arr.push_back(toml::Value::floating(u(rng) * std::pow(10.0, static_cast<int>(u(rng)) % 12)));
  t["x"] = toml::Value::array(arr);
  t["neg_zero"] = toml::Value::floating(-0.0);
  const toml::Table back = toml::parse(toml::serialize(t));
  for (std::size_t i = 0; i < arr.size(); ++i)
    EXPECT_EQ(back.at("x").arr[i].d, arr[i].d);
  EXPECT_TRUE(std::signbit(back.at("neg_zero").d));
}

TEST(Config, MinimalDefaults)
{
  const ScenarioConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.duration, 5.0);
  EXPECT_EQ(c.sample_count(), 501u);
  EXPECT_EQ(c.mode, ObserverMode::filtered);
  EXPECT_EQ(c.noise.sample_time, 0.01);
  EXPECT_EQ(c.noise.power_alpha, 0.0);
  EXPECT_FALSE(c.initial_state.has_value());
  EXPECT_FALSE(c.certificate.enabled);
  EXPECT_EQ(c.truth.omega.eval(3.0), Vec3::Zero());
}

TEST(Config, ErrorsNameTheField)
{
  const std::string base = kMinimal;
  EXPECT_NE(error_of("dt = 0.01\n[references]\nalpha_i=[0,0,1]\nbeta_i=[1,0,0]").find("duration"), std::string::npos);
  EXPECT_EQ(error_of("duration = -1.0\n" + base.substr(base.find("dt"))).rfind("duration:", 0), 0u);
  EXPECT_NE(error_of(base + "bogus = 1\n").find("bogus: unknown key"), std::string::npos);
  EXPECT_NE(error_of(base + "[noise]\npower_alpa = 1e-6\n").find("noise.power_alpa: unknown key"), std::string::npos);
  EXPECT_NE(error_of(base + "[noise]\nsample_time = 0.015\n").find("noise.sample_time"), std::string::npos);
  EXPECT_NE(error_of(base + "[noise]\npower_beta = -1.0\n").find("noise.power_beta"), std::string::npos);
  EXPECT_NE(error_of(base + "mode = \"fast\"\n").find("mode"), std::string::npos);

  std::string neg_gain = base;
  neg_gain.replace(neg_gain.find("l_beta = 0.15"), 13, "l_beta = -0.15");
  EXPECT_NE(error_of(neg_gain).find("gains.l_beta"), std::string::npos);

  std::string bad_matrix = base;
  bad_matrix.replace(bad_matrix.find("k_beta = 10"), 11, "k_beta = [[1,2,0],[0,1,0],[0,0,1]]");
  EXPECT_NE(error_of(bad_matrix).find("gains.k_beta: gain matrix must be symmetric"), std::string::npos);

  std::string collinear = base;
  collinear.replace(collinear.find("beta_i = [1, 0, 0]"), 18, "beta_i = [0, 0, 2]");
  EXPECT_NE(error_of(collinear).find("references"), std::string::npos);

  EXPECT_NE(error_of(base + "[signals.omega.x]\nterms = [[1.0, -0.1, 0.0]]\n").find("signals.omega.x"),
            std::string::npos);
  EXPECT_NE(error_of(base + "[signals.bias.q]\noffset = 1.0\n").find("signals.bias.q: unknown key"), std::string::npos);
  EXPECT_NE(error_of(base + "[[reinit]]\ntime = 1.0\nalpha_hat=[0,0,0]\nbeta_hat=[0,0,0]\n").find("reinit[0].b_hat"),
            std::string::npos);
  EXPECT_NE(error_of(base + "[[reinit]]\ntime = 99.0\nalpha_hat=[0,0,0]\nbeta_hat=[0,0,0]\nb_hat=[0,0,0]\n")
                .find("reinit[0].time"),
            std::string::npos);
  EXPECT_NE(error_of(base + "[initial_state]\nalpha_hat = [1, 2]\n").find("initial_state.alpha_hat"),
            std::string::npos);
  EXPECT_NE(error_of("duration = 1.0\ndt = 0.1\n[references\n").find("line 3"), std::string::npos);
}

TEST(Config, CertificateNeedsScalarGains)
{
  std::string text = kMinimal;
  text.replace(text.find("k_alpha = 10"), 12, "k_alpha = [[10,0,0],[0,10,0],[0,0,10]]");
  EXPECT_NO_THROW(parse_config(text));
  EXPECT_NE(error_of(text + "[certificate]\nenabled = true\n").find("certificate.enabled"), std::string::npos);
}

TEST(Config, PresetFacts)
{
  const ScenarioConfig c = paper_preset();
  EXPECT_NEAR(c.truth.alpha_i.dot(c.truth.beta_i), 1.0 / std::numbers::sqrt2, 1e-15);
  EXPECT_NEAR(c.noise.std_alpha(), 0.0447, 1e-4);
  EXPECT_NEAR(c.noise.std_omega(), 0.0141, 1e-4);
  EXPECT_EQ(c.gains, Gains::scalar(10.0, 10.0, 0.15, 0.15));
  EXPECT_EQ(c.sample_count(), 1000001u);
  ASSERT_EQ(c.reinit.size(), 1u);
  EXPECT_EQ(c.reinit[0].time, 100.0);
  EXPECT_EQ(c.reinit[0].state, ObserverState{});
  EXPECT_EQ(c.seed, 42u);
  EXPECT_NO_THROW(c.validate());
  // Disturbance confined to [500, 700]; rate within 0.5 rad/s per axis.
  for (double t : {0.0, 499.0, 701.0, 999.0})
    EXPECT_EQ(c.truth.beta_disturbance.eval(t), Vec3::Zero());
  EXPECT_NE(c.truth.beta_disturbance.eval(600.0), Vec3::Zero());
  for (const auto& a : c.truth.omega.axes)
    EXPECT_LE(a.bound(1000.0), 0.5);
  for (const auto& a : c.truth.bias.axes) {
    EXPECT_LE(a.bound(1000.0), 0.05);
    EXPECT_GE(std::abs(a.offset), 0.01);
  }
}

TEST(Config, PresetRoundTrip)
{
  const ScenarioConfig c = paper_preset();
  const ScenarioConfig back = parse_config(serialize_config(c));
  EXPECT_EQ(back, c);
}

TEST(Config, RandomRoundTrip)
{
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n;
  for (int i = 0; i < 300; ++i) {
    ScenarioConfig c;
    c.duration = 1.0 + 100.0 * u(rng);
    c.dt = 1e-3 * (1 + static_cast<int>(9 * u(rng)));
    c.seed = static_cast<std::uint64_t>(u(rng) * 1e15);
    c.mode = u(rng) < 0.5 ? ObserverMode::filtered : ObserverMode::linear_variant;
    c.convergence_threshold = 1e-3 + u(rng);
    c.truth.alpha_i = Vec3(n(rng), n(rng), n(rng));
    c.truth.beta_i = Vec3(n(rng), n(rng), n(rng));
    for (Vec3Signal* s : {&c.truth.omega, &c.truth.bias, &c.truth.beta_disturbance})
      for (auto& a : s->axes) {
        a.offset = u(rng) < 0.5 ? 0.0 : n(rng);
        a.ramp_rate = u(rng) < 0.5 ? 0.0 : 1e-5 * n(rng);
        const int terms = static_cast<int>(3 * u(rng));
        for (int k = 0; k < terms; ++k)
          a.terms.push_back({n(rng), u(rng), n(rng)});
        if (u(rng) < 0.3)
          a.window = TimeWindow{u(rng), 1.0 + u(rng)};
      }
    c.initial_attitude = {n(rng), n(rng), n(rng)};
    if (u(rng) < 0.5) {
      c.gains = Gains::scalar(1 + u(rng), 1 + u(rng), u(rng) + 1e-3, u(rng) + 1e-3);
      c.certificate = {u(rng) < 0.5, 2.0 * u(rng)};
    } else {
      Mat3 a;
      for (int r = 0; r < 9; ++r)
        a(r / 3, r % 3) = n(rng);
      c.gains = Gains{Gain::matrix(a * a.transpose() + Mat3::Identity()), Gain::scalar(2.0), Gain::scalar(0.2),
                      Gain::matrix(0.3 * Mat3::Identity())};
    }
    c.noise.sample_time = c.dt * (1 + static_cast<int>(3 * u(rng)));
    c.noise.power_alpha = 1e-6 * u(rng);
    c.noise.power_beta = 1e-6 * u(rng);
    c.noise.power_omega = 1e-7 * u(rng);
    c.noise.seed = c.seed;
    if (u(rng) < 0.5)
      c.initial_state = ObserverState{Vec3(n(rng), n(rng), n(rng)), Vec3(n(rng), n(rng), n(rng)), Vec3::Zero()};
    const int events = static_cast<int>(3 * u(rng));
    for (int k = 0; k < events; ++k)
      c.reinit.push_back({c.duration * u(rng), ObserverState{Vec3(n(rng), 0, 0), Vec3::Zero(), Vec3(0, 0, n(rng))}});
    ASSERT_NO_THROW(c.validate()) << i;
    const std::string text = serialize_config(c);
    const ScenarioConfig back = parse_config(text);
    ASSERT_EQ(back, c) << text;
  }
}

TEST(Config, MissingFileIsConfigError) { EXPECT_THROW(load_config("/nonexistent/scenario.toml"), ConfigError); }
