// attobs: command-line front end for scenario runs, certificates and
// attitude reconstruction.

#include <attobs/config.hpp>
#include <attobs/lyapunov.hpp>
#include <attobs/reconstruct.hpp>
#include <attobs/scenario.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using namespace attobs;

Vec3 parse_vec3(const std::string& text, const std::string& what)
{
  std::stringstream ss(text);
  std::string item;
  Vec3 v;
  int n = 0;
  while (std::getline(ss, item, ',')) {
    if (n == 3)
      throw std::invalid_argument(what + ": expected three comma-separated numbers");
    std::size_t used = 0;
    try {
      v[n] = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw std::invalid_argument(what + ": '" + item + "' is not a number");
    ++n;
  }
  if (n != 3)
    throw std::invalid_argument(what + ": expected three comma-separated numbers");
  return v;
}

void print_matrix(const char* name, const Mat3& m)
{
  std::printf("%s =\n", name);
  for (int r = 0; r < 3; ++r)
    std::printf("  [% .12f % .12f % .12f]\n", m(r, 0), m(r, 1), m(r, 2));
}

void print_summary(const ScenarioSummary& s, double seconds)
{
  auto when = [](const std::optional<double>& t) { return t ? std::to_string(*t) : std::string("never"); };
  std::printf("samples            %zu\n", s.samples);
  std::printf("final |e_alpha|    %.6e\n", s.final_err_alpha);
  std::printf("final |e_beta|     %.6e\n", s.final_err_beta);
  std::printf("final |e_b|        %.6e\n", s.final_err_b);
  std::printf("final attitude err %.6e rad\n", s.final_att_err);
  std::printf("converged alpha    %s\n", when(s.converged_alpha).c_str());
  std::printf("converged beta     %s\n", when(s.converged_beta).c_str());
  std::printf("converged b        %s\n", when(s.converged_b).c_str());
  if (s.certificate)
    std::printf("certificate        %s\n", s.certificate->coefficients.all_positive() ? "valid" : "INVALID");
  std::printf("wall time          %.2f s\n", seconds);
}

int run_to_csv(const ScenarioConfig& cfg, const std::string& out_path, std::size_t decimate)
{
  std::ofstream out(out_path);
  if (!out)
    throw std::runtime_error("cannot open output file '" + out_path + "'");
  CsvTraceWriter writer(out, decimate, cfg.sample_count());
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioSummary s = run_scenario(cfg, writer);
  out.flush();
  if (!out)
    throw std::runtime_error("failed writing '" + out_path + "'");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  print_summary(s, secs);
  return 0;
}

int certify(const ScenarioConfig& cfg)
{
  const double c_omega = cfg.certificate.c_omega;
  const LyapunovCertificate cert = find_certificate(c_omega, cfg.gains, cfg.truth.alpha_i, cfg.truth.beta_i);
  const auto& p = cert.params;
  const auto& c = cert.coefficients;
  std::printf("c_omega           %.10g\n", p.c_omega);
  std::printf("mu                %.10g\n", p.mu);
  std::printf("epsilon           %.10g\n", p.epsilon);
  std::printf("sigma1            %.10g\n", p.sigma1);
  std::printf("sigma2            %.10g\n", p.sigma2);
  std::printf("mu_prime          %.10g\n", c.mu_prime);
  std::printf("sigma_1alpha      %.10g\n", c.sigma_1alpha);
  std::printf("sigma_1beta       %.10g\n", c.sigma_1beta);
  std::printf("sigma_2alpha      %.10g\n", c.sigma_2alpha);
  std::printf("sigma_2beta       %.10g\n", c.sigma_2beta);
  std::printf("sigma_2alphabeta  %.10g\n", c.sigma_2alphabeta);
  std::printf("sigma_2alpha'     %.10g\n", c.sigma_2alpha_prime);
  std::printf("sigma_2beta'      %.10g\n", c.sigma_2beta_prime);
  std::printf("all positive      %s\n", c.all_positive() ? "yes" : "no");
  return c.all_positive() ? 0 : 3;
}

int project(const ScenarioConfig& cfg, const Vec3& alpha_hat, const Vec3& beta_hat)
{
  const ReferenceBasis basis(cfg.truth.alpha_i, cfg.truth.beta_i);
  const ReconstructedAttitude r = reconstruct_attitude(alpha_hat, beta_hat, basis);
  print_matrix("R_tilde", r.R_tilde);
  print_matrix("R_hat", r.R_hat.matrix());
  const EulerAngles e = rot_to_euler(r.R_hat);
  std::printf("euler (phi, theta, psi) = (%.12f, %.12f, %.12f) rad\n", e.phi, e.theta, e.psi);
  std::printf("degenerate = %s\n", to_string(r.degeneracy));
  std::printf("gimbal_lock = %s\n", in_gimbal_lock(r.R_hat) ? "yes" : "no");
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Geometry-free attitude observer: simulation, certificates, reconstruction"};
  app.require_subcommand(1);

  std::string config_path, out_path, config_out, alpha_text, beta_text;
  std::uint64_t seed = 0;
  std::size_t decimate = 1;

  auto* sim = app.add_subcommand("simulate", "Run a scenario file and write the CSV trace");
  sim->add_option("--config", config_path, "Scenario file (TOML)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = sim->add_option("--seed", seed, "RNG seed (overrides the file)");
  sim->add_option("--out", out_path, "Output CSV path")->required();
  sim->add_option("--decimate", decimate, "Write every n-th sample")->check(CLI::PositiveNumber);

  auto* paper = app.add_subcommand("paper-sim", "Run the built-in 1000 s reference scenario");
  paper->add_option("--out", out_path, "Output CSV path")->required();
  paper->add_option("--decimate", decimate, "Write every n-th sample")->check(CLI::PositiveNumber);
  paper->add_option("--config-out", config_out, "Also write the preset as a scenario file");

  auto* cert = app.add_subcommand("certify", "Construct the strict Lyapunov certificate for a scenario");
  cert->add_option("--config", config_path, "Scenario file (TOML)")->required()->check(CLI::ExistingFile);

  auto* proj = app.add_subcommand("project", "Reconstruct the attitude from estimated body vectors");
  proj->add_option("--alpha", alpha_text, "alpha_hat as x,y,z")->required();
  proj->add_option("--beta", beta_text, "beta_hat as x,y,z")->required();
  proj->add_option("--config", config_path, "Scenario file providing the references")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      ScenarioConfig cfg = load_config(config_path);
      if (*seed_opt)
        cfg.seed = cfg.noise.seed = seed;
      return run_to_csv(cfg, out_path, decimate);
    }
    if (*paper) {
      const ScenarioConfig cfg = paper_preset();
      if (!config_out.empty()) {
        std::ofstream f(config_out);
        if (!(f << serialize_config(cfg)))
          throw std::runtime_error("cannot write '" + config_out + "'");
      }
      return run_to_csv(cfg, out_path, decimate);
    }
    if (*cert)
      return certify(load_config(config_path));
    if (*proj)
      return project(load_config(config_path), parse_vec3(alpha_text, "--alpha"), parse_vec3(beta_text, "--beta"));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
