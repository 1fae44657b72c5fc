/**
 * @file lyapunov.hpp
 * @brief Strict Lyapunov function of the rotated error system and its
 *        numerical certification.
 *
 *     V1 = 1/2 (l_a |E_a|^2 + l_b |E_c|^2 + |E_b|^2)
 *     V3 = 1/2 |E_b - u|^2,   u = (l_a/k_a) alpha_i x E_a + (l_b/k_b) beta_i x E_c
 *     V  = s1 V1 + s2 V1^2 + V3
 *
 * Along trajectories with |Omega| <= c_omega,
 *
 *     dV/dt <= -mu' |E_b|^2 - s1a |E_a|^2 - s1b |E_c|^2 - s2a |E_a|^4 - s2b |E_c|^4
 *              - s2ab |E_a|^2 |E_c|^2 - s2a' |E_a|^2 |E_b|^2 - s2b' |E_c|^2 |E_b|^2
 *
 * where mu is the smallest eigenvalue of -(l_a/k_a) [alpha_i]x^2 - (l_b/k_b) [beta_i]x^2.
 * Only scalar gains are handled.
 */
#pragma once

#include "error_system.hpp"
#include "so3.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace attobs {

class CertificateError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct LyapunovParams
{
  double c_omega = 1.0;
  double epsilon = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double mu = 0.0;

  bool consistent() const { return epsilon > 0.0 && epsilon < mu && sigma1 > 0.0 && sigma2 > 0.0 && c_omega >= 0.0; }
};

struct StrictnessCoefficients
{
  double mu_prime = 0.0;
  double sigma_1alpha = 0.0;
  double sigma_1beta = 0.0;
  double sigma_2alpha = 0.0;
  double sigma_2beta = 0.0;
  double sigma_2alphabeta = 0.0;
  double sigma_2alpha_prime = 0.0;
  double sigma_2beta_prime = 0.0;

  bool all_positive() const
  {
    return mu_prime > 0.0 && sigma_1alpha > 0.0 && sigma_1beta > 0.0 && sigma_2alpha > 0.0 && sigma_2beta > 0.0 &&
           sigma_2alphabeta > 0.0 && sigma_2alpha_prime > 0.0 && sigma_2beta_prime > 0.0;
  }
};

struct LyapunovCertificate
{
  LyapunovParams params;
  StrictnessCoefficients coefficients;
};

/// -(l_a/k_a) [alpha_i]x^2 - (l_b/k_b) [beta_i]x^2
inline Mat3 bias_coupling_matrix(const Vec3& alpha_i, const Vec3& beta_i, const ScalarGains& g)
{
  const Mat3 sa = skew(alpha_i), sb = skew(beta_i);
  return -(g.l_alpha / g.k_alpha) * (sa * sa) - (g.l_beta / g.k_beta) * (sb * sb);
}

/// Smallest eigenvalue of bias_coupling_matrix; throws CertificateError when
/// the matrix is not positive definite (collinear references, zero l gains).
inline double compute_mu(const Vec3& alpha_i, const Vec3& beta_i, const ScalarGains& g)
{
  if (!(g.k_alpha > 0.0) || !(g.k_beta > 0.0))
    throw CertificateError("compute_mu: k gains must be positive");
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(bias_coupling_matrix(alpha_i, beta_i, g), Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || !(lo > 1e-12 * hi))
    throw CertificateError("compute_mu: coupling matrix is not positive definite (min eigenvalue " +
                           std::to_string(lo) + "); references collinear or l gains zero");
  return lo;
}

inline double compute_mu(const Vec3& alpha_i, const Vec3& beta_i, const Gains& g)
{
  return compute_mu(alpha_i, beta_i, ScalarGains::from(g));
}

struct LyapunovPieces
{
  double V1 = 0.0;
  double V3 = 0.0;
  Vec3 u_alphabeta = Vec3::Zero();
};

inline LyapunovPieces lyapunov_pieces(const ErrorState& e, const Vec3& alpha_i, const Vec3& beta_i,
                                      const ScalarGains& g)
{
  LyapunovPieces p;
  p.V1 = 0.5 * (g.l_alpha * e.E_alpha.squaredNorm() + g.l_beta * e.E_beta.squaredNorm() + e.E_b.squaredNorm());
  p.u_alphabeta = (g.l_alpha / g.k_alpha) * alpha_i.cross(e.E_alpha) + (g.l_beta / g.k_beta) * beta_i.cross(e.E_beta);
  p.V3 = 0.5 * (e.E_b - p.u_alphabeta).squaredNorm();
  return p;
}

inline double lyapunov_value(const ErrorState& e, const LyapunovParams& p, const Vec3& alpha_i, const Vec3& beta_i,
                             const ScalarGains& g)
{
  const LyapunovPieces pc = lyapunov_pieces(e, alpha_i, beta_i, g);
  return p.sigma1 * pc.V1 + p.sigma2 * pc.V1 * pc.V1 + pc.V3;
}

/// Closed-form dV1/dt along the error system (same in both observer modes).
inline double v1_rate(const ErrorState& e, const ScalarGains& g)
{
  return -g.k_alpha * g.l_alpha * e.E_alpha.squaredNorm() - g.k_beta * g.l_beta * e.E_beta.squaredNorm();
}

inline StrictnessCoefficients strictness_coefficients(const LyapunovParams& p, const ScalarGains& g,
                                                      const Vec3& alpha_i, const Vec3& beta_i)
{
  const double ka = g.k_alpha, kb = g.k_beta, la = g.l_alpha, lb = g.l_beta;
  const double eps = p.epsilon;
  const double a2 = alpha_i.squaredNorm(), b2 = beta_i.squaredNorm();
  const double a4 = a2 * a2, b4 = b2 * b2;

  const double shared = p.c_omega * p.c_omega + 2.0 * la * la / (ka * ka) * a4 + 2.0 * lb * lb / (kb * kb) * b4;

  StrictnessCoefficients c;
  c.mu_prime = p.mu - eps;
  c.sigma_1alpha = p.sigma1 * ka * la - 4.0 / eps * shared * la * la * a2 / (ka * ka);
  c.sigma_1beta = p.sigma1 * kb * lb - 4.0 / eps * shared * lb * lb * b2 / (kb * kb);
  c.sigma_2alpha = p.sigma2 * ka * la * la - 4.0 * std::pow(la, 4) * a4 / (eps * std::pow(ka, 4));
  c.sigma_2beta = p.sigma2 * kb * lb * lb - 4.0 * std::pow(lb, 4) * b4 / (eps * std::pow(kb, 4));
  c.sigma_2alphabeta =
      p.sigma2 * (ka + kb) * la * lb - 8.0 * la * la * lb * lb * a2 * b2 / (eps * ka * ka * kb * kb);
  c.sigma_2alpha_prime = p.sigma2 * ka * la - la * la * a2 / (eps * ka * ka);
  c.sigma_2beta_prime = p.sigma2 * kb * lb - lb * lb * b2 / (eps * kb * kb);
  return c;
}

/// Quadratic/quartic form that -dV/dt dominates.
inline double decrease_lower_bound(const ErrorState& e, const StrictnessCoefficients& c)
{
  const double ea = e.E_alpha.squaredNorm(), eb = e.E_beta.squaredNorm(), ez = e.E_b.squaredNorm();
  return c.mu_prime * ez + c.sigma_1alpha * ea + c.sigma_1beta * eb + c.sigma_2alpha * ea * ea +
         c.sigma_2beta * eb * eb + c.sigma_2alphabeta * ea * eb + c.sigma_2alpha_prime * ea * ez +
         c.sigma_2beta_prime * eb * ez;
}

/**
 * @brief Deterministic certificate: epsilon = mu / 2, and sigma1, sigma2 twice
 *        the smallest values making their coefficient groups positive.
 *
 * Throws CertificateError when mu is not positive.
 */
inline LyapunovCertificate find_certificate(double c_omega, const ScalarGains& g, const Vec3& alpha_i,
                                            const Vec3& beta_i)
{
  if (!(c_omega >= 0.0) || !std::isfinite(c_omega))
    throw CertificateError("find_certificate: c_omega must be non-negative");
  LyapunovCertificate cert;
  LyapunovParams& p = cert.params;
  p.c_omega = c_omega;
  p.mu = compute_mu(alpha_i, beta_i, g);
  p.epsilon = 0.5 * p.mu;

  const double ka = g.k_alpha, kb = g.k_beta, la = g.l_alpha, lb = g.l_beta, eps = p.epsilon;
  const double a2 = alpha_i.squaredNorm(), b2 = beta_i.squaredNorm();
  const double shared = c_omega * c_omega + 2.0 * la * la / (ka * ka) * a2 * a2 + 2.0 * lb * lb / (kb * kb) * b2 * b2;

  // sigma1 k l > (4/eps) shared l^2 |ref|^2 / k^2
  const double s1_alpha = 4.0 / eps * shared * la * a2 / (ka * ka * ka);
  const double s1_beta = 4.0 / eps * shared * lb * b2 / (kb * kb * kb);
  p.sigma1 = 2.0 * std::max(s1_alpha, s1_beta);

  const double s2_alpha = 4.0 * la * la * a2 * a2 / (eps * std::pow(ka, 5));
  const double s2_beta = 4.0 * lb * lb * b2 * b2 / (eps * std::pow(kb, 5));
  const double s2_cross = 8.0 * la * lb * a2 * b2 / (eps * ka * ka * kb * kb * (ka + kb));
  const double s2_alpha_p = la * a2 / (eps * ka * ka * ka);
  const double s2_beta_p = lb * b2 / (eps * kb * kb * kb);
  p.sigma2 = 2.0 * std::max({s2_alpha, s2_beta, s2_cross, s2_alpha_p, s2_beta_p});

  cert.coefficients = strictness_coefficients(p, g, alpha_i, beta_i);
  if (!cert.coefficients.all_positive())
    throw CertificateError("find_certificate: constructed coefficients are not all positive");
  return cert;
}

inline LyapunovCertificate find_certificate(double c_omega, const Gains& g, const Vec3& alpha_i, const Vec3& beta_i)
{
  return find_certificate(c_omega, ScalarGains::from(g), alpha_i, beta_i);
}

struct DecreaseReport
{
  std::size_t samples = 0;
  double max_V = 0.0;
  double tolerance = 0.0;
  /// Largest central-difference dV/dt.
  double max_dVdt = -std::numeric_limits<double>::infinity();
  /// Largest dV/dt + lower_bound (must stay <= tolerance).
  double max_excess = -std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  std::optional<std::size_t> first_violation;
  /// Largest relative gap between the five-point finite-difference and closed-form dV1/dt.
  double v1_max_rel_error = 0.0;
  std::optional<std::size_t> v1_worst_index;

  bool passed() const { return violations == 0; }
};

/// Relative-error denominators below this fraction of max |dV1/dt| are floored.
inline constexpr double kV1RelativeFloor = 1e-6;

/**
 * @brief Checks a sampled rotated-error trajectory against the certificate.
 *
 * The trajectory must come from the noiseless error system with
 * |Omega(t)| <= c_omega. dV/dt is a central difference on the samples; a
 * violation is any interior sample where dV/dt > -lower_bound + tol, with
 * tol = rel_tol * max V.
 */
inline DecreaseReport verify_decrease(std::span<const ErrorState> traj, double dt, const LyapunovCertificate& cert,
                                      const Vec3& alpha_i, const Vec3& beta_i, const ScalarGains& g,
                                      double rel_tol = 1e-6)
{
  if (!(dt > 0.0))
    throw std::invalid_argument("verify_decrease: dt must be positive");
  DecreaseReport r;
  r.samples = traj.size();
  if (traj.size() < 3) {
    r.max_dVdt = 0.0;
    r.max_excess = 0.0;
    return r;
  }
  std::vector<double> v(traj.size()), v1(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    v[k] = lyapunov_value(traj[k], cert.params, alpha_i, beta_i, g);
    v1[k] = lyapunov_pieces(traj[k], alpha_i, beta_i, g).V1;
    r.max_V = std::max(r.max_V, v[k]);
  }
  r.tolerance = rel_tol * r.max_V;

  double max_abs_v1_rate = 0.0;
  for (std::size_t k = 2; k + 2 < traj.size(); ++k)
    max_abs_v1_rate = std::max(max_abs_v1_rate, std::abs(v1_rate(traj[k], g)));
  const double v1_floor = kV1RelativeFloor * max_abs_v1_rate;

  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const double dv = (v[k + 1] - v[k - 1]) / (2.0 * dt);
    const double excess = dv + decrease_lower_bound(traj[k], cert.coefficients);
    r.max_dVdt = std::max(r.max_dVdt, dv);
    r.max_excess = std::max(r.max_excess, excess);
    if (excess > r.tolerance) {
      ++r.violations;
      if (!r.first_violation)
        r.first_violation = k;
    }

    if (k < 2 || k + 2 >= traj.size())
      continue;
    // Five-point stencil.
    const double dv1 = (v1[k - 2] - 8.0 * v1[k - 1] + 8.0 * v1[k + 1] - v1[k + 2]) / (12.0 * dt);
    const double cf = v1_rate(traj[k], g);
    const double denom = std::max(std::abs(cf), v1_floor);
    if (denom > 0.0) {
      const double rel = std::abs(dv1 - cf) / denom;
      if (rel > r.v1_max_rel_error) {
        r.v1_max_rel_error = rel;
        r.v1_worst_index = k;
      }
    }
  }
  return r;
}

}  // namespace attobs
