#pragma once

#include "so3.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace attobs {

/// Positive scalar or symmetric positive-definite 3x3 observer gain.
class Gain
{
public:
  Gain() = default;

  static Gain scalar(double value)
  {
    if (!(value > 0.0) || !std::isfinite(value))
      throw std::invalid_argument("scalar gain must be strictly positive, got " + std::to_string(value));
    Gain g;
    g.scalar_ = value;
    g.matrix_ = value * Mat3::Identity();
    return g;
  }

  /// Switches a channel's bias injection off. Not a valid observer gain for
  /// the two-vector Gains set.
  static Gain zero()
  {
    Gain g;
    g.scalar_ = 0.0;
    g.matrix_ = Mat3::Zero();
    return g;
  }

  static Gain matrix(const Mat3& m)
  {
    if (!m.allFinite())
      throw std::invalid_argument("gain matrix has non-finite entries");
    if ((m - m.transpose()).norm() > 1e-12 * std::max(1.0, m.norm()))
      throw std::invalid_argument("gain matrix must be symmetric");
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(m, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0))
      throw std::invalid_argument("gain matrix must be positive definite");
    Gain g;
    g.scalar_.reset();
    g.matrix_ = m;
    return g;
  }

  bool is_scalar() const { return scalar_.has_value(); }
  bool positive() const { return !scalar_ || *scalar_ > 0.0; }

  /// Throws std::logic_error for matrix gains.
  double value() const
  {
    if (!scalar_)
      throw std::logic_error("gain is a matrix, not a scalar");
    return *scalar_;
  }

  const Mat3& as_matrix() const { return matrix_; }

  Vec3 apply(const Vec3& v) const
  {
    if (scalar_)
      return *scalar_ * v;
    return matrix_ * v;
  }

  bool operator==(const Gain& o) const { return scalar_ == o.scalar_ && matrix_ == o.matrix_; }

private:
  std::optional<double> scalar_ = 1.0;
  Mat3 matrix_ = Mat3::Identity();
};

/// (k_alpha, k_beta, l_alpha, l_beta).
struct Gains
{
  Gain k_alpha = Gain::scalar(1.0);
  Gain k_beta = Gain::scalar(1.0);
  Gain l_alpha = Gain::scalar(1.0);
  Gain l_beta = Gain::scalar(1.0);

  static Gains scalar(double ka, double kb, double la, double lb)
  {
    return Gains{Gain::scalar(ka), Gain::scalar(kb), Gain::scalar(la), Gain::scalar(lb)};
  }

  void validate() const
  {
    if (!k_alpha.positive() || !k_beta.positive() || !l_alpha.positive() || !l_beta.positive())
      throw std::invalid_argument("observer gains must be strictly positive");
  }

  bool all_scalar() const
  {
    return k_alpha.is_scalar() && k_beta.is_scalar() && l_alpha.is_scalar() && l_beta.is_scalar();
  }

  bool operator==(const Gains&) const = default;
};

}  // namespace attobs
