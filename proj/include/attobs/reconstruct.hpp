/**
 * @file reconstruct.hpp
 * @brief Attitude from the estimated body-frame directions and the nominal
 *        inertial references.
 *
 * With the reference frame
 *
 *     R_i = ( a/|a|, (a x b)/|a x b|, a x (a x b)/|a x (a x b)| ),  a = alpha_i, b = beta_i
 *
 * the raw estimate is
 *
 *     R_tilde^T = ( ah/|a|, (ah x bh)/|a x b|, ah x (ah x bh)/|a x (a x b)| ) R_i^T
 *
 * which equals R whenever ah = R^T a and bh = R^T b. Its columns are mutually
 * orthogonal, so the orthogonal polar factor is obtained by normalizing them;
 * no SVD is needed.
 */
#pragma once

#include "so3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace attobs {

/// Minimum |alpha_i x beta_i| accepted for a reference pair.
inline constexpr double kReferenceIndependenceTol = 1e-9;

class ReferenceBasis
{
public:
  ReferenceBasis(const Vec3& alpha_i, const Vec3& beta_i) : alpha_i_(alpha_i), beta_i_(beta_i)
  {
    if (!alpha_i.allFinite() || !beta_i.allFinite())
      throw std::invalid_argument("reference vectors must be finite");
    const Vec3 c1 = alpha_i;
    const Vec3 c2 = alpha_i.cross(beta_i);
    const Vec3 c3 = alpha_i.cross(c2);
    if (c2.norm() <= kReferenceIndependenceTol)
      throw std::invalid_argument("reference vectors alpha_i and beta_i must be independent");
    norms_ = Vec3(c1.norm(), c2.norm(), c3.norm());
    Mat3 m;
    m.col(0) = c1 / norms_[0];
    m.col(1) = c2 / norms_[1];
    m.col(2) = c3 / norms_[2];
    r_i_ = RotationMatrix::unchecked(m);
  }

  const Vec3& alpha_i() const { return alpha_i_; }
  const Vec3& beta_i() const { return beta_i_; }
  const RotationMatrix& frame() const { return r_i_; }
  /// (|a|, |a x b|, |a x (a x b)|).
  const Vec3& column_norms() const { return norms_; }

private:
  Vec3 alpha_i_;
  Vec3 beta_i_;
  Vec3 norms_;
  RotationMatrix r_i_;
};

enum class Degeneracy
{
  none,
  alpha_zero,
  collinear,
};

inline const char* to_string(Degeneracy d)
{
  switch (d) {
    case Degeneracy::none: return "none";
    case Degeneracy::alpha_zero: return "alpha_zero";
    case Degeneracy::collinear: return "collinear";
  }
  return "unknown";
}

struct ReconstructedAttitude
{
  Mat3 R_tilde = Mat3::Identity();
  RotationMatrix R_hat;
  Degeneracy degeneracy = Degeneracy::none;
};

inline Mat3 reconstruct_tilde(const Vec3& alpha_hat, const Vec3& beta_hat, const ReferenceBasis& basis)
{
  const Vec3 c2 = alpha_hat.cross(beta_hat);
  Mat3 cols;
  cols.col(0) = alpha_hat / basis.column_norms()[0];
  cols.col(1) = c2 / basis.column_norms()[1];
  cols.col(2) = alpha_hat.cross(c2) / basis.column_norms()[2];
  const Mat3 tilde_t = cols * basis.frame().matrix().transpose();
  return tilde_t.transpose();
}

inline constexpr double kAlphaZeroTol = 1e-9;
inline constexpr double kCollinearTol = 1e-9;

namespace detail {

// Unit e2 orthogonal to unit e1, Gram-Schmidt on the axis least aligned with e1.
inline Vec3 orthogonal_completion(const Vec3& e1)
{
  int axis = 0;
  e1.cwiseAbs().minCoeff(&axis);
  const Vec3 u = Vec3::Unit(axis);
  return (u - u.dot(e1) * e1).normalized();
}

}  // namespace detail

/**
 * @brief Nearest rotation to R_tilde (orthogonal polar factor of R_tilde^T).
 *
 * Degenerate inputs give a deterministic rotation: R_hat = R_i when
 * |alpha_hat| < 1e-9, and an arbitrary-but-fixed completion of alpha_hat
 * to a right-handed frame when alpha_hat and beta_hat are collinear.
 */
inline ReconstructedAttitude project_polar(const Mat3& r_tilde, const Vec3& alpha_hat, const Vec3& beta_hat,
                                           const ReferenceBasis& basis)
{
  ReconstructedAttitude out;
  out.R_tilde = r_tilde;
  const Mat3 ri_t = basis.frame().matrix().transpose();

  const double na = alpha_hat.norm();
  if (!(na >= kAlphaZeroTol)) {
    out.degeneracy = Degeneracy::alpha_zero;
    out.R_hat = basis.frame();
    return out;
  }

  Mat3 frame;
  const Vec3 c2 = alpha_hat.cross(beta_hat);
  const double n2 = c2.norm();
  frame.col(0) = alpha_hat / na;
  if (!(n2 >= kCollinearTol * na * beta_hat.norm()) || n2 == 0.0) {
    out.degeneracy = Degeneracy::collinear;
    frame.col(1) = detail::orthogonal_completion(frame.col(0));
    frame.col(2) = frame.col(0).cross(frame.col(1));
  } else {
    const Vec3 c3 = alpha_hat.cross(c2);
    frame.col(1) = c2 / n2;
    frame.col(2) = c3 / c3.norm();
  }
  out.R_hat = RotationMatrix::unchecked((frame * ri_t).transpose());
  return out;
}

inline ReconstructedAttitude reconstruct_attitude(const Vec3& alpha_hat, const Vec3& beta_hat,
                                                  const ReferenceBasis& basis)
{
  return project_polar(reconstruct_tilde(alpha_hat, beta_hat, basis), alpha_hat, beta_hat, basis);
}

/// Geodesic distance on SO(3), in [0, pi].
inline double attitude_error_angle(const RotationMatrix& r_hat, const RotationMatrix& r_true)
{
  const double c = ((r_hat.matrix().transpose() * r_true.matrix()).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace attobs
