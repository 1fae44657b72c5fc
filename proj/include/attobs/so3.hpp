/**
 * @file so3.hpp
 * @brief 3-vector / 3x3-matrix kernel: skew maps, exact rotation stepping,
 *        ZYX Euler angles and Haar-random rotations.
 *
 * Attitude convention: R maps body coordinates to inertial coordinates, so a
 * constant inertial direction u_i is seen in body axes as R^T u_i, and the
 * kinematics read dR/dt = R * skew(omega) with omega in body axes.
 */
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace attobs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Matrix S with S * x == v.cross(x).
inline Mat3 skew(const Vec3& v)
{
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

/**
 * @brief Element of SO(3).
 *
 * Constructed either through the checked factory (orthonormality and unit
 * determinant within a tolerance) or from kernel routines that produce
 * rotations by construction.
 */
class RotationMatrix
{
public:
  RotationMatrix() : m_(Mat3::Identity()) {}

  /// Throws std::invalid_argument if m is not a rotation within tol.
  static RotationMatrix from_matrix(const Mat3& m, double tol = 1e-9)
  {
    if (!m.allFinite())
      throw std::invalid_argument("rotation matrix has non-finite entries");
    if ((m.transpose() * m - Mat3::Identity()).norm() > tol)
      throw std::invalid_argument("matrix is not orthonormal");
    if (std::abs(m.determinant() - 1.0) > tol)
      throw std::invalid_argument("matrix determinant is not +1");
    return RotationMatrix(m);
  }

  /// For internal producers that guarantee the invariant.
  static RotationMatrix unchecked(const Mat3& m) { return RotationMatrix(m); }

  const Mat3& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  RotationMatrix transpose() const { return RotationMatrix(m_.transpose()); }

  RotationMatrix operator*(const RotationMatrix& o) const { return RotationMatrix(m_ * o.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// Frobenius distance of R^T R from the identity.
  double orthogonality_error() const { return (m_.transpose() * m_ - Mat3::Identity()).norm(); }

private:
  explicit RotationMatrix(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

/// exp(skew(phi)) in Rodrigues form; Taylor coefficients near zero.
inline Mat3 so3_exp(const Vec3& phi)
{
  const double theta2 = phi.squaredNorm();
  const Mat3 s = skew(phi);
  double a, b;
  if (theta2 < 1e-8) {
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * s + b * (s * s);
}

/// Exact flow of dR/dt = R skew(omega) over dt for constant omega.
inline RotationMatrix rotate_exp(const RotationMatrix& r, const Vec3& omega, double dt)
{
  if (dt < 0.0)
    throw std::invalid_argument("rotate_exp: dt must be non-negative");
  return RotationMatrix::unchecked(r.matrix() * so3_exp(omega * dt));
}

/// Roll phi, pitch theta, yaw psi in radians.
struct EulerAngles
{
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;
};

/// R = Rz(psi) * Ry(theta) * Rx(phi).
inline RotationMatrix euler_to_rot(const EulerAngles& e)
{
  const double cf = std::cos(e.phi), sf = std::sin(e.phi);
  const double ct = std::cos(e.theta), st = std::sin(e.theta);
  const double cp = std::cos(e.psi), sp = std::sin(e.psi);
  Mat3 m;
  m << cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf,
       sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf,
       -st, ct * sf, ct * cf;
  return RotationMatrix::unchecked(m);
}

inline constexpr double kGimbalLockThreshold = 1.0 - 1e-9;

inline bool in_gimbal_lock(const RotationMatrix& r)
{
  return std::abs(r(2, 0)) > kGimbalLockThreshold;
}

namespace detail {
// Maps atan2's closed interval onto (-pi, pi].
inline double half_open_angle(double a) { return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a; }
}  // namespace detail

/// Inverse of euler_to_rot. In gimbal lock (see in_gimbal_lock) yaw is set to 0.
inline EulerAngles rot_to_euler(const RotationMatrix& r)
{
  EulerAngles e;
  const double s = r(2, 0);
  if (in_gimbal_lock(r)) {
    e.psi = 0.0;
    if (s < 0.0) {
      e.theta = std::numbers::pi / 2.0;
      e.phi = std::atan2(r(0, 1), r(1, 1));
    } else {
      e.theta = -std::numbers::pi / 2.0;
      e.phi = std::atan2(-r(0, 1), r(1, 1));
    }
  } else {
    e.theta = std::asin(std::clamp(-s, -1.0, 1.0));
    e.phi = std::atan2(r(2, 1), r(2, 2));
    e.psi = std::atan2(r(1, 0), r(0, 0));
  }
  e.phi = detail::half_open_angle(e.phi);
  e.psi = detail::half_open_angle(e.psi);
  return e;
}

/// Wrapped difference a - b in (-pi, pi].
inline double angle_difference(double a, double b)
{
  double d = std::remainder(a - b, 2.0 * std::numbers::pi);
  return detail::half_open_angle(d);
}

/// Haar-distributed rotation via a normalized Gaussian quaternion.
template <class Urbg>
RotationMatrix random_rotation(Urbg& rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q;
  double norm = 0.0;
  do {
    for (int i = 0; i < 4; ++i)
      q.coeffs()[i] = n(rng);
    norm = q.norm();
  } while (norm < 1e-6);
  q.coeffs() /= norm;
  return RotationMatrix::unchecked(q.toRotationMatrix());
}

}  // namespace attobs
