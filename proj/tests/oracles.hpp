// Independent reference computations for the test suites. Nothing here
// calls into the closed forms under test.
#pragma once

#include <attobs/so3.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using attobs::Mat3;
using attobs::Vec3;

inline Vec3 cross(const Vec3& a, const Vec3& b)
{
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// Orthogonal polar factor via SVD: M = U S V^T -> U V^T.
inline Mat3 svd_polar(const Mat3& m)
{
  const Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

/// exp of a 3x3 matrix by scaling and squaring with a long Taylor series.
inline Mat3 taylor_expm(const Mat3& a)
{
  int squarings = 0;
  double norm = a.norm();
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  const Mat3 scaled = a / std::pow(2.0, squarings);
  Mat3 term = Mat3::Identity(), sum = Mat3::Identity();
  for (int k = 1; k < 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s)
    sum = sum * sum;
  return sum;
}

inline Mat3 rot_x(double a)
{
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}
inline Mat3 rot_y(double a)
{
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}
inline Mat3 rot_z(double a)
{
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

/// Uniform point on the unit sphere.
template <class Urbg>
Vec3 unit_vector(Urbg& rng)
{
  std::normal_distribution<double> n;
  Vec3 v;
  do {
    for (int i = 0; i < 3; ++i)
      v[i] = n(rng);
  } while (v.norm() < 1e-12);
  return v.normalized();
}

/// min over |x| = 1 of x^T M x: random sampling, then a shrinking-step
/// random search from the best few samples.
template <class Urbg>
double sphere_min_quadratic(const Mat3& m, Urbg& rng, int samples = 100000)
{
  auto q = [&](const Vec3& x) { return x.dot(m * x); };
  std::vector<std::pair<double, Vec3>> best;
  for (int s = 0; s < samples; ++s) {
    const Vec3 x = unit_vector(rng);
    best.emplace_back(q(x), x);
  }
  std::partial_sort(best.begin(), best.begin() + 8, best.end(),
                    [](const auto& a, const auto& b) { return a.first < b.first; });
  best.resize(8);

  std::normal_distribution<double> n;
  double result = std::numeric_limits<double>::infinity();
  for (auto [fx, x] : best) {
    for (double step = 0.05; step > 1e-12; step *= 0.7) {
      for (int tries = 0; tries < 40; ++tries) {
        Vec3 y = x + step * Vec3(n(rng), n(rng), n(rng));
        y.normalize();
        const double fy = q(y);
        if (fy < fx) {
          fx = fy;
          x = y;
        }
      }
    }
    result = std::min(result, fx);
  }
  return result;
}

struct LineFit
{
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = a + b x.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace oracle
