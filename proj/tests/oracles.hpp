#pragma once

// Independent reference computations. Nothing here calls into the library
// except to convert to and from Pose.

#include "actpgo/liegroup.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace oracle {

using Mat4 = Eigen::Matrix4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

inline Eigen::Matrix3d hat3(const Eigen::Vector3d& w) {
  Eigen::Matrix3d m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

// Rodrigues: R = I + sin(t) K + (1 - cos(t)) K^2
inline Eigen::Matrix3d rodrigues(const Eigen::Vector3d& w) {
  const double t = w.norm();
  if (t == 0.0) return Eigen::Matrix3d::Identity();
  const Eigen::Matrix3d K = hat3(w / t);
  return Eigen::Matrix3d::Identity() + std::sin(t) * K + (1.0 - std::cos(t)) * K * K;
}

inline Mat4 hat6(const Vec6& xi) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = hat3(xi.head<3>());
  m.topRightCorner<3, 1>() = xi.tail<3>();
  return m;
}

inline Mat4 expm(const Vec6& xi) { return hat6(xi).exp(); }

// Dense matrix logarithm, valid away from angle pi.
inline Vec6 logm(const Mat4& T) {
  const Mat4 L = T.log();
  Vec6 xi;
  xi << L(2, 1), L(0, 2), L(1, 0), L(0, 3), L(1, 3), L(2, 3);
  return xi;
}

inline Mat4 toMatrix(const actpgo::Pose& p) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = p.rotation().toRotationMatrix();
  m.topRightCorner<3, 1>() = p.translation();
  return m;
}

inline actpgo::Pose fromMatrix(const Mat4& m) {
  return actpgo::Pose(Eigen::Quaterniond(Eigen::Matrix3d(m.topLeftCorner<3, 3>())), m.topRightCorner<3, 1>());
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen); }
  Eigen::Vector3d unit() {
    Eigen::Vector3d v(normal(), normal(), normal());
    return v.normalized();
  }
  // rotation angle below max_angle, translation in a cube of half-width `extent`
  Vec6 tangent(double max_angle = 3.0, double extent = 2.0) {
    Vec6 xi;
    xi.head<3>() = unit() * uniform(0.0, max_angle);
    xi.tail<3>() = Eigen::Vector3d(uniform(-extent, extent), uniform(-extent, extent), uniform(-extent, extent));
    return xi;
  }
  Mat4 poseMatrix(double max_angle = 3.0, double extent = 2.0) {
    Mat4 T = Mat4::Identity();
    T.topLeftCorner<3, 3>() = rodrigues(unit() * uniform(0.0, max_angle));
    T.topRightCorner<3, 1>() = Eigen::Vector3d(uniform(-extent, extent), uniform(-extent, extent),
                                               uniform(-extent, extent));
    return T;
  }
  actpgo::Pose pose(double max_angle = 3.0, double extent = 2.0) { return fromMatrix(poseMatrix(max_angle, extent)); }
};

// Composite Simpson on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double chi2Density(double x, int k) {
  if (x <= 0.0) return 0.0;
  return std::exp((k / 2.0 - 1.0) * std::log(x) - x / 2.0 - (k / 2.0) * std::log(2.0) - std::lgamma(k / 2.0));
}

// Quantile by bisection on the quadrature CDF (k >= 2 so the density is bounded).
inline double chi2Quantile(int k, double p) {
  auto cdf = [k](double x) { return simpson([k](double t) { return chi2Density(t, k); }, 0.0, x); };
  double lo = 0.0, hi = 100.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Golden-section minimization of a unimodal function on [a, b].
inline double goldenSection(const std::function<double(double)>& f, double a, double b, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace oracle
