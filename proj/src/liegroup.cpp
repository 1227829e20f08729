#include "actpgo/liegroup.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace actpgo {
namespace {

// Below this angle the Jacobian coefficients switch to Taylor series.
constexpr double kSeriesAngle = 0.1;
constexpr double kExpSmallAngle = 1e-8;

Eigen::Quaterniond canonical(Eigen::Quaterniond q) {
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

// Coupling block of the SE(3) left Jacobian (Barfoot's Q), [omega; rho] order.
Eigen::Matrix3d leftJacobianCoupling(const Eigen::Vector3d& omega, const Eigen::Vector3d& rho) {
  const double theta = omega.norm();
  const double t2 = theta * theta;
  double c1, c2, c3;
  if (theta < kSeriesAngle) {
    const double t4 = t2 * t2;
    c1 = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0;
    c2 = 1.0 / 24.0 - t2 / 720.0 + t4 / 40320.0;
    c3 = 1.0 / 120.0 - t2 / 2520.0 + t4 / 120960.0;
  } else {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    c1 = (theta - s) / (t2 * theta);
    c2 = (t2 + 2.0 * c - 2.0) / (2.0 * t2 * t2);
    c3 = (2.0 * theta - 3.0 * s + theta * c) / (2.0 * t2 * t2 * theta);
  }
  const Eigen::Matrix3d W = skew(omega);
  const Eigen::Matrix3d P = skew(rho);
  const Eigen::Matrix3d WP = W * P;
  const Eigen::Matrix3d PW = P * W;
  const Eigen::Matrix3d WPW = WP * W;
  return 0.5 * P + c1 * (WP + PW + WPW) + c2 * (W * WP + PW * W - 3.0 * WPW) +
         c3 * (WPW * W + W * WPW);
}

}  // namespace

Pose::Pose(const Eigen::Quaterniond& rotation, const Eigen::Vector3d& translation)
    : rotation_(canonical(rotation)), translation_(translation) {}

Pose Pose::FromMatrix(const Eigen::Matrix4d& m) {
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  return Pose(Eigen::Quaterniond(r), m.topRightCorner<3, 1>());
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotationMatrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Pose Pose::inverse() const {
  const Eigen::Quaterniond qi = rotation_.conjugate();
  return Pose(qi, -(qi * translation_));
}

Pose Pose::operator*(const Pose& other) const {
  return Pose(rotation_ * other.rotation_, translation_ + rotation_ * other.translation_);
}

Eigen::Vector3d Pose::operator*(const Eigen::Vector3d& point) const {
  return rotation_ * point + translation_;
}

Matrix6 Pose::adjoint() const {
  const Eigen::Matrix3d R = rotationMatrix();
  Matrix6 ad = Matrix6::Zero();
  ad.topLeftCorner<3, 3>() = R;
  ad.bottomRightCorner<3, 3>() = R;
  ad.bottomLeftCorner<3, 3>() = skew(translation_) * R;
  return ad;
}

DiagonalNoise::DiagonalNoise(const Vector6& variances) : variances_(variances) {
  for (int i = 0; i < 6; ++i) {
    if (!(variances_[i] > 0.0) || !std::isfinite(variances_[i])) {
      throw std::invalid_argument("DiagonalNoise: variances must be positive and finite");
    }
  }
}

DiagonalNoise DiagonalNoise::Floored(const Vector6& variances) {
  return DiagonalNoise(variances.cwiseMax(kVarianceFloor));
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  // clang-format off
  s <<  0.0,   -v.z(),  v.y(),
        v.z(),  0.0,   -v.x(),
       -v.y(),  v.x(),  0.0;
  // clang-format on
  return s;
}

Eigen::Quaterniond so3Exp(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  if (theta < kExpSmallAngle) {
    Eigen::Quaterniond q(1.0, 0.5 * omega.x(), 0.5 * omega.y(), 0.5 * omega.z());
    return q.normalized();
  }
  const double half = 0.5 * theta;
  const Eigen::Vector3d v = (std::sin(half) / theta) * omega;
  return Eigen::Quaterniond(std::cos(half), v.x(), v.y(), v.z());
}

Eigen::Vector3d so3Log(const Eigen::Quaterniond& q_in) {
  const Eigen::Quaterniond q = canonical(q_in);
  const Eigen::Vector3d v = q.vec();
  const double n = v.norm();
  const double w = q.w();
  if (n < 1e-6) {
    // atan2(n, w) / n expanded around n = 0 (w is ~1 here).
    return (2.0 / w) * (1.0 - n * n / (3.0 * w * w)) * v;
  }
  const double theta = 2.0 * std::atan2(n, w);
  return (theta / n) * v;
}

Eigen::Matrix3d so3LeftJacobian(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const double t2 = theta * theta;
  double a, b;
  if (theta < kSeriesAngle) {
    a = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    b = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  } else {
    const double sh = std::sin(0.5 * theta);
    a = 2.0 * sh * sh / t2;
    b = (theta - std::sin(theta)) / (t2 * theta);
  }
  const Eigen::Matrix3d W = skew(omega);
  return Eigen::Matrix3d::Identity() + a * W + b * W * W;
}

Eigen::Matrix3d so3LeftJacobianInverse(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const double t2 = theta * theta;
  double d;
  if (theta < kSeriesAngle) {
    d = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    const double half = 0.5 * theta;
    d = (1.0 - half / std::tan(half)) / t2;
  }
  const Eigen::Matrix3d W = skew(omega);
  return Eigen::Matrix3d::Identity() - 0.5 * W + d * W * W;
}

Pose exp(const Tangent& xi) {
  const Eigen::Vector3d omega = xi.head<3>();
  const Eigen::Vector3d rho = xi.tail<3>();
  return Pose(so3Exp(omega), so3LeftJacobian(omega) * rho);
}

Tangent logPrincipal(const Pose& p) {
  const Eigen::Vector3d omega = so3Log(p.rotation());
  Tangent xi;
  xi.head<3>() = omega;
  xi.tail<3>() = so3LeftJacobianInverse(omega) * p.translation();
  return xi;
}

Tangent log(const Pose& p) {
  // Distance from the cut locus is ~2w for a canonical (w >= 0) quaternion.
  if (2.0 * p.rotation().w() < 1e-9) {
    throw CutLocusError("log: rotation angle is within 1e-9 of pi");
  }
  return logPrincipal(p);
}

Pose between(const Pose& a, const Pose& b) { return a.inverse() * b; }

Matrix6 rightJacobian(const Tangent& xi) {
  // J_r(xi) = J_l(-xi).
  const Eigen::Vector3d omega = -xi.head<3>();
  const Eigen::Vector3d rho = -xi.tail<3>();
  const Eigen::Matrix3d J = so3LeftJacobian(omega);
  Matrix6 out = Matrix6::Zero();
  out.topLeftCorner<3, 3>() = J;
  out.bottomRightCorner<3, 3>() = J;
  out.bottomLeftCorner<3, 3>() = leftJacobianCoupling(omega, rho);
  return out;
}

Matrix6 rightJacobianInverse(const Tangent& xi) {
  const Eigen::Vector3d omega = -xi.head<3>();
  const Eigen::Vector3d rho = -xi.tail<3>();
  const Eigen::Matrix3d Jinv = so3LeftJacobianInverse(omega);
  Matrix6 out = Matrix6::Zero();
  out.topLeftCorner<3, 3>() = Jinv;
  out.bottomRightCorner<3, 3>() = Jinv;
  out.bottomLeftCorner<3, 3>() = -Jinv * leftJacobianCoupling(omega, rho) * Jinv;
  return out;
}

double mahalanobisSq(const Tangent& e, const DiagonalNoise& noise) {
  return (e.array().square() / noise.variances().array()).sum();
}

Pose meanPose(std::span<const Pose> poses) {
  if (poses.empty()) throw std::invalid_argument("meanPose: empty input");
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
  for (const Pose& p : poses) {
    t += p.translation();
    const Eigen::Vector4d q = p.rotation().coeffs();  // x, y, z, w
    M += q * q.transpose();
  }
  t /= static_cast<double>(poses.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(M);
  const Eigen::Vector4d q = solver.eigenvectors().col(3);
  return Pose(Eigen::Quaterniond(q.w(), q.x(), q.y(), q.z()), t);
}

}  // namespace actpgo
