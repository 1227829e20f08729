#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <span>
#include <stdexcept>

namespace actpgo {

/// Tangent vectors are ordered rotation first: [omega (rad); rho (m)].
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Tangent = Vector6;

/// Smallest variance a DiagonalNoise may hold.
inline constexpr double kVarianceFloor = 1e-12;

class CutLocusError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Rigid transform stored as a unit quaternion and a translation.
///
/// The quaternion is renormalized on construction and kept in the w >= 0
/// hemisphere so that equal rotations compare equal componentwise.
class Pose {
 public:
  Pose() : rotation_(Eigen::Quaterniond::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  Pose(const Eigen::Quaterniond& rotation, const Eigen::Vector3d& translation);

  static Pose Identity() { return Pose(); }
  static Pose FromMatrix(const Eigen::Matrix4d& m);

  const Eigen::Quaterniond& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix3d rotationMatrix() const { return rotation_.toRotationMatrix(); }
  Eigen::Matrix4d matrix() const;

  Pose inverse() const;
  Pose operator*(const Pose& other) const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& point) const;

  /// Adjoint in the [omega; rho] ordering: Ad = [[R, 0], [t^ R, R]].
  Matrix6 adjoint() const;

 private:
  Eigen::Quaterniond rotation_;
  Eigen::Vector3d translation_;
};

/// Diagonal covariance over the six tangent components.
class DiagonalNoise {
 public:
  DiagonalNoise() : variances_(Vector6::Ones()) {}
  /// Throws std::invalid_argument on non-positive or non-finite entries.
  explicit DiagonalNoise(const Vector6& variances);

  static DiagonalNoise Isotropic(double variance) {
    return DiagonalNoise(Vector6::Constant(variance));
  }
  /// Clamps every entry to kVarianceFloor instead of rejecting it.
  static DiagonalNoise Floored(const Vector6& variances);

  const Vector6& variances() const { return variances_; }
  double variance(int i) const { return variances_[i]; }
  Vector6 sqrtInformation() const { return variances_.cwiseSqrt().cwiseInverse(); }
  DiagonalNoise scaled(double factor) const { return DiagonalNoise(variances_ * factor); }

  bool operator==(const DiagonalNoise& other) const { return variances_ == other.variances_; }

 private:
  Vector6 variances_;
};

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

Eigen::Quaterniond so3Exp(const Eigen::Vector3d& omega);
/// Principal rotation vector of q; angle in [0, pi].
Eigen::Vector3d so3Log(const Eigen::Quaterniond& q);
Eigen::Matrix3d so3LeftJacobian(const Eigen::Vector3d& omega);
Eigen::Matrix3d so3LeftJacobianInverse(const Eigen::Vector3d& omega);

Pose exp(const Tangent& xi);

/// SE(3) logarithm. Throws CutLocusError when the rotation angle is within
/// 1e-9 of pi, where the rotation axis sign is ambiguous.
Tangent log(const Pose& p);

/// Same as log() but picks a branch at the cut locus instead of throwing.
Tangent logPrincipal(const Pose& p);

/// a^-1 * b
Pose between(const Pose& a, const Pose& b);

/// Right Jacobian of SE(3) and its inverse in the [omega; rho] ordering.
Matrix6 rightJacobian(const Tangent& xi);
Matrix6 rightJacobianInverse(const Tangent& xi);

/// Sum_j e_j^2 / sigma_j^2.
double mahalanobisSq(const Tangent& e, const DiagonalNoise& noise);

/// Chordal mean: arithmetic mean of translations, rotation from the dominant
/// eigenvector of sum q q^T. Throws std::invalid_argument when empty.
Pose meanPose(std::span<const Pose> poses);

}  // namespace actpgo
