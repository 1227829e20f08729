#include "actpgo/liegroup.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numbers>
#include <vector>

using namespace actpgo;
using oracle::Vec6;

namespace {
constexpr double kPi = std::numbers::pi;

double poseDistance(const Pose& a, const Pose& b) {
  return (oracle::toMatrix(a) - oracle::toMatrix(b)).norm();
}
}  // namespace

TEST_CASE("exp of zero is identity") {
  const Pose p = exp(Tangent::Zero());
  CHECK(poseDistance(p, Pose::Identity()) == 0.0);
}

TEST_CASE("exp matches Rodrigues for a quarter turn about z") {
  Tangent xi = Tangent::Zero();
  xi[2] = kPi / 2;
  const Pose p = exp(xi);
  CHECK((p.rotationMatrix() - oracle::rodrigues(Eigen::Vector3d(0, 0, kPi / 2))).norm() < 1e-12);
  CHECK(p.translation().norm() < 1e-15);
}

TEST_CASE("exp matches the dense matrix exponential") {
  oracle::Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Vec6 xi = rng.tangent(3.0);
    CHECK((oracle::toMatrix(exp(xi)) - oracle::expm(xi)).norm() < 1e-10);
  }
}

TEST_CASE("exp(log(p)) roundtrip on 1000 random poses") {
  oracle::Rng rng(2);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Pose p = rng.pose(kPi - 1e-3);
    worst = std::max(worst, poseDistance(exp(log(p)), p));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("log of identity and pure translation") {
  CHECK(log(Pose::Identity()).norm() == 0.0);
  const Tangent xi = log(Pose(Eigen::Quaterniond::Identity(), Eigen::Vector3d(0.3, 0, 0)));
  Tangent expected;
  expected << 0, 0, 0, 0.3, 0, 0;
  CHECK((xi - expected).norm() < 1e-15);
}

TEST_CASE("log matches the dense matrix logarithm") {
  const Pose p(Eigen::Quaterniond(Eigen::AngleAxisd(kPi / 2, Eigen::Vector3d::UnitZ())), Eigen::Vector3d(1, 0, 0));
  CHECK((log(p) - oracle::logm(oracle::toMatrix(p))).norm() < 1e-8);

  oracle::Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const oracle::Mat4 T = rng.poseMatrix(3.0);
    CHECK((log(oracle::fromMatrix(T)) - oracle::logm(T)).norm() < 1e-8);
  }
}

TEST_CASE("log near zero rotation stays accurate") {
  oracle::Rng rng(4);
  for (double angle : {1e-3, 1e-6, 1e-9}) {
    Vec6 xi;
    xi.head<3>() = rng.unit() * angle;
    xi.tail<3>() = Eigen::Vector3d(0.2, -0.1, 0.4);
    CHECK((log(exp(xi)) - xi).norm() < 1e-12);
  }
}

TEST_CASE("log throws at the cut locus, logPrincipal does not") {
  Tangent xi = Tangent::Zero();
  xi[0] = kPi;
  xi[4] = 0.5;
  const Pose p = exp(xi);
  CHECK_THROWS_AS(log(p), CutLocusError);
  const Tangent e = logPrincipal(p);
  CHECK(std::abs(e.head<3>().norm() - kPi) < 1e-9);
  CHECK(poseDistance(exp(e), p) < 1e-9);
}

TEST_CASE("quaternions are kept in the w >= 0 hemisphere") {
  const Pose p(Eigen::Quaterniond(-0.5, 0.5, 0.5, 0.5), Eigen::Vector3d::Zero());
  CHECK(p.rotation().w() >= 0.0);
  oracle::Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Pose a = rng.pose(), b = rng.pose();
    CHECK((a * b).rotation().w() >= 0.0);
    CHECK(a.inverse().rotation().w() >= 0.0);
  }
}

TEST_CASE("between") {
  oracle::Rng rng(6);
  const Pose p = rng.pose();
  CHECK(poseDistance(between(p, p), Pose::Identity()) < 1e-12);
  CHECK(poseDistance(between(Pose::Identity(), p), p) < 1e-12);
  for (int i = 0; i < 200; ++i) {
    const oracle::Mat4 A = rng.poseMatrix(), B = rng.poseMatrix();
    const oracle::Mat4 expected = A.inverse() * B;
    CHECK((oracle::toMatrix(between(oracle::fromMatrix(A), oracle::fromMatrix(B))) - expected).norm() < 1e-10);
  }
}

TEST_CASE("composition and point action match matrices") {
  oracle::Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const oracle::Mat4 A = rng.poseMatrix(), B = rng.poseMatrix();
    const Pose a = oracle::fromMatrix(A), b = oracle::fromMatrix(B);
    CHECK((oracle::toMatrix(a * b) - A * B).norm() < 1e-12);
    const Eigen::Vector3d x(rng.normal(), rng.normal(), rng.normal());
    CHECK(((a * x) - (A * x.homogeneous()).head<3>()).norm() < 1e-12);
    CHECK((a.matrix() - A).norm() < 1e-12);
  }
}

TEST_CASE("adjoint satisfies T exp(xi) T^-1 = exp(Ad xi)") {
  oracle::Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const Pose T = rng.pose();
    const Vec6 xi = rng.tangent(1.0, 0.5);
    CHECK(poseDistance(T * exp(xi) * T.inverse(), exp(T.adjoint() * xi)) < 1e-10);
  }
}

TEST_CASE("right Jacobian: exp(xi + d) ~ exp(xi) exp(Jr d)") {
  oracle::Rng rng(9);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const Vec6 xi = rng.tangent(2.5, 1.0);
    Matrix6 fd;
    for (int k = 0; k < 6; ++k) {
      Vec6 d = Vec6::Zero();
      d[k] = h;
      const Vec6 plus = oracle::logm(oracle::toMatrix(exp(xi)).inverse() * oracle::expm(xi + d));
      const Vec6 minus = oracle::logm(oracle::toMatrix(exp(xi)).inverse() * oracle::expm(xi - d));
      fd.col(k) = (plus - minus) / (2 * h);
    }
    const Matrix6 J = rightJacobian(xi);
    CHECK((J - fd).norm() / fd.norm() < 1e-6);
    CHECK((J * rightJacobianInverse(xi) - Matrix6::Identity()).norm() < 1e-9);
  }
  // series branch
  const Vec6 small = Vec6::Constant(1e-3);
  CHECK((rightJacobian(small) * rightJacobianInverse(small) - Matrix6::Identity()).norm() < 1e-12);
}

TEST_CASE("so3 left Jacobian inverse") {
  oracle::Rng rng(10);
  for (double angle : {0.0, 1e-4, 0.05, 0.5, 2.0, 3.0}) {
    const Eigen::Vector3d w = rng.unit() * angle;
    CHECK((so3LeftJacobian(w) * so3LeftJacobianInverse(w) - Eigen::Matrix3d::Identity()).norm() < 1e-10);
  }
}

TEST_CASE("mahalanobisSq") {
  CHECK(mahalanobisSq(Tangent::Zero(), DiagonalNoise::Isotropic(0.3)) == 0.0);
  CHECK(mahalanobisSq(Tangent::Ones(), DiagonalNoise::Isotropic(0.1)) == doctest::Approx(60.0).epsilon(1e-14));
  oracle::Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    Vec6 e, v;
    for (int k = 0; k < 6; ++k) {
      e[k] = rng.normal();
      v[k] = rng.uniform(0.01, 3.0);
    }
    const Matrix6 S = v.asDiagonal();
    const double dense = e.dot(S.inverse() * e);
    CHECK(std::abs(mahalanobisSq(e, DiagonalNoise(v)) - dense) < 1e-12 * std::max(1.0, dense));
  }
}

TEST_CASE("DiagonalNoise validation") {
  CHECK_THROWS_AS(DiagonalNoise(Vec6::Constant(-1.0)), std::invalid_argument);
  CHECK_THROWS_AS(DiagonalNoise(Vec6::Zero()), std::invalid_argument);
  CHECK_THROWS_AS(DiagonalNoise(Vec6::Constant(std::nan(""))), std::invalid_argument);
  const DiagonalNoise floored = DiagonalNoise::Floored(Vec6::Zero());
  CHECK(floored.variances() == Vec6::Constant(kVarianceFloor));
  CHECK((DiagonalNoise::Isotropic(4.0).sqrtInformation() - Vec6::Constant(0.5)).norm() < 1e-15);
}

TEST_CASE("meanPose") {
  oracle::Rng rng(12);
  const Pose p = rng.pose();
  std::vector<Pose> one{p};
  CHECK(poseDistance(meanPose(one), p) < 1e-12);
  std::vector<Pose> two{p, p};
  CHECK(poseDistance(meanPose(two), p) < 1e-12);

  const double ten = 10.0 * kPi / 180.0;
  std::vector<Pose> sym{exp((Tangent() << 0, 0, ten, 0, 0, 0).finished()),
                        exp((Tangent() << 0, 0, -ten, 0, 0, 0).finished())};
  CHECK(Eigen::AngleAxisd(meanPose(sym).rotation()).angle() < 1e-9);
  CHECK_THROWS_AS(meanPose(std::vector<Pose>{}), std::invalid_argument);
}
