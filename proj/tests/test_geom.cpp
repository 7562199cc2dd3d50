#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "holoviz/geom.hpp"
#include "oracle.hpp"

using namespace holoviz::geom;

namespace {

constexpr double kPi = std::numbers::pi;

UnitQuatd yaw_deg(double deg) { return UnitQuatd::from_yaw(deg * kPi / 180); }

// q and -q are the same rotation.
double quat_distance(const UnitQuatd& a, const UnitQuatd& b) {
  const auto ca = a.quaternion().coeffs();
  const auto cb = b.quaternion().coeffs();
  return std::min((ca - cb).cwiseAbs().maxCoeff(), (ca + cb).cwiseAbs().maxCoeff());
}

double norm_error(const UnitQuatd& q) { return std::abs(q.quaternion().coeffs().norm() - 1); }

}  // namespace

TEST_CASE("compose of identities is identity") {
  const auto c = compose(Transformd::identity(), Transformd::identity());
  CHECK(c.translation.isZero());
  CHECK(quat_distance(c.rotation, UnitQuatd()) == 0);
}

TEST_CASE("compose applies b then a") {
  const Transformd a(Vec3d(1, 0, 0), yaw_deg(90));
  const Transformd b(Vec3d(1, 0, 0), UnitQuatd());
  const auto c = compose(a, b);

  const oracle::Mat4 expected =
      oracle::homogeneous(oracle::axis_angle(Eigen::Vector3d::UnitZ(), kPi / 2), Eigen::Vector3d(1, 0, 0)) *
      oracle::homogeneous(Eigen::Matrix3d::Identity(), Eigen::Vector3d(1, 0, 0));
  CHECK(oracle::max_error(oracle::matrix_of(c), expected) < 1e-12);
  CHECK(c.translation.isApprox(Vec3d(1, 1, 0), 1e-12));
  CHECK(quat_distance(c.rotation, yaw_deg(90)) < 1e-12);
}

TEST_CASE("invert examples") {
  CHECK(invert(Transformd::identity()).translation.isZero());

  const auto pure = invert(Transformd::from_translation(Vec3d(1, 0, 0)));
  CHECK(pure.translation.isApprox(Vec3d(-1, 0, 0)));
  CHECK(quat_distance(pure.rotation, UnitQuatd()) == 0);

  const Transformd t(Vec3d(1, 0, 0), yaw_deg(90));
  const auto inv = invert(t);
  const oracle::Mat4 expected = oracle::inverse(
      oracle::homogeneous(oracle::axis_angle(Eigen::Vector3d::UnitZ(), kPi / 2), Eigen::Vector3d(1, 0, 0)));
  CHECK(oracle::max_error(oracle::matrix_of(inv), expected) < 1e-12);
  CHECK((inv.translation - Vec3d(0, 1, 0)).norm() < 1e-12);
  CHECK(quat_distance(inv.rotation, yaw_deg(-90)) < 1e-12);
}

TEST_CASE("slerp examples") {
  const auto q = UnitQuatd(0.1, -0.3, 0.5, 0.8);
  CHECK(quat_distance(slerp(q, q, 0.5), q) < 1e-12);

  // Half of a 90 degree turn about z: axis-angle with half the angle.
  const auto half = slerp(UnitQuatd(), yaw_deg(90), 0.5);
  const auto expected = oracle::axis_angle(Eigen::Vector3d::UnitZ(), kPi / 4);
  CHECK((half.matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);

  const auto q1 = UnitQuatd(-0.4, 0.2, 0.1, 0.7);
  CHECK(quat_distance(slerp(q, q1, 1.0), q1) < 1e-12);
  CHECK(quat_distance(slerp(q, q1, 0.0), q) < 1e-12);
}

TEST_CASE("slerp takes the short arc for antipodal input") {
  const auto a = yaw_deg(10);
  const auto b = yaw_deg(30);
  const UnitQuatd neg_b(-b.x(), -b.y(), -b.z(), -b.w());
  const auto mid = slerp(a, neg_b, 0.5);
  CHECK(std::abs(mid.yaw() - 20 * kPi / 180) < 1e-12);
}

TEST_CASE("slerp of nearly parallel inputs stays unit") {
  const auto a = yaw_deg(10);
  const auto b = UnitQuatd::from_yaw(10 * kPi / 180 + 1e-7);
  for (double u : {0.0, 0.25, 0.5, 1.0}) CHECK(norm_error(slerp(a, b, u)) < 1e-12);
}

TEST_CASE("interpolate examples") {
  const Transformd t0 = Transformd::identity();
  const Transformd t1 = Transformd::from_translation(Vec3d(2, 0, 0));
  CHECK(interpolate(t0, t1, 0.5).translation.isApprox(Vec3d(1, 0, 0)));
  CHECK(interpolate(t0, t1, 0.0) == t0);
  CHECK(interpolate(t0, t1, 1.0).translation == t1.translation);
}

TEST_CASE("ray_ground_intersect examples") {
  const auto down = ray_ground_intersect(Vec3d(0, 0, 2), Vec3d(0, 0, -1));
  REQUIRE(down);
  CHECK(down->isApprox(Vec3d(0, 0, 0)));

  // Parametric oracle: origin + s * d with s = -origin.z / d.z.
  const Vec3d o(0, 0, 1);
  const Vec3d d = Vec3d(1, 0, -1).normalized();
  const double s = -o.z() / d.z();
  const auto slanted = ray_ground_intersect(o, d);
  REQUIRE(slanted);
  CHECK((*slanted - (o + s * d)).norm() < 1e-12);
  CHECK((*slanted - Vec3d(1, 0, 0)).norm() < 1e-12);

  CHECK_FALSE(ray_ground_intersect(Vec3d(0, 0, 1), Vec3d(0, 0, 1)));
  CHECK_FALSE(ray_ground_intersect(Vec3d(0, 0, 1), Vec3d(1, 0, 0)));
}

TEST_CASE("yaw_quat examples") {
  CHECK(quat_distance(yaw_quat(Vec3d(0, 0, 0), Vec3d(1, 0, 0)), UnitQuatd()) < 1e-15);

  const double half = std::atan2(1.0, 1.0) / 2;
  const auto diag = yaw_quat(Vec3d(0, 0, 0), Vec3d(1, 1, 0));
  CHECK(std::abs(diag.x()) < 1e-15);
  CHECK(std::abs(diag.y()) < 1e-15);
  CHECK(std::abs(diag.z() - std::sin(half)) < 1e-15);
  CHECK(std::abs(diag.w() - std::cos(half)) < 1e-15);

  CHECK_THROWS_AS(yaw_quat(Vec3d(1, 2, 0), Vec3d(1, 2, 0)), DegenerateDirection);
  // Height difference alone does not define a heading.
  CHECK_THROWS_AS(yaw_quat(Vec3d(1, 2, 0), Vec3d(1, 2, 5)), DegenerateDirection);
}

TEST_CASE("non-finite input is rejected") {
  CHECK_THROWS_AS(UnitQuatd(std::nan(""), 0, 0, 1), NonFiniteValue);
  CHECK_THROWS_AS(UnitQuatd(0, 0, 0, 0), NonFiniteValue);
  CHECK_THROWS_AS(UnitQuatd(0, std::numeric_limits<double>::infinity(), 0, 1), NonFiniteValue);
}

TEST_CASE("construction normalizes") {
  const UnitQuatd q(0, 0, 3, 4);
  CHECK(norm_error(q) < 1e-15);
  CHECK(q.z() == doctest::Approx(0.6));
}

TEST_CASE("scalar type is a template parameter") {
  const Transform<float> a(Vec3<float>(1, 0, 0), UnitQuat<float>::from_yaw(float(kPi / 2)));
  const auto c = compose(a, invert(a));
  CHECK(c.translation.norm() < 1e-6f);
}

TEST_CASE("property: compose, invert, interpolate match the matrix oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0, 1);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = oracle::random_transform(rng);
    const auto b = oracle::random_transform(rng);
    const auto c = oracle::random_transform(rng);
    const oracle::Mat4 ma = oracle::matrix_of(a), mb = oracle::matrix_of(b), mc = oracle::matrix_of(c);

    worst = std::max(worst, oracle::max_error(oracle::matrix_of(compose(a, b)), ma * mb));
    worst = std::max(worst, oracle::max_error(oracle::matrix_of(invert(a)), oracle::inverse(ma)));
    worst = std::max(worst, oracle::max_error(oracle::matrix_of(compose(a, invert(a))), oracle::Mat4::Identity()));
    // associativity
    worst = std::max(worst, oracle::max_error(oracle::matrix_of(compose(compose(a, b), c)),
                                              oracle::matrix_of(compose(a, compose(b, c)))));

    // Interpolation oracle: rotate a by u times the relative angle about the
    // relative axis (Rodrigues), blend translations linearly.
    const double u = unit(rng);
    const Eigen::Matrix3d ra = ma.block<3, 3>(0, 0), rb = mb.block<3, 3>(0, 0);
    const Eigen::AngleAxisd rel(Eigen::Matrix3d(ra.transpose() * rb));
    const Eigen::Matrix3d r_u = ra * oracle::axis_angle(rel.axis(), u * rel.angle());
    const oracle::Mat4 m_u = oracle::homogeneous(r_u, (1 - u) * a.translation + u * b.translation);
    const auto t_u = interpolate(a, b, u);
    worst = std::max(worst, oracle::max_error(oracle::matrix_of(t_u), m_u));

    CHECK(norm_error(compose(a, b).rotation) < 1e-9);
    CHECK(norm_error(invert(a).rotation) < 1e-9);
    CHECK(norm_error(t_u.rotation) < 1e-9);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("property: ground hits lie on the plane and on the ray") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-10, 10);
  int hits = 0;
  for (int i = 0; i < 2000; ++i) {
    const Vec3d o(pos(rng), pos(rng), pos(rng));
    const Vec3d d(pos(rng), pos(rng), pos(rng));
    if (d.norm() == 0) continue;
    const auto p = ray_ground_intersect(o, d);
    const bool crosses = d.z() != 0 && -o.z() / d.z() >= 0;
    CHECK(p.has_value() == crosses);
    if (!p) continue;
    ++hits;
    CHECK(std::abs(p->z()) < 1e-12);
    CHECK(((*p - o).cross(d)).norm() < 1e-9 * (1 + (*p - o).norm() * d.norm()));
  }
  CHECK(hits > 500);
}
