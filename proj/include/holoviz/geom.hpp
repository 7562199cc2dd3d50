#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace holoviz::geom {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

template <typename Scalar>
using Mat4 = Eigen::Matrix<Scalar, 4, 4>;

struct DegenerateDirection : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonFiniteValue : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.array().isFinite().all();
}

/// Rotation stored as (x, y, z, w), always unit norm.
///
/// Every constructor normalizes, so the unit invariant holds for any value
/// that can be observed from outside. Zero or non-finite input throws.
template <typename Scalar>
class UnitQuat {
 public:
  using Quaternion = Eigen::Quaternion<Scalar>;

  UnitQuat() : q_(Quaternion::Identity()) {}

  UnitQuat(Scalar x, Scalar y, Scalar z, Scalar w) : q_(w, x, y, z) { normalize(); }

  explicit UnitQuat(const Quaternion& q) : q_(q) { normalize(); }

  static UnitQuat identity() { return UnitQuat(); }

  static UnitQuat from_axis_angle(const Vec3<Scalar>& axis, Scalar angle) {
    return UnitQuat(Quaternion(Eigen::AngleAxis<Scalar>(angle, axis.normalized())));
  }

  static UnitQuat from_yaw(Scalar yaw) {
    return UnitQuat(Scalar(0), Scalar(0), std::sin(yaw / 2), std::cos(yaw / 2));
  }

  Scalar x() const { return q_.x(); }
  Scalar y() const { return q_.y(); }
  Scalar z() const { return q_.z(); }
  Scalar w() const { return q_.w(); }

  const Quaternion& quaternion() const { return q_; }
  Mat3<Scalar> matrix() const { return q_.toRotationMatrix(); }

  UnitQuat conjugate() const { return UnitQuat(q_.conjugate()); }
  UnitQuat inverse() const { return conjugate(); }

  Vec3<Scalar> rotate(const Vec3<Scalar>& v) const { return q_ * v; }

  Scalar dot(const UnitQuat& o) const { return q_.dot(o.q_); }

  /// Yaw of the rotation about +z, in radians.
  Scalar yaw() const {
    return std::atan2(2 * (w() * z() + x() * y()), 1 - 2 * (y() * y() + z() * z()));
  }

  friend UnitQuat operator*(const UnitQuat& a, const UnitQuat& b) {
    return UnitQuat(a.q_ * b.q_);
  }

  friend bool operator==(const UnitQuat& a, const UnitQuat& b) {
    return a.q_.coeffs() == b.q_.coeffs();
  }

 private:
  void normalize() {
    if (!all_finite(q_.coeffs())) throw NonFiniteValue("quaternion has non-finite component");
    const Scalar n = q_.norm();
    if (n == Scalar(0)) throw NonFiniteValue("quaternion has zero norm");
    q_.coeffs() /= n;
  }

  Quaternion q_;
};

/// Rigid-body transform. Maps points of a child frame into its parent frame.
template <typename Scalar>
struct Transform {
  Vec3<Scalar> translation = Vec3<Scalar>::Zero();
  UnitQuat<Scalar> rotation;

  Transform() = default;
  Transform(const Vec3<Scalar>& t, const UnitQuat<Scalar>& r) : translation(t), rotation(r) {}

  static Transform identity() { return Transform(); }
  static Transform from_translation(const Vec3<Scalar>& t) { return Transform(t, UnitQuat<Scalar>()); }
  static Transform from_rotation(const UnitQuat<Scalar>& r) { return Transform(Vec3<Scalar>::Zero(), r); }

  bool finite() const { return all_finite(translation); }

  Vec3<Scalar> apply(const Vec3<Scalar>& p) const { return rotation.rotate(p) + translation; }

  Mat4<Scalar> matrix() const {
    Mat4<Scalar> m = Mat4<Scalar>::Identity();
    m.template topLeftCorner<3, 3>() = rotation.matrix();
    m.template topRightCorner<3, 1>() = translation;
    return m;
  }

  friend bool operator==(const Transform& a, const Transform& b) {
    return a.translation == b.translation && a.rotation == b.rotation;
  }
};

using Vec3d = Vec3<double>;
using UnitQuatd = UnitQuat<double>;
using Transformd = Transform<double>;

/// Applies b, then a. Same as the homogeneous product A * B.
template <typename Scalar>
Transform<Scalar> compose(const Transform<Scalar>& a, const Transform<Scalar>& b) {
  return Transform<Scalar>(a.translation + a.rotation.rotate(b.translation), a.rotation * b.rotation);
}

template <typename Scalar>
Transform<Scalar> operator*(const Transform<Scalar>& a, const Transform<Scalar>& b) {
  return compose(a, b);
}

template <typename Scalar>
Transform<Scalar> invert(const Transform<Scalar>& t) {
  const UnitQuat<Scalar> r = t.rotation.conjugate();
  return Transform<Scalar>(-r.rotate(t.translation), r);
}

/// Shortest-arc spherical interpolation. Antipodal inputs are sign-flipped
/// first; nearly parallel inputs (cos > 1 - 1e-9) use a normalized lerp.
template <typename Scalar>
UnitQuat<Scalar> slerp(const UnitQuat<Scalar>& q0, const UnitQuat<Scalar>& q1, Scalar u) {
  using Coeffs = typename UnitQuat<Scalar>::Quaternion::Coefficients;
  const Coeffs a = q0.quaternion().coeffs();
  Coeffs b = q1.quaternion().coeffs();
  Scalar cos_theta = a.dot(b);
  if (cos_theta < 0) {
    b = -b;
    cos_theta = -cos_theta;
  }
  Coeffs out;
  if (cos_theta > Scalar(1) - Scalar(1e-9)) {
    out = (1 - u) * a + u * b;
  } else {
    const Scalar theta = std::acos(std::min(cos_theta, Scalar(1)));
    const Scalar sin_theta = std::sin(theta);
    out = (std::sin((1 - u) * theta) / sin_theta) * a + (std::sin(u * theta) / sin_theta) * b;
  }
  return UnitQuat<Scalar>(out.x(), out.y(), out.z(), out.w());
}

template <typename Scalar>
Transform<Scalar> interpolate(const Transform<Scalar>& t0, const Transform<Scalar>& t1, Scalar u) {
  return Transform<Scalar>((1 - u) * t0.translation + u * t1.translation, slerp(t0.rotation, t1.rotation, u));
}

/// Intersection of a ray with the ground plane z = 0. Empty when the ray is
/// parallel to the plane or the plane lies behind the origin.
template <typename Scalar>
std::optional<Vec3<Scalar>> ray_ground_intersect(const Vec3<Scalar>& origin, const Vec3<Scalar>& direction) {
  if (!all_finite(origin) || !all_finite(direction) || direction.norm() == Scalar(0)) return std::nullopt;
  if (origin.z() == Scalar(0)) return Vec3<Scalar>(origin.x(), origin.y(), Scalar(0));
  const Scalar dz = direction.z();
  if (std::abs(dz) < Scalar(1e-12)) return std::nullopt;
  const Scalar s = -origin.z() / dz;
  if (s < 0) return std::nullopt;
  const Vec3<Scalar> hit = origin + s * direction;
  return Vec3<Scalar>(hit.x(), hit.y(), Scalar(0));
}

/// Heading from tail to tip projected on the ground plane.
template <typename Scalar>
UnitQuat<Scalar> yaw_quat(const Vec3<Scalar>& tail, const Vec3<Scalar>& tip) {
  const Scalar dx = tip.x() - tail.x();
  const Scalar dy = tip.y() - tail.y();
  if (std::hypot(dx, dy) < Scalar(1e-6)) throw DegenerateDirection("tail and tip coincide on the ground plane");
  return UnitQuat<Scalar>::from_yaw(std::atan2(dy, dx));
}

/// Rotation taking +x onto `dir`. Identity for a zero vector.
template <typename Scalar>
UnitQuat<Scalar> align_x_axis(const Vec3<Scalar>& dir) {
  if (dir.norm() == Scalar(0)) return UnitQuat<Scalar>();
  return UnitQuat<Scalar>(Eigen::Quaternion<Scalar>::FromTwoVectors(Vec3<Scalar>::UnitX(), dir));
}

}  // namespace holoviz::geom
