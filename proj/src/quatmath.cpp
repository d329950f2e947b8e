#include "navfuse/quatmath.hpp"

#include <algorithm>
#include <cmath>

#include "navfuse/error.hpp"

namespace navfuse {

namespace {

constexpr double kUnitTolerance = 1e-6;

void require_unit(const Quaternion& q, const char* op) {
  if (std::abs(q.norm() - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::kInvalidArgument, std::string(op) + " requires a unit quaternion");
  }
}

}  // namespace

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

bool Vec3::finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

Mat3 Mat3::transposed() const {
  Mat3 t;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t(r, c) = (*this)(c, r);
  return t;
}

double Mat3::determinant() const {
  const Mat3& a = *this;
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c) + a(r, 2) * b(2, c);
    }
  }
  return out;
}

Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quaternion from_axis_angle(const Vec3& axis, double angle) {
  if (std::abs(axis.norm() - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "rotation axis must be a unit vector");
  }
  const double half = 0.5 * angle;
  const double s = std::sin(half);
  return {std::cos(half), axis.x * s, axis.y * s, axis.z * s};
}

Quaternion hamilton(const Quaternion& p, const Quaternion& q) {
  return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
          p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
          p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
          p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w};
}

Vec3 rotate_vector(const Quaternion& q, const Vec3& v) {
  require_unit(q, "rotate_vector");
  const Quaternion r = hamilton(hamilton(q, {0.0, v.x, v.y, v.z}), q.conjugate());
  return {r.x, r.y, r.z};
}

Mat3 to_rotation_matrix(const Quaternion& q) {
  require_unit(q, "to_rotation_matrix");
  const double xx = q.x * q.x, yy = q.y * q.y, zz = q.z * q.z;
  const double xy = q.x * q.y, xz = q.x * q.z, yz = q.y * q.z;
  const double wx = q.w * q.x, wy = q.w * q.y, wz = q.w * q.z;
  Mat3 m;
  m(0, 0) = 1.0 - 2.0 * (yy + zz);
  m(0, 1) = 2.0 * (xy - wz);
  m(0, 2) = 2.0 * (xz + wy);
  m(1, 0) = 2.0 * (xy + wz);
  m(1, 1) = 1.0 - 2.0 * (xx + zz);
  m(1, 2) = 2.0 * (yz - wx);
  m(2, 0) = 2.0 * (xz - wy);
  m(2, 1) = 2.0 * (yz + wx);
  m(2, 2) = 1.0 - 2.0 * (xx + yy);
  return m;
}

EulerAngles to_euler(const Quaternion& q) {
  require_unit(q, "to_euler");
  EulerAngles e;
  e.roll = std::atan2(2.0 * (q.w * q.x + q.y * q.z), 1.0 - 2.0 * (q.x * q.x + q.y * q.y));
  e.pitch = std::asin(std::clamp(2.0 * (q.w * q.y - q.x * q.z), -1.0, 1.0));
  e.yaw = std::atan2(2.0 * (q.w * q.z + q.x * q.y), 1.0 - 2.0 * (q.y * q.y + q.z * q.z));
  e.roll = wrap_pi(e.roll);
  e.yaw = wrap_pi(e.yaw);
  return e;
}

Quaternion from_euler(const EulerAngles& e) {
  const Quaternion qz{std::cos(0.5 * e.yaw), 0.0, 0.0, std::sin(0.5 * e.yaw)};
  const Quaternion qy{std::cos(0.5 * e.pitch), 0.0, std::sin(0.5 * e.pitch), 0.0};
  const Quaternion qx{std::cos(0.5 * e.roll), std::sin(0.5 * e.roll), 0.0, 0.0};
  return hamilton(hamilton(qz, qy), qx);
}

Quaternion normalize(const Quaternion& q) {
  const double n = q.norm();
  if (!(n > 1e-12)) {
    throw Error(ErrorCode::kDegenerateQuaternion, "cannot normalize a near-zero quaternion");
  }
  const double s = (q.w < 0.0 ? -1.0 : 1.0) / n;
  return {q.w * s, q.x * s, q.y * s, q.z * s};
}

double wrap_pi(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace navfuse
