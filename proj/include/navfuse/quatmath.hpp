#pragma once

#include <array>
#include <numbers>

namespace navfuse {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const;
  bool finite() const;
};

// Row-major 3x3.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
  double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }

  static Mat3 identity() { return {}; }
  Mat3 transposed() const;
  double determinant() const;

  friend Mat3 operator*(const Mat3& a, const Mat3& b);
  friend Vec3 operator*(const Mat3& a, const Vec3& v);
};

// Roll about x, pitch about y, yaw about z, radians. Composition is
// intrinsic Z-Y-X: R = Rz(yaw) * Ry(pitch) * Rx(roll).
struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

// Hamilton quaternion, scalar first. For attitude it maps body vectors into
// the world frame.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion identity() { return {}; }

  double norm() const;
  Quaternion conjugate() const { return {w, -x, -y, -z}; }
  Quaternion operator-() const { return {-w, -x, -y, -z}; }
  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDegPerRad = 180.0 / kPi;

// Throws kInvalidArgument when |axis| deviates from 1 by more than 1e-6.
Quaternion from_axis_angle(const Vec3& axis, double angle);

Quaternion hamilton(const Quaternion& p, const Quaternion& q);
inline Quaternion operator*(const Quaternion& p, const Quaternion& q) { return hamilton(p, q); }

// Vector part of q * (0, v) * conj(q). q must be unit within 1e-6.
Vec3 rotate_vector(const Quaternion& q, const Vec3& v);

Mat3 to_rotation_matrix(const Quaternion& q);

// Never throws for unit input; the pitch argument is clamped at the poles.
EulerAngles to_euler(const Quaternion& q);
Quaternion from_euler(const EulerAngles& e);

// Unit norm with w >= 0. Throws kDegenerateQuaternion for norm <= 1e-12.
Quaternion normalize(const Quaternion& q);

// Wraps an angle into (-pi, pi].
double wrap_pi(double angle);

}  // namespace navfuse
