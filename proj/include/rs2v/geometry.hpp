// 3D rotation and rigid-transform primitives.
//
// Rotations are carried as axis-angle vectors (magnitude = angle, radians)
// and converted to matrices with the Rodrigues formula. Angles crossing the
// module boundary (spherical coordinates, fields of view) are degrees; all
// internal trigonometry is radians. Everything here is a pure function of
// immutable value types.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "rs2v/errors.hpp"

namespace rs2v {

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

// ---------------------------------------------------------------------------
// Vec3
// ---------------------------------------------------------------------------

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  constexpr Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  constexpr double squared_norm() const { return dot(*this); }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Axis-angle rotation: direction = axis, magnitude = angle in radians.
struct RotationVector {
  double rx = 0.0;
  double ry = 0.0;
  double rz = 0.0;

  constexpr Vec3 as_vec3() const { return {rx, ry, rz}; }
  double angle() const { return std::sqrt(rx * rx + ry * ry + rz * rz); }

  bool finite() const {
    return std::isfinite(rx) && std::isfinite(ry) && std::isfinite(rz);
  }
};

// ---------------------------------------------------------------------------
// RotationMatrix
// ---------------------------------------------------------------------------

/// 3x3 rotation matrix, row-major. Valid instances are orthonormal with
/// determinant +1 within 1e-9; rodrigues() always produces valid ones.
struct RotationMatrix {
  std::array<double, 9> m = {1, 0, 0, 0, 1, 0, 0, 0, 1};

  static constexpr RotationMatrix identity() { return {}; }

  constexpr double operator()(int r, int c) const { return m[3 * r + c]; }
  constexpr double& operator()(int r, int c) { return m[3 * r + c]; }

  constexpr Vec3 apply(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  constexpr RotationMatrix transpose() const {
    return {{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
  }

  constexpr RotationMatrix operator*(const RotationMatrix& o) const {
    RotationMatrix r;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        r.m[3 * i + j] = m[3 * i] * o.m[j] + m[3 * i + 1] * o.m[3 + j] +
                         m[3 * i + 2] * o.m[6 + j];
      }
    }
    return r;
  }

  constexpr double trace() const { return m[0] + m[4] + m[8]; }

  constexpr double determinant() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }

  /// Max deviation of R^T R from the identity plus |det - 1|.
  double orthonormality_error() const {
    const RotationMatrix g = transpose() * (*this);
    double err = 0.0;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        const double want = (r == c) ? 1.0 : 0.0;
        err = std::max(err, std::abs(g(r, c) - want));
      }
    }
    return std::max(err, std::abs(determinant() - 1.0));
  }

  bool is_rotation(double tol = 1e-9) const { return orthonormality_error() <= tol; }
};

/// Rigid motion p -> R p + T.
struct RigidTransform {
  RotationMatrix rotation;
  Vec3 translation;

  static constexpr RigidTransform identity() { return {}; }
};

/// Spherical coordinates: rho meters, phi azimuth degrees in [0, 360),
/// theta polar angle degrees from +z (theta = 90 is the horizontal plane).
struct SphericalPoint {
  double rho = 0.0;
  double phi = 0.0;
  double theta = 0.0;
};

// ---------------------------------------------------------------------------
// Rodrigues forward / inverse
// ---------------------------------------------------------------------------

/// Rotation matrix of the axis-angle vector theta (matrix exponential of the
/// skew-symmetric matrix of theta). The zero vector maps to the identity.
inline RotationMatrix rodrigues(const RotationVector& theta) {
  const double t2 = theta.rx * theta.rx + theta.ry * theta.ry + theta.rz * theta.rz;
  const double angle = std::sqrt(t2);

  // R = I + A [w]_x + B [w]_x^2 with A = sin(a)/a, B = (1-cos(a))/a^2,
  // evaluated by series for small angles so the unnormalized vector can be
  // used directly.
  double a_coef, b_coef;
  if (angle < 1e-4) {
    a_coef = 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0);
    b_coef = 0.5 - t2 / 24.0 * (1.0 - t2 / 30.0);
  } else {
    a_coef = std::sin(angle) / angle;
    b_coef = (1.0 - std::cos(angle)) / t2;
  }

  const double wx = theta.rx, wy = theta.ry, wz = theta.rz;
  RotationMatrix r;
  // [w]_x^2 = w w^T - |w|^2 I.
  r(0, 0) = 1.0 + b_coef * (wx * wx - t2);
  r(0, 1) = b_coef * wx * wy - a_coef * wz;
  r(0, 2) = b_coef * wx * wz + a_coef * wy;
  r(1, 0) = b_coef * wy * wx + a_coef * wz;
  r(1, 1) = 1.0 + b_coef * (wy * wy - t2);
  r(1, 2) = b_coef * wy * wz - a_coef * wx;
  r(2, 0) = b_coef * wz * wx - a_coef * wy;
  r(2, 1) = b_coef * wz * wy + a_coef * wx;
  r(2, 2) = 1.0 + b_coef * (wz * wz - t2);
  return r;
}

/// Axis-angle vector of a rotation matrix, magnitude in [0, pi].
///
/// Near-zero angles use the first-order series of the skew part; at angle pi
/// (where the axis sign is intrinsically ambiguous) the convention is that
/// the first nonzero axis component is positive. Throws NotARotation if the
/// input fails the orthonormality / determinant check.
inline RotationVector inv_rodrigues(const RotationMatrix& rot, double tol = 1e-9) {
  if (!rot.is_rotation(tol)) {
    throw NotARotation("matrix is not orthonormal with det +1 within tolerance");
  }

  // 0.5 * vee(R - R^T) = sin(angle) * axis.
  const Vec3 sin_axis = {0.5 * (rot(2, 1) - rot(1, 2)),
                         0.5 * (rot(0, 2) - rot(2, 0)),
                         0.5 * (rot(1, 0) - rot(0, 1))};
  const double s = sin_axis.norm();
  const double c = std::clamp(0.5 * (rot.trace() - 1.0), -1.0, 1.0);
  const double angle = std::atan2(s, c);

  if (angle < 1e-6) {
    // First-order: theta ~ sin(angle) * axis.
    return {sin_axis.x, sin_axis.y, sin_axis.z};
  }

  if (kPi - angle > 1e-6) {
    const double scale = angle / s;
    return {scale * sin_axis.x, scale * sin_axis.y, scale * sin_axis.z};
  }

  // Near pi the skew part vanishes; recover the axis from the symmetric part
  // B = 0.5 (R + R^T) = c I + (1 - c) a a^T.
  const double denom = 1.0 - c;
  double ax[3];
  for (int i = 0; i < 3; ++i) {
    ax[i] = std::sqrt(std::max(0.0, (rot(i, i) - c) / denom));
  }
  int p = 0;
  if (ax[1] > ax[p]) p = 1;
  if (ax[2] > ax[p]) p = 2;
  // Off-diagonal entries give the signs of the other two components
  // relative to component p.
  for (int q = 0; q < 3; ++q) {
    if (q == p) continue;
    const double b_pq = 0.5 * (rot(p, q) + rot(q, p));
    ax[q] = b_pq / (denom * ax[p]);
  }
  const double inv_norm = 1.0 / std::sqrt(ax[0] * ax[0] + ax[1] * ax[1] + ax[2] * ax[2]);
  for (double& v : ax) v *= inv_norm;

  const double s_arr[3] = {sin_axis.x, sin_axis.y, sin_axis.z};
  if (std::abs(s_arr[p]) > 1e-12) {
    // Overall sign is still recoverable from the skew part.
    if (s_arr[p] < 0.0) {
      for (double& v : ax) v = -v;
    }
  } else {
    // Numerically at pi: fix the sign convention.
    for (int i = 0; i < 3; ++i) {
      if (std::abs(ax[i]) > 1e-9) {
        if (ax[i] < 0.0) {
          for (double& v : ax) v = -v;
        }
        break;
      }
    }
  }
  return {angle * ax[0], angle * ax[1], angle * ax[2]};
}

// ---------------------------------------------------------------------------
// Rigid transforms
// ---------------------------------------------------------------------------

inline Vec3 apply_transform(const RigidTransform& t, const Vec3& p) {
  return t.rotation.apply(p) + t.translation;
}

/// compose(t2, t1) applies t1 first: apply(compose(t2, t1), p) = apply(t2, apply(t1, p)).
inline RigidTransform compose(const RigidTransform& t2, const RigidTransform& t1) {
  return {t2.rotation * t1.rotation, t2.rotation.apply(t1.translation) + t2.translation};
}

inline RigidTransform inverse(const RigidTransform& t) {
  const RotationMatrix rt = t.rotation.transpose();
  return {rt, -rt.apply(t.translation)};
}

/// World -> vehicle-sensor transform for a target vehicle at pose
/// (x_wc, theta_wc) with sensor mount offset delta_t:
///   R = rodrigues(theta_wc)^-1 (the transpose),  T = -R x_wc - delta_t.
inline RigidTransform world_to_vehicle_transform(const Vec3& x_wc,
                                                 const RotationVector& theta_wc,
                                                 const Vec3& delta_t) {
  const RotationMatrix r = rodrigues(theta_wc).transpose();
  return {r, -r.apply(x_wc) - delta_t};
}

// ---------------------------------------------------------------------------
// Spherical <-> Cartesian
// ---------------------------------------------------------------------------

/// Throws DegenerateOrigin if p is within 1e-12 of the origin.
inline SphericalPoint cartesian_to_spherical(const Vec3& p) {
  const double rho = p.norm();
  if (rho < 1e-12) {
    throw DegenerateOrigin("cannot convert a point at the origin to spherical");
  }
  double phi = rad_to_deg(std::atan2(p.y, p.x));
  if (phi < 0.0) phi += 360.0;
  if (phi >= 360.0) phi = 0.0;  // atan2 rounding can land exactly on 360
  const double theta = rad_to_deg(std::acos(std::clamp(p.z / rho, -1.0, 1.0)));
  return {rho, phi, theta};
}

inline Vec3 spherical_to_cartesian(const SphericalPoint& s) {
  const double phi = deg_to_rad(s.phi);
  const double theta = deg_to_rad(s.theta);
  const double st = std::sin(theta);
  return {s.rho * st * std::cos(phi), s.rho * st * std::sin(phi),
          s.rho * std::cos(theta)};
}

/// Unit direction for azimuth phi and polar angle theta, both degrees.
inline Vec3 direction_from_angles(double phi_deg, double theta_deg) {
  return spherical_to_cartesian({1.0, phi_deg, theta_deg});
}

}  // namespace rs2v
