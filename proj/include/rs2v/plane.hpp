// Total-least-squares plane fitting.
//
// The fitted normal is the eigenvector of the centered covariance matrix
// belonging to the smallest eigenvalue; a cyclic Jacobi sweep on the 3x3
// symmetric matrix computes the full eigensystem.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>

#include "rs2v/errors.hpp"
#include "rs2v/geometry.hpp"

namespace rs2v {

/// Plane normal . x = offset, with the normal oriented toward the sensor
/// origin so rays leaving the origin hit it at positive range.
struct Plane {
  Vec3 normal;
  double offset = 0.0;        ///< meters
  double rms_residual = 0.0;  ///< meters
  std::size_t support = 0;    ///< number of points in the fit

  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

/// Eigenvalues (ascending) and matching unit eigenvectors of a symmetric
/// 3x3 matrix.
struct SymmetricEigen3 {
  std::array<double, 3> values;
  std::array<Vec3, 3> vectors;
};

/// Cyclic Jacobi diagonalization. Input is the upper triangle
/// (a00, a01, a02, a11, a12, a22).
inline SymmetricEigen3 symmetric_eigen3(double a00, double a01, double a02,
                                        double a11, double a12, double a22) {
  double a[3][3] = {{a00, a01, a02}, {a01, a11, a12}, {a02, a12, a22}};
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    double diag = std::abs(a[0][0]) + std::abs(a[1][1]) + std::abs(a[2][2]);
    if (off <= 1e-15 * std::max(diag, 1e-300)) break;

    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (tau >= 0.0)
                             ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                             : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        const double app = a[p][p], aqq = a[q][q], apq = a[p][q];
        a[p][p] = app - t * apq;
        a[q][q] = aqq + t * apq;
        a[p][q] = a[q][p] = 0.0;
        for (int r = 0; r < 3; ++r) {
          if (r == p || r == q) continue;
          const double arp = a[r][p], arq = a[r][q];
          a[r][p] = a[p][r] = c * arp - s * arq;
          a[r][q] = a[q][r] = s * arp + c * arq;
        }
        for (int r = 0; r < 3; ++r) {
          const double vrp = v[r][p], vrq = v[r][q];
          v[r][p] = c * vrp - s * vrq;
          v[r][q] = s * vrp + c * vrq;
        }
      }
    }
  }

  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int lhs, int rhs) { return a[lhs][lhs] < a[rhs][rhs]; });

  SymmetricEigen3 out;
  for (int n = 0; n < 3; ++n) {
    const int src = order[n];
    out.values[n] = a[src][src];
    out.vectors[n] = {v[0][src], v[1][src], v[2][src]};
  }
  return out;
}

/// Smallest-eigenvector TLS plane through a point set.
///
/// The covariance is normalized by the point count, so the degeneracy test
/// (two smallest eigenvalues below 1e-12) and rms_residual are in meters^2 /
/// meters regardless of support size. Throws DegenerateGeometry for fewer
/// than 3 points or collinear/coincident input.
inline Plane fit_plane_tls(std::span<const Vec3> points) {
  if (points.size() < 3) {
    throw DegenerateGeometry("plane fit needs at least 3 points");
  }

  Vec3 centroid;
  for (const Vec3& p : points) centroid = centroid + p;
  centroid = centroid / static_cast<double>(points.size());

  double cxx = 0, cxy = 0, cxz = 0, cyy = 0, cyz = 0, czz = 0;
  for (const Vec3& p : points) {
    const Vec3 d = p - centroid;
    cxx += d.x * d.x;
    cxy += d.x * d.y;
    cxz += d.x * d.z;
    cyy += d.y * d.y;
    cyz += d.y * d.z;
    czz += d.z * d.z;
  }
  const double inv_n = 1.0 / static_cast<double>(points.size());
  const SymmetricEigen3 eig = symmetric_eigen3(cxx * inv_n, cxy * inv_n, cxz * inv_n,
                                               cyy * inv_n, cyz * inv_n, czz * inv_n);

  if (eig.values[1] < 1e-12) {
    throw DegenerateGeometry("points are collinear or coincident");
  }

  Plane plane;
  plane.normal = eig.vectors[0] / eig.vectors[0].norm();
  // Face the sensor origin.
  if (plane.normal.dot(-centroid) < 0.0) plane.normal = -plane.normal;
  plane.offset = plane.normal.dot(centroid);
  plane.rms_residual = std::sqrt(std::max(0.0, eig.values[0]));
  plane.support = points.size();
  return plane;
}

}  // namespace rs2v
