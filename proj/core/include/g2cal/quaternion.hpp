#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace g2cal {

/// Quaternion in the basis (1, i, j, k) with i*j = k.
struct Quaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  static Quaternion identity() { return {1, 0, 0, 0}; }
  static Quaternion imag(const Eigen::Vector3d& v) { return {0.0, v(0), v(1), v(2)}; }

  Quaternion conj() const { return {w, -x, -y, -z}; }
  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Eigen::Vector3d imagPart() const { return {x, y, z}; }

  friend Quaternion operator*(const Quaternion& a, const Quaternion& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
  }

  /// exp of the pure-imaginary quaternion with vector part v.
  static Quaternion expImag(const Eigen::Vector3d& v) {
    const double th = v.norm();
    if (th < 1e-300) return identity();
    const double s = std::sin(th) / th;
    return {std::cos(th), s * v(0), s * v(1), s * v(2)};
  }

  /// Conjugation action q v q^bar on the imaginary part.
  Eigen::Vector3d rotate(const Eigen::Vector3d& v) const {
    return ((*this) * imag(v) * conj()).imagPart();
  }
};

}  // namespace g2cal
