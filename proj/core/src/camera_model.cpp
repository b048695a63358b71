#include "rigfix/camera_model.hpp"

#include <cmath>
#include <string>

#include "rigfix/error.hpp"

namespace rigfix {

void Intrinsics::validate() const {
  if (!std::isfinite(f) || !std::isfinite(cx) || !std::isfinite(cy)) {
    throw InvalidIntrinsicsError("intrinsics contain non-finite values");
  }
  if (f <= 0.0) {
    throw InvalidIntrinsicsError("focal length must be positive, got " + std::to_string(f));
  }
}

NormalizedPoint pixel_to_normalized(const PixelPoint& p, const Intrinsics& k) {
  k.validate();
  if (!std::isfinite(p.u) || !std::isfinite(p.v)) {
    throw InvalidIntrinsicsError("pixel coordinates are not finite");
  }
  return {(p.u - k.cx) / k.f, (p.v - k.cy) / k.f};
}

PixelPoint normalized_to_pixel(const NormalizedPoint& p, const Intrinsics& k) {
  k.validate();
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw InvalidIntrinsicsError("normalized coordinates are not finite");
  }
  return {p.x * k.f + k.cx, p.y * k.f + k.cy};
}

Mat3 cross_matrix(const Rotation3& w) {
  Mat3 m;
  m << 0.0, -w.omega_z, w.omega_y,
       w.omega_z, 0.0, -w.omega_x,
       -w.omega_y, w.omega_x, 0.0;
  return m;
}

Mat3 rotation_linearized(const Rotation3& w) {
  return Mat3::Identity() + cross_matrix(w);
}

Mat3 rotation_exact(const Rotation3& w) {
  const Mat3 k = cross_matrix(w);
  const double theta2 = w.vec().squaredNorm();
  const double theta = std::sqrt(theta2);
  double a;  // sin(t)/t
  double b;  // (1 - cos(t))/t^2
  if (theta < 1e-6) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * k + b * (k * k);
}

NormalizedPoint dehomogenize(const Vec3& h) {
  if (!(h.z() > 0.0)) {
    throw BehindCameraError("point projects behind the camera (z = " + std::to_string(h.z()) + ")");
  }
  return {h.x() / h.z(), h.y() / h.z()};
}

NormalizedPoint project_left(const ScenePoint& p, const Rotation3& w0) {
  return dehomogenize(rotation_linearized(w0) * Vec3(p.X, p.Y, p.Z));
}

NormalizedPoint reproject_left_to_right(const NormalizedPoint& p0, double d,
                                        const Rotation3& w0, const Rotation3& w1) {
  const Rotation3 dw = w1 - w0;
  const Vec3 h(p0.x + dw.omega_z * p0.y - dw.omega_y + d,
               p0.y - dw.omega_z * p0.x + dw.omega_x - w1.omega_z * d,
               1.0 + dw.omega_y * p0.x - dw.omega_x * p0.y + w1.omega_y * d);
  return dehomogenize(h);
}

NormalizedPoint project_exact(const ScenePoint& p, const Rotation3& w, const Vec3& t) {
  const Vec3 h = Vec3(p.X, p.Y, p.Z) + t * p.W;
  return dehomogenize(rotation_exact(w).transpose() * h);
}

NormalizedPoint reproject_exact(const NormalizedPoint& p0, double d,
                                const Rotation3& w0, const Rotation3& w1) {
  const Vec3 ray = rotation_exact(w0) * Vec3(p0.x, p0.y, 1.0);
  return dehomogenize(rotation_exact(w1).transpose() * (ray + d * Vec3::UnitX()));
}

}  // namespace rigfix
