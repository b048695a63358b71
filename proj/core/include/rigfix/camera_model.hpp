#pragma once

#include <Eigen/Core>

namespace rigfix {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Pinhole intrinsics in pixels.
struct Intrinsics {
  double f = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Throws InvalidIntrinsicsError unless f > 0 and all fields are finite.
  void validate() const;

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

struct NormalizedPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Small rotation vector in radians: pitch (x), pan (y), roll (z).
struct Rotation3 {
  double omega_x = 0.0;
  double omega_y = 0.0;
  double omega_z = 0.0;

  Vec3 vec() const { return {omega_x, omega_y, omega_z}; }
  static Rotation3 from_vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
  static Rotation3 from_degrees(double x, double y, double z) {
    return {deg_to_rad(x), deg_to_rad(y), deg_to_rad(z)};
  }

  friend Rotation3 operator+(const Rotation3& a, const Rotation3& b) {
    return {a.omega_x + b.omega_x, a.omega_y + b.omega_y, a.omega_z + b.omega_z};
  }
  friend Rotation3 operator-(const Rotation3& a, const Rotation3& b) {
    return {a.omega_x - b.omega_x, a.omega_y - b.omega_y, a.omega_z - b.omega_z};
  }
  friend Rotation3 operator*(double s, const Rotation3& a) {
    return {s * a.omega_x, s * a.omega_y, s * a.omega_z};
  }
  friend bool operator==(const Rotation3&, const Rotation3&) = default;
};

/// Homogeneous scene point in the rig frame (x right along the baseline,
/// y down, z forward). w = 0 encodes a point at infinity in direction XYZ.
struct ScenePoint {
  double X = 0.0;
  double Y = 0.0;
  double Z = 1.0;
  double W = 1.0;
};

/// Extrinsic translations of the two cameras (x_cam = R * P + t, baseline 1).
inline const Vec3 kLeftTranslation{0.0, 0.0, 0.0};
inline const Vec3 kRightTranslation{1.0, 0.0, 0.0};

NormalizedPoint pixel_to_normalized(const PixelPoint& p, const Intrinsics& k);
PixelPoint normalized_to_pixel(const NormalizedPoint& p, const Intrinsics& k);

/// Skew-symmetric cross-product matrix [w]x.
Mat3 cross_matrix(const Rotation3& w);

/// First-order rotation I + [w]x.
Mat3 rotation_linearized(const Rotation3& w);

/// Axis-angle exponential exp([w]x); a proper rotation matrix.
Mat3 rotation_exact(const Rotation3& w);

/// Dehomogenizes h; throws BehindCameraError if h.z() <= 0.
NormalizedPoint dehomogenize(const Vec3& h);

/// Projection of P into the left camera with the linearized rotation,
/// [x0 y0 1]^T ~ (I + [w0]x) [X Y Z]^T.
NormalizedPoint project_left(const ScenePoint& p, const Rotation3& w0);

/// Inverse-depth reprojection of a left-image point into the right camera
/// under the linearized model:
///
///   [x1 y1 1]^T ~ (I - [dw]x) [x0 y0 1]^T + d [1, -w_z1, w_y1]^T,
///
/// with dw = w1 - w0. Componentwise this is
/// (x0 + dwz*y0 - dwy + d, y0 - dwz*x0 + dwx - wz1*d, 1 + dwy*x0 - dwx*y0 + wy1*d),
/// the form whose cross-multiplication yields the vertical-disparity
/// constraint solved in solver.hpp.
NormalizedPoint reproject_left_to_right(const NormalizedPoint& p0, double d,
                                        const Rotation3& w0, const Rotation3& w1);

/// Exact counterpart of the rig model used by the simulator: a camera with
/// misalignment w and extrinsic translation t observes the homogeneous
/// point P along R(w)^T (P_xyz + t * P_w).
NormalizedPoint project_exact(const ScenePoint& p, const Rotation3& w, const Vec3& t);

/// Exact reprojection: R(w1)^T (R(w0) [x0 y0 1]^T + d e_x).
NormalizedPoint reproject_exact(const NormalizedPoint& p0, double d,
                                const Rotation3& w0, const Rotation3& w1);

}  // namespace rigfix
