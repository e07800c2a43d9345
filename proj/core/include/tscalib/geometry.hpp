#ifndef TSCALIB_GEOMETRY_HPP
#define TSCALIB_GEOMETRY_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <optional>
#include <vector>

namespace tscalib {

enum class Frame { Lidar, Camera, World, Body };

/// Single return of a scanning beam. Ring is the beam index, -1 when the
/// source format does not carry one.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;  // [0,1]
  int ring = -1;

  Point3() = default;
  Point3(double px, double py, double pz, double in = 0.0, int rg = -1)
      : x(px), y(py), z(pz), intensity(in), ring(rg) {}
  explicit Point3(const Eigen::Vector3d& p, double in = 0.0, int rg = -1)
      : x(p.x()), y(p.y()), z(p.z()), intensity(in), ring(rg) {}

  Eigen::Vector3d vec() const { return {x, y, z}; }
  double range() const { return vec().norm(); }
  bool has_ring() const { return ring >= 0; }
};

struct PointCloud {
  std::vector<Point3> points;
  double timestamp = 0.0;
  Frame frame_id = Frame::Lidar;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// SE(3) pose. Rotation is kept as an orthonormal matrix; `compose`,
/// `invert` and the exp/log style constructors all preserve that within
/// floating-point round-off.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Eigen::Vector3d& t) {
    return {Eigen::Matrix3d::Identity(), t};
  }
  static RigidTransform from_rotation(const Eigen::Matrix3d& r) {
    return {r, Eigen::Vector3d::Zero()};
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  /// Max absolute entry of R^T R - I plus the determinant defect; valid
  /// transforms keep this below 1e-9.
  double orthonormality_defect() const;
  bool is_valid(double tol = 1e-9) const {
    return orthonormality_defect() <= tol;
  }
};

/// Roll/pitch/yaw in degrees, translation in meters. Convention is
/// intrinsic Z-Y-X: R = Rz(yaw) * Ry(pitch) * Rx(roll). Angles normalize
/// to (-180, 180].
struct EulerPose {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  double tx = 0.0;
  double ty = 0.0;
  double tz = 0.0;

  EulerPose normalized() const;
};

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool is_valid() const {
    return fx > 0 && fy > 0 && cx >= 0 && cx < width && cy >= 0 &&
           cy < height;
  }
};

struct EulerDecomposition {
  EulerPose pose;
  bool gimbal_lock = false;
};

double deg2rad(double deg);
double rad2deg(double rad);
/// Wraps an angle in degrees to (-180, 180].
double normalize_deg(double deg);

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);
Point3 apply(const RigidTransform& t, const Point3& p);
Eigen::Vector3d apply(const RigidTransform& t, const Eigen::Vector3d& p);
PointCloud apply(const RigidTransform& t, const PointCloud& cloud);

inline constexpr double kDefaultZMin = 0.1;  // near plane, meters

/// Pinhole projection of a camera-frame point. Empty when the point is
/// behind the near plane or lands outside the image.
std::optional<Eigen::Vector2d> project(const CameraIntrinsics& k,
                                       const Point3& p,
                                       double z_min = kDefaultZMin);
/// Inverse of `project` at a known depth.
Point3 back_project(const CameraIntrinsics& k, double u, double v, double z);

Eigen::Matrix3d rotation_x(double rad);
Eigen::Matrix3d rotation_y(double rad);
Eigen::Matrix3d rotation_z(double rad);

/// Rodrigues exponential of an axis-angle vector (radians).
Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega);
/// Logarithm of a rotation matrix, inverse of so3_exp.
Eigen::Vector3d so3_log(const Eigen::Matrix3d& rotation);
Eigen::Matrix3d skew(const Eigen::Vector3d& v);
/// Left Jacobian of SO(3); maps a body-frame velocity integrated over the
/// rotation interval to the translation of the SE(3) exponential.
Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& omega);

/// SE(3) exponential of a constant body twist integrated over `dt`.
RigidTransform se3_exp_twist(const Eigen::Vector3d& linear_velocity,
                             const Eigen::Vector3d& angular_velocity,
                             double dt);

RigidTransform euler_to_transform(const EulerPose& e);
EulerDecomposition transform_to_euler(const RigidTransform& t);

}  // namespace tscalib

#endif  // TSCALIB_GEOMETRY_HPP
