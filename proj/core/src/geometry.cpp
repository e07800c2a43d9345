#include "tscalib/geometry.hpp"

#include <cmath>

namespace tscalib {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double deg2rad(double deg) { return deg * kPi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / kPi; }

double normalize_deg(double deg) {
  double r = std::fmod(deg + 180.0, 360.0);
  if (r <= 0.0) r += 360.0;
  return r - 180.0;
}

EulerPose EulerPose::normalized() const {
  EulerPose out = *this;
  out.roll = normalize_deg(out.roll);
  out.pitch = normalize_deg(out.pitch);
  out.yaw = normalize_deg(out.yaw);
  return out;
}

double RigidTransform::orthonormality_defect() const {
  Eigen::Matrix3d gram = rotation.transpose() * rotation;
  double defect = (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  defect = std::max(defect, std::abs(rotation.determinant() - 1.0));
  return defect;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

RigidTransform invert(const RigidTransform& t) {
  Eigen::Matrix3d rt = t.rotation.transpose();
  return {rt, -(rt * t.translation)};
}

Point3 apply(const RigidTransform& t, const Point3& p) {
  Eigen::Vector3d q = t.rotation * p.vec() + t.translation;
  return Point3(q, p.intensity, p.ring);
}

Eigen::Vector3d apply(const RigidTransform& t, const Eigen::Vector3d& p) {
  return t.rotation * p + t.translation;
}

PointCloud apply(const RigidTransform& t, const PointCloud& cloud) {
  PointCloud out;
  out.timestamp = cloud.timestamp;
  out.frame_id = cloud.frame_id;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.points.push_back(apply(t, p));
  return out;
}

std::optional<Eigen::Vector2d> project(const CameraIntrinsics& k,
                                       const Point3& p, double z_min) {
  if (!(p.z > z_min)) return std::nullopt;
  double u = k.fx * p.x / p.z + k.cx;
  double v = k.fy * p.y / p.z + k.cy;
  if (u < 0.0 || u >= k.width || v < 0.0 || v >= k.height) return std::nullopt;
  return Eigen::Vector2d(u, v);
}

Point3 back_project(const CameraIntrinsics& k, double u, double v, double z) {
  return Point3((u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z);
}

Eigen::Matrix3d rotation_x(double rad) {
  return Eigen::AngleAxisd(rad, Eigen::Vector3d::UnitX()).toRotationMatrix();
}
Eigen::Matrix3d rotation_y(double rad) {
  return Eigen::AngleAxisd(rad, Eigen::Vector3d::UnitY()).toRotationMatrix();
}
Eigen::Matrix3d rotation_z(double rad) {
  return Eigen::AngleAxisd(rad, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega) {
  double theta = omega.norm();
  if (theta < 1e-12) {
    return Eigen::Matrix3d::Identity() + skew(omega);
  }
  return Eigen::AngleAxisd(theta, omega / theta).toRotationMatrix();
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& rotation) {
  Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& omega) {
  double theta = omega.norm();
  Eigen::Matrix3d w = skew(omega);
  if (theta < 1e-6) {
    return Eigen::Matrix3d::Identity() + 0.5 * w + w * w / 6.0;
  }
  double t2 = theta * theta;
  double c1 = (1.0 - std::cos(theta)) / t2;
  double c2 = (theta - std::sin(theta)) / (t2 * theta);
  return Eigen::Matrix3d::Identity() + c1 * w + c2 * w * w;
}

RigidTransform se3_exp_twist(const Eigen::Vector3d& linear_velocity,
                             const Eigen::Vector3d& angular_velocity,
                             double dt) {
  Eigen::Vector3d omega = angular_velocity * dt;
  Eigen::Vector3d rho = linear_velocity * dt;
  return {so3_exp(omega), so3_left_jacobian(omega) * rho};
}

RigidTransform euler_to_transform(const EulerPose& e) {
  Eigen::Matrix3d r = rotation_z(deg2rad(e.yaw)) *
                      rotation_y(deg2rad(e.pitch)) *
                      rotation_x(deg2rad(e.roll));
  return {r, Eigen::Vector3d(e.tx, e.ty, e.tz)};
}

EulerDecomposition transform_to_euler(const RigidTransform& t) {
  const Eigen::Matrix3d& r = t.rotation;
  EulerDecomposition out;
  out.pose.tx = t.translation.x();
  out.pose.ty = t.translation.y();
  out.pose.tz = t.translation.z();

  double sin_pitch = -r(2, 0);
  sin_pitch = std::clamp(sin_pitch, -1.0, 1.0);
  double pitch = std::asin(sin_pitch);
  out.pose.pitch = rad2deg(pitch);

  if (90.0 - std::abs(out.pose.pitch) < 1e-6) {
    // Gimbal lock: roll and yaw are coupled, fold everything into yaw.
    out.gimbal_lock = true;
    out.pose.roll = 0.0;
    out.pose.yaw = rad2deg(std::atan2(-r(0, 1), r(1, 1)));
  } else {
    out.pose.roll = rad2deg(std::atan2(r(2, 1), r(2, 2)));
    out.pose.yaw = rad2deg(std::atan2(r(1, 0), r(0, 0)));
  }
  out.pose = out.pose.normalized();
  return out;
}

}  // namespace tscalib
