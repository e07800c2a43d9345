#ifndef TSCALIB_POSE_ESTIMATION_HPP
#define TSCALIB_POSE_ESTIMATION_HPP

#include <vector>

#include "tscalib/geometry.hpp"

namespace tscalib {

/// Platform state sample. Velocities are expressed in the body frame
/// (forward/left/up), position and orientation in the world frame.
struct OdometrySample {
  double timestamp = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d linear_velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();
};

/// Body-frame specific force and angular rate.
struct ImuSample {
  double timestamp = 0.0;
  Eigen::Vector3d linear_acceleration = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();
};

enum class MotionMethod { UniformLinear, ImuPreintegration };

/// Relative sensor motion over an inter-sensor interval.
///
/// `transform` maps coordinates observed in the sensor frame at the source
/// epoch (the later LiDAR shot) into the sensor frame at the target epoch,
/// i.e. pose_target^-1 * pose_source. `interval` is source minus target
/// time in seconds; adjacent-frame sanity bounds it below one second.
struct MotionEstimate {
  RigidTransform transform;
  double interval = 0.0;
  MotionMethod method = MotionMethod::UniformLinear;
};

MotionEstimate make_motion_estimate(const RigidTransform& transform,
                                    double interval, MotionMethod method);

/// Constant-twist motion model: body velocities sampled at the interval
/// midpoint, integrated in closed form over [t0, t1]. Returns the motion
/// whose transform maps frame-t1 coordinates into frame-t0 coordinates.
MotionEstimate estimate_motion_uniform(
    const std::vector<OdometrySample>& samples, double t0, double t1);

/// Midpoint IMU integration of rotation, velocity and position over
/// [t0, t1]. `initial_velocity` is the body-frame velocity at t0 (take it
/// from the nearest odometry sample); `gravity` is expressed in the body
/// frame at t0 and is added to the rotated specific force.
MotionEstimate preintegrate_imu(const std::vector<ImuSample>& samples,
                                double t0, double t1,
                                const Eigen::Vector3d& initial_velocity,
                                const Eigen::Vector3d& gravity);

/// Conjugates a body-frame motion into the sensor frame:
/// T_sensor = X^-1 * T_body * X with X the sensor pose in the body frame.
MotionEstimate body_to_sensor_motion(const MotionEstimate& body_motion,
                                     const RigidTransform& body_to_sensor);

/// T = T_e * T_v: the full LiDAR(t+e_t) -> camera(t) matrix used when
/// scoring projections.
RigidTransform compose_total(const RigidTransform& extrinsic,
                             const MotionEstimate& motion);

/// Rigidly re-bases a cloud captured at `target_time + motion.interval`
/// onto `target_time`. Point count, intensity and ring survive unchanged.
PointCloud infer_cloud(const PointCloud& cloud, const MotionEstimate& motion,
                       double target_time);

/// infer_cloud with the motion estimated from odometry over the (possibly
/// negative) interval between the cloud stamp and `target_time`.
PointCloud interpolate_cloud(const PointCloud& cloud,
                             const std::vector<OdometrySample>& odometry,
                             double target_time,
                             const RigidTransform& body_to_sensor =
                                 RigidTransform::identity());

}  // namespace tscalib

#endif  // TSCALIB_POSE_ESTIMATION_HPP
