#include "tscalib/pose_estimation.hpp"

#include <algorithm>
#include <cmath>

#include "tscalib/errors.hpp"

namespace tscalib {

namespace {

constexpr double kMaxInterval = 1.0;  // seconds, adjacent-frame sanity bound

void check_interval(double interval) {
  if (!std::isfinite(interval) || std::abs(interval) >= kMaxInterval) {
    throw CalibError(ErrorCode::OutOfRange,
                     "motion interval " + std::to_string(interval) +
                         " outside adjacent-frame bound");
  }
}

// Linear interpolation of body velocities at time t.
std::pair<Eigen::Vector3d, Eigen::Vector3d> velocities_at(
    const std::vector<OdometrySample>& samples, double t) {
  if (samples.empty() || t < samples.front().timestamp ||
      t > samples.back().timestamp) {
    throw CalibError(ErrorCode::OutOfRange,
                     "odometry does not cover t=" + std::to_string(t));
  }
  auto it = std::lower_bound(
      samples.begin(), samples.end(), t,
      [](const OdometrySample& s, double v) { return s.timestamp < v; });
  if (it == samples.begin()) {
    return {it->linear_velocity, it->angular_velocity};
  }
  const OdometrySample& hi = *it;
  const OdometrySample& lo = *(it - 1);
  double span = hi.timestamp - lo.timestamp;
  double a = span > 0.0 ? (t - lo.timestamp) / span : 0.0;
  return {(1.0 - a) * lo.linear_velocity + a * hi.linear_velocity,
          (1.0 - a) * lo.angular_velocity + a * hi.angular_velocity};
}

ImuSample lerp_imu(const ImuSample& lo, const ImuSample& hi, double t) {
  double span = hi.timestamp - lo.timestamp;
  double a = span > 0.0 ? (t - lo.timestamp) / span : 0.0;
  ImuSample out;
  out.timestamp = t;
  out.linear_acceleration =
      (1.0 - a) * lo.linear_acceleration + a * hi.linear_acceleration;
  out.angular_velocity =
      (1.0 - a) * lo.angular_velocity + a * hi.angular_velocity;
  return out;
}

}  // namespace

MotionEstimate make_motion_estimate(const RigidTransform& transform,
                                    double interval, MotionMethod method) {
  check_interval(interval);
  return {transform, interval, method};
}

MotionEstimate estimate_motion_uniform(
    const std::vector<OdometrySample>& samples, double t0, double t1) {
  if (t0 == t1) {
    throw CalibError(ErrorCode::OutOfRange, "t0 == t1");
  }
  check_interval(t1 - t0);
  double lo = std::min(t0, t1);
  double hi = std::max(t0, t1);
  if (samples.empty() || lo < samples.front().timestamp ||
      hi > samples.back().timestamp) {
    throw CalibError(ErrorCode::OutOfRange, "odometry does not bracket [t0, t1]");
  }
  auto [v, w] = velocities_at(samples, 0.5 * (t0 + t1));
  return {se3_exp_twist(v, w, t1 - t0), t1 - t0, MotionMethod::UniformLinear};
}

MotionEstimate preintegrate_imu(const std::vector<ImuSample>& samples,
                                double t0, double t1,
                                const Eigen::Vector3d& initial_velocity,
                                const Eigen::Vector3d& gravity) {
  if (!(t1 > t0)) {
    throw CalibError(ErrorCode::OutOfRange, "preintegration needs t1 > t0");
  }
  check_interval(t1 - t0);
  if (samples.empty() || t0 < samples.front().timestamp ||
      t1 > samples.back().timestamp) {
    throw CalibError(ErrorCode::OutOfRange, "imu does not bracket [t0, t1]");
  }
  int inside = 0;
  for (const auto& s : samples) {
    if (s.timestamp >= t0 && s.timestamp <= t1) ++inside;
  }
  if (inside < 2) {
    throw CalibError(ErrorCode::InsufficientSamples,
                     "fewer than 2 imu samples in window");
  }

  // Resample the window so it starts exactly at t0 and ends exactly at t1.
  std::vector<ImuSample> seq;
  seq.reserve(static_cast<std::size_t>(inside) + 2);
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const ImuSample& a = samples[i];
    const ImuSample& b = samples[i + 1];
    if (a.timestamp <= t0 && t0 < b.timestamp) {
      seq.push_back(lerp_imu(a, b, t0));
    }
    if (a.timestamp > t0 && a.timestamp < t1) {
      if (seq.empty()) seq.push_back(a);
      else if (a.timestamp > seq.back().timestamp) seq.push_back(a);
    }
    if (a.timestamp < t1 && t1 <= b.timestamp) {
      seq.push_back(lerp_imu(a, b, t1));
    }
  }
  if (samples.front().timestamp == t0 &&
      (seq.empty() || seq.front().timestamp != t0)) {
    seq.insert(seq.begin(), samples.front());
  }
  if (samples.back().timestamp == t1 && seq.back().timestamp != t1) {
    seq.push_back(samples.back());
  }

  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();  // body(t) -> body(t0)
  Eigen::Vector3d vel = initial_velocity;             // in body(t0)
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    const ImuSample& a = seq[i];
    const ImuSample& b = seq[i + 1];
    double dt = b.timestamp - a.timestamp;
    if (dt <= 0.0) continue;
    Eigen::Vector3d w_mid = 0.5 * (a.angular_velocity + b.angular_velocity);
    Eigen::Matrix3d rot_mid = rot * so3_exp(w_mid * (0.5 * dt));
    Eigen::Vector3d f_mid =
        0.5 * (a.linear_acceleration + b.linear_acceleration);
    Eigen::Vector3d accel = rot_mid * f_mid + gravity;
    pos += vel * dt + 0.5 * accel * dt * dt;
    vel += accel * dt;
    rot = rot * so3_exp(w_mid * dt);
  }
  return {{rot, pos}, t1 - t0, MotionMethod::ImuPreintegration};
}

MotionEstimate body_to_sensor_motion(const MotionEstimate& body_motion,
                                     const RigidTransform& body_to_sensor) {
  RigidTransform inv_x = invert(body_to_sensor);
  return {compose(inv_x, compose(body_motion.transform, body_to_sensor)),
          body_motion.interval, body_motion.method};
}

RigidTransform compose_total(const RigidTransform& extrinsic,
                             const MotionEstimate& motion) {
  return compose(extrinsic, motion.transform);
}

PointCloud infer_cloud(const PointCloud& cloud, const MotionEstimate& motion,
                       double target_time) {
  if (std::abs((cloud.timestamp - target_time) - motion.interval) > 1e-6) {
    throw CalibError(ErrorCode::IntervalMismatch,
                     "cloud/target gap does not match motion interval");
  }
  PointCloud out = apply(motion.transform, cloud);
  out.timestamp = target_time;
  return out;
}

PointCloud interpolate_cloud(const PointCloud& cloud,
                             const std::vector<OdometrySample>& odometry,
                             double target_time,
                             const RigidTransform& body_to_sensor) {
  if (target_time == cloud.timestamp) {
    PointCloud out = cloud;
    return out;
  }
  MotionEstimate body =
      estimate_motion_uniform(odometry, target_time, cloud.timestamp);
  MotionEstimate sensor = body_to_sensor_motion(body, body_to_sensor);
  return infer_cloud(cloud, sensor, target_time);
}

}  // namespace tscalib
