#ifndef TSCALIB_SYNTHETIC_SCENE_HPP
#define TSCALIB_SYNTHETIC_SCENE_HPP

#include <cstdint>
#include <vector>

#include "tscalib/geometry.hpp"
#include "tscalib/image_features.hpp"
#include "tscalib/pose_estimation.hpp"

namespace tscalib {

/// Oriented box with a constant velocity; the workhorse of synthetic
/// scenes (walls, poles, planks and moving targets are all boxes).
struct SceneBox {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // world, at t = 0
  Eigen::Vector3d size = Eigen::Vector3d::Ones();    // full extents
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();

  bool dynamic() const { return velocity.squaredNorm() > 0.0; }
};

struct SyntheticSceneConfig {
  std::uint64_t seed = 1;
  double scan_rate_hz = 5.0;
  double image_rate_hz = 10.0;
  double odom_rate_hz = 100.0;
  /// Image stamps start at this phase so scan and image clocks are not
  /// locked to each other.
  double image_phase_s = 0.0;
  /// Scan content time minus scan stamp: the temporal miscalibration the
  /// toolkit measures and compensates.
  double sensor_time_offset_s = 0.0;
  double platform_speed_mps = 0.0;
  double platform_yaw_rate_rps = 0.0;
  int beam_count = 64;
  int azimuth_steps = 900;
  double elevation_min_deg = -24.0;
  double elevation_max_deg = 4.0;
  double max_range_m = 80.0;
  double noise_sigma_m = 0.0;
  double sensor_height_m = 1.7;
  bool include_ground = true;
  double ground_half_extent_m = 80.0;
  RigidTransform true_extrinsic;  // LiDAR -> camera
  CameraIntrinsics intrinsics{700.0, 700.0, 620.0, 190.0, 1242, 375};
  std::vector<SceneBox> boxes;
};

struct SyntheticScan {
  double stamp = 0.0;
  double content_time = 0.0;  // stamp + sensor_time_offset
  PointCloud cloud;           // LiDAR frame, timestamp = stamp
  std::vector<std::uint8_t> dynamic_labels;  // 1 per point on a moving box
};

struct SyntheticImage {
  double stamp = 0.0;
  GrayImage mask;  // 255 on structure edges
};

struct SyntheticScene {
  SyntheticSceneConfig config;
  std::vector<SyntheticScan> scans;
  std::vector<SyntheticImage> images;
  std::vector<OdometrySample> odometry;
  std::vector<ImuSample> imu;
  /// Ground-truth clouds rendered exactly at the image stamps.
  std::vector<PointCloud> reference_clouds;
  RigidTransform body_to_lidar;
};

/// Body pose (origin on the ground under the sensor) at time t for the
/// constant-twist platform trajectory.
RigidTransform body_pose(const SyntheticSceneConfig& cfg, double t);
RigidTransform lidar_pose(const SyntheticSceneConfig& cfg, double t);

/// Ray-cast one scan with the sensor placed at its pose at content_time.
/// `salt` decouples the noise stream from other renders of the same scene.
PointCloud render_scan(const SyntheticSceneConfig& cfg, double content_time,
                       std::uint64_t salt,
                       std::vector<std::uint8_t>* dynamic_labels = nullptr);

/// Ideal line mask of every box edge projected through the true camera at
/// time t. The image pipeline ingests this directly via the line-mask hook.
GrayImage render_image_mask(const SyntheticSceneConfig& cfg, double t);

/// Full deterministic scene: streams, ground truth and labels.
SyntheticScene generate_scene(const SyntheticSceneConfig& cfg,
                              double duration_s);

/// Canned scene configurations used by tests and the CLI demos.
SyntheticSceneConfig make_line_rich_scene(std::uint64_t seed);
SyntheticSceneConfig make_metric_scene(std::uint64_t seed);
SyntheticSceneConfig make_dynamic_scene(std::uint64_t seed,
                                        double box_speed_mps);

/// Deterministic uniform / gaussian helpers (Box-Muller over a seeded
/// mt19937_64) so generated bytes do not depend on the standard library's
/// distribution internals.
double uniform_unit(std::uint64_t& state);

class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed);
  double uniform();              // [0, 1)
  double uniform(double lo, double hi);
  double gaussian();             // standard normal
 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tscalib

#endif  // TSCALIB_SYNTHETIC_SCENE_HPP
