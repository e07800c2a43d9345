#ifndef TSCALIB_DATASET_IO_HPP
#define TSCALIB_DATASET_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tscalib/geometry.hpp"
#include "tscalib/image_features.hpp"
#include "tscalib/pose_estimation.hpp"
#include "tscalib/synthetic_scene.hpp"

namespace tscalib {

/// KITTI velodyne binary scan: little-endian float32 x, y, z, intensity
/// per point, 16 bytes per record.
PointCloud read_scan(const std::filesystem::path& path);
void write_scan(const std::filesystem::path& path, const PointCloud& cloud);

struct CalibrationFile {
  CameraIntrinsics intrinsics;
  Eigen::Matrix3d rectification = Eigen::Matrix3d::Identity();
  RigidTransform velo_to_cam;  // raw Tr_velo_to_cam
  /// rectification * velo_to_cam: the LiDAR -> rectified-camera extrinsic.
  RigidTransform extrinsic;
};

/// KITTI-style key/value calibration text. Accepts P2 or P_rect_02,
/// R0_rect or R_rect_00, Tr_velo_to_cam or an R/T pair, S2 or S_rect_02.
CalibrationFile read_calibration(const std::filesystem::path& path);
void write_calibration(const std::filesystem::path& path,
                       const CalibrationFile& calib);

struct OdometryData {
  std::vector<OdometrySample> odometry;
  std::vector<ImuSample> imu;
};

/// KITTI oxts directory (data/*.txt + timestamps.txt). Geodetic
/// coordinates convert to a local metric frame anchored at the first
/// sample (equirectangular at the anchor latitude).
OdometryData read_odometry(const std::filesystem::path& oxts_dir);

/// Paired list: timestamps may be plain seconds or KITTI datetime rows.
std::vector<double> read_timestamps(const std::filesystem::path& path);

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
ColorImage read_ppm(const std::filesystem::path& path);
/// PGM read directly; PPM converted through the luma transform.
GrayImage read_image(const std::filesystem::path& path);

void write_graymap_pgm(const std::filesystem::path& path, const GrayMap& map);

/// Flat key = value scene description, `box = cx cy cz sx sy sz
/// [roll pitch yaw [vx vy vz]]` per structure, plus `preset = <name>`.
SyntheticSceneConfig read_scene_config(const std::filesystem::path& path);
void write_scene_config(const std::filesystem::path& path,
                        const SyntheticSceneConfig& cfg, double duration_s);
double scene_duration_from_file(const std::filesystem::path& path);

/// On-disk recording in the generated layout (also fits converted KITTI
/// drives): velodyne/, image/, oxts/, calib.txt and the ground-truth
/// sidecar when the recording is synthetic.
struct Recording {
  std::vector<double> scan_stamps;
  std::vector<PointCloud> scans;
  std::vector<double> image_stamps;
  std::vector<GrayImage> images;
  OdometryData odometry;
  CalibrationFile calibration;
  bool images_are_line_masks = false;
  double sensor_time_offset = 0.0;
  int beam_count = 64;
  std::optional<RigidTransform> true_extrinsic;
  std::vector<std::vector<std::uint8_t>> dynamic_labels;  // per scan
};

void write_scene_to_dir(const SyntheticScene& scene,
                        const std::filesystem::path& dir);
Recording load_recording(const std::filesystem::path& dir);

}  // namespace tscalib

#endif  // TSCALIB_DATASET_IO_HPP
