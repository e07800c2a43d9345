#ifndef TSCALIB_LIDAR_FEATURES_HPP
#define TSCALIB_LIDAR_FEATURES_HPP

#include <optional>
#include <vector>

#include "tscalib/geometry.hpp"
#include "tscalib/registration.hpp"

namespace tscalib {

/// Boundary points split by the principal direction of their local
/// neighborhood. The sets are disjoint; ambiguous diagonals are dropped.
struct LineFeatureCloud {
  PointCloud horizontal;
  PointCloud vertical;
  double source_timestamp = 0.0;

  bool empty() const { return horizontal.empty() && vertical.empty(); }
};

enum class LocalMapping { Gps, Ndt, Auto };

struct LidarFeatureConfig {
  int beam_count = 64;
  double depth_jump = 0.5;          // meters
  double range_scale_start = 20.0;  // jump threshold grows linearly beyond
  double angle_gap = 0.05;          // radians; larger azimuth gaps are FOV edges
  int classify_k = 8;
  double sensor_height = 1.73;      // meters above ground
  double ground_tolerance = 0.2;    // meters
  int min_neighbors = 2;            // 8-connected survivors threshold
  LocalMapping local_mapping = LocalMapping::Auto;
};

/// Groups a cloud into per-beam rings sorted by azimuth. Uses the stored
/// ring index when every point has one, otherwise bins by elevation into
/// `beam_count` uniform bins over the observed range.
std::vector<std::vector<Point3>> partition_rings(const PointCloud& cloud,
                                                 int beam_count);

/// Distance-discontinuity boundary features. Emits the nearer point of a
/// consecutive pair whose range jump exceeds the (range-scaled) threshold,
/// skipping pairs separated by more than `angle_gap` of azimuth.
PointCloud extract_boundary_features(
    const std::vector<std::vector<Point3>>& rings, double depth_jump,
    double angle_gap, double range_scale_start = 20.0);

/// Splits features by the principal direction of the k-neighborhood:
/// within 30 degrees of vertical -> vertical, within 30 degrees of the
/// horizontal plane -> horizontal, otherwise discarded.
LineFeatureCloud classify_features(const PointCloud& features,
                                   int neighborhood_k);

struct GroundRemovalResult {
  PointCloud cloud;
  bool ground_found = false;
  /// Plane as (nx, ny, nz, d) with n.p + d = 0; unit normal, nz > 0.
  Eigen::Vector4d plane = Eigen::Vector4d::Zero();
};

/// Removes the dominant ground plane found by seeded 3-point consensus.
/// When no plane reaches 20% support the cloud passes through unchanged
/// with ground_found = false.
GroundRemovalResult remove_ground(const PointCloud& cloud,
                                  double sensor_height, double tolerance);

/// Distance of a point to a (nx,ny,nz,d) plane.
double plane_distance(const Eigen::Vector4d& plane, const Point3& p);

/// Merges three consecutive clouds into the middle frame using known
/// world poses (sensor-to-world).
PointCloud local_map_gps(const std::vector<PointCloud>& clouds,
                         const std::vector<RigidTransform>& poses);

/// Merges three consecutive clouds into the middle frame by NDT
/// registration; falls back to the pose-based merge when registration
/// diverges and poses are available.
PointCloud local_map_ndt(const std::vector<PointCloud>& clouds,
                         const NdtConfig& cfg,
                         const std::vector<RigidTransform>* poses = nullptr);

struct PixelCoord {
  int x = 0;
  int y = 0;
};

/// 8-neighbor support filter over projected feature pixels: a pixel
/// survives iff at least `min_neighbors` of its 8-connected neighbors are
/// also occupied.
std::vector<PixelCoord> filter_projected_outliers(
    const std::vector<PixelCoord>& pixels, int width, int height,
    int min_neighbors = 2);

/// Keep-flags variant used when the caller must map survivors back to the
/// originating 3-d points.
std::vector<bool> projected_outlier_mask(const std::vector<PixelCoord>& pixels,
                                         int width, int height,
                                         int min_neighbors = 2);

}  // namespace tscalib

#endif  // TSCALIB_LIDAR_FEATURES_HPP
