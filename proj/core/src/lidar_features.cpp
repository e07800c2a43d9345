#include "tscalib/lidar_features.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "tscalib/errors.hpp"
#include "tscalib/kd_tree.hpp"

namespace tscalib {

namespace {

double azimuth(const Point3& p) { return std::atan2(p.y, p.x); }

double elevation(const Point3& p) {
  return std::atan2(p.z, std::hypot(p.x, p.y));
}

double azimuth_gap(double a, double b) {
  double d = std::abs(a - b);
  return std::min(d, 2.0 * 3.14159265358979323846 - d);
}

}  // namespace

std::vector<std::vector<Point3>> partition_rings(const PointCloud& cloud,
                                                 int beam_count) {
  if (cloud.empty()) {
    throw CalibError(ErrorCode::EmptyCloud, "cannot partition an empty cloud");
  }
  bool have_rings = std::all_of(cloud.points.begin(), cloud.points.end(),
                                [](const Point3& p) { return p.has_ring(); });
  std::vector<std::vector<Point3>> rings;
  if (have_rings) {
    int max_ring = 0;
    for (const auto& p : cloud.points) max_ring = std::max(max_ring, p.ring);
    rings.resize(static_cast<std::size_t>(max_ring) + 1);
    for (const auto& p : cloud.points) rings[p.ring].push_back(p);
  } else {
    if (beam_count < 1) {
      throw CalibError(ErrorCode::DegenerateConfig, "beam_count must be >= 1");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : cloud.points) {
      double e = elevation(p);
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    double span = hi - lo;
    rings.resize(static_cast<std::size_t>(beam_count));
    for (const auto& p : cloud.points) {
      int bin = span > 0.0 ? static_cast<int>((elevation(p) - lo) / span *
                                              beam_count)
                           : 0;
      bin = std::clamp(bin, 0, beam_count - 1);
      rings[bin].push_back(p);
    }
  }
  for (auto& ring : rings) {
    std::stable_sort(ring.begin(), ring.end(),
                     [](const Point3& a, const Point3& b) {
                       return azimuth(a) < azimuth(b);
                     });
  }
  return rings;
}

PointCloud extract_boundary_features(
    const std::vector<std::vector<Point3>>& rings, double depth_jump,
    double angle_gap, double range_scale_start) {
  PointCloud out;
  out.frame_id = Frame::Lidar;
  for (const auto& ring : rings) {
    const std::size_t n = ring.size();
    if (n < 2) continue;
    std::vector<bool> emit(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      // Rings are circular: the last point neighbors the first.
      std::size_t j = (i + 1) % n;
      const Point3& a = ring[i];
      const Point3& b = ring[j];
      if (azimuth_gap(azimuth(a), azimuth(b)) >= angle_gap) continue;
      double ra = a.range();
      double rb = b.range();
      double near_range = std::min(ra, rb);
      double threshold =
          depth_jump * std::max(1.0, near_range / range_scale_start);
      if (std::abs(ra - rb) > threshold) {
        emit[ra <= rb ? i : j] = true;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (emit[i]) out.points.push_back(ring[i]);
    }
  }
  return out;
}

LineFeatureCloud classify_features(const PointCloud& features,
                                   int neighborhood_k) {
  if (features.empty()) {
    throw CalibError(ErrorCode::EmptyCloud, "no features to classify");
  }
  LineFeatureCloud out;
  out.source_timestamp = features.timestamp;
  out.horizontal.timestamp = features.timestamp;
  out.vertical.timestamp = features.timestamp;
  out.horizontal.frame_id = features.frame_id;
  out.vertical.frame_id = features.frame_id;

  const double cos30 = std::cos(M_PI / 6.0);
  const double sin30 = 0.5;
  KdTree tree(features);
  for (const auto& p : features.points) {
    auto nbrs = tree.knn(p.vec(), static_cast<std::size_t>(neighborhood_k));
    if (nbrs.size() < 3) continue;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& nb : nbrs) mean += features.points[nb.index].vec();
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& nb : nbrs) {
      Eigen::Vector3d d = features.points[nb.index].vec() - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    Eigen::Vector3d dir = es.eigenvectors().col(2);  // principal direction
    double dz = std::abs(dir.normalized().z());
    if (dz > cos30) {
      out.vertical.points.push_back(p);
    } else if (dz < sin30) {
      out.horizontal.points.push_back(p);
    }
  }
  return out;
}

double plane_distance(const Eigen::Vector4d& plane, const Point3& p) {
  return std::abs(plane.head<3>().dot(p.vec()) + plane.w());
}

GroundRemovalResult remove_ground(const PointCloud& cloud,
                                  double sensor_height, double tolerance) {
  GroundRemovalResult result;
  result.cloud.timestamp = cloud.timestamp;
  result.cloud.frame_id = cloud.frame_id;
  if (cloud.empty()) return result;

  // Seed candidates near the expected ground height.
  double band = std::max(3.0 * tolerance, 0.5);
  std::vector<std::size_t> seeds;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (std::abs(cloud.points[i].z + sensor_height) < band) seeds.push_back(i);
  }
  const std::size_t n = cloud.points.size();
  Eigen::Vector4d best_plane = Eigen::Vector4d::Zero();
  std::size_t best_support = 0;
  if (seeds.size() >= 3) {
    std::mt19937_64 rng(9271);
    auto pick = [&](std::size_t m) {
      return seeds[static_cast<std::size_t>(rng() % m)];
    };
    for (int iter = 0; iter < 120; ++iter) {
      std::size_t ia = pick(seeds.size());
      std::size_t ib = pick(seeds.size());
      std::size_t ic = pick(seeds.size());
      if (ia == ib || ib == ic || ia == ic) continue;
      Eigen::Vector3d a = cloud.points[ia].vec();
      Eigen::Vector3d b = cloud.points[ib].vec();
      Eigen::Vector3d c = cloud.points[ic].vec();
      Eigen::Vector3d normal = (b - a).cross(c - a);
      double len = normal.norm();
      if (len < 1e-9) continue;
      normal /= len;
      if (normal.z() < 0.0) normal = -normal;
      // Dominant ground plane is near-horizontal even under vehicle pitch.
      if (normal.z() < 0.85) continue;
      double d = -normal.dot(a);
      Eigen::Vector4d plane(normal.x(), normal.y(), normal.z(), d);
      std::size_t support = 0;
      for (const auto& p : cloud.points) {
        if (plane_distance(plane, p) <= tolerance) ++support;
      }
      if (support > best_support) {
        best_support = support;
        best_plane = plane;
      }
    }
  }

  if (best_support * 5 < n) {  // below 20% support
    result.cloud = cloud;
    result.ground_found = false;
    return result;
  }
  result.ground_found = true;
  result.plane = best_plane;
  result.cloud.points.reserve(n - best_support);
  for (const auto& p : cloud.points) {
    if (plane_distance(best_plane, p) > tolerance) {
      result.cloud.points.push_back(p);
    }
  }
  return result;
}

PointCloud local_map_gps(const std::vector<PointCloud>& clouds,
                         const std::vector<RigidTransform>& poses) {
  if (clouds.size() != 3 || poses.size() != 3) {
    throw CalibError(ErrorCode::PoseMissing,
                     "local mapping needs exactly 3 clouds with poses");
  }
  RigidTransform mid_inv = invert(poses[1]);
  PointCloud out;
  out.timestamp = clouds[1].timestamp;
  out.frame_id = clouds[1].frame_id;
  for (std::size_t i = 0; i < 3; ++i) {
    RigidTransform into_mid = compose(mid_inv, poses[i]);
    for (const auto& p : clouds[i].points) {
      out.points.push_back(apply(into_mid, p));
    }
  }
  return out;
}

PointCloud local_map_ndt(const std::vector<PointCloud>& clouds,
                         const NdtConfig& cfg,
                         const std::vector<RigidTransform>* poses) {
  if (clouds.size() != 3) {
    throw CalibError(ErrorCode::PoseMissing, "local mapping needs 3 clouds");
  }
  PointCloud out;
  out.timestamp = clouds[1].timestamp;
  out.frame_id = clouds[1].frame_id;
  out.points = clouds[1].points;
  for (std::size_t i : {std::size_t{0}, std::size_t{2}}) {
    RigidTransform guess = RigidTransform::identity();
    if (poses) {
      guess = compose(invert((*poses)[1]), (*poses)[i]);
    }
    RegistrationResult reg = ndt_register(clouds[i], clouds[1], cfg, guess);
    if (!reg.converged) {
      if (poses) return local_map_gps(clouds, *poses);
      throw CalibError(ErrorCode::RegistrationDiverged,
                       "NDT local mapping failed and no poses available");
    }
    for (const auto& p : clouds[i].points) {
      out.points.push_back(apply(reg.transform, p));
    }
  }
  return out;
}

std::vector<bool> projected_outlier_mask(const std::vector<PixelCoord>& pixels,
                                         int width, int height,
                                         int min_neighbors) {
  std::vector<std::uint8_t> grid(static_cast<std::size_t>(width) * height, 0);
  for (const auto& p : pixels) {
    if (p.x >= 0 && p.x < width && p.y >= 0 && p.y < height) {
      grid[static_cast<std::size_t>(p.y) * width + p.x] = 1;
    }
  }
  std::vector<bool> keep(pixels.size(), false);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const auto& p = pixels[i];
    if (p.x < 0 || p.x >= width || p.y < 0 || p.y >= height) continue;
    int neighbors = 0;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        int nx = p.x + dx;
        int ny = p.y + dy;
        if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
        neighbors += grid[static_cast<std::size_t>(ny) * width + nx];
      }
    }
    keep[i] = neighbors >= min_neighbors;
  }
  return keep;
}

std::vector<PixelCoord> filter_projected_outliers(
    const std::vector<PixelCoord>& pixels, int width, int height,
    int min_neighbors) {
  std::vector<bool> keep =
      projected_outlier_mask(pixels, width, height, min_neighbors);
  std::vector<PixelCoord> out;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (keep[i]) out.push_back(pixels[i]);
  }
  return out;
}

}  // namespace tscalib
