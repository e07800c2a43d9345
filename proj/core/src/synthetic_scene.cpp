#include "tscalib/synthetic_scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tscalib/errors.hpp"

namespace tscalib {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Ray/box intersection in the box frame. Returns the entry distance or
/// a negative value when there is no hit in front of the origin.
double ray_box(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
               const SceneBox& box, double t_now) {
  Eigen::Vector3d center = box.center + box.velocity * t_now;
  Eigen::Vector3d o = box.rotation.transpose() * (origin - center);
  Eigen::Vector3d d = box.rotation.transpose() * dir;
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    double half = 0.5 * box.size[i];
    if (std::abs(d[i]) < 1e-12) {
      if (o[i] < -half || o[i] > half) return -1.0;
      continue;
    }
    double t1 = (-half - o[i]) / d[i];
    double t2 = (half - o[i]) / d[i];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
    if (tmin > tmax) return -1.0;
  }
  if (tmax < 0.0) return -1.0;
  return tmin >= 0.0 ? tmin : tmax;
}

}  // namespace

double uniform_unit(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

NoiseStream::NoiseStream(std::uint64_t seed) : state_(seed) {}

double NoiseStream::uniform() { return uniform_unit(state_); }

double NoiseStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double NoiseStream::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 1e-300);
  double u2 = uniform();
  double mag = std::sqrt(-2.0 * std::log(u1));
  spare_ = mag * std::sin(2.0 * kPi * u2);
  have_spare_ = true;
  return mag * std::cos(2.0 * kPi * u2);
}

RigidTransform body_pose(const SyntheticSceneConfig& cfg, double t) {
  double v = cfg.platform_speed_mps;
  double w = cfg.platform_yaw_rate_rps;
  Eigen::Vector3d pos;
  if (std::abs(w) < 1e-12) {
    pos = Eigen::Vector3d(v * t, 0.0, 0.0);
  } else {
    pos = Eigen::Vector3d(v / w * std::sin(w * t),
                          v / w * (1.0 - std::cos(w * t)), 0.0);
  }
  return {rotation_z(w * t), pos};
}

RigidTransform lidar_pose(const SyntheticSceneConfig& cfg, double t) {
  RigidTransform mount =
      RigidTransform::from_translation({0.0, 0.0, cfg.sensor_height_m});
  return compose(body_pose(cfg, t), mount);
}

PointCloud render_scan(const SyntheticSceneConfig& cfg, double content_time,
                       std::uint64_t salt,
                       std::vector<std::uint8_t>* dynamic_labels) {
  if (cfg.beam_count < 1 || cfg.azimuth_steps < 1) {
    throw CalibError(ErrorCode::DegenerateConfig, "beam/azimuth counts");
  }
  NoiseStream noise(cfg.seed * 0x9e3779b97f4a7c15ull + salt);
  RigidTransform pose = lidar_pose(cfg, content_time);
  Eigen::Vector3d origin = pose.translation;

  PointCloud cloud;
  cloud.frame_id = Frame::Lidar;
  cloud.timestamp = content_time;
  if (dynamic_labels) dynamic_labels->clear();

  double elev_lo = deg2rad(cfg.elevation_min_deg);
  double elev_hi = deg2rad(cfg.elevation_max_deg);
  for (int beam = 0; beam < cfg.beam_count; ++beam) {
    double elev = cfg.beam_count > 1
                      ? elev_lo + (elev_hi - elev_lo) * beam /
                                      (cfg.beam_count - 1)
                      : elev_lo;
    double ce = std::cos(elev);
    double se = std::sin(elev);
    for (int step = 0; step < cfg.azimuth_steps; ++step) {
      double az = 2.0 * kPi * step / cfg.azimuth_steps - kPi;
      Eigen::Vector3d dir_sensor(ce * std::cos(az), ce * std::sin(az), se);
      Eigen::Vector3d dir = pose.rotation * dir_sensor;

      double best = std::numeric_limits<double>::infinity();
      int hit_box = -1;
      if (cfg.include_ground && dir.z() < -1e-9) {
        double t = -origin.z() / dir.z();
        Eigen::Vector3d hit = origin + t * dir;
        if (t > 0.0 && std::abs(hit.x()) <= cfg.ground_half_extent_m &&
            std::abs(hit.y()) <= cfg.ground_half_extent_m) {
          best = t;
        }
      }
      for (std::size_t b = 0; b < cfg.boxes.size(); ++b) {
        double t = ray_box(origin, dir, cfg.boxes[b], content_time);
        if (t > 1e-6 && t < best) {
          best = t;
          hit_box = static_cast<int>(b);
        }
      }
      if (!(best < cfg.max_range_m)) continue;
      double range = best;
      if (cfg.noise_sigma_m > 0.0) {
        range += cfg.noise_sigma_m * noise.gaussian();
      }
      double intensity =
          hit_box >= 0 ? 0.2 + 0.6 * ((hit_box % 7) / 7.0) : 0.1;
      cloud.points.emplace_back(Point3(dir_sensor * range, intensity, beam));
      if (dynamic_labels) {
        bool dyn = hit_box >= 0 && cfg.boxes[hit_box].dynamic();
        dynamic_labels->push_back(dyn ? 1 : 0);
      }
    }
  }
  return cloud;
}

GrayImage render_image_mask(const SyntheticSceneConfig& cfg, double t) {
  GrayImage mask = GrayImage::zeros(cfg.intrinsics.width, cfg.intrinsics.height);
  mask.timestamp = t;
  RigidTransform cam_pose =
      compose(lidar_pose(cfg, t), invert(cfg.true_extrinsic));
  RigidTransform world_to_cam = invert(cam_pose);

  auto draw_edge = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    double len = (b - a).norm();
    int samples = std::max(2, static_cast<int>(len / 0.005));
    for (int i = 0; i <= samples; ++i) {
      Eigen::Vector3d w = a + (b - a) * (static_cast<double>(i) / samples);
      Eigen::Vector3d c = apply(world_to_cam, w);
      auto uv = project(cfg.intrinsics, Point3(c));
      if (!uv) continue;
      int x = static_cast<int>(std::lround(uv->x()));
      int y = static_cast<int>(std::lround(uv->y()));
      if (mask.in_bounds(x, y)) mask.set(x, y, 255);
    }
  };

  for (const auto& box : cfg.boxes) {
    Eigen::Vector3d center = box.center + box.velocity * t;
    Eigen::Vector3d h = 0.5 * box.size;
    std::array<Eigen::Vector3d, 8> corners;
    int idx = 0;
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
        for (int sz : {-1, 1}) {
          corners[idx++] = center + box.rotation * Eigen::Vector3d(
                                                        sx * h.x(), sy * h.y(),
                                                        sz * h.z());
        }
    static constexpr int kEdges[12][2] = {{0, 1}, {2, 3}, {4, 5}, {6, 7},
                                          {0, 2}, {1, 3}, {4, 6}, {5, 7},
                                          {0, 4}, {1, 5}, {2, 6}, {3, 7}};
    for (const auto& e : kEdges) {
      draw_edge(corners[e[0]], corners[e[1]]);
    }
  }
  return mask;
}

SyntheticScene generate_scene(const SyntheticSceneConfig& cfg,
                              double duration_s) {
  if (cfg.scan_rate_hz <= 0.0 || cfg.image_rate_hz <= 0.0 ||
      cfg.odom_rate_hz <= 0.0 || cfg.noise_sigma_m < 0.0 || duration_s < 0.0) {
    throw CalibError(ErrorCode::DegenerateConfig, "rates/noise/duration");
  }
  SyntheticScene scene;
  scene.config = cfg;
  scene.body_to_lidar =
      RigidTransform::from_translation({0.0, 0.0, cfg.sensor_height_m});

  int scan_count = static_cast<int>(std::floor(duration_s * cfg.scan_rate_hz));
  for (int k = 0; k < scan_count; ++k) {
    SyntheticScan scan;
    scan.stamp = k / cfg.scan_rate_hz;
    scan.content_time = scan.stamp + cfg.sensor_time_offset_s;
    scan.cloud = render_scan(cfg, scan.content_time,
                             0x100000ull + static_cast<std::uint64_t>(k),
                             &scan.dynamic_labels);
    scan.cloud.timestamp = scan.stamp;
    scene.scans.push_back(std::move(scan));
  }

  int image_count =
      static_cast<int>(std::floor(duration_s * cfg.image_rate_hz));
  for (int j = 0; j < image_count; ++j) {
    SyntheticImage img;
    img.stamp = cfg.image_phase_s + j / cfg.image_rate_hz;
    img.mask = render_image_mask(cfg, img.stamp);
    scene.images.push_back(std::move(img));

    PointCloud ref = render_scan(cfg, scene.images.back().stamp,
                                 0x200000ull + static_cast<std::uint64_t>(j),
                                 nullptr);
    ref.timestamp = scene.images.back().stamp;
    scene.reference_clouds.push_back(std::move(ref));
  }

  // Odometry and IMU cover the content window with margin on both sides.
  double margin = 0.5 + std::abs(cfg.sensor_time_offset_s);
  double t0 = -margin;
  double t1 = duration_s + margin;
  int odom_count =
      static_cast<int>(std::ceil((t1 - t0) * cfg.odom_rate_hz)) + 1;
  double v = cfg.platform_speed_mps;
  double w = cfg.platform_yaw_rate_rps;
  for (int i = 0; i < odom_count; ++i) {
    double t = t0 + i / cfg.odom_rate_hz;
    RigidTransform pose = body_pose(cfg, t);
    OdometrySample odo;
    odo.timestamp = t;
    odo.position = pose.translation;
    odo.orientation = pose.rotation;
    odo.linear_velocity = Eigen::Vector3d(v, 0.0, 0.0);
    odo.angular_velocity = Eigen::Vector3d(0.0, 0.0, w);
    scene.odometry.push_back(odo);

    ImuSample imu;
    imu.timestamp = t;
    imu.linear_acceleration = Eigen::Vector3d(0.0, v * w, 0.0);
    imu.angular_velocity = Eigen::Vector3d(0.0, 0.0, w);
    scene.imu.push_back(imu);
  }
  return scene;
}

namespace {

RigidTransform default_extrinsic() {
  // LiDAR x,y,z (forward,left,up) to camera x,y,z (right,down,forward).
  Eigen::Matrix3d r;
  r << 0, -1, 0, 0, 0, -1, 1, 0, 0;
  return {r, Eigen::Vector3d(0.05, -0.08, -0.15)};
}

SceneBox make_box(const Eigen::Vector3d& center, const Eigen::Vector3d& size) {
  SceneBox b;
  b.center = center;
  b.size = size;
  return b;
}

SceneBox make_plank(const Eigen::Vector3d& center, double length,
                    double pitch_deg, double yaw_deg) {
  SceneBox b;
  b.center = center;
  b.size = Eigen::Vector3d(length, 0.25, 0.25);
  b.rotation = rotation_z(deg2rad(yaw_deg)) * rotation_y(deg2rad(pitch_deg));
  return b;
}

}  // namespace

SyntheticSceneConfig make_line_rich_scene(std::uint64_t seed) {
  SyntheticSceneConfig cfg;
  cfg.seed = seed;
  cfg.true_extrinsic = default_extrinsic();
  cfg.noise_sigma_m = 0.01;
  cfg.azimuth_steps = 1800;
  cfg.beam_count = 64;

  NoiseStream rng(seed * 77ull + 5ull);
  auto jitter = [&](double amp) { return rng.uniform(-amp, amp); };

  // Back wall closes the scene so silhouettes always have a far side.
  cfg.boxes.push_back(
      make_box({30.0 + jitter(2.0), 0.0, 2.5}, {0.4, 44.0, 5.0}));
  // Side walls.
  cfg.boxes.push_back(
      make_box({14.0, 12.0 + jitter(1.0), 2.0}, {30.0, 0.4, 4.0}));
  cfg.boxes.push_back(
      make_box({14.0, -12.0 - jitter(1.0), 2.0}, {30.0, 0.4, 4.0}));
  // Poles: strong vertical features.
  for (double x : {8.0, 11.0, 14.5, 18.0, 22.0}) {
    double y = jitter(6.0);
    cfg.boxes.push_back(
        make_box({x + jitter(0.8), y, 1.6}, {0.3, 0.3, 3.2}));
  }
  // Blocks at varied depth.
  cfg.boxes.push_back(
      make_box({12.0 + jitter(1.0), 5.0 + jitter(1.0), 1.0}, {2.0, 2.0, 2.0}));
  cfg.boxes.push_back(
      make_box({16.0 + jitter(1.0), -5.0 + jitter(1.0), 1.25},
               {2.5, 2.0, 2.5}));
  // Pitched planks: shallow diagonal edges classify as horizontal
  // features and pin pitch/roll during the search.
  cfg.boxes.push_back(make_plank({12.0 + jitter(0.5), 2.5, 1.8}, 7.0,
                                 18.0 + jitter(3.0), 8.0));
  cfg.boxes.push_back(make_plank({13.0 + jitter(0.5), -2.5, 1.6}, 7.0,
                                 -16.0 - jitter(3.0), -6.0));
  cfg.boxes.push_back(make_plank({18.0 + jitter(0.5), jitter(2.0), 2.2}, 8.0,
                                 14.0, jitter(10.0)));
  return cfg;
}

SyntheticSceneConfig make_metric_scene(std::uint64_t seed) {
  SyntheticSceneConfig cfg;
  cfg.seed = seed;
  cfg.true_extrinsic = default_extrinsic();
  cfg.platform_speed_mps = 10.0;
  cfg.sensor_time_offset_s = 0.1;
  cfg.image_phase_s = 0.03;
  cfg.noise_sigma_m = 0.02;
  cfg.beam_count = 32;
  cfg.azimuth_steps = 500;
  cfg.ground_half_extent_m = 200.0;

  NoiseStream rng(seed * 131ull + 17ull);
  // Structures strung along the travel corridor so every scan sees walls
  // and blocks regardless of how far the platform has moved.
  for (int i = 0; i < 10; ++i) {
    double x = 8.0 + 9.0 * i;
    cfg.boxes.push_back(make_box(
        {x, 10.0 + rng.uniform(-1.0, 1.0), 2.0}, {4.0, 0.4, 4.0}));
    cfg.boxes.push_back(make_box(
        {x + 4.0, -10.0 - rng.uniform(-1.0, 1.0), 2.0}, {4.0, 0.4, 4.0}));
    cfg.boxes.push_back(make_box(
        {x + 2.0, rng.uniform(-6.0, 6.0), 1.0},
        {1.5, 1.5, 2.0 + rng.uniform(0.0, 1.0)}));
  }
  return cfg;
}

SyntheticSceneConfig make_dynamic_scene(std::uint64_t seed,
                                        double box_speed_mps) {
  SyntheticSceneConfig cfg;
  cfg.seed = seed;
  cfg.true_extrinsic = default_extrinsic();
  cfg.scan_rate_hz = 2.5;  // adjacent scans 0.4 s apart
  cfg.noise_sigma_m = 0.01;
  cfg.beam_count = 48;
  cfg.azimuth_steps = 900;

  NoiseStream rng(seed * 211ull + 3ull);
  cfg.boxes.push_back(make_box({24.0, 0.0, 2.5}, {0.4, 36.0, 5.0}));
  cfg.boxes.push_back(make_box({12.0, 9.0, 2.0}, {24.0, 0.4, 4.0}));
  cfg.boxes.push_back(make_box({12.0, -9.0, 2.0}, {24.0, 0.4, 4.0}));
  for (double x : {7.0, 10.0, 13.0}) {
    cfg.boxes.push_back(
        make_box({x, rng.uniform(3.0, 7.0), 1.5}, {0.4, 0.4, 3.0}));
  }

  // Moving plate facing the sensor, drifting toward it: nearly every
  // visible point displaces by the full per-frame travel.
  SceneBox plate;
  plate.center = Eigen::Vector3d(14.0 + rng.uniform(-1.0, 1.0),
                                 rng.uniform(-3.0, 0.0), 1.2);
  plate.size = Eigen::Vector3d(0.3, 2.4, 1.8);
  plate.velocity = Eigen::Vector3d(-box_speed_mps, 0.0, 0.0);
  cfg.boxes.push_back(plate);
  return cfg;
}

}  // namespace tscalib
