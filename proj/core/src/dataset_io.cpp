#include "tscalib/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "tscalib/errors.hpp"

namespace tscalib {

namespace fs = std::filesystem;

namespace {

constexpr double kEarthRadius = 6378137.0;  // meters

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CalibError(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_floats(const std::string& text) {
  std::vector<double> out;
  std::istringstream ss(text);
  double v;
  while (ss >> v) out.push_back(v);
  return out;
}

std::string frame_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%010d", index);
  return buf;
}

}  // namespace

PointCloud read_scan(const fs::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) {
    throw CalibError(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::streamsize size = in.tellg();
  if (size % 16 != 0) {
    throw CalibError(ErrorCode::MalformedFile,
                     path.string() + ": size not a multiple of 16");
  }
  in.seekg(0);
  PointCloud cloud;
  cloud.frame_id = Frame::Lidar;
  std::size_t n = static_cast<std::size_t>(size) / 16;
  cloud.points.reserve(n);
  std::vector<float> buf(4 * n);
  if (n > 0) {
    in.read(reinterpret_cast<char*>(buf.data()), size);
    if (!in) {
      throw CalibError(ErrorCode::IoError, "short read: " + path.string());
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    cloud.points.emplace_back(buf[4 * i], buf[4 * i + 1], buf[4 * i + 2],
                              buf[4 * i + 3]);
  }
  return cloud;
}

void write_scan(const fs::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw CalibError(ErrorCode::IoError, "cannot create " + path.string());
  }
  std::vector<float> buf;
  buf.reserve(cloud.points.size() * 4);
  for (const auto& p : cloud.points) {
    buf.push_back(static_cast<float>(p.x));
    buf.push_back(static_cast<float>(p.y));
    buf.push_back(static_cast<float>(p.z));
    buf.push_back(static_cast<float>(p.intensity));
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

CalibrationFile read_calibration(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::map<std::string, std::vector<double>> entries;
  std::string line;
  while (std::getline(in, line)) {
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = line.substr(0, colon);
    entries[key] = parse_floats(line.substr(colon + 1));
  }

  auto find_any = [&](std::initializer_list<const char*> keys)
      -> const std::vector<double>* {
    for (const char* k : keys) {
      auto it = entries.find(k);
      if (it != entries.end()) return &it->second;
    }
    return nullptr;
  };

  CalibrationFile calib;
  const auto* proj = find_any({"P2", "P_rect_02"});
  if (!proj || proj->size() < 12) {
    throw CalibError(ErrorCode::MissingKey, "P2 / P_rect_02");
  }
  calib.intrinsics.fx = (*proj)[0];
  calib.intrinsics.cx = (*proj)[2];
  calib.intrinsics.fy = (*proj)[5];
  calib.intrinsics.cy = (*proj)[6];

  const auto* size = find_any({"S2", "S_rect_02"});
  if (size && size->size() >= 2) {
    calib.intrinsics.width = static_cast<int>(std::lround((*size)[0]));
    calib.intrinsics.height = static_cast<int>(std::lround((*size)[1]));
  } else {
    calib.intrinsics.width = 1242;
    calib.intrinsics.height = 375;
  }

  const auto* rect = find_any({"R0_rect", "R_rect_00"});
  if (rect && rect->size() >= 9) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        calib.rectification(r, c) = (*rect)[3 * r + c];
  }

  const auto* tr = find_any({"Tr_velo_to_cam", "Tr"});
  if (tr && tr->size() >= 12) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c)
        calib.velo_to_cam.rotation(r, c) = (*tr)[4 * r + c];
      calib.velo_to_cam.translation(r) = (*tr)[4 * r + 3];
    }
  } else {
    const auto* rot = find_any({"R"});
    const auto* t = find_any({"T"});
    if (!rot || rot->size() < 9 || !t || t->size() < 3) {
      throw CalibError(ErrorCode::MissingKey, "Tr_velo_to_cam (or R + T)");
    }
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        calib.velo_to_cam.rotation(r, c) = (*rot)[3 * r + c];
    for (int r = 0; r < 3; ++r) calib.velo_to_cam.translation(r) = (*t)[r];
  }
  if (calib.velo_to_cam.orthonormality_defect() > 1e-6) {
    throw CalibError(ErrorCode::ParseError,
                     "Tr_velo_to_cam rotation is not orthonormal");
  }
  calib.extrinsic = compose(RigidTransform::from_rotation(calib.rectification),
                            calib.velo_to_cam);
  return calib;
}

void write_calibration(const fs::path& path, const CalibrationFile& calib) {
  std::ofstream out(path);
  if (!out) {
    throw CalibError(ErrorCode::IoError, "cannot create " + path.string());
  }
  out.precision(17);
  out << "P2:";
  const auto& k = calib.intrinsics;
  double p[12] = {k.fx, 0, k.cx, 0, 0, k.fy, k.cy, 0, 0, 0, 1, 0};
  for (double v : p) out << ' ' << v;
  out << "\nS2: " << k.width << ' ' << k.height << "\nR0_rect:";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out << ' ' << calib.rectification(r, c);
  out << "\nTr_velo_to_cam:";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out << ' ' << calib.velo_to_cam.rotation(r, c);
    out << ' ' << calib.velo_to_cam.translation(r);
  }
  out << '\n';
}

std::vector<double> read_timestamps(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // KITTI datetime: "2011-09-26 13:02:25.594360375".
    if (line.find(':') != std::string::npos &&
        line.find('-') != std::string::npos) {
      auto space = line.find(' ');
      std::string clock = line.substr(space + 1);
      int hh = 0, mm = 0;
      double ss = 0.0;
      if (std::sscanf(clock.c_str(), "%d:%d:%lf", &hh, &mm, &ss) != 3) {
        throw CalibError(ErrorCode::ParseError, "bad timestamp: " + line);
      }
      out.push_back(hh * 3600.0 + mm * 60.0 + ss);
    } else {
      try {
        out.push_back(std::stod(line));
      } catch (const std::exception&) {
        throw CalibError(ErrorCode::ParseError, "bad timestamp: " + line);
      }
    }
  }
  return out;
}

OdometryData read_odometry(const fs::path& oxts_dir) {
  fs::path data_dir = oxts_dir / "data";
  fs::path ts_path = oxts_dir / "timestamps.txt";
  if (!fs::exists(data_dir) || !fs::exists(ts_path)) {
    throw CalibError(ErrorCode::IoError,
                     "oxts layout missing under " + oxts_dir.string());
  }
  std::vector<double> stamps = read_timestamps(ts_path);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(data_dir)) {
    if (entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.size() != stamps.size()) {
    throw CalibError(ErrorCode::TimestampMismatch,
                     "oxts data/timestamps count mismatch");
  }
  for (std::size_t i = 1; i < stamps.size(); ++i) {
    if (stamps[i] <= stamps[i - 1]) {
      throw CalibError(ErrorCode::TimestampMismatch,
                       "oxts timestamps not strictly increasing");
    }
  }

  OdometryData out;
  double lat0 = 0.0, lon0 = 0.0, alt0 = 0.0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::vector<double> v = parse_floats(read_file(files[i]));
    if (v.size() < 23) {
      throw CalibError(ErrorCode::ParseError,
                       files[i].string() + ": expected 23+ oxts fields");
    }
    if (i == 0) {
      lat0 = v[0];
      lon0 = v[1];
      alt0 = v[2];
    }
    OdometrySample odo;
    odo.timestamp = stamps[i];
    odo.position =
        Eigen::Vector3d(deg2rad(v[1] - lon0) * kEarthRadius *
                            std::cos(deg2rad(lat0)),
                        deg2rad(v[0] - lat0) * kEarthRadius, v[2] - alt0);
    odo.orientation = rotation_z(v[5]) * rotation_y(v[4]) * rotation_x(v[3]);
    odo.linear_velocity = Eigen::Vector3d(v[8], v[9], v[10]);   // vf vl vu
    odo.angular_velocity = Eigen::Vector3d(v[20], v[21], v[22]);  // wf wl wu
    out.odometry.push_back(odo);

    ImuSample imu;
    imu.timestamp = stamps[i];
    imu.linear_acceleration = Eigen::Vector3d(v[14], v[15], v[16]);  // af al au
    imu.angular_velocity = Eigen::Vector3d(v[20], v[21], v[22]);
    out.imu.push_back(imu);
  }
  return out;
}

namespace {

void write_oxts_frame(const fs::path& path, const OdometrySample& odo,
                      const ImuSample& imu, double lat0, double lon0) {
  std::ofstream out(path);
  out.precision(17);
  double lat = lat0 + rad2deg(odo.position.y() / kEarthRadius);
  double lon = lon0 + rad2deg(odo.position.x() /
                              (kEarthRadius * std::cos(deg2rad(lat0))));
  EulerDecomposition euler =
      transform_to_euler(RigidTransform::from_rotation(odo.orientation));
  double fields[23] = {lat,
                       lon,
                       odo.position.z(),
                       deg2rad(euler.pose.roll),
                       deg2rad(euler.pose.pitch),
                       deg2rad(euler.pose.yaw),
                       0,
                       0,
                       odo.linear_velocity.x(),
                       odo.linear_velocity.y(),
                       odo.linear_velocity.z(),
                       0,
                       0,
                       0,
                       imu.linear_acceleration.x(),
                       imu.linear_acceleration.y(),
                       imu.linear_acceleration.z(),
                       0,
                       0,
                       0,
                       imu.angular_velocity.x(),
                       imu.angular_velocity.y(),
                       imu.angular_velocity.z()};
  for (int i = 0; i < 23; ++i) {
    if (i) out << ' ';
    out << fields[i];
  }
  out << '\n';
}

}  // namespace

GrayImage read_pgm(const fs::path& path) {
  std::string data = read_file(path);
  std::istringstream in(data);
  std::string magic;
  in >> magic;
  if (magic != "P5") {
    throw CalibError(ErrorCode::MalformedFile, path.string() + ": not P5");
  }
  int w = 0, h = 0, maxval = 0;
  in >> w >> h >> maxval;
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw CalibError(ErrorCode::MalformedFile, path.string() + ": header");
  }
  in.get();  // single whitespace after maxval
  GrayImage img = GrayImage::zeros(w, h);
  std::size_t need = static_cast<std::size_t>(w) * h;
  std::size_t offset = static_cast<std::size_t>(in.tellg());
  if (data.size() - offset < need) {
    throw CalibError(ErrorCode::MalformedFile, path.string() + ": truncated");
  }
  std::memcpy(img.values.data(), data.data() + offset, need);
  return img;
}

void write_pgm(const fs::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw CalibError(ErrorCode::IoError, "cannot create " + path.string());
  }
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.values.data()),
            static_cast<std::streamsize>(img.values.size()));
}

ColorImage read_ppm(const fs::path& path) {
  std::string data = read_file(path);
  std::istringstream in(data);
  std::string magic;
  in >> magic;
  if (magic != "P6") {
    throw CalibError(ErrorCode::MalformedFile, path.string() + ": not P6");
  }
  int w = 0, h = 0, maxval = 0;
  in >> w >> h >> maxval;
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw CalibError(ErrorCode::MalformedFile, path.string() + ": header");
  }
  in.get();
  ColorImage img;
  img.width = w;
  img.height = h;
  std::size_t need = static_cast<std::size_t>(w) * h * 3;
  std::size_t offset = static_cast<std::size_t>(in.tellg());
  if (data.size() - offset < need) {
    throw CalibError(ErrorCode::MalformedFile, path.string() + ": truncated");
  }
  img.values.resize(need);
  std::memcpy(img.values.data(), data.data() + offset, need);
  return img;
}

GrayImage read_image(const fs::path& path) {
  if (path.extension() == ".ppm") {
    return to_grayscale(read_ppm(path));
  }
  return read_pgm(path);
}

void write_graymap_pgm(const fs::path& path, const GrayMap& map) {
  GrayImage img;
  img.width = map.width;
  img.height = map.height;
  img.values = map.values;
  write_pgm(path, img);
}

namespace {

struct KeyValueFile {
  std::map<std::string, std::string> scalars;
  std::vector<std::string> boxes;
};

KeyValueFile parse_key_values(const fs::path& path) {
  std::istringstream in(read_file(path));
  KeyValueFile out;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "box") {
      out.boxes.push_back(value);
    } else {
      out.scalars[key] = value;
    }
  }
  return out;
}

}  // namespace

SyntheticSceneConfig read_scene_config(const fs::path& path) {
  KeyValueFile kv = parse_key_values(path);
  SyntheticSceneConfig cfg;
  auto preset = kv.scalars.find("preset");
  if (preset != kv.scalars.end()) {
    std::uint64_t seed = 1;
    auto s = kv.scalars.find("seed");
    if (s != kv.scalars.end()) seed = std::stoull(s->second);
    if (preset->second == "line_rich") cfg = make_line_rich_scene(seed);
    else if (preset->second == "metric") cfg = make_metric_scene(seed);
    else if (preset->second == "dynamic") cfg = make_dynamic_scene(seed, 2.0);
    else throw CalibError(ErrorCode::ParseError,
                          "unknown preset " + preset->second);
  }

  auto get = [&](const char* key, auto& field) {
    auto it = kv.scalars.find(key);
    if (it == kv.scalars.end()) return;
    std::istringstream ss(it->second);
    ss >> field;
  };
  get("seed", cfg.seed);
  get("scan_rate_hz", cfg.scan_rate_hz);
  get("image_rate_hz", cfg.image_rate_hz);
  get("odom_rate_hz", cfg.odom_rate_hz);
  get("image_phase_s", cfg.image_phase_s);
  get("sensor_time_offset_s", cfg.sensor_time_offset_s);
  get("platform_speed_mps", cfg.platform_speed_mps);
  get("platform_yaw_rate_rps", cfg.platform_yaw_rate_rps);
  get("beam_count", cfg.beam_count);
  get("azimuth_steps", cfg.azimuth_steps);
  get("elevation_min_deg", cfg.elevation_min_deg);
  get("elevation_max_deg", cfg.elevation_max_deg);
  get("max_range_m", cfg.max_range_m);
  get("noise_sigma_m", cfg.noise_sigma_m);
  get("sensor_height_m", cfg.sensor_height_m);
  int ground = cfg.include_ground ? 1 : 0;
  get("include_ground", ground);
  cfg.include_ground = ground != 0;
  get("fx", cfg.intrinsics.fx);
  get("fy", cfg.intrinsics.fy);
  get("cx", cfg.intrinsics.cx);
  get("cy", cfg.intrinsics.cy);
  get("image_width", cfg.intrinsics.width);
  get("image_height", cfg.intrinsics.height);

  auto ext = kv.scalars.find("extrinsic");
  if (ext != kv.scalars.end()) {
    std::vector<double> v = parse_floats(ext->second);
    if (v.size() != 12) {
      throw CalibError(ErrorCode::ParseError, "extrinsic needs 12 floats");
    }
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c)
        cfg.true_extrinsic.rotation(r, c) = v[4 * r + c];
      cfg.true_extrinsic.translation(r) = v[4 * r + 3];
    }
  }

  if (!kv.boxes.empty() && preset == kv.scalars.end()) cfg.boxes.clear();
  for (const std::string& spec : kv.boxes) {
    std::vector<double> v = parse_floats(spec);
    if (v.size() != 6 && v.size() != 9 && v.size() != 12) {
      throw CalibError(ErrorCode::ParseError,
                       "box needs 6, 9 or 12 values: " + spec);
    }
    SceneBox box;
    box.center = Eigen::Vector3d(v[0], v[1], v[2]);
    box.size = Eigen::Vector3d(v[3], v[4], v[5]);
    if (v.size() >= 9) {
      box.rotation = rotation_z(deg2rad(v[8])) * rotation_y(deg2rad(v[7])) *
                     rotation_x(deg2rad(v[6]));
    }
    if (v.size() == 12) {
      box.velocity = Eigen::Vector3d(v[9], v[10], v[11]);
    }
    cfg.boxes.push_back(box);
  }
  return cfg;
}

double scene_duration_from_file(const fs::path& path) {
  KeyValueFile kv = parse_key_values(path);
  auto it = kv.scalars.find("duration_s");
  if (it == kv.scalars.end()) return 4.0;
  return std::stod(it->second);
}

void write_scene_config(const fs::path& path, const SyntheticSceneConfig& cfg,
                        double duration_s) {
  std::ofstream out(path);
  if (!out) {
    throw CalibError(ErrorCode::IoError, "cannot create " + path.string());
  }
  out.precision(17);
  out << "duration_s = " << duration_s << "\nseed = " << cfg.seed
      << "\nscan_rate_hz = " << cfg.scan_rate_hz
      << "\nimage_rate_hz = " << cfg.image_rate_hz
      << "\nodom_rate_hz = " << cfg.odom_rate_hz
      << "\nimage_phase_s = " << cfg.image_phase_s
      << "\nsensor_time_offset_s = " << cfg.sensor_time_offset_s
      << "\nplatform_speed_mps = " << cfg.platform_speed_mps
      << "\nplatform_yaw_rate_rps = " << cfg.platform_yaw_rate_rps
      << "\nbeam_count = " << cfg.beam_count
      << "\nazimuth_steps = " << cfg.azimuth_steps
      << "\nelevation_min_deg = " << cfg.elevation_min_deg
      << "\nelevation_max_deg = " << cfg.elevation_max_deg
      << "\nmax_range_m = " << cfg.max_range_m
      << "\nnoise_sigma_m = " << cfg.noise_sigma_m
      << "\nsensor_height_m = " << cfg.sensor_height_m
      << "\ninclude_ground = " << (cfg.include_ground ? 1 : 0)
      << "\nfx = " << cfg.intrinsics.fx << "\nfy = " << cfg.intrinsics.fy
      << "\ncx = " << cfg.intrinsics.cx << "\ncy = " << cfg.intrinsics.cy
      << "\nimage_width = " << cfg.intrinsics.width
      << "\nimage_height = " << cfg.intrinsics.height << "\nextrinsic =";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out << ' ' << cfg.true_extrinsic.rotation(r, c);
    out << ' ' << cfg.true_extrinsic.translation(r);
  }
  out << '\n';
  for (const auto& box : cfg.boxes) {
    EulerDecomposition e =
        transform_to_euler(RigidTransform::from_rotation(box.rotation));
    out << "box = " << box.center.x() << ' ' << box.center.y() << ' '
        << box.center.z() << ' ' << box.size.x() << ' ' << box.size.y() << ' '
        << box.size.z() << ' ' << e.pose.roll << ' ' << e.pose.pitch << ' '
        << e.pose.yaw << ' ' << box.velocity.x() << ' ' << box.velocity.y()
        << ' ' << box.velocity.z() << '\n';
  }
}

namespace {

void write_timestamps(const fs::path& path, const std::vector<double>& ts) {
  std::ofstream out(path);
  out.precision(17);
  for (double t : ts) out << t << '\n';
}

}  // namespace

void write_scene_to_dir(const SyntheticScene& scene, const fs::path& dir) {
  fs::create_directories(dir / "velodyne");
  fs::create_directories(dir / "image");
  fs::create_directories(dir / "oxts" / "data");
  fs::create_directories(dir / "labels");

  std::vector<double> scan_ts;
  for (std::size_t i = 0; i < scene.scans.size(); ++i) {
    const auto& scan = scene.scans[i];
    scan_ts.push_back(scan.stamp);
    write_scan(dir / "velodyne" / (frame_name(static_cast<int>(i)) + ".bin"),
               scan.cloud);
    std::ofstream labels(dir / "labels" /
                         (frame_name(static_cast<int>(i)) + ".txt"));
    for (std::uint8_t l : scan.dynamic_labels) {
      labels << static_cast<int>(l) << '\n';
    }
  }
  write_timestamps(dir / "velodyne" / "timestamps.txt", scan_ts);

  std::vector<double> image_ts;
  for (std::size_t i = 0; i < scene.images.size(); ++i) {
    image_ts.push_back(scene.images[i].stamp);
    write_pgm(dir / "image" / (frame_name(static_cast<int>(i)) + ".pgm"),
              scene.images[i].mask);
  }
  write_timestamps(dir / "image" / "timestamps.txt", image_ts);

  std::vector<double> odo_ts;
  double lat0 = 49.0, lon0 = 8.4;
  for (std::size_t i = 0; i < scene.odometry.size(); ++i) {
    odo_ts.push_back(scene.odometry[i].timestamp);
    write_oxts_frame(
        dir / "oxts" / "data" / (frame_name(static_cast<int>(i)) + ".txt"),
        scene.odometry[i], scene.imu[i], lat0, lon0);
  }
  write_timestamps(dir / "oxts" / "timestamps.txt", odo_ts);

  CalibrationFile calib;
  calib.intrinsics = scene.config.intrinsics;
  calib.velo_to_cam = scene.config.true_extrinsic;
  calib.extrinsic = scene.config.true_extrinsic;
  write_calibration(dir / "calib.txt", calib);

  std::ofstream gt(dir / "ground_truth.txt");
  gt.precision(17);
  gt << "tscalib_ground_truth 1\n";
  gt << "time_offset:";
  gt << ' ' << scene.config.sensor_time_offset_s << '\n';
  gt << "image_is_line_mask: 1\n";
  gt << "beam_count: " << scene.config.beam_count << '\n';
  gt << "extrinsic:";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c)
      gt << ' ' << scene.config.true_extrinsic.rotation(r, c);
    gt << ' ' << scene.config.true_extrinsic.translation(r);
  }
  gt << '\n';
}

Recording load_recording(const fs::path& dir) {
  if (!fs::exists(dir)) {
    throw CalibError(ErrorCode::IoError, dir.string() + " does not exist");
  }
  Recording rec;
  rec.scan_stamps = read_timestamps(dir / "velodyne" / "timestamps.txt");
  for (std::size_t i = 0; i < rec.scan_stamps.size(); ++i) {
    PointCloud cloud =
        read_scan(dir / "velodyne" / (frame_name(static_cast<int>(i)) + ".bin"));
    cloud.timestamp = rec.scan_stamps[i];
    rec.scans.push_back(std::move(cloud));
    fs::path label_path =
        dir / "labels" / (frame_name(static_cast<int>(i)) + ".txt");
    std::vector<std::uint8_t> labels;
    if (fs::exists(label_path)) {
      for (double v : parse_floats(read_file(label_path))) {
        labels.push_back(v != 0.0 ? 1 : 0);
      }
    }
    rec.dynamic_labels.push_back(std::move(labels));
  }

  rec.image_stamps = read_timestamps(dir / "image" / "timestamps.txt");
  for (std::size_t i = 0; i < rec.image_stamps.size(); ++i) {
    fs::path pgm = dir / "image" / (frame_name(static_cast<int>(i)) + ".pgm");
    fs::path ppm = dir / "image" / (frame_name(static_cast<int>(i)) + ".ppm");
    GrayImage img = fs::exists(pgm) ? read_image(pgm) : read_image(ppm);
    img.timestamp = rec.image_stamps[i];
    rec.images.push_back(std::move(img));
  }

  rec.odometry = read_odometry(dir / "oxts");
  rec.calibration = read_calibration(dir / "calib.txt");

  fs::path gt_path = dir / "ground_truth.txt";
  if (fs::exists(gt_path)) {
    std::istringstream in(read_file(gt_path));
    std::string header;
    int version = 0;
    in >> header >> version;
    if (header != "tscalib_ground_truth" || version != 1) {
      throw CalibError(ErrorCode::ParseError,
                       "unsupported ground-truth sidecar version");
    }
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(0, colon);
      std::vector<double> vals = parse_floats(line.substr(colon + 1));
      if (key == "time_offset" && !vals.empty()) {
        rec.sensor_time_offset = vals[0];
      } else if (key == "image_is_line_mask" && !vals.empty()) {
        rec.images_are_line_masks = vals[0] != 0.0;
      } else if (key == "beam_count" && !vals.empty()) {
        rec.beam_count = static_cast<int>(vals[0]);
      } else if (key == "extrinsic" && vals.size() == 12) {
        RigidTransform t;
        for (int r = 0; r < 3; ++r) {
          for (int c = 0; c < 3; ++c) t.rotation(r, c) = vals[4 * r + c];
          t.translation(r) = vals[4 * r + 3];
        }
        rec.true_extrinsic = t;
      }
    }
  }
  return rec;
}

}  // namespace tscalib
