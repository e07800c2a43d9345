#ifndef TSCALIB_TEMPORAL_SYNC_HPP
#define TSCALIB_TEMPORAL_SYNC_HPP

#include <string>
#include <utility>
#include <vector>

#include "tscalib/geometry.hpp"
#include "tscalib/pose_estimation.hpp"
#include "tscalib/registration.hpp"

namespace tscalib {

struct StreamEntry {
  double timestamp = 0.0;
  std::size_t payload = 0;  // index into caller-owned storage
};

struct SensorStream {
  std::vector<StreamEntry> entries;
  double nominal_rate_hz = 0.0;

  /// Validates strictly increasing timestamps.
  static SensorStream make(std::vector<StreamEntry> entries,
                           double nominal_rate_hz);
};

/// Greedy nearest-timestamp pairing: each entry of the lower-rate stream
/// grabs its closest unused entry of the other, rejected beyond `slop`.
/// Pairs are (index into a, index into b).
std::vector<std::pair<std::size_t, std::size_t>> approximate_time_match(
    const SensorStream& a, const SensorStream& b, double slop);

/// Mean nearest-neighbor distance from candidate points into reference.
double euclid_metric(const PointCloud& candidate, const PointCloud& reference);

/// NDT iteration counts per step size with every other parameter fixed.
std::vector<std::pair<double, double>> ndt_metric(
    const PointCloud& candidate, const PointCloud& reference,
    const std::vector<double>& step_sizes, NdtConfig base);

/// ICP fitness per iteration cap.
std::vector<std::pair<int, double>> icp_metric(
    const PointCloud& candidate, const PointCloud& reference,
    const std::vector<int>& iteration_caps, IcpConfig base);

struct MetricReport {
  std::string method_name;
  double euclid_score = 0.0;  // meters
  std::vector<std::pair<double, double>> ndt_iterations;  // step size, mean
  std::vector<std::pair<int, double>> icp_scores;         // cap, mean fitness
  int frames = 0;
};

struct TemporalComparisonInput {
  SensorStream scan_stream;
  SensorStream image_stream;
  const std::vector<PointCloud>* scans = nullptr;       // by scan payload
  const std::vector<PointCloud>* references = nullptr;  // by image payload
  std::vector<OdometrySample> odometry;
  /// Known content lag of scans behind their stamps (the calibrated e_t).
  double sensor_time_offset = 0.0;
  RigidTransform body_to_sensor;
};

struct TemporalComparisonConfig {
  std::vector<double> ndt_step_sizes{0.01, 0.05};
  std::vector<int> icp_iteration_caps{1, 5};
  NdtConfig ndt;
  IcpConfig icp;
  /// Negative means half the lower nominal period.
  double slop = -1.0;
  bool run_ndt = true;
  bool run_icp = true;
};

/// Reports for infer_cloud, infer_cloud_interpolation and filter_cloud,
/// in that order.
std::vector<MetricReport> run_temporal_comparison(
    const TemporalComparisonInput& input, const TemporalComparisonConfig& cfg);

}  // namespace tscalib

#endif  // TSCALIB_TEMPORAL_SYNC_HPP
