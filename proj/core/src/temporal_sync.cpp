#include "tscalib/temporal_sync.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tscalib/errors.hpp"
#include "tscalib/kd_tree.hpp"

namespace tscalib {

SensorStream SensorStream::make(std::vector<StreamEntry> entries,
                                double nominal_rate_hz) {
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].timestamp <= entries[i - 1].timestamp) {
      throw CalibError(ErrorCode::TimestampMismatch,
                       "stream timestamps must be strictly increasing");
    }
  }
  return {std::move(entries), nominal_rate_hz};
}

std::vector<std::pair<std::size_t, std::size_t>> approximate_time_match(
    const SensorStream& a, const SensorStream& b, double slop) {
  const bool a_is_lower = a.nominal_rate_hz <= b.nominal_rate_hz;
  const SensorStream& lower = a_is_lower ? a : b;
  const SensorStream& other = a_is_lower ? b : a;

  std::vector<bool> used(other.entries.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < lower.entries.size(); ++i) {
    double t = lower.entries[i].timestamp;
    auto it = std::lower_bound(
        other.entries.begin(), other.entries.end(), t,
        [](const StreamEntry& e, double v) { return e.timestamp < v; });
    std::size_t right = static_cast<std::size_t>(it - other.entries.begin());
    // Nearest unused entry on either side of the insertion point.
    std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(right) - 1;
    while (lo >= 0 && used[static_cast<std::size_t>(lo)]) --lo;
    std::size_t hi = right;
    while (hi < other.entries.size() && used[hi]) ++hi;

    double best_dt = std::numeric_limits<double>::infinity();
    std::ptrdiff_t best = -1;
    if (lo >= 0) {
      best_dt = std::abs(t - other.entries[static_cast<std::size_t>(lo)]
                                 .timestamp);
      best = lo;
    }
    if (hi < other.entries.size()) {
      double dt = std::abs(other.entries[hi].timestamp - t);
      if (dt < best_dt) {
        best_dt = dt;
        best = static_cast<std::ptrdiff_t>(hi);
      }
    }
    if (best < 0 || best_dt > slop) continue;
    used[static_cast<std::size_t>(best)] = true;
    std::size_t oi = static_cast<std::size_t>(best);
    pairs.emplace_back(a_is_lower ? i : oi, a_is_lower ? oi : i);
  }
  return pairs;
}

double euclid_metric(const PointCloud& candidate,
                     const PointCloud& reference) {
  if (candidate.empty() || reference.empty()) {
    throw CalibError(ErrorCode::EmptyCloud, "metric needs two nonempty clouds");
  }
  KdTree tree(reference);
  double acc = 0.0;
  for (const auto& p : candidate.points) {
    acc += std::sqrt(tree.nearest(p.vec()).squared_distance);
  }
  return acc / static_cast<double>(candidate.points.size());
}

std::vector<std::pair<double, double>> ndt_metric(
    const PointCloud& candidate, const PointCloud& reference,
    const std::vector<double>& step_sizes, NdtConfig base) {
  std::vector<std::pair<double, double>> out;
  for (double step : step_sizes) {
    NdtConfig cfg = base;
    cfg.step_size = step;
    RegistrationResult reg = ndt_register(candidate, reference, cfg);
    out.emplace_back(step, static_cast<double>(reg.iterations_used));
  }
  return out;
}

std::vector<std::pair<int, double>> icp_metric(
    const PointCloud& candidate, const PointCloud& reference,
    const std::vector<int>& iteration_caps, IcpConfig base) {
  std::vector<std::pair<int, double>> out;
  for (int cap : iteration_caps) {
    IcpConfig cfg = base;
    cfg.max_iterations = cap;
    RegistrationResult reg = icp_register(candidate, reference, cfg);
    out.emplace_back(cap, reg.fitness);
  }
  return out;
}

namespace {

struct Accumulator {
  double euclid = 0.0;
  std::vector<double> ndt;  // per step size
  std::vector<double> icp;  // per cap
  int frames = 0;
};

void accumulate(Accumulator& acc, const PointCloud& candidate,
                const PointCloud& reference,
                const TemporalComparisonConfig& cfg) {
  acc.euclid += euclid_metric(candidate, reference);
  if (cfg.run_ndt) {
    if (acc.ndt.empty()) acc.ndt.assign(cfg.ndt_step_sizes.size(), 0.0);
    auto rows = ndt_metric(candidate, reference, cfg.ndt_step_sizes, cfg.ndt);
    for (std::size_t i = 0; i < rows.size(); ++i) acc.ndt[i] += rows[i].second;
  }
  if (cfg.run_icp) {
    if (acc.icp.empty()) acc.icp.assign(cfg.icp_iteration_caps.size(), 0.0);
    auto rows =
        icp_metric(candidate, reference, cfg.icp_iteration_caps, cfg.icp);
    for (std::size_t i = 0; i < rows.size(); ++i) acc.icp[i] += rows[i].second;
  }
  ++acc.frames;
}

MetricReport finalize(const std::string& name, const Accumulator& acc,
                      const TemporalComparisonConfig& cfg) {
  MetricReport report;
  report.method_name = name;
  report.frames = acc.frames;
  if (acc.frames == 0) return report;
  report.euclid_score = acc.euclid / acc.frames;
  for (std::size_t i = 0; i < acc.ndt.size(); ++i) {
    report.ndt_iterations.emplace_back(cfg.ndt_step_sizes[i],
                                       acc.ndt[i] / acc.frames);
  }
  for (std::size_t i = 0; i < acc.icp.size(); ++i) {
    report.icp_scores.emplace_back(cfg.icp_iteration_caps[i],
                                   acc.icp[i] / acc.frames);
  }
  return report;
}

}  // namespace

std::vector<MetricReport> run_temporal_comparison(
    const TemporalComparisonInput& input,
    const TemporalComparisonConfig& cfg) {
  if (!input.scans || !input.references || input.scan_stream.entries.empty() ||
      input.image_stream.entries.empty() || input.odometry.empty()) {
    throw CalibError(ErrorCode::WindowMismatch, "incomplete comparison input");
  }
  double odo_lo = input.odometry.front().timestamp;
  double odo_hi = input.odometry.back().timestamp;

  double slop = cfg.slop;
  if (slop < 0.0) {
    double lower_rate = std::min(input.scan_stream.nominal_rate_hz,
                                 input.image_stream.nominal_rate_hz);
    slop = 0.5 / lower_rate;
  }

  auto pairs =
      approximate_time_match(input.scan_stream, input.image_stream, slop);
  if (pairs.empty()) {
    throw CalibError(ErrorCode::WindowMismatch, "no matched scan/image pairs");
  }

  Accumulator infer_acc, interp_acc, filter_acc;
  for (auto [si, ii] : pairs) {
    const StreamEntry& scan_entry = input.scan_stream.entries[si];
    const StreamEntry& image_entry = input.image_stream.entries[ii];
    const PointCloud& scan = (*input.scans)[scan_entry.payload];
    const PointCloud& reference = (*input.references)[image_entry.payload];
    double target = image_entry.timestamp;
    double content = scan_entry.timestamp + input.sensor_time_offset;
    if (target < odo_lo || target > odo_hi || content < odo_lo ||
        content > odo_hi) {
      continue;
    }

    // filter_cloud: the raw scan stands in for the cloud at image time.
    accumulate(filter_acc, scan, reference, cfg);

    // infer_cloud: motion-compensate over the known offset.
    MotionEstimate body =
        estimate_motion_uniform(input.odometry, target, content);
    MotionEstimate sensor = body_to_sensor_motion(body, input.body_to_sensor);
    PointCloud content_cloud = scan;
    content_cloud.timestamp = content;
    PointCloud inferred = infer_cloud(content_cloud, sensor, target);
    accumulate(infer_acc, inferred, reference, cfg);
  }

  // Upward interpolation: a cloud for every image stamp from the scan
  // whose content time is nearest.
  for (const StreamEntry& image_entry : input.image_stream.entries) {
    double target = image_entry.timestamp;
    double best_dt = std::numeric_limits<double>::infinity();
    const StreamEntry* best = nullptr;
    for (const StreamEntry& scan_entry : input.scan_stream.entries) {
      double content = scan_entry.timestamp + input.sensor_time_offset;
      double dt = std::abs(content - target);
      if (dt < best_dt) {
        best_dt = dt;
        best = &scan_entry;
      }
    }
    if (!best) continue;
    double content = best->timestamp + input.sensor_time_offset;
    if (target < odo_lo || target > odo_hi || content < odo_lo ||
        content > odo_hi) {
      continue;
    }
    const PointCloud& reference =
        (*input.references)[image_entry.payload];
    PointCloud content_cloud = (*input.scans)[best->payload];
    content_cloud.timestamp = content;
    PointCloud interp = interpolate_cloud(content_cloud, input.odometry,
                                          target, input.body_to_sensor);
    accumulate(interp_acc, interp, reference, cfg);
  }

  if (filter_acc.frames == 0) {
    throw CalibError(ErrorCode::WindowMismatch,
                     "odometry does not cover the matched window");
  }
  return {finalize("infer_cloud", infer_acc, cfg),
          finalize("infer_cloud_interpolation", interp_acc, cfg),
          finalize("filter_cloud", filter_acc, cfg)};
}

}  // namespace tscalib
