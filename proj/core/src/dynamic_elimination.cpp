#include "tscalib/dynamic_elimination.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "tscalib/errors.hpp"

namespace tscalib {

double linear_threshold(double range, const DynamicFilterConfig& cfg) {
  return cfg.base_threshold + cfg.range_factor * range;
}

DynamicEliminationResult eliminate_dynamic(const PointCloud& predicted,
                                           const PointCloud& reference,
                                           const DynamicFilterConfig& cfg) {
  if (predicted.empty() || reference.empty()) {
    throw CalibError(ErrorCode::EmptyCloud,
                     "dynamic elimination needs two nonempty clouds");
  }
  const std::size_t n = predicted.points.size();
  KdTree ref_tree(reference);

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& p = predicted.points[i];
    double d = std::sqrt(ref_tree.nearest(p.vec()).squared_distance);
    if (d > linear_threshold(p.range(), cfg)) {
      candidates.push_back(i);
    }
  }

  DynamicEliminationResult result;
  result.static_points.timestamp = predicted.timestamp;
  result.static_points.frame_id = predicted.frame_id;

  std::vector<bool> dynamic(n, false);
  if (!candidates.empty()) {
    // Single-linkage clustering over the candidate set.
    std::vector<Eigen::Vector3d> cand_pts;
    cand_pts.reserve(candidates.size());
    for (std::size_t idx : candidates) {
      cand_pts.push_back(predicted.points[idx].vec());
    }
    KdTree cand_tree(cand_pts);
    std::vector<int> label(candidates.size(), -1);
    int next_label = 0;
    for (std::size_t seed = 0; seed < candidates.size(); ++seed) {
      if (label[seed] >= 0) continue;
      std::deque<std::size_t> queue{seed};
      label[seed] = next_label;
      while (!queue.empty()) {
        std::size_t cur = queue.front();
        queue.pop_front();
        for (std::size_t nb :
             cand_tree.radius_search(cand_pts[cur], cfg.cluster_tolerance)) {
          if (label[nb] < 0) {
            label[nb] = next_label;
            queue.push_back(nb);
          }
        }
      }
      ++next_label;
    }
    std::vector<std::vector<std::size_t>> clusters(next_label);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      clusters[label[i]].push_back(candidates[i]);
    }
    // Deterministic cluster order: by smallest member index.
    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (const auto& cluster : clusters) {
      if (static_cast<int>(cluster.size()) < cfg.min_cluster_size) continue;
      PointCloud cloud;
      cloud.timestamp = predicted.timestamp;
      cloud.frame_id = predicted.frame_id;
      for (std::size_t idx : cluster) {
        cloud.points.push_back(predicted.points[idx]);
        dynamic[idx] = true;
      }
      result.dynamic_clusters.push_back(std::move(cloud));
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!dynamic[i]) result.static_points.points.push_back(predicted.points[i]);
  }
  return result;
}

}  // namespace tscalib
