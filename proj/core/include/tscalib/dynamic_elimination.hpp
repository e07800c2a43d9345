#ifndef TSCALIB_DYNAMIC_ELIMINATION_HPP
#define TSCALIB_DYNAMIC_ELIMINATION_HPP

#include <vector>

#include "tscalib/geometry.hpp"
#include "tscalib/kd_tree.hpp"

namespace tscalib {

struct DynamicFilterConfig {
  double base_threshold = 0.2;  // tau0, meters
  double range_factor = 0.01;   // extra meters of slack per meter of range
  double cluster_tolerance = 0.5;
  int min_cluster_size = 10;
};

/// tau0 + k * r: fixed sensor-noise floor plus a term that grows with
/// range because a fixed angular motion error displaces far points more.
double linear_threshold(double range, const DynamicFilterConfig& cfg);

struct DynamicEliminationResult {
  PointCloud static_points;
  std::vector<PointCloud> dynamic_clusters;
};

/// Splits the motion-predicted cloud into static points and dynamic
/// clusters by nearest-neighbor mismatch against the reference cloud at
/// the same nominal time. Candidates beyond the range-dependent threshold
/// are clustered (single-linkage, cluster_tolerance); clusters below
/// min_cluster_size are reinstated as static.
DynamicEliminationResult eliminate_dynamic(const PointCloud& predicted,
                                           const PointCloud& reference,
                                           const DynamicFilterConfig& cfg);

}  // namespace tscalib

#endif  // TSCALIB_DYNAMIC_ELIMINATION_HPP
