#ifndef TSCALIB_KD_TREE_HPP
#define TSCALIB_KD_TREE_HPP

#include <cstddef>
#include <vector>

#include "tscalib/geometry.hpp"

namespace tscalib {

/// Static 3-d tree over a cloud's xyz coordinates. Median split, cycling
/// x, y, z. Queries are exact: the reported neighbor matches a brute-force
/// scan in both index and distance, with ties resolved to the smallest
/// point index.
class KdTree {
 public:
  struct Neighbor {
    std::size_t index = 0;
    double squared_distance = 0.0;
  };

  /// Throws CalibError(EmptyCloud) on an empty cloud.
  explicit KdTree(const PointCloud& cloud);
  explicit KdTree(const std::vector<Eigen::Vector3d>& points);

  std::size_t size() const { return points_.size(); }

  Neighbor nearest(const Eigen::Vector3d& query) const;
  /// Up to k nearest neighbors ordered by (distance, index).
  std::vector<Neighbor> knn(const Eigen::Vector3d& query, std::size_t k) const;
  /// Indices of all points within `radius`, ascending.
  std::vector<std::size_t> radius_search(const Eigen::Vector3d& query,
                                         double radius) const;

 private:
  struct Node {
    std::size_t point = 0;
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(std::vector<std::size_t>& order, std::size_t begin,
            std::size_t end, int depth);
  void nearest_impl(int node, const Eigen::Vector3d& query,
                    Neighbor& best) const;
  void knn_impl(int node, const Eigen::Vector3d& query, std::size_t k,
                std::vector<Neighbor>& heap) const;
  void radius_impl(int node, const Eigen::Vector3d& query, double r2,
                   std::vector<std::size_t>& out) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace tscalib

#endif  // TSCALIB_KD_TREE_HPP
