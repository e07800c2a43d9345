#include "tscalib/kd_tree.hpp"

#include <algorithm>
#include <numeric>

#include "tscalib/errors.hpp"

namespace tscalib {

namespace {

std::vector<Eigen::Vector3d> to_vectors(const PointCloud& cloud) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.push_back(p.vec());
  return out;
}

bool better(double d2, std::size_t idx, const KdTree::Neighbor& best) {
  return d2 < best.squared_distance ||
         (d2 == best.squared_distance && idx < best.index);
}

}  // namespace

KdTree::KdTree(const PointCloud& cloud) : KdTree(to_vectors(cloud)) {}

KdTree::KdTree(const std::vector<Eigen::Vector3d>& points) : points_(points) {
  if (points_.empty()) {
    throw CalibError(ErrorCode::EmptyCloud, "cannot index an empty cloud");
  }
  nodes_.reserve(points_.size());
  std::vector<std::size_t> order(points_.size());
  std::iota(order.begin(), order.end(), 0);
  root_ = build(order, 0, points_.size(), 0);
}

int KdTree::build(std::vector<std::size_t>& order, std::size_t begin,
                  std::size_t end, int depth) {
  if (begin >= end) return -1;
  int axis = depth % 3;
  std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid,
                   order.begin() + end,
                   [&](std::size_t a, std::size_t b) {
                     double va = points_[a][axis];
                     double vb = points_[b][axis];
                     return va < vb || (va == vb && a < b);
                   });
  Node node;
  node.point = order[mid];
  node.axis = axis;
  int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  int left = build(order, begin, mid, depth + 1);
  int right = build(order, mid + 1, end, depth + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

KdTree::Neighbor KdTree::nearest(const Eigen::Vector3d& query) const {
  Neighbor best;
  best.index = points_.size();
  best.squared_distance = std::numeric_limits<double>::infinity();
  nearest_impl(root_, query, best);
  return best;
}

void KdTree::nearest_impl(int node, const Eigen::Vector3d& query,
                          Neighbor& best) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  double d2 = (points_[n.point] - query).squaredNorm();
  if (better(d2, n.point, best)) {
    best.squared_distance = d2;
    best.index = n.point;
  }
  double diff = query[n.axis] - points_[n.point][n.axis];
  int near = diff < 0.0 ? n.left : n.right;
  int far = diff < 0.0 ? n.right : n.left;
  nearest_impl(near, query, best);
  // <= keeps equidistant candidates reachable so index ties stay exact.
  if (diff * diff <= best.squared_distance) {
    nearest_impl(far, query, best);
  }
}

std::vector<KdTree::Neighbor> KdTree::knn(const Eigen::Vector3d& query,
                                          std::size_t k) const {
  std::vector<Neighbor> heap;
  if (k == 0) return heap;
  knn_impl(root_, query, k, heap);
  std::sort(heap.begin(), heap.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.squared_distance < b.squared_distance ||
           (a.squared_distance == b.squared_distance && a.index < b.index);
  });
  return heap;
}

void KdTree::knn_impl(int node, const Eigen::Vector3d& query, std::size_t k,
                      std::vector<Neighbor>& heap) const {
  if (node < 0) return;
  auto cmp = [](const Neighbor& a, const Neighbor& b) {
    return a.squared_distance < b.squared_distance ||
           (a.squared_distance == b.squared_distance && a.index < b.index);
  };
  const Node& n = nodes_[node];
  double d2 = (points_[n.point] - query).squaredNorm();
  Neighbor cand{n.point, d2};
  if (heap.size() < k) {
    heap.push_back(cand);
    std::push_heap(heap.begin(), heap.end(), cmp);
  } else if (cmp(cand, heap.front())) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    heap.back() = cand;
    std::push_heap(heap.begin(), heap.end(), cmp);
  }
  double diff = query[n.axis] - points_[n.point][n.axis];
  int near = diff < 0.0 ? n.left : n.right;
  int far = diff < 0.0 ? n.right : n.left;
  knn_impl(near, query, k, heap);
  if (heap.size() < k || diff * diff <= heap.front().squared_distance) {
    knn_impl(far, query, k, heap);
  }
}

std::vector<std::size_t> KdTree::radius_search(const Eigen::Vector3d& query,
                                               double radius) const {
  std::vector<std::size_t> out;
  radius_impl(root_, query, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

void KdTree::radius_impl(int node, const Eigen::Vector3d& query, double r2,
                         std::vector<std::size_t>& out) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  if ((points_[n.point] - query).squaredNorm() <= r2) {
    out.push_back(n.point);
  }
  double diff = query[n.axis] - points_[n.point][n.axis];
  if (diff < 0.0 || diff * diff <= r2) radius_impl(n.left, query, r2, out);
  if (diff >= 0.0 || diff * diff <= r2) radius_impl(n.right, query, r2, out);
}

}  // namespace tscalib
