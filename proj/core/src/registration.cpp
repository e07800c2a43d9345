#include "tscalib/registration.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/Dense>

#include "tscalib/errors.hpp"
#include "tscalib/kd_tree.hpp"

namespace tscalib {

namespace {

struct VoxelKey {
  int x, y, z;
  bool operator==(const VoxelKey& o) const {
    return x == o.x && y == o.y && z == o.z;
  }
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::size_t h = 1469598103934665603ull;
    for (int v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

struct GaussianCell {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d information = Eigen::Matrix3d::Zero();
};

VoxelKey key_for(const Eigen::Vector3d& p, double voxel) {
  return {static_cast<int>(std::floor(p.x() / voxel)),
          static_cast<int>(std::floor(p.y() / voxel)),
          static_cast<int>(std::floor(p.z() / voxel))};
}

/// Voxelize the target into Gaussian cells; cells with fewer than 6
/// points are dropped, covariance eigenvalues floored at 1e-3 of the
/// largest to keep the information matrix bounded.
std::unordered_map<VoxelKey, GaussianCell, VoxelKeyHash> build_cells(
    const PointCloud& target, double voxel) {
  struct Accum {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Matrix3d sq = Eigen::Matrix3d::Zero();
    int count = 0;
  };
  std::unordered_map<VoxelKey, Accum, VoxelKeyHash> accum;
  for (const auto& p : target.points) {
    Eigen::Vector3d v = p.vec();
    Accum& a = accum[key_for(v, voxel)];
    a.sum += v;
    a.sq += v * v.transpose();
    ++a.count;
  }
  std::unordered_map<VoxelKey, GaussianCell, VoxelKeyHash> cells;
  for (const auto& [key, a] : accum) {
    if (a.count < 6) continue;
    GaussianCell cell;
    cell.mean = a.sum / a.count;
    Eigen::Matrix3d cov =
        a.sq / a.count - cell.mean * cell.mean.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    Eigen::Vector3d evals = es.eigenvalues();
    double floor_val = std::max(evals.maxCoeff() * 1e-3, 1e-9);
    for (int i = 0; i < 3; ++i) evals[i] = std::max(evals[i], floor_val);
    Eigen::Matrix3d fixed = es.eigenvectors() *
                            evals.asDiagonal() *
                            es.eigenvectors().transpose();
    cell.information = fixed.inverse();
    cells.emplace(key, cell);
  }
  return cells;
}

struct NdtObjective {
  double score = 0.0;                       // sum of exp terms
  Eigen::Matrix<double, 6, 1> gradient;     // of -score
  Eigen::Matrix<double, 6, 6> hessian;      // Gauss-Newton style
  int scored_points = 0;
};

/// Score and derivatives at the given pose. Perturbation is applied on
/// the left: R <- exp(w) R, t <- exp(w) t + dt, so the point Jacobian is
/// [I | -skew(y)] with y the transformed point.
NdtObjective evaluate_ndt(
    const PointCloud& source,
    const std::unordered_map<VoxelKey, GaussianCell, VoxelKeyHash>& cells,
    double voxel, const RigidTransform& pose, bool with_derivatives) {
  NdtObjective obj;
  obj.gradient.setZero();
  obj.hessian.setZero();
  for (const auto& p : source.points) {
    Eigen::Vector3d y = pose.rotation * p.vec() + pose.translation;
    auto it = cells.find(key_for(y, voxel));
    if (it == cells.end()) continue;
    const GaussianCell& cell = it->second;
    Eigen::Vector3d q = y - cell.mean;
    double md = q.dot(cell.information * q);
    double s = std::exp(-0.5 * md);
    obj.score += s;
    ++obj.scored_points;
    if (!with_derivatives) continue;
    Eigen::Matrix<double, 3, 6> jac;
    jac.leftCols<3>() = Eigen::Matrix3d::Identity();
    jac.rightCols<3>() = -skew(y);
    Eigen::Matrix<double, 6, 1> jtbq =
        jac.transpose() * (cell.information * q);
    obj.gradient += s * jtbq;
    obj.hessian += s * (jac.transpose() * cell.information * jac -
                        jtbq * jtbq.transpose());
  }
  return obj;
}

}  // namespace

RegistrationResult ndt_register(const PointCloud& source,
                                const PointCloud& target,
                                const NdtConfig& cfg,
                                const RigidTransform& initial_guess) {
  if (source.empty() || target.empty()) {
    throw CalibError(ErrorCode::EmptyCloud, "registration needs two clouds");
  }
  auto cells = build_cells(target, cfg.voxel_size);
  if (cells.empty()) {
    throw CalibError(ErrorCode::DegenerateTarget,
                     "no voxel holds 6+ target points");
  }

  RegistrationResult result;
  result.transform = initial_guess;
  bool reached_epsilon = false;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    result.iterations_used = iter + 1;
    NdtObjective obj =
        evaluate_ndt(source, cells, cfg.voxel_size, result.transform, true);
    if (obj.scored_points == 0) break;

    Eigen::Matrix<double, 6, 6> h = obj.hessian;
    // Keep the system positive definite before solving.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(h);
    double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < 1e-9) {
      h += (1e-9 - min_eig + 1e-6) * Eigen::Matrix<double, 6, 6>::Identity();
    }
    Eigen::Matrix<double, 6, 1> delta = h.ldlt().solve(-obj.gradient);

    double t_norm = delta.head<3>().norm();
    if (t_norm > cfg.step_size) {
      delta *= cfg.step_size / t_norm;
    }

    // Backtracking line search on the score.
    double scale = 1.0;
    double new_score = -1.0;
    RigidTransform candidate = result.transform;
    for (int ls = 0; ls < 8; ++ls) {
      Eigen::Vector3d dt = scale * delta.head<3>();
      Eigen::Vector3d dw = scale * delta.tail<3>();
      Eigen::Matrix3d dr = so3_exp(dw);
      candidate.rotation = dr * result.transform.rotation;
      candidate.translation = dr * result.transform.translation + dt;
      new_score =
          evaluate_ndt(source, cells, cfg.voxel_size, candidate, false).score;
      if (new_score >= obj.score) break;
      scale *= 0.5;
    }
    if (new_score < obj.score) {
      // No ascent direction left at this resolution.
      reached_epsilon = true;
      break;
    }
    result.transform = candidate;
    double step_mag = scale * (delta.head<3>().norm() +
                               delta.tail<3>().norm());
    if (step_mag < cfg.transformation_epsilon) {
      reached_epsilon = true;
      break;
    }
  }

  NdtObjective final_obj =
      evaluate_ndt(source, cells, cfg.voxel_size, result.transform, false);
  result.converged = reached_epsilon && final_obj.scored_points > 0;

  // Fitness is the mean squared NN distance into the target, same
  // definition as ICP.
  KdTree tree(target);
  double acc = 0.0;
  for (const auto& p : source.points) {
    Eigen::Vector3d y = result.transform.rotation * p.vec() +
                        result.transform.translation;
    acc += tree.nearest(y).squared_distance;
  }
  result.fitness = acc / static_cast<double>(source.points.size());
  return result;
}

RegistrationResult icp_register(const PointCloud& source,
                                const PointCloud& target,
                                const IcpConfig& cfg,
                                const RigidTransform& initial_guess) {
  if (source.empty() || target.empty()) {
    throw CalibError(ErrorCode::EmptyCloud, "registration needs two clouds");
  }
  KdTree tree(target);
  const double gate2 = cfg.max_correspondence_distance *
                       cfg.max_correspondence_distance;

  RegistrationResult result;
  result.transform = initial_guess;
  double prev_fitness = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    result.iterations_used = iter + 1;

    std::vector<Eigen::Vector3d> src_pts;
    std::vector<Eigen::Vector3d> tgt_pts;
    src_pts.reserve(source.points.size());
    tgt_pts.reserve(source.points.size());
    for (const auto& p : source.points) {
      Eigen::Vector3d y = result.transform.rotation * p.vec() +
                          result.transform.translation;
      KdTree::Neighbor nb = tree.nearest(y);
      if (nb.squared_distance > gate2) continue;
      src_pts.push_back(p.vec());
      tgt_pts.push_back(target.points[nb.index].vec());
    }
    if (src_pts.size() < 3) {
      throw CalibError(ErrorCode::NoCorrespondences,
                       "fewer than 3 gated correspondences");
    }

    // Closed-form rigid alignment (Umeyama without scale).
    Eigen::Vector3d src_mean = Eigen::Vector3d::Zero();
    Eigen::Vector3d tgt_mean = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < src_pts.size(); ++i) {
      src_mean += src_pts[i];
      tgt_mean += tgt_pts[i];
    }
    src_mean /= static_cast<double>(src_pts.size());
    tgt_mean /= static_cast<double>(src_pts.size());
    Eigen::Matrix3d w = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < src_pts.size(); ++i) {
      w += (tgt_pts[i] - tgt_mean) * (src_pts[i] - src_mean).transpose();
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(
        w, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    Eigen::Matrix3d v = svd.matrixV();
    Eigen::Matrix3d r = u * v.transpose();
    if (r.determinant() < 0.0) {
      u.col(2) *= -1.0;
      r = u * v.transpose();
    }
    RigidTransform updated{r, tgt_mean - r * src_mean};

    double delta_t = (updated.translation - result.transform.translation)
                         .norm();
    double delta_r =
        so3_log(updated.rotation *
                result.transform.rotation.transpose()).norm();
    result.transform = updated;

    // Fitness after applying this iteration's transform.
    double acc = 0.0;
    int count = 0;
    for (const auto& p : source.points) {
      Eigen::Vector3d y = result.transform.rotation * p.vec() +
                          result.transform.translation;
      KdTree::Neighbor nb = tree.nearest(y);
      if (nb.squared_distance > gate2) continue;
      acc += nb.squared_distance;
      ++count;
    }
    result.fitness = count > 0 ? acc / count : 0.0;
    result.fitness_trace.push_back(result.fitness);

    if (delta_t + delta_r < cfg.transformation_epsilon ||
        std::abs(prev_fitness - result.fitness) < 1e-15) {
      result.converged = true;
      break;
    }
    prev_fitness = result.fitness;
  }
  if (result.iterations_used == cfg.max_iterations && !result.converged) {
    // Ran out of iterations; the transform is still the best found.
    result.converged = false;
  }
  return result;
}

}  // namespace tscalib
