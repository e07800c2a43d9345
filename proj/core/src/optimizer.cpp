#include "tscalib/optimizer.hpp"

#include <cmath>

namespace tscalib {

namespace {

double sample_gray(const GrayMap& map, const Eigen::Vector2d& uv) {
  int x = static_cast<int>(std::lround(uv.x()));
  int y = static_cast<int>(std::lround(uv.y()));
  if (!map.in_bounds(x, y)) return -1.0;
  return static_cast<double>(map.at(x, y));
}

struct SideScore {
  double sum = 0.0;
  int on_image = 0;
};

SideScore score_side(const PointCloud& side, const GrayMap& map,
                     const RigidTransform& total,
                     const CameraIntrinsics& k) {
  SideScore s;
  for (const auto& p : side.points) {
    Point3 cam = apply(total, p);
    auto uv = project(k, cam);
    if (!uv) continue;
    double g = sample_gray(map, *uv);
    if (g < 0.0) continue;
    s.sum += g;
    ++s.on_image;
  }
  return s;
}

}  // namespace

StepSizes select_step_sizes(double gray_rate, const SearchConfig& cfg) {
  if (gray_rate > cfg.gamma) {
    return {cfg.fine_angle_step_deg, cfg.fine_translation_step_m};
  }
  return {cfg.coarse_angle_step_deg, cfg.coarse_translation_step_m};
}

CalibrationScore score_projection(const LineFeatureCloud& features,
                                  const GrayMap& gray_map,
                                  const RigidTransform& extrinsic,
                                  const MotionEstimate& motion,
                                  const CameraIntrinsics& k, double weight) {
  RigidTransform total = compose_total(extrinsic, motion);
  SideScore h = score_side(features.horizontal, gray_map, total, k);
  SideScore v = score_side(features.vertical, gray_map, total, k);

  CalibrationScore out;
  out.points_total = static_cast<int>(features.horizontal.size() +
                                      features.vertical.size());
  out.points_on_image = h.on_image + v.on_image;
  out.score = weight * h.sum + (1.0 - weight) * v.sum;
  double max_score =
      255.0 * (weight * h.on_image + (1.0 - weight) * v.on_image);
  out.gray_rate = max_score > 0.0 ? out.score / max_score : 0.0;
  return out;
}

namespace {

struct Candidate {
  EulerPose correction;
  double time_offset = 0.0;
};

Candidate offset_candidate(const Candidate& base,
                           const std::vector<SearchDim>& dims,
                           bool with_time, const std::vector<int>& steps,
                           const StepSizes& sizes, double time_step) {
  Candidate out = base;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    double delta = steps[i] * (dims[i] == SearchDim::Roll ||
                                       dims[i] == SearchDim::Pitch ||
                                       dims[i] == SearchDim::Yaw
                                   ? sizes.angular_deg
                                   : sizes.translational_m);
    switch (dims[i]) {
      case SearchDim::Roll: out.correction.roll += delta; break;
      case SearchDim::Pitch: out.correction.pitch += delta; break;
      case SearchDim::Yaw: out.correction.yaw += delta; break;
      case SearchDim::Tx: out.correction.tx += delta; break;
      case SearchDim::Ty: out.correction.ty += delta; break;
      case SearchDim::Tz: out.correction.tz += delta; break;
    }
  }
  if (with_time) {
    out.time_offset += steps[dims.size()] * time_step;
  }
  return out;
}

}  // namespace

SearchState neighborhood_search(const RigidTransform& prior,
                                const MotionEstimate& motion,
                                const LineFeatureCloud& features,
                                const GrayMap& gray_map,
                                const CameraIntrinsics& k,
                                const SearchConfig& cfg,
                                double initial_gray_rate,
                                const MotionModel& motion_model) {
  const bool with_time = cfg.search_time_offset && motion_model != nullptr;
  const std::size_t d = cfg.search_dims.size() + (with_time ? 1 : 0);

  auto evaluate = [&](const Candidate& c) {
    RigidTransform extrinsic = compose(prior, euler_to_transform(c.correction));
    MotionEstimate m = with_time ? motion_model(c.time_offset) : motion;
    return score_projection(features, gray_map, extrinsic, m, k, cfg.weight);
  };

  SearchState state;
  Candidate current;
  state.best_score = evaluate(current);

  double gray_rate = initial_gray_rate;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    state.iterations = iter + 1;
    StepSizes sizes = select_step_sizes(gray_rate, cfg);

    // Enumerate all 3^d - 1 neighbors; lexicographic order fixes ties.
    std::vector<int> steps(d, -1);
    Candidate best_neighbor;
    CalibrationScore best_neighbor_score;
    std::vector<int> best_steps;
    bool found = false;
    while (true) {
      bool all_zero = std::all_of(steps.begin(), steps.end(),
                                  [](int s) { return s == 0; });
      if (!all_zero) {
        Candidate cand = offset_candidate(current, cfg.search_dims, with_time,
                                          steps, sizes, cfg.time_step_s);
        CalibrationScore score = evaluate(cand);
        if (!found || score.score > best_neighbor_score.score) {
          found = true;
          best_neighbor = cand;
          best_neighbor_score = score;
          best_steps = steps;
        }
      }
      // Next lexicographic offset vector in {-1,0,1}^d.
      std::size_t pos = 0;
      while (pos < d && steps[pos] == 1) {
        steps[pos] = -1;
        ++pos;
      }
      if (pos == d) break;
      ++steps[pos];
    }

    if (!found || best_neighbor_score.score <= state.best_score.score) {
      state.converged = true;
      break;
    }

    current = best_neighbor;
    state.best_score = best_neighbor_score;

    // Follow the winning displacement while it keeps improving.
    while (true) {
      Candidate next = offset_candidate(current, cfg.search_dims, with_time,
                                        best_steps, sizes, cfg.time_step_s);
      CalibrationScore score = evaluate(next);
      if (score.score <= state.best_score.score) break;
      current = next;
      state.best_score = score;
    }
    gray_rate = state.best_score.gray_rate;
  }

  state.correction = current.correction;
  state.time_offset_s = current.time_offset;
  return state;
}

}  // namespace tscalib
