#ifndef TSCALIB_OPTIMIZER_HPP
#define TSCALIB_OPTIMIZER_HPP

#include <array>
#include <functional>
#include <vector>

#include "tscalib/geometry.hpp"
#include "tscalib/image_features.hpp"
#include "tscalib/lidar_features.hpp"
#include "tscalib/pose_estimation.hpp"

namespace tscalib {

enum class SearchDim { Roll = 0, Pitch = 1, Yaw = 2, Tx = 3, Ty = 4, Tz = 5 };

/// Greedy neighborhood-search configuration. Step pairs are
/// (degrees, meters); the coarse pair applies while the carried gray rate
/// is at or below gamma, the fine pair once alignment has pushed the gray
/// rate above it.
struct SearchConfig {
  double gamma = 0.7;
  double coarse_angle_step_deg = 0.2;
  double coarse_translation_step_m = 0.1;
  double fine_angle_step_deg = 0.05;
  double fine_translation_step_m = 0.02;
  double weight = 0.5;  // horizontal-feature weight
  int max_iterations = 50;
  std::vector<SearchDim> search_dims = {SearchDim::Roll, SearchDim::Pitch,
                                        SearchDim::Yaw};
  /// Experimental seventh dimension: search the time offset too.
  bool search_time_offset = false;
  double time_step_s = 0.005;
};

struct StepSizes {
  double angular_deg = 0.0;
  double translational_m = 0.0;
};

StepSizes select_step_sizes(double gray_rate, const SearchConfig& cfg);

/// Score of one candidate parameter set. gray_rate normalizes the weighted
/// score by its weighted maximum so it stays in [0, 1].
struct CalibrationScore {
  double score = 0.0;
  double gray_rate = 0.0;
  int points_on_image = 0;
  int points_total = 0;
};

CalibrationScore score_projection(const LineFeatureCloud& features,
                                  const GrayMap& gray_map,
                                  const RigidTransform& extrinsic,
                                  const MotionEstimate& motion,
                                  const CameraIntrinsics& k, double weight);

/// Search state: the Euler correction is applied on top of the prior,
/// candidate extrinsic = prior * euler_to_transform(correction).
struct SearchState {
  EulerPose correction;
  double time_offset_s = 0.0;
  CalibrationScore best_score;
  int iterations = 0;
  bool converged = false;
};

/// Supplies the motion estimate when the optional time-offset dimension
/// shifts the interval by `extra_dt`; unused for the rigid-only search.
using MotionModel = std::function<MotionEstimate(double extra_dt)>;

/// Algorithm: enumerate all 3^d - 1 step neighbors of the current
/// correction, move to the best strictly-improving one, keep stepping
/// along that displacement while the score improves, then re-enumerate.
/// Step sizes are re-selected from the current gray rate each outer
/// iteration; `initial_gray_rate` seeds the first selection (carry the
/// previous frame's value).
SearchState neighborhood_search(const RigidTransform& prior,
                                const MotionEstimate& motion,
                                const LineFeatureCloud& features,
                                const GrayMap& gray_map,
                                const CameraIntrinsics& k,
                                const SearchConfig& cfg,
                                double initial_gray_rate = 0.0,
                                const MotionModel& motion_model = nullptr);

}  // namespace tscalib

#endif  // TSCALIB_OPTIMIZER_HPP
