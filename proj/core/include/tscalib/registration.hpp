#ifndef TSCALIB_REGISTRATION_HPP
#define TSCALIB_REGISTRATION_HPP

#include <vector>

#include "tscalib/geometry.hpp"

namespace tscalib {

struct NdtConfig {
  double voxel_size = 1.0;               // meters
  double step_size = 0.1;                // max translation per iteration
  double transformation_epsilon = 1e-4;  // meters
  int max_iterations = 100;
};

struct IcpConfig {
  double max_correspondence_distance = 1.0;  // meters
  int max_iterations = 50;
  double transformation_epsilon = 1e-6;
};

/// Outcome of a registration run. `transform` maps source coordinates
/// into the target frame; `fitness` is the mean squared distance over
/// accepted correspondences after the final iteration.
struct RegistrationResult {
  RigidTransform transform;
  int iterations_used = 0;
  bool converged = false;
  double fitness = 0.0;
  /// Post-iteration fitness values; non-increasing for ICP when the
  /// correspondence set is stable.
  std::vector<double> fitness_trace;
};

/// Normal distributions transform: the target is voxelized into Gaussian
/// cells (covariance eigenvalues floored at 1e-3 of the largest) and the
/// pose is refined by Newton steps with the translation step capped at
/// cfg.step_size.
RegistrationResult ndt_register(const PointCloud& source,
                                const PointCloud& target,
                                const NdtConfig& cfg,
                                const RigidTransform& initial_guess =
                                    RigidTransform::identity());

/// Point-to-point ICP with distance-gated correspondences and closed-form
/// SVD alignment per iteration.
RegistrationResult icp_register(const PointCloud& source,
                                const PointCloud& target,
                                const IcpConfig& cfg,
                                const RigidTransform& initial_guess =
                                    RigidTransform::identity());

}  // namespace tscalib

#endif  // TSCALIB_REGISTRATION_HPP
