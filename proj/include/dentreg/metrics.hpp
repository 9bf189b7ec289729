#pragma once

#include "dentreg/types.hpp"

namespace dentreg {

// Mean distance between corresponding landmark columns after transforming
// the source side. Throws LengthMismatch on unequal counts.
double landmark_error(const Eigen::Ref<const Points>& src_landmarks,
                      const Eigen::Ref<const Points>& tgt_landmarks,
                      const RigidTransform& t);

// Directed Hausdorff distance: worst distance from a transformed source
// point to the target set. Not symmetric.
double surface_error(const PointCloud& src, const PointCloud& tgt,
                     const RigidTransform& t);

// q-th quantile (q in (0, 1]) of the directed source-to-target distances; a
// robustness companion to the worst-case figure above.
double surface_error_quantile(const PointCloud& src, const PointCloud& tgt,
                              const RigidTransform& t, double q);

}  // namespace dentreg
