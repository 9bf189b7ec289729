#pragma once

// Shared generators and brute-force oracles. Oracles stay deliberately dumb
// (linear scans, direct summation) and independent of the library's
// accelerated paths.

#include <algorithm>
#include <numeric>
#include <vector>

#include "dentreg/rng.hpp"
#include "dentreg/types.hpp"

namespace testsupport {

using dentreg::Index;
using dentreg::PointCloud;
using dentreg::Points;
using dentreg::RigidTransform;
using dentreg::Rng;
using dentreg::Vec3;

inline Points random_points(Rng& rng, Index n, double extent = 10.0) {
  Points pts(3, n);
  for (Index i = 0; i < n; ++i)
    pts.col(i) = Vec3(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                      rng.uniform(-extent, extent));
  return pts;
}

inline RigidTransform random_rigid(Rng& rng, double max_angle = 3.0,
                                   double max_shift = 20.0) {
  RigidTransform t = RigidTransform::Identity();
  t.linear() = Eigen::AngleAxisd(rng.uniform(-max_angle, max_angle),
                                 rng.unit_vec3())
                   .toRotationMatrix();
  t.translation() = Vec3(rng.uniform(-max_shift, max_shift),
                         rng.uniform(-max_shift, max_shift),
                         rng.uniform(-max_shift, max_shift));
  return t;
}

// k nearest by (squared distance, index), full scan.
inline std::vector<Index> brute_knn(const Points& pts, const Vec3& query,
                                    int k) {
  std::vector<std::pair<double, Index>> all;
  for (Index i = 0; i < pts.cols(); ++i)
    all.emplace_back((pts.col(i) - query).squaredNorm(), i);
  std::sort(all.begin(), all.end());
  std::vector<Index> out;
  for (int i = 0; i < k; ++i) out.push_back(all[i].second);
  return out;
}

inline double brute_nearest_dist(const Points& pts, const Vec3& query) {
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < pts.cols(); ++i)
    best = std::min(best, (pts.col(i) - query).squaredNorm());
  return std::sqrt(best);
}

// Directed Hausdorff by double loop.
inline double brute_directed_hausdorff(const Points& src, const Points& tgt,
                                       const RigidTransform& t) {
  double worst = 0.0;
  for (Index i = 0; i < src.cols(); ++i)
    worst = std::max(worst, brute_nearest_dist(tgt, t * src.col(i)));
  return worst;
}

}  // namespace testsupport
