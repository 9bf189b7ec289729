#include "dentreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dentreg/errors.hpp"
#include "dentreg/kdtree.hpp"

namespace dentreg {

double landmark_error(const Eigen::Ref<const Points>& src_landmarks,
                      const Eigen::Ref<const Points>& tgt_landmarks,
                      const RigidTransform& t) {
  if (src_landmarks.cols() != tgt_landmarks.cols())
    throw LengthMismatch("landmark_error: landmark counts differ");
  if (src_landmarks.cols() == 0)
    throw LengthMismatch("landmark_error: empty landmark sets");
  return ((t * src_landmarks) - tgt_landmarks).colwise().norm().mean();
}

namespace {

std::vector<double> directed_distances(const PointCloud& src,
                                       const PointCloud& tgt,
                                       const RigidTransform& t) {
  if (src.empty() || tgt.empty())
    throw Error("surface_error: empty cloud");
  const KdTree tree(tgt.points);
  std::vector<double> dist(static_cast<std::size_t>(src.size()));
  // column-at-a-time transform, the same arithmetic a plain scan would use
  for (Index i = 0; i < src.size(); ++i)
    dist[i] = std::sqrt(tree.nearest_dist2(t * Vec3(src.points.col(i))));
  return dist;
}

}  // namespace

double surface_error(const PointCloud& src, const PointCloud& tgt,
                     const RigidTransform& t) {
  const auto dist = directed_distances(src, tgt, t);
  return *std::max_element(dist.begin(), dist.end());
}

double surface_error_quantile(const PointCloud& src, const PointCloud& tgt,
                              const RigidTransform& t, double q) {
  if (!(q > 0.0 && q <= 1.0))
    throw Error("surface_error_quantile: q must lie in (0, 1]");
  auto dist = directed_distances(src, tgt, t);
  const std::size_t rank = std::min(
      dist.size() - 1,
      static_cast<std::size_t>(std::ceil(q * dist.size())) - 1);
  std::nth_element(dist.begin(), dist.begin() + rank, dist.end());
  return dist[rank];
}

}  // namespace dentreg
