#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dentreg/arch.hpp"
#include "dentreg/fpfh.hpp"
#include "dentreg/types.hpp"

namespace dentreg {

// Index pairs (source column, target column); no duplicates.
struct Correspondences {
  std::vector<std::pair<Index, Index>> pairs;

  std::size_t size() const { return pairs.size(); }
  Points gather_src(const Eigen::Ref<const Points>& src) const;
  Points gather_tgt(const Eigen::Ref<const Points>& tgt) const;
};

// Pairs (i, j) where j is i's closest target descriptor AND i is j's closest
// source descriptor, Euclidean in descriptor space; argmin ties resolve to
// the lowest index.
Correspondences mutual_fpfh_matches(const DescriptorSet& src,
                                    const DescriptorSet& tgt);

struct GlobalRegConfig {
  double tau = 0.9;            // rigidity ratio gate, must be in (0.5, 1)
  int triplet_draws = 0;       // 0 means 3 * |corr|
  std::uint64_t rng_seed = 0;
  int feature_neighbors = kDefaultFeatureNeighbors;

  void validate() const;
};

// Random-triplet rigidity filter: draws 3-subsets of correspondences and
// keeps a pair when at least one containing triplet has all three pairwise
// source/target length ratios within (tau, 1/tau). Result is deduplicated and
// sorted. Throws TooFewCorrespondences (< 3 pairs) or NoSurvivingPairs.
Correspondences filter_triplets(const Correspondences& corr,
                                const Eigen::Ref<const Points>& src,
                                const Eigen::Ref<const Points>& tgt,
                                const GlobalRegConfig& cfg);

// Global initial alignment: FPFH descriptors on both clouds, mutual matches,
// triplet filter, then a closed-form rigid fit on the survivors. Normals are
// estimated with cfg.feature_neighbors when a cloud carries none.
RigidTransform global_align(const PointCloud& src, const PointCloud& tgt,
                            const GlobalRegConfig& cfg = {});

struct IcpConfig {
  double epsilon = 1e-4;         // stop when mean pair residual (mm) drops below
  int max_iterations = 100;
  double max_pair_distance = 0;  // optional gate, 0 disables

  void validate() const;
};

struct IcpResult {
  RigidTransform transform = RigidTransform::Identity();
  std::vector<double> mean_residuals;  // per iteration, after that fit
  std::vector<double> sse;             // summed squared residuals, same timing
  std::vector<RigidTransform> cumulative;  // composed transform per iteration
  int iterations = 0;
  bool residual_increased = false;     // flagged, not fatal
};

// Iterative closest point: alternate nearest-target matching and rigid
// least-squares until the mean residual drops below epsilon or the iteration
// budget runs out. The returned transform composes every step with init.
IcpResult vanilla_icp(const PointCloud& src, const PointCloud& tgt,
                      const RigidTransform& init, const IcpConfig& cfg);

// Tooth-constrained ICP: identical loop, but each source point only matches
// target points carrying the same tooth code, which keeps correspondences off
// neighboring near-congruent teeth. Segments whose code is absent from the
// target take no part. Throws NoSharedCodes when no code is shared.
// On single-segment input this runs the very same instruction sequence as
// vanilla_icp.
IcpResult ticp_refine(const LabeledArch& src, const LabeledArch& tgt,
                      const RigidTransform& init, const IcpConfig& cfg);

// One matching pass of the constrained loop at a given source pose. Pair
// indices address the arches' code-ascending concatenated teeth clouds, so a
// caller can map both sides back to tooth codes and check the no-cross-code
// property independently.
Correspondences ticp_match(const LabeledArch& src, const LabeledArch& tgt,
                           const RigidTransform& pose,
                           double max_pair_distance = 0);

}  // namespace dentreg
