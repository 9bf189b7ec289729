#include "dentreg/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dentreg/errors.hpp"
#include "dentreg/kdtree.hpp"
#include "dentreg/normals.hpp"
#include "dentreg/rigid.hpp"
#include "dentreg/rng.hpp"

namespace dentreg {

Points Correspondences::gather_src(const Eigen::Ref<const Points>& src) const {
  Points out(3, static_cast<Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i)
    out.col(static_cast<Index>(i)) = src.col(pairs[i].first);
  return out;
}

Points Correspondences::gather_tgt(const Eigen::Ref<const Points>& tgt) const {
  Points out(3, static_cast<Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i)
    out.col(static_cast<Index>(i)) = tgt.col(pairs[i].second);
  return out;
}

void GlobalRegConfig::validate() const {
  if (!(tau > 0.5 && tau < 1.0))
    throw Error("global registration: tau must lie in (0.5, 1)");
  if (triplet_draws < 0) throw Error("global registration: negative draws");
  if (feature_neighbors < 2)
    throw Error("global registration: feature_neighbors must be >= 2");
}

void IcpConfig::validate() const {
  if (epsilon <= 0) throw Error("icp: epsilon must be positive");
  if (max_iterations < 1) throw Error("icp: max_iterations must be >= 1");
  if (max_pair_distance < 0) throw Error("icp: negative distance gate");
}

namespace {

Index argmin_descriptor(const DescriptorSet& set, const Descriptor& query) {
  Index best = 0;
  double best_d2 = (set.col(0) - query).squaredNorm();
  for (Index j = 1; j < set.cols(); ++j) {
    const double d2 = (set.col(j) - query).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = j;
    }
  }
  return best;
}

}  // namespace

Correspondences mutual_fpfh_matches(const DescriptorSet& src,
                                    const DescriptorSet& tgt) {
  if (src.cols() == 0 || tgt.cols() == 0)
    throw Error("mutual_fpfh_matches: empty descriptor set");

  std::vector<Index> tgt_best(tgt.cols());
  for (Index j = 0; j < tgt.cols(); ++j)
    tgt_best[j] = argmin_descriptor(src, tgt.col(j));

  Correspondences out;
  for (Index i = 0; i < src.cols(); ++i) {
    const Index j = argmin_descriptor(tgt, src.col(i));
    if (tgt_best[j] == i) out.pairs.emplace_back(i, j);
  }
  return out;
}

Correspondences filter_triplets(const Correspondences& corr,
                                const Eigen::Ref<const Points>& src,
                                const Eigen::Ref<const Points>& tgt,
                                const GlobalRegConfig& cfg) {
  cfg.validate();
  const std::size_t n = corr.size();
  if (n < 3)
    throw TooFewCorrespondences("filter_triplets: need at least 3 pairs");

  const int draws =
      cfg.triplet_draws > 0 ? cfg.triplet_draws : static_cast<int>(3 * n);

  auto ratio_ok = [&](std::size_t a, std::size_t b) {
    const double dx =
        (src.col(corr.pairs[a].first) - src.col(corr.pairs[b].first)).norm();
    const double dy =
        (tgt.col(corr.pairs[a].second) - tgt.col(corr.pairs[b].second)).norm();
    // tau < dx/dy < 1/tau, cross-multiplied so zero lengths simply fail
    return cfg.tau * dy < dx && cfg.tau * dx < dy;
  };

  Rng rng(cfg.rng_seed);
  std::vector<bool> keep(n, false);
  for (int d = 0; d < draws; ++d) {
    std::size_t a = rng.uniform_index(n);
    std::size_t b = rng.uniform_index(n);
    std::size_t c = rng.uniform_index(n);
    if (a == b || a == c || b == c) continue;
    if (ratio_ok(a, b) && ratio_ok(a, c) && ratio_ok(b, c))
      keep[a] = keep[b] = keep[c] = true;
  }

  Correspondences out;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.pairs.push_back(corr.pairs[i]);
  if (out.pairs.empty())
    throw NoSurvivingPairs("filter_triplets: every sampled triplet failed");
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

RigidTransform global_align(const PointCloud& src, const PointCloud& tgt,
                            const GlobalRegConfig& cfg) {
  cfg.validate();
  if (src.size() < 3 || tgt.size() < 3)
    throw Error("global_align: clouds must have at least 3 points");

  const PointCloud src_n =
      src.has_normals() ? src : estimate_normals(src, cfg.feature_neighbors);
  const PointCloud tgt_n =
      tgt.has_normals() ? tgt : estimate_normals(tgt, cfg.feature_neighbors);

  const KdTree src_tree(src_n.points);
  const KdTree tgt_tree(tgt_n.points);
  const DescriptorSet src_f = fpfh(src_n, src_tree, cfg.feature_neighbors);
  const DescriptorSet tgt_f = fpfh(tgt_n, tgt_tree, cfg.feature_neighbors);

  const Correspondences corr = mutual_fpfh_matches(src_f, tgt_f);
  const Correspondences kept =
      filter_triplets(corr, src_n.points, tgt_n.points, cfg);
  return fit_rigid<double>(kept.gather_src(src_n.points),
                           kept.gather_tgt(tgt_n.points));
}

namespace {

// One code-labeled matching domain of the ICP engine.
struct MatchDomain {
  Points src;    // source points of this code, original coordinates
  KdTree tgt;    // index over target points of this code
};

IcpResult icp_engine(const std::vector<MatchDomain>& domains,
                     const RigidTransform& init, const IcpConfig& cfg) {
  cfg.validate();
  Index total = 0;
  for (const auto& d : domains) total += d.src.cols();
  if (total < 3) throw Error("icp: fewer than 3 source points");

  IcpResult result;
  result.transform = init;
  const double gate2 = cfg.max_pair_distance > 0
                           ? cfg.max_pair_distance * cfg.max_pair_distance
                           : std::numeric_limits<double>::infinity();

  std::vector<Points> current(domains.size());
  for (std::size_t d = 0; d < domains.size(); ++d)
    current[d] = init * domains[d].src;

  Points matched_src(3, total), matched_tgt(3, total);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    Index m = 0;
    for (std::size_t d = 0; d < domains.size(); ++d) {
      for (Index i = 0; i < current[d].cols(); ++i) {
        Index nearest = 0;
        const double d2 = domains[d].tgt.nearest_dist2(current[d].col(i),
                                                       &nearest);
        if (d2 > gate2) continue;
        matched_src.col(m) = current[d].col(i);
        matched_tgt.col(m) = domains[d].tgt.points().col(nearest);
        ++m;
      }
    }
    if (m < 3) throw TooFewCorrespondences("icp: matching produced < 3 pairs");

    const RigidTransform step =
        fit_rigid<double>(matched_src.leftCols(m), matched_tgt.leftCols(m));
    result.transform = step * result.transform;
    for (auto& pts : current) pts = step * pts;

    double sum = 0.0, sum_sq = 0.0;
    for (Index i = 0; i < m; ++i) {
      const double r = (step * matched_src.col(i) - matched_tgt.col(i)).norm();
      sum += r;
      sum_sq += r * r;
    }
    const double mean = sum / static_cast<double>(m);
    if (!result.sse.empty() && sum_sq > result.sse.back())
      result.residual_increased = true;
    result.mean_residuals.push_back(mean);
    result.sse.push_back(sum_sq);
    result.cumulative.push_back(result.transform);
    result.iterations = it + 1;
    if (mean < cfg.epsilon) break;
  }
  return result;
}

}  // namespace

IcpResult vanilla_icp(const PointCloud& src, const PointCloud& tgt,
                      const RigidTransform& init, const IcpConfig& cfg) {
  if (src.empty() || tgt.empty()) throw Error("icp: empty cloud");
  std::vector<MatchDomain> domains;
  domains.push_back({src.points, KdTree(tgt.points)});
  return icp_engine(domains, init, cfg);
}

IcpResult ticp_refine(const LabeledArch& src, const LabeledArch& tgt,
                      const RigidTransform& init, const IcpConfig& cfg) {
  std::vector<MatchDomain> domains;
  for (const auto& [code, cloud] : src.segments) {
    const auto it = tgt.segments.find(code);
    if (it == tgt.segments.end()) continue;
    domains.push_back({cloud.points, KdTree(it->second.points)});
  }
  if (domains.empty())
    throw NoSharedCodes("ticp_refine: arches share no tooth codes");
  return icp_engine(domains, init, cfg);
}

Correspondences ticp_match(const LabeledArch& src, const LabeledArch& tgt,
                           const RigidTransform& pose,
                           double max_pair_distance) {
  // Column offsets of each code within the concatenated teeth clouds.
  std::map<int, Index> src_base, tgt_base;
  Index at = 0;
  for (const auto& [code, cloud] : src.segments) {
    src_base[code] = at;
    at += cloud.size();
  }
  at = 0;
  for (const auto& [code, cloud] : tgt.segments) {
    tgt_base[code] = at;
    at += cloud.size();
  }

  const double gate2 = max_pair_distance > 0
                           ? max_pair_distance * max_pair_distance
                           : std::numeric_limits<double>::infinity();
  Correspondences out;
  for (const auto& [code, cloud] : src.segments) {
    const auto it = tgt.segments.find(code);
    if (it == tgt.segments.end()) continue;
    const KdTree tree(it->second.points);
    const Points moved = pose * cloud.points;
    for (Index i = 0; i < moved.cols(); ++i) {
      Index nearest = 0;
      if (tree.nearest_dist2(moved.col(i), &nearest) > gate2) continue;
      out.pairs.emplace_back(src_base[code] + i, tgt_base[code] + nearest);
    }
  }
  if (out.pairs.empty())
    throw NoSharedCodes("ticp_match: arches share no tooth codes");
  return out;
}

}  // namespace dentreg
