#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <set>

#include "dentreg/errors.hpp"
#include "dentreg/normals.hpp"
#include "dentreg/registration.hpp"
#include "dentreg/metrics.hpp"
#include "dentreg/synthetic.hpp"
#include "test_support.hpp"

using namespace dentreg;
using namespace testsupport;

namespace {

DescriptorSet random_descriptors(Rng& rng, Index n) {
  DescriptorSet d(kDescriptorSize, n);
  for (Index i = 0; i < n; ++i)
    for (int r = 0; r < kDescriptorSize; ++r) d(r, i) = rng.uniform01();
  return d;
}

// Double-argmin intersection by direct scan.
std::set<std::pair<Index, Index>> brute_mutual(const DescriptorSet& src,
                                               const DescriptorSet& tgt) {
  std::set<std::pair<Index, Index>> out;
  for (Index i = 0; i < src.cols(); ++i) {
    Index bj = 0;
    for (Index j = 1; j < tgt.cols(); ++j)
      if ((src.col(i) - tgt.col(j)).squaredNorm() <
          (src.col(i) - tgt.col(bj)).squaredNorm())
        bj = j;
    Index bi = 0;
    for (Index i2 = 1; i2 < src.cols(); ++i2)
      if ((src.col(i2) - tgt.col(bj)).squaredNorm() <
          (src.col(bi) - tgt.col(bj)).squaredNorm())
        bi = i2;
    if (bi == i) out.insert({i, bj});
  }
  return out;
}

}  // namespace

TEST_CASE("mutual matches on identical descriptor lists") {
  Rng rng(40);
  const DescriptorSet d = random_descriptors(rng, 25);
  const Correspondences corr = mutual_fpfh_matches(d, d);
  REQUIRE(corr.size() == 25);
  for (Index i = 0; i < 25; ++i)
    CHECK(corr.pairs[i] == std::pair<Index, Index>{i, i});
}

TEST_CASE("mutual matches pick the unique argmin") {
  DescriptorSet src(kDescriptorSize, 1), tgt(kDescriptorSize, 2);
  src.col(0).setConstant(0.5);
  tgt.col(0).setConstant(0.5);
  tgt.col(1).setConstant(0.5 + 1e-3);
  const Correspondences corr = mutual_fpfh_matches(src, tgt);
  REQUIRE(corr.size() == 1);
  CHECK(corr.pairs[0] == std::pair<Index, Index>{0, 0});
}

TEST_CASE("mutual matches equal the brute-force intersection") {
  Rng rng(41);
  for (int round = 0; round < 25; ++round) {
    const DescriptorSet src = random_descriptors(rng, 50);
    const DescriptorSet tgt = random_descriptors(rng, 60);
    const Correspondences corr = mutual_fpfh_matches(src, tgt);
    const auto expected = brute_mutual(src, tgt);
    CHECK(corr.size() == expected.size());
    for (const auto& p : corr.pairs) CHECK(expected.count(p) == 1);
  }
}

TEST_CASE("triplet filter keeps rigid-consistent pairs") {
  Rng rng(42);
  const Points src = random_points(rng, 12);
  const RigidTransform t = random_rigid(rng);
  const Points tgt = t * src;
  Correspondences corr;
  for (Index i = 0; i < 12; ++i) corr.pairs.emplace_back(i, i);

  GlobalRegConfig cfg;
  cfg.tau = 0.9;
  cfg.triplet_draws = 2000;
  const Correspondences kept = filter_triplets(corr, src, tgt, cfg);
  CHECK(kept.size() == corr.size());
}

TEST_CASE("triplet filter drops a gross outlier deterministically") {
  Rng rng(43);
  const Points src_base = random_points(rng, 10);
  const RigidTransform t = random_rigid(rng);
  Points src(3, 11), tgt(3, 11);
  src.leftCols(10) = src_base;
  tgt.leftCols(10) = t * src_base;
  src.col(10) = Vec3(0.5, 0.5, 0.5);
  tgt.col(10) = t * Vec3(90, 90, 90);  // gross outlier pair
  Correspondences corr;
  for (Index i = 0; i < 11; ++i) corr.pairs.emplace_back(i, i);

  GlobalRegConfig cfg;
  cfg.tau = 0.9;
  cfg.triplet_draws = 1000;

  // oracle: every triplet containing the outlier fails the ratio test
  auto ratio_ok = [&](Index a, Index b) {
    const double dx = (src.col(a) - src.col(b)).norm();
    const double dy = (tgt.col(a) - tgt.col(b)).norm();
    return cfg.tau * dy < dx && cfg.tau * dx < dy;
  };
  for (Index a = 0; a < 11; ++a)
    for (Index b = a + 1; b < 11; ++b) {
      const bool with_outlier = a == 10 || b == 10;
      CHECK(ratio_ok(a, b) == !with_outlier);
    }

  const Correspondences kept = filter_triplets(corr, src, tgt, cfg);
  CHECK(kept.size() == 10);
  for (const auto& p : kept.pairs) CHECK(p.first != 10);
}

TEST_CASE("triplet filter error paths") {
  Rng rng(44);
  Points src(3, 3), tgt(3, 3);
  for (Index i = 0; i < 3; ++i) {
    src.col(i) = Vec3(i, i * i, 1);
    tgt.col(i) = 2.0 * src.col(i);  // ratio exactly 2 everywhere
  }
  Correspondences corr;
  for (Index i = 0; i < 3; ++i) corr.pairs.emplace_back(i, i);
  GlobalRegConfig cfg;
  cfg.tau = 0.9;
  cfg.triplet_draws = 200;
  CHECK_THROWS_AS(filter_triplets(corr, src, tgt, cfg), NoSurvivingPairs);

  corr.pairs.resize(2);
  CHECK_THROWS_AS(filter_triplets(corr, src, tgt, cfg),
                  TooFewCorrespondences);

  cfg.tau = 1.2;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

namespace {

PointCloud crown_cloud() {
  const SurfacePatch patch =
      superellipsoid_patch(2.1, 3.2, 3.6, 4.0, 10, 20, 0.0, std::numbers::pi / 2);
  return {patch.points, patch.normals};
}

}  // namespace

TEST_CASE("global_align returns near identity for identical clouds") {
  const PointCloud cloud = crown_cloud();
  GlobalRegConfig cfg;
  cfg.rng_seed = 5;
  const RigidTransform t = global_align(cloud, cloud, cfg);
  CHECK(rotation_angle<double>(t.linear()) < 1e-6);
  CHECK(t.translation().norm() < 1e-6);
}

TEST_CASE("global_align recovers a rigid offset of a full arch") {
  SynthConfig synth;
  synth.points_per_tooth = 150;
  synth.gingiva_points = 0;
  const ArchPair pair = generate_arch_pair(synth);
  const PointCloud arch = pair.ios.teeth_cloud();  // ~2000 points

  Rng rng(46);
  for (int round = 0; round < 3; ++round) {
    const RigidTransform truth = random_rigid(rng, 2.5, 40.0);
    const PointCloud moved = arch.transformed(truth);
    GlobalRegConfig cfg;
    cfg.rng_seed = 7 + round;
    const RigidTransform t = global_align(arch, moved, cfg);
    CHECK(rotation_distance(t, truth) < 1e-3);
    CHECK(translation_distance(t, truth) < 1e-2);
  }
}

TEST_CASE("global alignment degrades when non-overlap points are mixed in") {
  // scan-side residual analog: registration on teeth plus gingiva versus
  // teeth only, scored on landmark recovery
  double with_extra = 0, teeth_only = 0;
  for (int seed = 0; seed < 5; ++seed) {
    SynthConfig synth;
    synth.points_per_tooth = 120;
    synth.gingiva_points = 700;
    synth.rng_seed = 100 + seed;
    const ArchPair pair = generate_arch_pair(synth);
    Rng rng(200 + seed);
    const RigidTransform truth = random_rigid(rng, 1.5, 30.0);

    GlobalRegConfig cfg;
    cfg.rng_seed = seed;
    const PointCloud teeth = pair.ios.teeth_cloud();
    const PointCloud tgt = teeth.transformed(truth);
    const RigidTransform t_clean = global_align(teeth, tgt, cfg);
    const PointCloud mixed = concat(teeth, pair.ios.residual);
    const RigidTransform t_mixed = global_align(mixed, tgt, cfg);

    teeth_only += landmark_error(pair.truth.ios_landmarks,
                                 truth * pair.truth.ios_landmarks, t_clean);
    with_extra += landmark_error(pair.truth.ios_landmarks,
                                 truth * pair.truth.ios_landmarks, t_mixed);
  }
  CHECK(with_extra / 5 > teeth_only / 5);
}

TEST_CASE("vanilla icp on identical clouds stops immediately at identity") {
  const PointCloud cloud = crown_cloud();
  IcpConfig cfg;
  const IcpResult res =
      vanilla_icp(cloud, cloud, RigidTransform::Identity(), cfg);
  CHECK(res.iterations == 1);
  CHECK(rotation_angle<double>(res.transform.linear()) < 1e-12);
  CHECK(res.transform.translation().norm() < 1e-12);
}

TEST_CASE("icp recovers a small rigid perturbation exactly") {
  const PointCloud cloud = crown_cloud();
  RigidTransform truth = RigidTransform::Identity();
  truth.linear() = Eigen::AngleAxisd(std::numbers::pi / 180,
                                     Vec3(0.2, 0.3, 0.93).normalized())
                       .toRotationMatrix();
  truth.translation() = Vec3(0.5, -0.2, 0.3);
  const PointCloud moved = cloud.transformed(truth);

  IcpConfig cfg;
  cfg.epsilon = 1e-10;
  const IcpResult res =
      vanilla_icp(cloud, moved, RigidTransform::Identity(), cfg);
  CHECK(rotation_distance(res.transform, truth) < 1e-6);
  CHECK(translation_distance(res.transform, truth) < 1e-6);

  LabeledArch src, tgt;
  src.segments[30] = cloud;
  tgt.segments[30] = moved;
  const IcpResult res2 = ticp_refine(src, tgt, RigidTransform::Identity(), cfg);
  CHECK(rotation_distance(res2.transform, truth) < 1e-6);
  CHECK(translation_distance(res2.transform, truth) < 1e-6);
}

TEST_CASE("icp residuals never increase against a subsample") {
  const PointCloud cloud = crown_cloud();
  PointCloud half;
  half.points.resize(3, cloud.size() / 2);
  for (Index i = 0; i < half.points.cols(); ++i)
    half.points.col(i) = cloud.points.col(2 * i);

  RigidTransform init = RigidTransform::Identity();
  init.translation() = Vec3(0.8, -0.5, 0.4);
  IcpConfig cfg;
  const IcpResult res = vanilla_icp(half, cloud, init, cfg);
  CHECK(!res.residual_increased);
  for (std::size_t i = 1; i < res.sse.size(); ++i)
    CHECK(res.sse[i] <= res.sse[i - 1] + 1e-12);
  CHECK(res.mean_residuals.back() <= res.mean_residuals.front() + 1e-12);
}

TEST_CASE("single-segment ticp runs bitwise identical to vanilla icp") {
  const PointCloud cloud = crown_cloud();
  RigidTransform truth = RigidTransform::Identity();
  truth.translation() = Vec3(0.4, 0.1, -0.2);
  const PointCloud moved = cloud.transformed(truth);

  LabeledArch src, tgt;
  src.segments[26] = cloud;
  tgt.segments[26] = moved;
  IcpConfig cfg;
  const IcpResult a = vanilla_icp(cloud, moved, RigidTransform::Identity(), cfg);
  const IcpResult b = ticp_refine(src, tgt, RigidTransform::Identity(), cfg);
  CHECK(a.iterations == b.iterations);
  CHECK(a.transform.matrix() == b.transform.matrix());  // bitwise
  CHECK(a.mean_residuals == b.mean_residuals);
  CHECK(a.sse == b.sse);
}

TEST_CASE("ticp refuses arches without shared codes") {
  LabeledArch src, tgt;
  src.segments[20] = crown_cloud();
  tgt.segments[21] = crown_cloud();
  CHECK_THROWS_AS(ticp_refine(src, tgt, RigidTransform::Identity(), {}),
                  NoSharedCodes);
}

TEST_CASE("code constraint resolves the off-by-one trap") {
  const CongruentRowFixture fix = make_congruent_row_fixture(8);

  RigidTransform init = RigidTransform::Identity();
  init.translation() = Vec3(fix.pitch - 0.4, 0, 0);  // near off-by-one

  IcpConfig cfg;
  cfg.max_iterations = 200;

  // without the constraint: the row locks onto the neighboring teeth
  PointCloud src_all, tgt_all;
  for (const auto& [code, cloud] : fix.src.segments)
    src_all = concat(src_all, cloud);
  for (const auto& [code, cloud] : fix.tgt.segments)
    tgt_all = concat(tgt_all, cloud);
  const IcpResult plain = vanilla_icp(src_all, tgt_all, init, cfg);
  const double plain_err =
      ((plain.transform * fix.src_landmarks) - fix.tgt_landmarks)
          .colwise().norm().mean();
  CHECK(plain_err > fix.pitch / 2);  // converged one tooth over

  const IcpResult constrained = ticp_refine(fix.src, fix.tgt, init, cfg);
  const double constrained_err =
      ((constrained.transform * fix.src_landmarks) - fix.tgt_landmarks)
          .colwise().norm().mean();
  CHECK(constrained_err < 1e-6);
  CHECK(constrained_err < plain_err);
}

TEST_CASE("ticp matching never crosses tooth codes") {
  const CongruentRowFixture fix = make_congruent_row_fixture(2, 120);
  RigidTransform pose = RigidTransform::Identity();
  pose.translation() = Vec3(fix.pitch - 0.4, 0.2, -0.1);

  // independent column -> code maps over the concatenated teeth clouds
  auto code_of = [](const LabeledArch& arch) {
    std::vector<int> codes;
    for (const auto& [code, cloud] : arch.segments)
      codes.insert(codes.end(), cloud.size(), code);
    return codes;
  };
  const auto src_codes = code_of(fix.src);
  const auto tgt_codes = code_of(fix.tgt);

  const Correspondences corr = ticp_match(fix.src, fix.tgt, pose);
  CHECK(corr.size() == (std::size_t)fix.src.teeth_size());
  for (const auto& [si, ti] : corr.pairs)
    CHECK(src_codes[si] == tgt_codes[ti]);
}

TEST_CASE("registration pipeline is equivariant under a source pre-rotation") {
  const PointCloud cloud = crown_cloud();
  Rng rng(48);
  const RigidTransform truth = random_rigid(rng, 0.4, 6.0);
  const PointCloud target = cloud.transformed(truth);

  LabeledArch src, tgt;
  src.segments[27] = cloud;
  tgt.segments[27] = target;

  GlobalRegConfig gcfg;
  gcfg.rng_seed = 11;
  IcpConfig icfg;
  icfg.epsilon = 1e-9;

  const RigidTransform t0 = global_align(cloud, target, gcfg);
  const IcpResult base = ticp_refine(src, tgt, t0, icfg);

  const RigidTransform q = random_rigid(rng, 2.0, 15.0);
  LabeledArch src_q;
  src_q.segments[27] = cloud.transformed(q);
  const RigidTransform t0q =
      global_align(src_q.segments[27], target, gcfg);
  const IcpResult rotated = ticp_refine(src_q, tgt, t0q, icfg);

  CHECK(base.mean_residuals.back() ==
        doctest::Approx(rotated.mean_residuals.back()).epsilon(1e-6));
  const RigidTransform recomposed = rotated.transform * q;
  CHECK(rotation_distance(recomposed, base.transform) < 1e-6);
  CHECK(translation_distance(recomposed, base.transform) < 1e-5);
}
