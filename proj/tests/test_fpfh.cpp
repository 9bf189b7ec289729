#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "dentreg/errors.hpp"
#include "dentreg/fpfh.hpp"
#include "dentreg/normals.hpp"
#include "test_support.hpp"

using namespace dentreg;
using namespace testsupport;

namespace {
constexpr double kPi = std::numbers::pi;

PointCloud plane_cloud(Rng& rng, Index n) {
  Points pts(3, n), nrm(3, n);
  for (Index i = 0; i < n; ++i) {
    pts.col(i) = Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), 0.0);
    nrm.col(i) = Vec3(0, 0, 1);
  }
  return {pts, nrm};
}
}  // namespace

TEST_CASE("darboux angles on the worked configuration") {
  const Vec3 p(0, 0, 0), q(1, 0, 0), n(0, 0, 1);
  const DarbouxAngles a = darboux_angles(p, n, q, n);
  CHECK(a.rho == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(a.phi == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(a.theta == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("darboux angles are symmetric under swapping the points") {
  const Vec3 p(0, 0, 0), q(1, 0, 0), n(0, 0, 1);
  const DarbouxAngles ab = darboux_angles(p, n, q, n);
  const DarbouxAngles ba = darboux_angles(q, n, p, n);
  CHECK(ab.rho == ba.rho);
  CHECK(ab.phi == ba.phi);
  CHECK(ab.theta == ba.theta);

  Rng rng(3);
  for (int round = 0; round < 500; ++round) {
    const Vec3 x = rng.normal_vec3(2.0), y = rng.normal_vec3(2.0);
    if ((x - y).norm() == 0.0) continue;
    const Vec3 nx = rng.unit_vec3(), ny = rng.unit_vec3();
    const DarbouxAngles f = darboux_angles(x, nx, y, ny);
    const DarbouxAngles g = darboux_angles(y, ny, x, nx);
    CHECK(f.rho == g.rho);
    CHECK(f.phi == g.phi);
    CHECK(f.theta == g.theta);
    CHECK(f.rho >= 0.0);
    CHECK(f.rho <= kPi);
    CHECK(f.phi >= 0.0);
    CHECK(f.phi <= kPi);
    CHECK(f.theta >= 0.0);
    CHECK(f.theta < 2 * kPi);
    CHECK(f.theta / 2 < kPi);  // halved angle stays in the bin domain
  }
}

TEST_CASE("darboux angles reject coincident points") {
  const Vec3 p(1, 2, 3), n(0, 0, 1);
  CHECK_THROWS_AS(darboux_angles(p, n, p, n), CoincidentPoints);
}

TEST_CASE("bin map boundaries") {
  CHECK(bin_index(0.0) == 0);
  CHECK(bin_index(kPi / 2) == 5);  // 5*pi/11 <= pi/2 < 6*pi/11
  CHECK(bin_index(kPi) == 10);     // clamped into the last bin
  CHECK(bin_index(std::nextafter(kPi, 0.0)) == 10);

  for (int j = 0; j < 11; ++j) {
    const Histogram h = bin_map((j + 0.5) * kPi / 11.0);
    CHECK(h.sum() == 1.0);
    CHECK(h[j] == 1.0);
  }
}

TEST_CASE("spfh with a single neighbor puts weight 1/2 in one bin") {
  Points pts(3, 2), nrm(3, 2);
  pts.col(0) = Vec3(0, 0, 0);
  pts.col(1) = Vec3(1, 0, 0);
  nrm.col(0) = Vec3(0, 0, 1);
  nrm.col(1) = Vec3(0, 0, 1);
  const PointCloud cloud(pts, nrm);
  const KdTree tree(cloud.points);
  const SpfhDescriptor d = spfh(cloud, tree, 0, 2);
  CHECK(d.rho_hist.sum() == doctest::Approx(0.5));
  CHECK(d.phi_hist.sum() == doctest::Approx(0.5));
  CHECK(d.theta_hist.sum() == doctest::Approx(0.5));
  CHECK(d.rho_hist.maxCoeff() == 0.5);
  CHECK(d.phi_hist.maxCoeff() == 0.5);
  CHECK(d.theta_hist.maxCoeff() == 0.5);
}

TEST_CASE("spfh on a plane piles rho mass into bin 6") {
  Rng rng(9);
  const PointCloud cloud = plane_cloud(rng, 120);
  const KdTree tree(cloud.points);
  const int k = 10;
  for (Index i : {Index(0), Index(40), Index(119)}) {
    const SpfhDescriptor d = spfh(cloud, tree, i, k);
    CHECK(d.rho_hist[5] == doctest::Approx((k - 1.0) / k));
    CHECK(d.phi_hist[5] == doctest::Approx((k - 1.0) / k));
    CHECK(d.theta_hist[0] == doctest::Approx((k - 1.0) / k));
  }
}

TEST_CASE("spfh sub-histograms sum to (k-1)/k") {
  Rng rng(10);
  Points pts = random_points(rng, 80, 4.0);
  PointCloud cloud = estimate_normals(PointCloud(pts), 8);
  const KdTree tree(cloud.points);
  for (int k : {2, 5, 17}) {
    for (Index i = 0; i < cloud.size(); i += 13) {
      const SpfhDescriptor d = spfh(cloud, tree, i, k);
      const double expected = (k - 1.0) / k;
      CHECK(d.rho_hist.sum() == doctest::Approx(expected).epsilon(1e-9));
      CHECK(d.phi_hist.sum() == doctest::Approx(expected).epsilon(1e-9));
      CHECK(d.theta_hist.sum() == doctest::Approx(expected).epsilon(1e-9));
      CHECK(d.rho_hist.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("fpfh has 33 components and expands per the two-point formula") {
  Points pts(3, 2), nrm(3, 2);
  pts.col(0) = Vec3(0, 0, 0);
  pts.col(1) = Vec3(0.5, 0.25, 0);
  nrm.col(0) = Vec3(0, 0, 1);
  nrm.col(1) = Vec3(0, 1, 0);
  const PointCloud cloud(pts, nrm);
  const KdTree tree(cloud.points);
  const int k = 2;
  const DescriptorSet f = fpfh(cloud, tree, k);
  CHECK(f.rows() == 33);
  CHECK(f.cols() == 2);

  const double dist = (pts.col(1) - pts.col(0)).norm();
  const Descriptor s0 = spfh(cloud, tree, 0, k).stacked();
  const Descriptor s1 = spfh(cloud, tree, 1, k).stacked();
  const Descriptor expected0 = s0 + s1 / (k * (1.0 + dist));
  CHECK((f.col(0) - expected0).cwiseAbs().maxCoeff() < 1e-15);
  const Descriptor expected1 = s1 + s0 / (k * (1.0 + dist));
  CHECK((f.col(1) - expected1).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("fpfh is rigid invariant") {
  Rng rng(14);
  Points pts = random_points(rng, 150, 6.0);
  const PointCloud cloud = estimate_normals(PointCloud(pts), 10);
  const KdTree tree(cloud.points);
  const DescriptorSet base = fpfh(cloud, tree, 15);

  for (int round = 0; round < 5; ++round) {
    const RigidTransform t = random_rigid(rng);
    const PointCloud moved = cloud.transformed(t);
    const KdTree moved_tree(moved.points);
    const DescriptorSet f = fpfh(moved, moved_tree, 15);
    CHECK((f - base).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("fpfh is permutation equivariant") {
  Rng rng(15);
  Points pts = random_points(rng, 60, 4.0);
  const PointCloud cloud = estimate_normals(PointCloud(pts), 8);
  const KdTree tree(cloud.points);
  const DescriptorSet base = fpfh(cloud, tree, 9);

  std::vector<Index> perm(cloud.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (Index i = cloud.size() - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.uniform_index(i + 1)]);

  PointCloud shuffled;
  shuffled.points.resize(3, cloud.size());
  shuffled.normals.resize(3, cloud.size());
  for (Index i = 0; i < cloud.size(); ++i) {
    shuffled.points.col(i) = cloud.points.col(perm[i]);
    shuffled.normals.col(i) = cloud.normals.col(perm[i]);
  }
  const KdTree stree(shuffled.points);
  const DescriptorSet f = fpfh(shuffled, stree, 9);
  for (Index i = 0; i < cloud.size(); ++i)
    CHECK((f.col(i) - base.col(perm[i])).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fpfh components stay within the derived bound") {
  Rng rng(16);
  Points pts = random_points(rng, 90, 5.0);
  const PointCloud cloud = estimate_normals(PointCloud(pts), 8);
  const KdTree tree(cloud.points);
  const int k = 12;
  const DescriptorSet f = fpfh(cloud, tree, k);
  CHECK(f.minCoeff() >= 0.0);
  CHECK(f.maxCoeff() <= 1.0 + (k - 1.0) / k);
}
