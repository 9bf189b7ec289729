#include "dentreg/fpfh.hpp"

#include <cmath>
#include <numbers>

#include "dentreg/errors.hpp"

namespace dentreg {

namespace {

constexpr double kPi = std::numbers::pi_v<double>;

double safe_acos(double c) { return std::acos(std::clamp(c, -1.0, 1.0)); }

}  // namespace

DarbouxAngles darboux_angles(const Vec3& p, const Vec3& n_p, const Vec3& q,
                             const Vec3& n_q) {
  const double dist = (q - p).norm();
  if (dist == 0.0)
    throw CoincidentPoints("darboux_angles: coincident points");

  // Source is the point whose normal leans less toward the other point; on a
  // tie the first argument stays the source.
  const bool keep = n_p.dot(q - p) <= n_q.dot(p - q);
  const Vec3& xs = keep ? p : q;
  const Vec3& xt = keep ? q : p;
  const Vec3& ns = keep ? n_p : n_q;
  const Vec3& nt = keep ? n_q : n_p;

  const Vec3 d = (xt - xs) / dist;
  const Vec3 u = ns;
  const Vec3 v = d.cross(u);
  const Vec3 w = u.cross(v);

  DarbouxAngles a;
  a.rho = safe_acos(u.dot(d));
  a.phi = safe_acos(v.dot(nt));
  // The half-turn branch is undefined when n_t is (anti)parallel to u, where
  // <w, n_t> is exactly zero up to rounding; a small dead zone keeps the
  // angles rigid-invariant there instead of letting noise pick the branch.
  a.theta = safe_acos(u.dot(nt)) + (w.dot(nt) < -1e-12 ? kPi : 0.0);
  if (a.theta >= 2.0 * kPi) a.theta = std::nextafter(2.0 * kPi, 0.0);
  return a;
}

int bin_index(double s) {
  const int j = static_cast<int>(std::floor(s * kAngleBins / kPi));
  return std::clamp(j, 0, kAngleBins - 1);
}

Histogram bin_map(double s) {
  Histogram h = Histogram::Zero();
  h[bin_index(s)] = 1.0;
  return h;
}

SpfhDescriptor spfh(const PointCloudT<double>& cloud, const KdTree& index,
                    Index point, int k) {
  if (!cloud.has_normals()) throw Error("spfh: cloud has no normals");
  if (k < 2) throw Error("spfh: k must be at least 2");

  const Vec3 p = cloud.points.col(point);
  const Vec3 n_p = cloud.normals.col(point);
  const double weight = 1.0 / static_cast<double>(k);

  SpfhDescriptor d;
  for (Index nbr : index.knn(p, k)) {
    if (nbr == point) continue;
    const Vec3 q = cloud.points.col(nbr);
    if ((q - p).squaredNorm() == 0.0) continue;  // duplicate point, no angle
    const DarbouxAngles a = darboux_angles(p, n_p, q, cloud.normals.col(nbr));
    d.rho_hist[bin_index(a.rho)] += weight;
    d.phi_hist[bin_index(a.phi)] += weight;
    d.theta_hist[bin_index(a.theta / 2.0)] += weight;
  }
  return d;
}

DescriptorSet fpfh(const PointCloudT<double>& cloud, const KdTree& index,
                   int k) {
  const Index n = cloud.size();
  if (n == 0) throw Error("fpfh: empty cloud");

  DescriptorSet spfh_all(kDescriptorSize, n);
  for (Index i = 0; i < n; ++i)
    spfh_all.col(i) = spfh(cloud, index, i, k).stacked();

  const double inv_k = 1.0 / static_cast<double>(k);
  DescriptorSet out = spfh_all;
  for (Index i = 0; i < n; ++i) {
    const Vec3 p = cloud.points.col(i);
    for (Index nbr : index.knn(p, k)) {
      if (nbr == i) continue;
      const double dist = (cloud.points.col(nbr) - p).norm();
      out.col(i) += inv_k / (1.0 + dist) * spfh_all.col(nbr);
    }
  }
  return out;
}

}  // namespace dentreg
