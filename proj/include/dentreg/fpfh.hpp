#pragma once

#include "dentreg/kdtree.hpp"
#include "dentreg/types.hpp"

namespace dentreg {

inline constexpr int kAngleBins = 11;
inline constexpr int kDescriptorSize = 3 * kAngleBins;
inline constexpr int kDefaultFeatureNeighbors = 30;

using Descriptor = Eigen::Matrix<double, kDescriptorSize, 1>;
using DescriptorSet = Eigen::Matrix<double, kDescriptorSize, Eigen::Dynamic>;
using Histogram = Eigen::Matrix<double, kAngleBins, 1>;

// Pairwise normal-variation angles in the Darboux frame (u, v, w) anchored at
// the source normal. The source/target choice makes the triple symmetric:
// swapping the two points yields identical angles.
// rho, phi in [0, pi]; theta in [0, 2*pi).
struct DarbouxAngles {
  double rho;
  double phi;
  double theta;
};

DarbouxAngles darboux_angles(const Vec3& p, const Vec3& n_p, const Vec3& q,
                             const Vec3& n_q);

// Bin index of angle s over kAngleBins equal intervals of [0, pi); values at
// or above pi land in the last bin.
int bin_index(double s);

// One-hot encoding of bin_index(s).
Histogram bin_map(double s);

struct SpfhDescriptor {
  Histogram rho_hist = Histogram::Zero();
  Histogram phi_hist = Histogram::Zero();
  Histogram theta_hist = Histogram::Zero();

  Descriptor stacked() const {
    Descriptor d;
    d << rho_hist, phi_hist, theta_hist;
    return d;
  }
};

// Simplified point feature histogram at one point: binned angle triples over
// the k-neighborhood (which includes the point itself, contributing no
// angle), each neighbor weighted 1/k. Sub-histograms therefore sum to
// (k-1)/k. Theta is halved before binning so all three angles share the
// [0, pi) bin domain.
SpfhDescriptor spfh(const PointCloudT<double>& cloud, const KdTree& index,
                    Index point, int k);

// Fast point feature histograms for every point: the point's own SPFH plus
// the distance-weighted mean of its neighbors' SPFHs,
//   FPFH(x) = SPFH(x) + (1/k) * sum SPFH(x') / (1 + |x - x'|).
// One 33-component descriptor per column. Pure given an immutable index;
// the two passes (all SPFH, then all FPFH) are order-independent per point.
DescriptorSet fpfh(const PointCloudT<double>& cloud, const KdTree& index,
                   int k = kDefaultFeatureNeighbors);

}  // namespace dentreg
