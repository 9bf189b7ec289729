#pragma once

#include <Eigen/Eigenvalues>
#include <optional>
#include <string>

#include "dentreg/kdtree.hpp"
#include "dentreg/types.hpp"

namespace dentreg {

// Flip v so its (z, y, x) sign pattern is positive-first; used when the
// orientation rule below has no say (point exactly at the centroid plane).
template <typename Scalar>
Eigen::Vector3<Scalar> canonical_sign(Eigen::Vector3<Scalar> v) {
  Scalar lead = v.z();
  if (lead == Scalar(0)) lead = v.y();
  if (lead == Scalar(0)) lead = v.x();
  return lead < Scalar(0) ? Eigen::Vector3<Scalar>(-v) : v;
}

// Per-point unit normals from the covariance of the k-nearest neighborhood
// (query point included), oriented away from the cloud centroid.
template <typename Scalar>
PointCloudT<Scalar> estimate_normals(const PointCloudT<Scalar>& cloud, int k,
                                     const KdTreeT<Scalar>* index = nullptr) {
  const Index n = cloud.size();
  if (k < 3 || static_cast<Index>(k) > n)
    throw Error("estimate_normals: need 3 <= k <= cloud size");

  std::optional<KdTreeT<Scalar>> own;
  if (!index) {
    own.emplace(cloud.points);
    index = &*own;
  }

  const Eigen::Vector3<Scalar> centroid = cloud.points.rowwise().mean();
  PointCloudT<Scalar> out = cloud;
  out.normals.resize(3, n);

  for (Index i = 0; i < n; ++i) {
    const auto nbrs = index->knn(cloud.points.col(i), k);
    Eigen::Vector3<Scalar> mean = Eigen::Vector3<Scalar>::Zero();
    for (Index j : nbrs) mean += cloud.points.col(j);
    mean /= Scalar(k);

    Eigen::Matrix3<Scalar> cov = Eigen::Matrix3<Scalar>::Zero();
    for (Index j : nbrs) {
      const Eigen::Vector3<Scalar> d = cloud.points.col(j) - mean;
      cov += d * d.transpose();
    }

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3<Scalar>> eig(cov);
    const auto& evals = eig.eigenvalues();  // ascending
    if (evals[1] <= Scalar(1e-12) * std::max(evals[2], Scalar(1e-300)))
      throw DegenerateNeighborhood(
          "estimate_normals: collinear neighborhood at point " +
          std::to_string(i));

    Eigen::Vector3<Scalar> normal =
        canonical_sign<Scalar>(eig.eigenvectors().col(0).normalized());
    const Scalar outward = normal.dot(cloud.points.col(i) - centroid);
    if (outward < Scalar(0)) normal = -normal;
    out.normals.col(i) = normal;
  }
  return out;
}

}  // namespace dentreg
