#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "dentreg/types.hpp"

namespace dentreg {

// Least-squares rigid transform t minimizing sum ||tgt_i - t(src_i)||^2 over
// paired columns: cross-covariance SVD with the determinant sign guard that
// keeps the solution in SE(3) rather than allowing a reflection.
template <typename Scalar>
RigidTransformT<Scalar> fit_rigid(
    const Eigen::Ref<const PointsT<Scalar>>& src,
    const Eigen::Ref<const PointsT<Scalar>>& tgt) {
  const Index n = src.cols();
  if (n != tgt.cols()) throw Error("fit_rigid: pair count mismatch");
  if (n < 3) throw DegenerateConfiguration("fit_rigid: fewer than 3 pairs");

  const Eigen::Vector3<Scalar> src_mean = src.rowwise().mean();
  const Eigen::Vector3<Scalar> tgt_mean = tgt.rowwise().mean();
  const PointsT<Scalar> src_c = src.colwise() - src_mean;
  const PointsT<Scalar> tgt_c = tgt.colwise() - tgt_mean;

  // Rotation is determined only when the source spans at least a plane.
  {
    const Eigen::Matrix3<Scalar> scatter = src_c * src_c.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3<Scalar>> eig(scatter);
    const auto& evals = eig.eigenvalues();
    if (evals[1] <= Scalar(1e-12) * std::max(evals[2], Scalar(1e-300)))
      throw DegenerateConfiguration(
          "fit_rigid: source points collinear or coincident");
  }

  const Eigen::Matrix3<Scalar> cross = tgt_c * src_c.transpose();
  Eigen::JacobiSVD<Eigen::Matrix3<Scalar>> svd(
      cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3<Scalar> flip = Eigen::Matrix3<Scalar>::Identity();
  flip(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() <
                       Scalar(0)
                   ? Scalar(-1)
                   : Scalar(1);
  const Eigen::Matrix3<Scalar> rotation =
      svd.matrixU() * flip * svd.matrixV().transpose();

  RigidTransformT<Scalar> t = RigidTransformT<Scalar>::Identity();
  t.linear() = rotation;
  t.translation() = tgt_mean - rotation * src_mean;
  return t;
}

template <typename Scalar>
Scalar fit_residual_rms(const Eigen::Ref<const PointsT<Scalar>>& src,
                        const Eigen::Ref<const PointsT<Scalar>>& tgt,
                        const RigidTransformT<Scalar>& t) {
  if (src.cols() == 0) return Scalar(0);
  return std::sqrt(((t * src) - tgt).colwise().squaredNorm().sum() /
                   Scalar(src.cols()));
}

}  // namespace dentreg
