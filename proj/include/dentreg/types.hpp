#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "dentreg/errors.hpp"

namespace dentreg {

// Dense column-point conventions: a cloud is a 3xN matrix, one point per
// column, coordinates in millimeters. Rigid transforms are Eigen isometries;
// composition is operator* and application to a 3xN block transforms every
// column.
template <typename Scalar>
using PointsT = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;
using Points = PointsT<double>;

template <typename Scalar>
using RigidTransformT = Eigen::Transform<Scalar, 3, Eigen::Isometry>;
using RigidTransform = RigidTransformT<double>;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Index = Eigen::Index;

template <typename Scalar>
struct PointCloudT {
  PointsT<Scalar> points;   // 3xN
  PointsT<Scalar> normals;  // 3xN when present, 3x0 otherwise

  PointCloudT() : points(3, 0), normals(3, 0) {}
  explicit PointCloudT(PointsT<Scalar> pts)
      : points(std::move(pts)), normals(3, 0) {}
  PointCloudT(PointsT<Scalar> pts, PointsT<Scalar> nrm)
      : points(std::move(pts)), normals(std::move(nrm)) {}

  Index size() const { return points.cols(); }
  bool empty() const { return points.cols() == 0; }
  bool has_normals() const {
    return normals.cols() == points.cols() && points.cols() > 0;
  }

  PointCloudT transformed(const RigidTransformT<Scalar>& t) const {
    PointCloudT out;
    out.points = t * points;
    if (has_normals()) out.normals = t.linear() * normals;
    return out;
  }
};
using PointCloud = PointCloudT<double>;

template <typename Scalar>
PointCloudT<Scalar> concat(const PointCloudT<Scalar>& a,
                           const PointCloudT<Scalar>& b) {
  PointCloudT<Scalar> out;
  out.points.resize(3, a.size() + b.size());
  out.points << a.points, b.points;
  if (a.has_normals() && b.has_normals()) {
    out.normals.resize(3, a.size() + b.size());
    out.normals << a.normals, b.normals;
  }
  return out;
}

template <typename Scalar>
bool is_rigid(const RigidTransformT<Scalar>& t, Scalar tol = Scalar(1e-9)) {
  const Eigen::Matrix3<Scalar> r = t.linear();
  return (r.transpose() * r - Eigen::Matrix3<Scalar>::Identity()).norm() <=
             tol &&
         std::abs(r.determinant() - Scalar(1)) <= tol;
}

// Rotation angle of R in [0, pi]. atan2 of the skew part keeps full
// precision near the identity, where acos of the trace loses half the bits.
template <typename Scalar>
Scalar rotation_angle(const Eigen::Matrix3<Scalar>& r) {
  const Eigen::Vector3<Scalar> axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0),
                                    r(1, 0) - r(0, 1));
  const Scalar sin_part = axis.norm() / Scalar(2);
  const Scalar cos_part = (r.trace() - Scalar(1)) / Scalar(2);
  return std::atan2(sin_part, cos_part);
}

// Angle of the relative rotation between two transforms.
template <typename Scalar>
Scalar rotation_distance(const RigidTransformT<Scalar>& a,
                         const RigidTransformT<Scalar>& b) {
  return rotation_angle<Scalar>(a.linear().transpose() * b.linear());
}

template <typename Scalar>
Scalar translation_distance(const RigidTransformT<Scalar>& a,
                            const RigidTransformT<Scalar>& b) {
  return (a.translation() - b.translation()).norm();
}

// Rotation about a center point composed with an extra translation.
inline RigidTransform rigid_about(const Mat3& rotation, const Vec3& center,
                                  const Vec3& translation = Vec3::Zero()) {
  RigidTransform t = RigidTransform::Identity();
  t.linear() = rotation;
  t.translation() = center - rotation * center + translation;
  return t;
}

// Binary occupancy grid. Sample (i,j,k) sits at (i*sx, j*sy, k*sz) mm; the
// grid is x-fastest in memory.
struct VoxelMask {
  Eigen::Vector3i dims{0, 0, 0};
  Vec3 spacing{1, 1, 1};
  std::vector<std::uint8_t> values;

  std::size_t linear(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims.x()) *
               (static_cast<std::size_t>(j) +
                static_cast<std::size_t>(dims.y()) *
                    static_cast<std::size_t>(k));
  }
  std::uint8_t at(int i, int j, int k) const { return values[linear(i, j, k)]; }
  std::uint8_t& at(int i, int j, int k) { return values[linear(i, j, k)]; }

  void validate() const {
    if (dims.minCoeff() <= 0 || spacing.minCoeff() <= 0.0)
      throw InvalidArch("voxel mask: dims and spacing must be positive");
    if (values.size() != static_cast<std::size_t>(dims.x()) * dims.y() * dims.z())
      throw InvalidArch("voxel mask: value count does not match dims");
  }
};

// Indexed triangle mesh; vertices in mm, faces reference vertex columns.
struct SurfaceMesh {
  Points vertices{3, 0};
  Eigen::Matrix3Xi faces{3, 0};

  Index vertex_count() const { return vertices.cols(); }
  Index face_count() const { return faces.cols(); }
  PointCloud vertex_cloud() const { return PointCloud(vertices); }
};

}  // namespace dentreg
