#pragma once

#include <string>
#include <vector>

#include "dentreg/arch.hpp"
#include "dentreg/types.hpp"

namespace dentreg {

// Right-handed occlusal coordinate system: origin at the cloud centroid,
// u2 roughly sagittal (toward the anterior teeth), u3 the occlusal normal
// (along the surface normals), u1 = u2 x u3.
struct OcclusalFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 u1 = Vec3::UnitX();
  Vec3 u2 = Vec3::UnitY();
  Vec3 u3 = Vec3::UnitZ();

  // Rows u1, u2, u3: maps world offsets into frame coordinates.
  Mat3 world_to_frame() const;
  Vec3 to_frame(const Vec3& p) const { return world_to_frame() * (p - origin); }

  // As a rigid transform carrying frame coordinates back to world.
  RigidTransform frame_to_world() const;
  static OcclusalFrame from_transform(const RigidTransform& t);
};

// PCA of the centered cloud gives the axes; u2's sign follows the summed
// unit offsets from the centroid, u3's sign follows the summed normals.
// Throws DegenerateConfiguration when the second and third principal values
// are too close to orient the axes.
OcclusalFrame occlusal_frame(const PointCloud& cloud_with_normals);

// N2-row by N1-column grayscale grid over the occlusal plane; pixel (u, v)
// (1-based) covers the frame point spacing*((u, -v, 0) + offset).
struct RasterImage {
  int width = 0;   // N1
  int height = 0;  // N2
  double spacing = 0.2;
  Vec3 offset = Vec3::Zero();
  Eigen::MatrixXd values;  // height x width, in [0, 1]

  double& at(int u, int v) { return values(v - 1, u - 1); }
  double at(int u, int v) const { return values(v - 1, u - 1); }
};

struct RenderedImages {
  RasterImage rendered;  // max(<n, u3>, 0) at the topmost hit, 0 on miss
  RasterImage depth;     // 1 - normalized height of the hit, 0 on miss
};

// Orthographic projection along u3. Rays go through every pixel; the hit is
// the intersection with the largest u3 coordinate. With a mesh the rays are
// intersected against triangles (the shading normal is the face normal); a
// bare cloud is splatted: among the points within spacing/sqrt(2) of the ray
// the laterally nearest one wins, ties toward the larger height then lower
// index. Depth is normalized over the hit pixels; when all hits share one
// height the depth is 1 everywhere a ray hit.
// Throws EmptyProjection when no ray hits.
RenderedImages render_images(const SurfaceMesh& mesh, const OcclusalFrame& frame,
                             int width = 400, int height = 400,
                             double spacing = 0.2);
RenderedImages render_images(const PointCloud& cloud_with_normals,
                             const OcclusalFrame& frame, int width = 400,
                             int height = 400, double spacing = 0.2);

enum class ToothClass { incisor, canine, premolar, molar };
const char* to_string(ToothClass c);
ToothClass tooth_class_from_string(const std::string& s);

// Pixel-coordinate detection box (left-top u1,v1; right-bottom u2,v2).
struct BoundingBox2D {
  double u1 = 0, v1 = 0, u2 = 0, v2 = 0;
  ToothClass tooth_class = ToothClass::incisor;

  void validate() const;
  // Box midpoint in the hull/ordering plane: (mean u, -mean v).
  Eigen::Vector2d center() const { return {(u1 + u2) / 2, -(v1 + v2) / 2}; }
};

// Points of `cloud` whose frame coordinates fall inside each box's column
// [s*u1, s*u2) x [-s*v2, -s*v1) x R. Boxes may come out empty; that is
// reported, not fatal.
struct RoiExtraction {
  std::vector<PointCloud> rois;
  std::vector<std::vector<Index>> members;
  std::vector<bool> empty_roi;
};
RoiExtraction extract_rois(const PointCloud& cloud, const OcclusalFrame& frame,
                           const std::vector<BoundingBox2D>& boxes,
                           double spacing);

// Arch ordering and universal-code assignment from 2D tooth centers: a
// concave hull via 2D ball pivoting (default radius 1.5x the median
// nearest-neighbor spacing), longest-edge removal to open the cycle, then
// codes assigned outward from the central-incisor split.
struct ArchOrdering {
  std::vector<int> order;  // input center indices along the arch
  std::vector<int> codes;  // universal code per position in `order`
};
ArchOrdering order_and_identify(const std::vector<Eigen::Vector2d>& centers,
                                const std::vector<ToothClass>& classes,
                                Jaw jaw, double pivot_radius = 0);

}  // namespace dentreg
