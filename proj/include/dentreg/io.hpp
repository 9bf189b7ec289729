#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dentreg/arch.hpp"
#include "dentreg/projection.hpp"
#include "dentreg/types.hpp"

namespace dentreg::io {

namespace fs = std::filesystem;

// Writes via a temporary file in the same directory plus rename, so readers
// never observe a partial file.
void write_file_atomic(const fs::path& path, const std::string& bytes);
std::string read_file(const fs::path& path);

// STL, binary or ASCII. Reading auto-detects the variant, welds exactly
// coincident vertices in first-appearance order, and rejects truncated or
// non-finite input. Writing emits the binary variant unless ascii is set.
SurfaceMesh read_stl(const fs::path& path);
SurfaceMesh parse_stl(const std::string& bytes);
void write_stl(const SurfaceMesh& mesh, const fs::path& path,
               bool ascii = false);

// The mesh exactly as read_stl(write_stl(mesh)) would return it: vertices
// cast to float and re-welded in first-appearance order. old_to_new maps the
// input vertex columns onto the canonical ones, so sidecar indices can be
// carried across.
SurfaceMesh canonical_stl_mesh(const SurfaceMesh& mesh,
                               std::vector<int>* old_to_new = nullptr);

// Per-tooth vertex labels for a mesh.
struct LabelMap {
  Jaw jaw = Jaw::mandible;
  std::map<int, std::vector<int>> segments;
};
void write_labels(const LabelMap& labels, const fs::path& path);
LabelMap read_labels(const fs::path& path);

// Splits mesh vertices into a labeled arch; unlabeled vertices become the
// residual cloud. Throws MalformedField on out-of-range or doubly-assigned
// indices.
LabeledArch arch_from_mesh(const SurfaceMesh& mesh, const LabelMap& labels);

// 4x4 row-major rigid transform, bottom row pinned to (0,0,0,1).
void write_transform(const RigidTransform& t, const fs::path& path);
RigidTransform read_transform(const fs::path& path);

// Plain point list (landmarks, extracted regions).
void write_points(const Eigen::Ref<const Points>& pts, const fs::path& path);
Points read_points(const fs::path& path);

// Detection boxes with tooth classes.
void write_boxes(const std::vector<BoundingBox2D>& boxes, const fs::path& path);
std::vector<BoundingBox2D> read_boxes(const fs::path& path);

// Binary voxel mask: text header (dims, spacing, world origin) followed by
// the raw x-fastest byte grid.
struct VoxelMaskFile {
  VoxelMask mask;
  Vec3 origin = Vec3::Zero();
};
void write_voxels(const VoxelMaskFile& file, const fs::path& path);
VoxelMaskFile read_voxels(const fs::path& path);

// 16-bit portable graymap (P5, maxval 65535, big-endian samples); pixel
// values are round(65535 * value).
void write_pgm16(const RasterImage& image, const fs::path& path);
RasterImage read_pgm16(const fs::path& path);

// Key/value report block, deterministic order.
void write_report(const std::vector<std::pair<std::string, std::string>>& rows,
                  const fs::path& path);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace dentreg::io
