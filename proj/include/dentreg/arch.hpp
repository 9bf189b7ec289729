#pragma once

#include <map>
#include <vector>

#include "dentreg/types.hpp"

namespace dentreg {

enum class Jaw { maxilla, mandible };

// Universal notation: maxilla 1-16, mandible 17-32.
bool valid_tooth_code(int code, Jaw jaw);
int central_incisor_code(Jaw jaw);  // 8 for maxilla, 24 for mandible

// A point cloud partitioned into per-tooth segments keyed by universal tooth
// code, plus a residual cloud (gingiva on scans, unexposed teeth on volumes).
struct LabeledArch {
  std::map<int, PointCloud> segments;
  PointCloud residual;
  Jaw jaw = Jaw::mandible;

  std::vector<int> codes() const;
  Index teeth_size() const;

  // Concatenation of all segments in code-ascending order; normals are kept
  // only when every segment carries them.
  PointCloud teeth_cloud() const;

  // Throws InvalidArch on empty segments, out-of-jaw codes, or more than 16
  // segments.
  void validate() const;
};

// Residual points grouped by the code of the segment holding their nearest
// tooth point. `rows[c]` are the residual column indices assigned to code c
// (every code present in the arch appears, possibly empty); `parts[c]` is the
// materialized sub-cloud. Parts are disjoint and union to the residual.
struct GingivaPartition {
  std::map<int, std::vector<Index>> rows;
  std::map<int, PointCloud> parts;
};

GingivaPartition partition_gingiva(const LabeledArch& arch);

// Applies t to every segment and the residual; labels are preserved.
LabeledArch transform_arch(const LabeledArch& arch, const RigidTransform& t);

}  // namespace dentreg
