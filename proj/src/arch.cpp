#include "dentreg/arch.hpp"

#include <string>

#include "dentreg/errors.hpp"
#include "dentreg/kdtree.hpp"

namespace dentreg {

bool valid_tooth_code(int code, Jaw jaw) {
  return jaw == Jaw::maxilla ? code >= 1 && code <= 16
                             : code >= 17 && code <= 32;
}

int central_incisor_code(Jaw jaw) { return jaw == Jaw::maxilla ? 8 : 24; }

std::vector<int> LabeledArch::codes() const {
  std::vector<int> out;
  out.reserve(segments.size());
  for (const auto& [code, cloud] : segments) out.push_back(code);
  return out;
}

Index LabeledArch::teeth_size() const {
  Index n = 0;
  for (const auto& [code, cloud] : segments) n += cloud.size();
  return n;
}

PointCloud LabeledArch::teeth_cloud() const {
  const Index n = teeth_size();
  bool all_normals = !segments.empty();
  for (const auto& [code, cloud] : segments)
    all_normals = all_normals && cloud.has_normals();

  PointCloud out;
  out.points.resize(3, n);
  if (all_normals) out.normals.resize(3, n);
  Index at = 0;
  for (const auto& [code, cloud] : segments) {
    out.points.middleCols(at, cloud.size()) = cloud.points;
    if (all_normals) out.normals.middleCols(at, cloud.size()) = cloud.normals;
    at += cloud.size();
  }
  return out;
}

void LabeledArch::validate() const {
  if (segments.size() > 16)
    throw InvalidArch("arch: more than 16 tooth segments");
  for (const auto& [code, cloud] : segments) {
    if (!valid_tooth_code(code, jaw))
      throw InvalidArch("arch: code " + std::to_string(code) +
                        " not valid for this jaw");
    if (cloud.empty())
      throw InvalidArch("arch: empty segment for code " + std::to_string(code));
  }
}

GingivaPartition partition_gingiva(const LabeledArch& arch) {
  arch.validate();
  if (arch.segments.empty() || arch.residual.empty())
    throw InvalidArch("partition_gingiva: need teeth and a residual cloud");

  // Concatenated teeth in code-ascending order, so the kd-tree's low-index
  // tie-break resolves equidistant assignments toward the lower code.
  const PointCloud teeth = arch.teeth_cloud();
  std::vector<int> code_of_column(teeth.size());
  Index at = 0;
  for (const auto& [code, cloud] : arch.segments)
    for (Index i = 0; i < cloud.size(); ++i) code_of_column[at++] = code;

  const KdTree tree(teeth.points);
  GingivaPartition out;
  for (const auto& [code, cloud] : arch.segments) out.rows[code] = {};

  for (Index r = 0; r < arch.residual.size(); ++r) {
    const Index nearest = tree.nearest(arch.residual.points.col(r));
    out.rows[code_of_column[nearest]].push_back(r);
  }

  const bool with_normals = arch.residual.has_normals();
  for (const auto& [code, rows] : out.rows) {
    PointCloud part;
    part.points.resize(3, static_cast<Index>(rows.size()));
    if (with_normals) part.normals.resize(3, static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      part.points.col(static_cast<Index>(i)) = arch.residual.points.col(rows[i]);
      if (with_normals)
        part.normals.col(static_cast<Index>(i)) =
            arch.residual.normals.col(rows[i]);
    }
    out.parts[code] = std::move(part);
  }
  return out;
}

LabeledArch transform_arch(const LabeledArch& arch, const RigidTransform& t) {
  LabeledArch out;
  out.jaw = arch.jaw;
  out.residual = arch.residual.transformed(t);
  for (const auto& [code, cloud] : arch.segments)
    out.segments[code] = cloud.transformed(t);
  return out;
}

}  // namespace dentreg
