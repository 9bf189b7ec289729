#include "dentreg/correction.hpp"

#include <string>

#include "dentreg/errors.hpp"

namespace dentreg {

namespace {

PointCloud gather_window(const LabeledArch& arch, int code,
                         const LabeledArch& other) {
  PointCloud window;
  for (int c = code - 1; c <= code + 1; ++c) {
    const auto it = arch.segments.find(c);
    if (it == arch.segments.end()) continue;
    if (other.segments.find(c) == other.segments.end()) continue;
    window = concat(window, it->second);
  }
  return window;
}

}  // namespace

CorrectionResult correct_stitching(const LabeledArch& src,
                                   const LabeledArch& tgt,
                                   const GingivaPartition& gingiva,
                                   const IcpConfig& cfg) {
  src.validate();
  tgt.validate();

  CorrectionResult result;
  result.corrected.jaw = src.jaw;
  result.corrected.residual = src.residual;

  for (const auto& [code, segment] : src.segments) {
    if (tgt.segments.find(code) == tgt.segments.end())
      throw MissingTargetCode("correct_stitching: code " +
                              std::to_string(code) + " missing from target");

    const PointCloud src_window = gather_window(src, code, tgt);
    const PointCloud tgt_window = gather_window(tgt, code, src);
    const IcpResult icp =
        vanilla_icp(src_window, tgt_window, RigidTransform::Identity(), cfg);

    result.per_tooth[code] = icp.transform;
    result.final_residuals[code] =
        icp.mean_residuals.empty() ? 0.0 : icp.mean_residuals.back();
    result.corrected.segments[code] = segment.transformed(icp.transform);

    const auto rows = gingiva.rows.find(code);
    if (rows == gingiva.rows.end()) continue;
    for (Index r : rows->second) {
      result.corrected.residual.points.col(r) =
          icp.transform * src.residual.points.col(r);
      if (src.residual.has_normals())
        result.corrected.residual.normals.col(r) =
            icp.transform.linear() * src.residual.normals.col(r);
    }
  }
  return result;
}

}  // namespace dentreg
