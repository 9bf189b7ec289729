#include "dentreg/benchmark.hpp"

#include "dentreg/correction.hpp"
#include "dentreg/metrics.hpp"

namespace dentreg {

StageMetrics compute_stage(const LabeledArch& ios, const Points& ios_landmarks,
                           const LabeledArch& cbct,
                           const Points& cbct_landmarks) {
  const RigidTransform identity = RigidTransform::Identity();
  StageMetrics m;
  m.e_land = landmark_error(ios_landmarks, cbct_landmarks, identity);
  const PointCloud ios_teeth = ios.teeth_cloud();
  const PointCloud cbct_teeth = cbct.teeth_cloud();
  m.e_surf = surface_error(ios_teeth, cbct_teeth, identity);
  m.e_surf_p95 = surface_error_quantile(ios_teeth, cbct_teeth, identity, 0.95);
  for (const auto& [code, segment] : ios.segments) {
    const auto it = cbct.segments.find(code);
    if (it == cbct.segments.end()) continue;
    m.per_tooth_surf[code] = surface_error(segment, it->second, identity);
  }
  return m;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg) {
  const ArchPair pair = generate_arch_pair(cfg.synth);
  const LabeledArch& ios = pair.ios;
  const LabeledArch& cbct = pair.cbct;
  const GroundTruth& truth = pair.truth;

  BenchmarkReport report;
  report.pre = compute_stage(ios, truth.ios_landmarks, cbct,
                             truth.cbct_landmarks);

  const RigidTransform t0 =
      global_align(ios.teeth_cloud(), cbct.teeth_cloud(), cfg.global);
  report.after_global =
      compute_stage(transform_arch(ios, t0), t0 * truth.ios_landmarks, cbct,
                    truth.cbct_landmarks);

  const IcpResult refined = ticp_refine(ios, cbct, t0, cfg.refine);
  const RigidTransform t_star = refined.transform;
  report.icp_residuals = refined.mean_residuals;
  report.icp_iterations = refined.iterations;
  report.rotation_recovery_error = rotation_distance(t_star, truth.global_offset);
  report.translation_recovery_error =
      translation_distance(t_star, truth.global_offset);

  const LabeledArch ios_star = transform_arch(ios, t_star);
  report.after_refine = compute_stage(ios_star, t_star * truth.ios_landmarks,
                                      cbct, truth.cbct_landmarks);

  const GingivaPartition gingiva =
      ios.residual.empty() ? GingivaPartition{} : partition_gingiva(ios_star);
  const CorrectionResult corrected =
      correct_stitching(ios_star, cbct, gingiva, cfg.correction);

  Points corrected_landmarks(3, truth.ios_landmarks.cols());
  for (Index i = 0; i < corrected_landmarks.cols(); ++i) {
    const int code = truth.codes[static_cast<std::size_t>(i)];
    corrected_landmarks.col(i) =
        corrected.per_tooth.at(code) * (t_star * truth.ios_landmarks.col(i));
  }
  report.after_correction = compute_stage(corrected.corrected,
                                          corrected_landmarks, cbct,
                                          truth.cbct_landmarks);
  for (const auto& [code, t] : corrected.per_tooth)
    report.correction_shift[code] = t.translation().norm();
  return report;
}

}  // namespace dentreg
