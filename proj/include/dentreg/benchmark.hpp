#pragma once

#include <map>
#include <vector>

#include "dentreg/registration.hpp"
#include "dentreg/synthetic.hpp"

namespace dentreg {

struct StageMetrics {
  double e_land = 0;      // mean landmark distance, mm
  double e_surf = 0;      // directed Hausdorff scan->volume teeth, mm
  double e_surf_p95 = 0;  // 95th-percentile companion figure
  std::map<int, double> per_tooth_surf;
};

StageMetrics compute_stage(const LabeledArch& ios, const Points& ios_landmarks,
                           const LabeledArch& cbct,
                           const Points& cbct_landmarks);

struct BenchmarkReport {
  StageMetrics pre;               // identity pose
  StageMetrics after_global;      // FPFH alignment only
  StageMetrics after_refine;      // + constrained ICP
  StageMetrics after_correction;  // + per-tooth correction
  double rotation_recovery_error = 0;     // rad, refined vs ground truth
  double translation_recovery_error = 0;  // mm
  std::vector<double> icp_residuals;
  int icp_iterations = 0;
  std::map<int, double> correction_shift;  // per-tooth transform magnitude, mm
};

struct BenchmarkConfig {
  SynthConfig synth;
  GlobalRegConfig global;
  IcpConfig refine;
  IcpConfig correction;
};

// Full pipeline on one synthetic pair: generate, globally align the teeth
// clouds, refine with constrained ICP, correct per tooth, and score every
// stage against the generator's ground truth.
BenchmarkReport run_benchmark(const BenchmarkConfig& cfg);

}  // namespace dentreg
