#pragma once

#include <map>

#include "dentreg/arch.hpp"
#include "dentreg/registration.hpp"

namespace dentreg {

// Per-tooth corrective transforms and the arch they produce. The corrected
// residual is the input residual with each gingiva part moved by its tooth's
// transform, so tooth/gum boundaries stay shared.
struct CorrectionResult {
  std::map<int, RigidTransform> per_tooth;
  std::map<int, double> final_residuals;  // mean ICP residual per window, mm
  LabeledArch corrected;
};

// Stitching-error correction: for every tooth code c in src, runs plain ICP
// (identity initialization; src is expected to be registered onto tgt
// already) from the window {c-1, c, c+1} of src segments onto the same
// window of tgt segments, and applies the resulting transform to segment c
// and to gingiva part c only. Window members absent from either arch
// contribute nothing. Per-tooth corrections are independent, so the
// code-ascending order here does not influence the result.
// Throws MissingTargetCode when a src code is absent from tgt.
CorrectionResult correct_stitching(const LabeledArch& src,
                                   const LabeledArch& tgt,
                                   const GingivaPartition& gingiva,
                                   const IcpConfig& cfg);

}  // namespace dentreg
