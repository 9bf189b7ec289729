#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "dentreg/arch.hpp"
#include "dentreg/projection.hpp"
#include "dentreg/types.hpp"

namespace dentreg {

// Anatomical class of a universal code (position within its quadrant).
ToothClass tooth_class_for_code(int code, Jaw jaw);

// Codes for a J-tooth arch in clockwise (code-descending) order; the
// code-descending side takes the extra tooth when J is odd.
std::vector<int> arch_codes_descending(int tooth_count, Jaw jaw);

// Parametric superellipsoid band |x/a|^p + |y/b|^p + |z/c|^p = 1 between
// latitudes u_lo and u_hi (radians; pi/2 is the +z pole, emitted as a single
// apex vertex when included). Carries analytic outward normals and outward
// triangle winding.
struct SurfacePatch {
  Points points{3, 0};
  Points normals{3, 0};
  Eigen::Matrix3Xi faces{3, 0};
  Index apex = -1;
};
SurfacePatch superellipsoid_patch(double a, double b, double c,
                                  double exponent, int rings, int sides,
                                  double u_lo, double u_hi);

struct SynthConfig {
  int tooth_count = 14;  // J, at most 16
  Jaw jaw = Jaw::mandible;
  double arch_width = 46.0;   // mm between terminal teeth
  double arch_depth = 30.0;   // mm from terminal line to the incisor apex
  int points_per_tooth = 220;
  int gingiva_points = 600;
  double noise_sigma = 0.0;       // mm, i.i.d. Gaussian on scan points
  double drift_sigma_rot = 0.0;   // rad per arch step
  double drift_sigma_trans = 0.0; // mm per arch step
  RigidTransform global_offset = RigidTransform::Identity();  // volume pose
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct GroundTruth {
  RigidTransform global_offset;
  std::map<int, RigidTransform> drift;  // cumulative per tooth code
  Points ios_landmarks{3, 0};   // cusp apex per tooth, drift applied
  Points cbct_landmarks{3, 0};  // same cusps, offset applied
  std::vector<int> codes;       // arch (clockwise) order, landmark columns
  std::vector<ToothClass> classes;
  std::vector<Eigen::Vector2d> centers;  // occlusal-plane tooth centers
};

// On-disk companions of the clouds: triangle meshes whose vertices are
// exactly the cloud points, per-code vertex labels, and (on request) a
// binary voxel mask per volume tooth with its world origin.
struct SynthMeshes {
  SurfaceMesh ios;
  std::map<int, std::vector<int>> ios_labels;
  SurfaceMesh cbct;
  std::map<int, std::vector<int>> cbct_labels;
  std::map<int, VoxelMask> cbct_masks;
  std::map<int, Vec3> mask_origins;
};

struct ArchPair {
  LabeledArch ios;
  LabeledArch cbct;
  GroundTruth truth;
  SynthMeshes meshes;
};

// Synthetic scan/volume pair with known ground truth. Teeth are
// superellipsoid proxies on a parabolic arch; adjacent same-class teeth are
// congruent. The scan arch gets crown-only teeth, a gingiva ribbon, a
// cumulative per-tooth rigid drift walked along the arch, and optional
// Gaussian surface noise; the volume arch gets clean crowns, root
// extensions, and the global offset. Same seed, same bits.
ArchPair generate_arch_pair(const SynthConfig& cfg, bool with_masks = false);

// A row of identical adjacent teeth one pitch apart, the configuration where
// unconstrained nearest-point matching locks onto the neighboring tooth when
// started near the off-by-one alignment. Codes run consecutively from 25.
struct CongruentRowFixture {
  LabeledArch src;
  LabeledArch tgt;
  Points src_landmarks{3, 0};
  Points tgt_landmarks{3, 0};
  double pitch = 8.0;
};
CongruentRowFixture make_congruent_row_fixture(int teeth = 5,
                                               int points_per_tooth = 200);

}  // namespace dentreg
