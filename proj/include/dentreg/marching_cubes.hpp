#pragma once

#include "dentreg/types.hpp"

namespace dentreg {

// Isosurface of a binary voxel mask via the classic 256-case cube table with
// linear edge interpolation. Sample (i,j,k) sits at (i*sx, j*sy, k*sz) mm.
// Shared cube edges produce shared vertices, so the mesh is watertight for
// masks that do not touch the grid boundary. Triangle winding is
// counterclockwise seen from the low-value (outside) half-space.
// Throws EmptySurface when the mask is uniformly 0 or uniformly 1.
SurfaceMesh marching_cubes(const VoxelMask& mask, double iso = 0.5);

}  // namespace dentreg
