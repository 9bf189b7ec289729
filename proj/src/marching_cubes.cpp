#include "dentreg/marching_cubes.hpp"

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dentreg/errors.hpp"

namespace dentreg {

#include "marching_cubes_tables.inc"

namespace {

// Cube corner offsets, Lorensen-Cline numbering: 0..3 bottom face (z),
// 4..7 top face (z+1), counterclockwise.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

// Corner pair for each of the 12 cube edges.
constexpr int kEdgeCorner[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0},
                                    {4, 5}, {5, 6}, {6, 7}, {7, 4},
                                    {0, 4}, {1, 5}, {2, 6}, {3, 7}};

}  // namespace

SurfaceMesh marching_cubes(const VoxelMask& mask, double iso) {
  mask.validate();
  if (iso <= 0.0 || iso >= 1.0)
    throw Error("marching_cubes: iso level must lie strictly between 0 and 1");

  bool any0 = false, any1 = false;
  for (std::uint8_t v : mask.values) (v ? any1 : any0) = true;
  if (!any0 || !any1)
    throw EmptySurface("marching_cubes: mask is uniform, no isosurface");

  const int nx = mask.dims.x(), ny = mask.dims.y(), nz = mask.dims.z();

  std::vector<Vec3> verts;
  std::vector<Eigen::Vector3i> tris;
  // (lower sample linear index, axis) -> emitted vertex id
  std::unordered_map<std::uint64_t, int> edge_vertex;

  auto sample_pos = [&](int i, int j, int k) {
    return Vec3(i * mask.spacing.x(), j * mask.spacing.y(),
                k * mask.spacing.z());
  };

  auto vertex_on_edge = [&](int ci[3], int edge) {
    const int* a = kCorner[kEdgeCorner[edge][0]];
    const int* b = kCorner[kEdgeCorner[edge][1]];
    int ai = ci[0] + a[0], aj = ci[1] + a[1], ak = ci[2] + a[2];
    int bi = ci[0] + b[0], bj = ci[1] + b[1], bk = ci[2] + b[2];
    std::uint64_t la = mask.linear(ai, aj, ak);
    std::uint64_t lb = mask.linear(bi, bj, bk);
    int axis = a[0] != b[0] ? 0 : (a[1] != b[1] ? 1 : 2);
    if (la > lb) {
      std::swap(la, lb);
      std::swap(ai, bi);
      std::swap(aj, bj);
      std::swap(ak, bk);
    }
    const std::uint64_t key = la * 3 + axis;
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;

    const double va = mask.at(ai, aj, ak);
    const double vb = mask.at(bi, bj, bk);
    const double t = (iso - va) / (vb - va);
    const Vec3 pa = sample_pos(ai, aj, ak);
    const Vec3 pb = sample_pos(bi, bj, bk);
    const int id = static_cast<int>(verts.size());
    verts.push_back(pa + t * (pb - pa));
    edge_vertex.emplace(key, id);
    return id;
  };

  for (int k = 0; k + 1 < nz; ++k)
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i + 1 < nx; ++i) {
        int cube = 0;
        for (int c = 0; c < 8; ++c)
          if (mask.at(i + kCorner[c][0], j + kCorner[c][1],
                      k + kCorner[c][2]) < iso)
            cube |= 1 << c;
        if (kEdgeTable[cube] == 0) continue;

        int ci[3] = {i, j, k};
        std::array<int, 12> ev{};
        for (int e = 0; e < 12; ++e)
          if (kEdgeTable[cube] & (1 << e)) ev[e] = vertex_on_edge(ci, e);

        for (int t = 0; kTriTable[cube][t] != -1; t += 3)
          tris.emplace_back(ev[kTriTable[cube][t]], ev[kTriTable[cube][t + 1]],
                            ev[kTriTable[cube][t + 2]]);
      }

  if (tris.empty())
    throw EmptySurface("marching_cubes: no surface produced");

  SurfaceMesh mesh;
  mesh.vertices.resize(3, static_cast<Index>(verts.size()));
  for (std::size_t v = 0; v < verts.size(); ++v) mesh.vertices.col(v) = verts[v];
  mesh.faces.resize(3, static_cast<Index>(tris.size()));
  for (std::size_t f = 0; f < tris.size(); ++f) mesh.faces.col(f) = tris[f];
  return mesh;
}

}  // namespace dentreg
