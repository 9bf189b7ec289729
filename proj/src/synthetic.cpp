#include "dentreg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dentreg/errors.hpp"
#include "dentreg/rng.hpp"

namespace dentreg {

namespace {

constexpr double kPi = std::numbers::pi_v<double>;
constexpr double kToothExponent = 4.0;

double signed_pow(double t, double e) {
  return t >= 0.0 ? std::pow(t, e) : -std::pow(-t, e);
}

struct ToothDims {
  double a, b, c;
};

ToothDims dims_for_class(ToothClass cls) {
  switch (cls) {
    case ToothClass::incisor: return {1.6, 2.6, 4.2};
    case ToothClass::canine: return {1.8, 2.8, 4.6};
    case ToothClass::premolar: return {2.0, 3.0, 3.8};
    case ToothClass::molar: return {2.2, 3.4, 3.4};
  }
  return {2.0, 3.0, 4.0};
}

}  // namespace

ToothClass tooth_class_for_code(int code, Jaw jaw) {
  const int central = central_incisor_code(jaw);
  const int pos = code <= central ? central + 1 - code : code - central;
  if (pos < 1 || pos > 8) throw Error("tooth_class_for_code: bad code");
  static const ToothClass slots[8] = {
      ToothClass::incisor,  ToothClass::incisor,  ToothClass::canine,
      ToothClass::premolar, ToothClass::premolar, ToothClass::molar,
      ToothClass::molar,    ToothClass::molar};
  return slots[pos - 1];
}

std::vector<int> arch_codes_descending(int tooth_count, Jaw jaw) {
  if (tooth_count < 1 || tooth_count > 16)
    throw Error("arch_codes_descending: tooth count must be 1..16");
  const int central = central_incisor_code(jaw);
  const int ascending_side = (tooth_count + 1) / 2;  // codes central+1 ...
  const int descending_side = tooth_count - ascending_side;
  std::vector<int> codes;
  for (int p = ascending_side; p >= 1; --p) codes.push_back(central + p);
  for (int p = 1; p <= descending_side; ++p) codes.push_back(central + 1 - p);
  return codes;
}

SurfacePatch superellipsoid_patch(double a, double b, double c,
                                  double exponent, int rings, int sides,
                                  double u_lo, double u_hi) {
  if (rings < 2 || sides < 3 || !(u_lo < u_hi))
    throw Error("superellipsoid_patch: bad parametric grid");
  const bool pole = std::abs(u_hi - kPi / 2.0) < 1e-12;
  const double e = 2.0 / exponent;

  auto surface_point = [&](double u, double v) {
    const double cu = std::cos(u), su = std::sin(u);
    return Vec3(a * signed_pow(cu * std::cos(v), e),
                b * signed_pow(cu * std::sin(v), e), c * signed_pow(su, e));
  };
  auto surface_normal = [&](const Vec3& p) {
    // gradient of |x/a|^p + |y/b|^p + |z/c|^p
    const double px = std::pow(std::abs(p.x() / a), exponent - 1.0);
    const double py = std::pow(std::abs(p.y() / b), exponent - 1.0);
    const double pz = std::pow(std::abs(p.z() / c), exponent - 1.0);
    Vec3 g(px / a * (p.x() >= 0 ? 1 : -1), py / b * (p.y() >= 0 ? 1 : -1),
           pz / c * (p.z() >= 0 ? 1 : -1));
    return Vec3(g.normalized());
  };

  SurfacePatch patch;
  const Index n = static_cast<Index>(rings) * sides + (pole ? 1 : 0);
  patch.points.resize(3, n);
  patch.normals.resize(3, n);

  const double step = (u_hi - u_lo) / rings;
  for (int r = 0; r < rings; ++r)
    for (int s = 0; s < sides; ++s) {
      const double u = u_lo + step * r;
      const double v = -kPi + 2.0 * kPi * s / sides;
      const Index id = static_cast<Index>(r) * sides + s;
      patch.points.col(id) = surface_point(u, v);
      patch.normals.col(id) = surface_normal(patch.points.col(id));
    }
  if (pole) {
    patch.apex = n - 1;
    patch.points.col(patch.apex) = Vec3(0, 0, c);
    patch.normals.col(patch.apex) = Vec3(0, 0, 1);
  }

  std::vector<Eigen::Vector3i> faces;
  for (int r = 0; r + 1 < rings; ++r)
    for (int s = 0; s < sides; ++s) {
      const int s1 = (s + 1) % sides;
      const int a0 = r * sides + s, b0 = r * sides + s1;
      const int c0 = (r + 1) * sides + s1, d0 = (r + 1) * sides + s;
      faces.emplace_back(a0, b0, c0);
      faces.emplace_back(a0, c0, d0);
    }
  if (pole)
    for (int s = 0; s < sides; ++s) {
      const int s1 = (s + 1) % sides;
      faces.emplace_back((rings - 1) * sides + s, (rings - 1) * sides + s1,
                         static_cast<int>(patch.apex));
    }
  patch.faces.resize(3, static_cast<Index>(faces.size()));
  for (std::size_t f = 0; f < faces.size(); ++f) patch.faces.col(f) = faces[f];
  return patch;
}

namespace {

SurfacePatch mirrored_z(SurfacePatch patch) {
  patch.points.row(2) *= -1.0;
  patch.normals.row(2) *= -1.0;
  patch.faces.row(0).swap(patch.faces.row(1));  // keep outward winding
  return patch;
}

SurfacePatch transformed(SurfacePatch patch, const RigidTransform& t) {
  patch.points = t * patch.points;
  patch.normals = t.linear() * patch.normals;
  return patch;
}

PointCloud patch_cloud(const SurfacePatch& p) {
  return PointCloud(p.points, p.normals);
}

void append_patch(SurfaceMesh& mesh, std::vector<int>* label_rows,
                  const SurfacePatch& patch) {
  const Index v0 = mesh.vertices.cols();
  const Index f0 = mesh.faces.cols();
  mesh.vertices.conservativeResize(3, v0 + patch.points.cols());
  mesh.vertices.rightCols(patch.points.cols()) = patch.points;
  mesh.faces.conservativeResize(3, f0 + patch.faces.cols());
  mesh.faces.rightCols(patch.faces.cols()) =
      patch.faces.array() + static_cast<int>(v0);
  if (label_rows)
    for (Index i = 0; i < patch.points.cols(); ++i)
      label_rows->push_back(static_cast<int>(v0 + i));
}

}  // namespace

void SynthConfig::validate() const {
  if (tooth_count < 1 || tooth_count > 16)
    throw Error("synth: tooth_count must be 1..16");
  if (arch_width <= 0 || arch_depth <= 0)
    throw Error("synth: arch extents must be positive");
  if (points_per_tooth < 24) throw Error("synth: points_per_tooth too small");
  if (gingiva_points < 0 || noise_sigma < 0 || drift_sigma_rot < 0 ||
      drift_sigma_trans < 0)
    throw Error("synth: negative parameter");
}

ArchPair generate_arch_pair(const SynthConfig& cfg, bool with_masks) {
  cfg.validate();
  Rng rng(cfg.rng_seed);

  const int j_count = cfg.tooth_count;
  const std::vector<int> codes = arch_codes_descending(j_count, cfg.jaw);

  // Arch spine: a parabola opening posteriorly, teeth evenly spaced in the
  // parameter. Index order matches the clockwise code order.
  auto spine = [&](double s) {
    return Vec3(cfg.arch_width / 2.0 * s, cfg.arch_depth * (1.0 - s * s), 0.0);
  };
  auto spine_tangent = [&](double s) {
    return Vec3(cfg.arch_width / 2.0, -2.0 * cfg.arch_depth * s, 0.0)
        .normalized();
  };

  std::vector<double> params(j_count);
  for (int i = 0; i < j_count; ++i)
    params[i] = j_count == 1 ? 0.0 : -1.0 + 2.0 * i / (j_count - 1);

  const int sides = std::max(8, (int)std::lround(std::sqrt(2.0 * cfg.points_per_tooth)));
  const int rings = std::max(3, (int)std::lround((double)cfg.points_per_tooth / sides));
  const int root_rings = std::max(2, rings / 2);

  ArchPair out;
  out.ios.jaw = out.cbct.jaw = cfg.jaw;
  out.truth.global_offset = cfg.global_offset;
  out.truth.codes = codes;
  out.truth.ios_landmarks.resize(3, j_count);
  out.truth.cbct_landmarks.resize(3, j_count);

  // Cumulative drift walked along the arch. The first scanned tooth anchors
  // the walk: stitching error enters between scans, so tooth i carries i
  // accumulated steps.
  std::vector<RigidTransform> drift(j_count);
  RigidTransform walk = RigidTransform::Identity();
  drift[0] = walk;
  for (int i = 1; i < j_count; ++i) {
    const Vec3 center = spine(params[i]);
    const Mat3 rot =
        Eigen::AngleAxisd(cfg.drift_sigma_rot * rng.normal(), rng.unit_vec3())
            .toRotationMatrix();
    const Vec3 shift = rng.normal_vec3(cfg.drift_sigma_trans);
    walk = rigid_about(rot, center, shift) * walk;
    drift[i] = walk;
  }

  std::vector<SurfacePatch> crowns(j_count);
  for (int i = 0; i < j_count; ++i) {
    const ToothClass cls = tooth_class_for_code(codes[i], cfg.jaw);
    out.truth.classes.push_back(cls);
    ToothDims d = dims_for_class(cls);
    // Teeth of one class stay near-congruent but not identical, the way real
    // first and second molars differ a little.
    const double size = 1.0 + 0.05 * std::cos(2.0 * i + 0.8);
    d.a *= size;
    d.b *= size;
    d.c *= size;

    const Vec3 center = spine(params[i]);
    out.truth.centers.emplace_back(center.x(), center.y());
    const Vec3 tangent = spine_tangent(params[i]);
    RigidTransform pose = RigidTransform::Identity();
    pose.linear() << tangent.x(), -tangent.y(), 0, tangent.y(), tangent.x(), 0,
        0, 0, 1;
    pose.translation() = center;

    const SurfacePatch crown = transformed(
        superellipsoid_patch(d.a, d.b, d.c, kToothExponent, rings, sides, 0.0,
                             kPi / 2.0),
        pose);
    const SurfacePatch root = transformed(
        mirrored_z(superellipsoid_patch(0.55 * d.a, 0.55 * d.b, 2.0 * d.c,
                                        kToothExponent, root_rings, sides, 0.0,
                                        kPi / 2.0)),
        pose);
    crowns[i] = crown;

    // scan tooth: drifted crown
    SurfacePatch ios_tooth = transformed(crown, drift[i]);
    out.truth.ios_landmarks.col(i) = ios_tooth.points.col(crown.apex);
    out.truth.drift[codes[i]] = drift[i];

    // volume tooth: crown + root, offset
    SurfacePatch cbct_crown = transformed(crown, cfg.global_offset);
    SurfacePatch cbct_root = transformed(root, cfg.global_offset);
    out.truth.cbct_landmarks.col(i) = cbct_crown.points.col(crown.apex);

    if (cfg.noise_sigma > 0.0)
      for (Index v = 0; v < ios_tooth.points.cols(); ++v)
        ios_tooth.points.col(v) += rng.normal_vec3(cfg.noise_sigma);

    out.ios.segments[codes[i]] = patch_cloud(ios_tooth);
    PointCloud cbct_tooth = concat(patch_cloud(cbct_crown), patch_cloud(cbct_root));
    out.cbct.segments[codes[i]] = cbct_tooth;

    auto& ios_rows = out.meshes.ios_labels[codes[i]];
    append_patch(out.meshes.ios, &ios_rows, ios_tooth);
    auto& cbct_rows = out.meshes.cbct_labels[codes[i]];
    append_patch(out.meshes.cbct, &cbct_rows, cbct_crown);
    append_patch(out.meshes.cbct, &cbct_rows, cbct_root);

    if (with_masks) {
      const RigidTransform world_from_local = cfg.global_offset * pose;
      const RigidTransform local_from_world = world_from_local.inverse();
      const double spacing = 0.2;
      Vec3 lo = cbct_crown.points.rowwise().minCoeff().cwiseMin(
          cbct_root.points.rowwise().minCoeff());
      Vec3 hi = cbct_crown.points.rowwise().maxCoeff().cwiseMax(
          cbct_root.points.rowwise().maxCoeff());
      lo.array() -= 3.0 * spacing;
      hi.array() += 3.0 * spacing;

      VoxelMask mask;
      mask.spacing = Vec3::Constant(spacing);
      for (int axis = 0; axis < 3; ++axis)
        mask.dims[axis] = (int)std::ceil((hi[axis] - lo[axis]) / spacing) + 1;
      mask.values.assign((std::size_t)mask.dims.x() * mask.dims.y() *
                             mask.dims.z(),
                         0);
      auto inside = [&](const Vec3& world) {
        const Vec3 q = local_from_world * world;
        auto level = [&](double a, double b, double c) {
          return std::pow(std::abs(q.x() / a), kToothExponent) +
                 std::pow(std::abs(q.y() / b), kToothExponent) +
                 std::pow(std::abs(q.z() / c), kToothExponent);
        };
        if (q.z() >= 0.0) return level(d.a, d.b, d.c) <= 1.0;
        return level(0.55 * d.a, 0.55 * d.b, 2.0 * d.c) <= 1.0;
      };
      for (int z = 0; z < mask.dims.z(); ++z)
        for (int y = 0; y < mask.dims.y(); ++y)
          for (int x = 0; x < mask.dims.x(); ++x)
            if (inside(lo + spacing * Vec3(x, y, z))) mask.at(x, y, z) = 1;
      out.meshes.cbct_masks[codes[i]] = std::move(mask);
      out.meshes.mask_origins[codes[i]] = lo;
    }
  }

  // Gingiva ribbon: two quad strips hugging the arch below the crown bases.
  // Stations drift with their nearest tooth, the way gum scanned alongside a
  // tooth moves with that part of the scan.
  if (cfg.gingiva_points > 0) {
    const int stations = std::max(2, cfg.gingiva_points / 4);
    Points gum_pts(3, 4 * stations);
    Points gum_nrm(3, 4 * stations);
    std::vector<Eigen::Vector3i> gum_faces;
    for (int g = 0; g < stations; ++g) {
      const double s = -1.06 + 2.12 * g / (stations - 1);
      const Vec3 base = spine(std::clamp(s, -1.0, 1.0)) +
                        Vec3(cfg.arch_width / 2.0 * (s - std::clamp(s, -1.0, 1.0)),
                             0, 0);
      const Vec3 tangent = spine_tangent(std::clamp(s, -1.0, 1.0));
      const Vec3 lateral(-tangent.y(), tangent.x(), 0.0);

      int nearest = 0;
      for (int i = 1; i < j_count; ++i)
        if (std::abs(params[i] - s) < std::abs(params[nearest] - s))
          nearest = i;
      const RigidTransform& d = drift[nearest];

      const Vec3 rail[4] = {base + 3.6 * lateral + Vec3(0, 0, -0.4),
                            base + 5.2 * lateral + Vec3(0, 0, -2.2),
                            base - 3.6 * lateral + Vec3(0, 0, -0.4),
                            base - 5.2 * lateral + Vec3(0, 0, -2.2)};
      const Vec3 nrm_out = (lateral + Vec3(0, 0, 0.5)).normalized();
      const Vec3 nrm_in = (-lateral + Vec3(0, 0, 0.5)).normalized();
      const Vec3 rail_nrm[4] = {nrm_out, nrm_out, nrm_in, nrm_in};
      for (int rl = 0; rl < 4; ++rl) {
        Vec3 p = d * rail[rl];
        if (cfg.noise_sigma > 0.0) p += rng.normal_vec3(cfg.noise_sigma);
        gum_pts.col(4 * g + rl) = p;
        gum_nrm.col(4 * g + rl) = d.linear() * rail_nrm[rl];
      }
      if (g > 0) {
        const int p0 = 4 * (g - 1);
        for (int strip : {0, 2}) {
          gum_faces.emplace_back(p0 + strip, p0 + strip + 1, p0 + 4 + strip);
          gum_faces.emplace_back(p0 + strip + 1, p0 + 5 + strip, p0 + 4 + strip);
        }
      }
    }
    out.ios.residual = PointCloud(gum_pts, gum_nrm);

    SurfacePatch gum;
    gum.points = gum_pts;
    gum.normals = gum_nrm;
    gum.faces.resize(3, (Index)gum_faces.size());
    for (std::size_t f = 0; f < gum_faces.size(); ++f)
      gum.faces.col(f) = gum_faces[f];
    append_patch(out.meshes.ios, nullptr, gum);
  }

  return out;
}

CongruentRowFixture make_congruent_row_fixture(int teeth,
                                               int points_per_tooth) {
  if (teeth < 2 || teeth > 8)
    throw Error("make_congruent_row_fixture: teeth must be 2..8");
  const ToothDims d = dims_for_class(ToothClass::premolar);
  const int sides = std::max(8, (int)std::lround(std::sqrt(2.0 * points_per_tooth)));
  const int rings = std::max(3, (int)std::lround((double)points_per_tooth / sides));
  const SurfacePatch tooth = superellipsoid_patch(
      d.a, d.b, d.c, kToothExponent, rings, sides, 0.0, kPi / 2.0);

  CongruentRowFixture fix;
  fix.src_landmarks.resize(3, teeth);
  fix.tgt_landmarks.resize(3, teeth);
  RigidTransform shift = RigidTransform::Identity();
  for (int i = 0; i < teeth; ++i) {
    shift.translation() = Vec3(fix.pitch * i, 0, 0);
    const SurfacePatch placed = transformed(tooth, shift);
    const int code = 25 + i;
    fix.src.segments[code] = patch_cloud(placed);
    fix.tgt.segments[code] = patch_cloud(placed);
    fix.src_landmarks.col(i) = placed.points.col(tooth.apex);
    fix.tgt_landmarks.col(i) = placed.points.col(tooth.apex);
  }
  return fix;
}

}  // namespace dentreg
