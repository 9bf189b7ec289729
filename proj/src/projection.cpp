#include "dentreg/projection.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dentreg/errors.hpp"

namespace dentreg {

namespace {
constexpr double kPi = std::numbers::pi_v<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

Mat3 OcclusalFrame::world_to_frame() const {
  Mat3 r;
  r.row(0) = u1.transpose();
  r.row(1) = u2.transpose();
  r.row(2) = u3.transpose();
  return r;
}

RigidTransform OcclusalFrame::frame_to_world() const {
  RigidTransform t = RigidTransform::Identity();
  t.linear() = world_to_frame().transpose();
  t.translation() = origin;
  return t;
}

OcclusalFrame OcclusalFrame::from_transform(const RigidTransform& t) {
  OcclusalFrame f;
  f.origin = t.translation();
  f.u1 = t.linear().col(0);
  f.u2 = t.linear().col(1);
  f.u3 = t.linear().col(2);
  return f;
}

OcclusalFrame occlusal_frame(const PointCloud& cloud) {
  if (!cloud.has_normals())
    throw Error("occlusal_frame: cloud must carry normals");
  const Index n = cloud.size();
  if (n < 3) throw Error("occlusal_frame: need at least 3 points");

  const Vec3 centroid = cloud.points.rowwise().mean();
  const Points centered = cloud.points.colwise() - centroid;
  const Mat3 covariance = centered * centered.transpose();

  Eigen::SelfAdjointEigenSolver<Mat3> eig(covariance);
  // ascending order: col(2) = pc1, col(1) = pc2, col(0) = pc3
  const auto& evals = eig.eigenvalues();
  if (evals[2] <= 0.0 ||
      evals[1] - evals[0] <= 1e-9 * evals[2])
    throw DegenerateConfiguration(
        "occlusal_frame: second/third principal values too close to orient");

  Vec3 pc2 = eig.eigenvectors().col(1);
  Vec3 pc3 = eig.eigenvectors().col(0);

  Vec3 unit_sum = Vec3::Zero();
  for (Index i = 0; i < n; ++i) {
    const double len = centered.col(i).norm();
    if (len > 0.0) unit_sum += centered.col(i) / len;
  }
  if (pc2.dot(unit_sum) < 0.0) pc2 = -pc2;

  const Vec3 normal_sum = cloud.normals.rowwise().sum();
  if (pc3.dot(normal_sum) < 0.0) pc3 = -pc3;

  OcclusalFrame frame;
  frame.origin = centroid;
  frame.u2 = pc2;
  frame.u3 = pc3;
  frame.u1 = pc2.cross(pc3);
  return frame;
}

namespace {

struct RasterSetup {
  int width, height;
  double spacing;
  Vec3 offset;  // (-(N1+1)/2, (N2+1)/2, max |p|)

  double ray_x(int u) const { return spacing * (u + offset.x()); }
  double ray_y(int v) const { return spacing * (-v + offset.y()); }
};

struct Hit {
  double z = -kInf;
  double shade = 0.0;    // <n, u3> at the hit
  double lateral = kInf; // splat distance to the ray, mesh hits use 0
  Index point = -1;
};

RenderedImages assemble(const RasterSetup& s, const std::vector<Hit>& hits) {
  double zmin = kInf, zmax = -kInf;
  bool any = false;
  for (const Hit& h : hits)
    if (h.z > -kInf) {
      any = true;
      zmin = std::min(zmin, h.z);
      zmax = std::max(zmax, h.z);
    }
  if (!any) throw EmptyProjection("render_images: no ray hit the surface");

  RenderedImages out;
  for (RasterImage* img : {&out.rendered, &out.depth}) {
    img->width = s.width;
    img->height = s.height;
    img->spacing = s.spacing;
    img->offset = s.offset;
    img->values = Eigen::MatrixXd::Zero(s.height, s.width);
  }
  const double span = zmax - zmin;
  for (int v = 1; v <= s.height; ++v)
    for (int u = 1; u <= s.width; ++u) {
      const Hit& h = hits[(v - 1) * s.width + (u - 1)];
      if (h.z <= -kInf) continue;
      out.rendered.at(u, v) = std::max(h.shade, 0.0);
      out.depth.at(u, v) = span > 0.0 ? 1.0 - (h.z - zmin) / span : 1.0;
    }
  return out;
}

RasterSetup make_setup(const Points& frame_pts, int width, int height,
                       double spacing) {
  if (width < 1 || height < 1 || spacing <= 0.0)
    throw Error("render_images: bad raster geometry");
  double max_norm = 0.0;
  for (Index i = 0; i < frame_pts.cols(); ++i)
    max_norm = std::max(max_norm, frame_pts.col(i).norm());
  return {width, height, spacing,
          Vec3(-(width + 1) / 2.0, (height + 1) / 2.0, max_norm)};
}

}  // namespace

RenderedImages render_images(const SurfaceMesh& mesh,
                             const OcclusalFrame& frame, int width, int height,
                             double spacing) {
  if (mesh.face_count() == 0) throw Error("render_images: empty mesh");
  const Mat3 rot = frame.world_to_frame();
  const Points pts = rot * (mesh.vertices.colwise() - frame.origin);
  const RasterSetup s = make_setup(pts, width, height, spacing);

  std::vector<Hit> hits(static_cast<std::size_t>(width) * height);
  for (Index f = 0; f < mesh.face_count(); ++f) {
    const Vec3 a = pts.col(mesh.faces(0, f));
    const Vec3 b = pts.col(mesh.faces(1, f));
    const Vec3 c = pts.col(mesh.faces(2, f));
    const Vec3 n = (b - a).cross(c - a);
    const double area2 = n.z();  // signed projected area * 2
    if (area2 == 0.0) continue;  // edge-on to the rays
    const double shade = n.normalized().z();

    const double minx = std::min({a.x(), b.x(), c.x()});
    const double maxx = std::max({a.x(), b.x(), c.x()});
    const double miny = std::min({a.y(), b.y(), c.y()});
    const double maxy = std::max({a.y(), b.y(), c.y()});
    const int u_lo = std::max(1, (int)std::ceil(minx / spacing - s.offset.x()));
    const int u_hi =
        std::min(width, (int)std::floor(maxx / spacing - s.offset.x()));
    const int v_lo =
        std::max(1, (int)std::ceil(s.offset.y() - maxy / spacing));
    const int v_hi =
        std::min(height, (int)std::floor(s.offset.y() - miny / spacing));

    for (int v = v_lo; v <= v_hi; ++v)
      for (int u = u_lo; u <= u_hi; ++u) {
        const double px = s.ray_x(u), py = s.ray_y(v);
        // barycentric via signed areas, orientation-normalized
        const double w0 = ((b.x() - px) * (c.y() - py) -
                           (c.x() - px) * (b.y() - py)) / area2;
        const double w1 = ((c.x() - px) * (a.y() - py) -
                           (a.x() - px) * (c.y() - py)) / area2;
        const double w2 = 1.0 - w0 - w1;
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        const double z = w0 * a.z() + w1 * b.z() + w2 * c.z();
        Hit& h = hits[(v - 1) * width + (u - 1)];
        if (z > h.z) {
          h.z = z;
          h.shade = shade;
          h.lateral = 0.0;
        }
      }
  }
  return assemble(s, hits);
}

RenderedImages render_images(const PointCloud& cloud,
                             const OcclusalFrame& frame, int width, int height,
                             double spacing) {
  if (!cloud.has_normals())
    throw Error("render_images: point splatting needs normals");
  const Mat3 rot = frame.world_to_frame();
  const Points pts = rot * (cloud.points.colwise() - frame.origin);
  const Points nrm = rot * cloud.normals;
  const RasterSetup s = make_setup(pts, width, height, spacing);

  const double radius2 = spacing * spacing / 2.0;
  std::vector<Hit> hits(static_cast<std::size_t>(width) * height);
  for (Index i = 0; i < pts.cols(); ++i) {
    const double fu = pts(0, i) / spacing - s.offset.x();
    const double fv = s.offset.y() - pts(1, i) / spacing;
    for (int v = (int)std::floor(fv); v <= (int)std::ceil(fv); ++v)
      for (int u = (int)std::floor(fu); u <= (int)std::ceil(fu); ++u) {
        if (u < 1 || u > width || v < 1 || v > height) continue;
        const double dx = pts(0, i) - s.ray_x(u);
        const double dy = pts(1, i) - s.ray_y(v);
        const double d2 = dx * dx + dy * dy;
        if (d2 >= radius2) continue;
        Hit& h = hits[(v - 1) * width + (u - 1)];
        // laterally nearest wins; ties toward greater height, then lower index
        if (d2 < h.lateral || (d2 == h.lateral && pts(2, i) > h.z)) {
          h.lateral = d2;
          h.z = pts(2, i);
          h.shade = nrm(2, i);
          h.point = i;
        }
      }
  }
  return assemble(s, hits);
}

const char* to_string(ToothClass c) {
  switch (c) {
    case ToothClass::incisor: return "incisor";
    case ToothClass::canine: return "canine";
    case ToothClass::premolar: return "premolar";
    case ToothClass::molar: return "molar";
  }
  return "incisor";
}

ToothClass tooth_class_from_string(const std::string& s) {
  if (s == "incisor") return ToothClass::incisor;
  if (s == "canine") return ToothClass::canine;
  if (s == "premolar") return ToothClass::premolar;
  if (s == "molar") return ToothClass::molar;
  throw MalformedField("unknown tooth class: " + s);
}

void BoundingBox2D::validate() const {
  if (!(u1 < u2 && v1 < v2))
    throw MalformedField("bounding box: requires u1 < u2 and v1 < v2");
}

RoiExtraction extract_rois(const PointCloud& cloud, const OcclusalFrame& frame,
                           const std::vector<BoundingBox2D>& boxes,
                           double spacing) {
  if (spacing <= 0.0) throw Error("extract_rois: spacing must be positive");
  const Mat3 rot = frame.world_to_frame();
  const Points pts = rot * (cloud.points.colwise() - frame.origin);

  RoiExtraction out;
  for (const BoundingBox2D& box : boxes) {
    box.validate();
    std::vector<Index> members;
    for (Index i = 0; i < pts.cols(); ++i) {
      const double x = pts(0, i), y = pts(1, i);
      if (x >= spacing * box.u1 && x < spacing * box.u2 &&
          y >= -spacing * box.v2 && y < -spacing * box.v1)
        members.push_back(i);
    }
    PointCloud roi;
    roi.points.resize(3, static_cast<Index>(members.size()));
    if (cloud.has_normals())
      roi.normals.resize(3, static_cast<Index>(members.size()));
    for (std::size_t m = 0; m < members.size(); ++m) {
      roi.points.col(static_cast<Index>(m)) = cloud.points.col(members[m]);
      if (cloud.has_normals())
        roi.normals.col(static_cast<Index>(m)) = cloud.normals.col(members[m]);
    }
    out.empty_roi.push_back(members.empty());
    out.members.push_back(std::move(members));
    out.rois.push_back(std::move(roi));
  }
  return out;
}

namespace {

using Vec2 = Eigen::Vector2d;

double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Rotation from a to b, measured in the given sense, in (0, 2*pi].
double turn_angle(const Vec2& a, const Vec2& b, bool clockwise) {
  double ang = std::atan2(cross2(a, b), a.dot(b));  // ccw-positive
  if (clockwise) ang = -ang;
  if (ang <= 0.0) ang += 2.0 * kPi;
  return ang;
}

struct PivotWalk {
  std::vector<int> path;
  bool closed = false;
};

// Rolls a disk of radius r over the centers, starting at `seed` with the
// disk centered straight below it, picking at each step the first unvisited
// point the rotating disk touches. Stops when the walk returns to the seed
// or no unvisited point is within reach.
PivotWalk pivot_walk(const std::vector<Vec2>& pts, int seed, double r,
                     bool clockwise, std::vector<bool>& visited) {
  PivotWalk walk;
  walk.path.push_back(seed);
  visited[seed] = true;

  int current = seed;
  Vec2 center = pts[seed] + Vec2(0.0, -r);
  const double reach2 = 4.0 * r * r;

  for (std::size_t step = 0; step <= 2 * pts.size(); ++step) {
    int best = -1;
    double best_angle = kInf;
    Vec2 best_center;
    for (int q = 0; q < static_cast<int>(pts.size()); ++q) {
      const bool closing = q == seed && walk.path.size() >= 3;
      if (q == current || (visited[q] && !closing)) continue;
      const Vec2 d = pts[q] - pts[current];
      const double d2 = d.squaredNorm();
      if (d2 == 0.0 || d2 > reach2) continue;
      const double dist = std::sqrt(d2);
      const double h = std::sqrt(std::max(r * r - d2 / 4.0, 0.0));
      const Vec2 mid = (pts[current] + pts[q]) / 2.0;
      const Vec2 perp = Vec2(-d.y(), d.x()) / dist;
      for (const Vec2& m : {Vec2(mid + h * perp), Vec2(mid - h * perp)}) {
        const double ang =
            turn_angle(center - pts[current], m - pts[current], clockwise);
        if (ang < best_angle || (ang == best_angle && q < best)) {
          best_angle = ang;
          best = q;
          best_center = m;
        }
      }
    }
    if (best < 0) break;
    if (best == seed) {
      walk.closed = true;
      break;
    }
    walk.path.push_back(best);
    visited[best] = true;
    current = best;
    center = best_center;
  }
  return walk;
}

double signed_area(const std::vector<Vec2>& pts, const std::vector<int>& cycle) {
  double area = 0.0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const Vec2& a = pts[cycle[i]];
    const Vec2& b = pts[cycle[(i + 1) % cycle.size()]];
    area += cross2(a, b);
  }
  return area / 2.0;
}

// Universal-code slots per quadrant, central incisor outward.
const ToothClass kQuadrantSlots[8] = {
    ToothClass::incisor,  ToothClass::incisor,  ToothClass::canine,
    ToothClass::premolar, ToothClass::premolar, ToothClass::molar,
    ToothClass::molar,    ToothClass::molar};

// Quadrant positions 1..8 for the outward class sequence; positions must be
// monotone so classes appear in anatomical order.
std::vector<int> assign_slots(const std::vector<ToothClass>& outward) {
  std::vector<int> positions;
  int last = 0;
  for (ToothClass cls : outward) {
    int chosen = -1;
    for (int p = last + 1; p <= 8; ++p)
      if (kQuadrantSlots[p - 1] == cls) {
        chosen = p;
        break;
      }
    if (chosen < 0)
      throw InconsistentClasses(
          "order_and_identify: class sequence violates quadrant layout");
    positions.push_back(chosen);
    last = chosen;
  }
  return positions;
}

}  // namespace

ArchOrdering order_and_identify(const std::vector<Vec2>& centers,
                                const std::vector<ToothClass>& classes,
                                Jaw jaw, double pivot_radius) {
  const int n = static_cast<int>(centers.size());
  if (n < 3) throw Error("order_and_identify: need at least 3 centers");
  if (classes.size() != centers.size())
    throw Error("order_and_identify: class count mismatch");

  double r = pivot_radius;
  if (r <= 0.0) {
    std::vector<double> nn(n, kInf);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) nn[i] = std::min(nn[i], (centers[i] - centers[j]).norm());
    std::sort(nn.begin(), nn.end());
    r = 1.5 * nn[(n - 1) / 2];
  }
  if (!(r > 0.0) || !std::isfinite(r))
    throw HullFailure("order_and_identify: coincident centers");

  // Seed at the lowest center; walk the outer boundary clockwise, and when
  // that arm runs out of reach walk the other way from the seed. The closing
  // edge between the two loose ends completes the cycle whatever the radius;
  // it is the natural candidate for the longest-edge removal below.
  int seed = 0;
  for (int i = 1; i < n; ++i) {
    const auto key = std::make_pair(centers[i].y(), centers[i].x());
    const auto best = std::make_pair(centers[seed].y(), centers[seed].x());
    if (key < best) seed = i;
  }

  std::vector<bool> visited(n, false);
  const PivotWalk arm1 = pivot_walk(centers, seed, r, true, visited);
  std::vector<int> cycle = arm1.path;
  if (!arm1.closed) {
    std::vector<bool> visited2 = visited;
    visited2[seed] = false;
    const PivotWalk arm2 = pivot_walk(centers, seed, r, false, visited2);
    std::vector<int> prefix(arm2.path.rbegin(), arm2.path.rend() - 1);
    cycle.insert(cycle.begin(), prefix.begin(), prefix.end());
    for (int i = 0; i < n; ++i) visited[i] = visited[i] || visited2[i];
  }
  for (int i = 0; i < n; ++i)
    if (!visited[i])
      throw HullFailure("order_and_identify: hull does not visit every center");

  if (signed_area(centers, cycle) > 0.0)
    std::reverse(cycle.begin(), cycle.end());

  // Remove the longest cycle edge (ties toward the earliest edge).
  int longest = 0;
  double longest_d2 = -1.0;
  for (int e = 0; e < n; ++e) {
    const double d2 =
        (centers[cycle[e]] - centers[cycle[(e + 1) % n]]).squaredNorm();
    if (d2 > longest_d2) {
      longest_d2 = d2;
      longest = e;
    }
  }
  std::vector<int> path;
  for (int i = 0; i < n; ++i) path.push_back(cycle[(longest + 1 + i) % n]);

  // Arc-length positions along the open path.
  std::vector<double> pos(n, 0.0);
  for (int i = 1; i < n; ++i)
    pos[i] = pos[i - 1] + (centers[path[i]] - centers[path[i - 1]]).norm();

  // The split lies between the adjacent incisor pair nearest the arc-length
  // midpoint.
  const double mid = pos[n - 1] / 2.0;
  int split = -1;
  double split_gap = kInf;
  for (int i = 0; i + 1 < n; ++i) {
    if (classes[path[i]] != ToothClass::incisor ||
        classes[path[i + 1]] != ToothClass::incisor)
      continue;
    const double gap = std::abs((pos[i] + pos[i + 1]) / 2.0 - mid);
    if (gap < split_gap) {
      split_gap = gap;
      split = i;
    }
  }
  if (split < 0)
    throw InconsistentClasses(
        "order_and_identify: no adjacent incisor pair to split on");

  // Clockwise traversal runs code-descending in the universal scheme for
  // both jaws, so the first arm counts up from the post-central code and the
  // second counts down from the central code.
  const int central = central_incisor_code(jaw);
  std::vector<ToothClass> outward_a, outward_b;
  for (int i = split; i >= 0; --i) outward_a.push_back(classes[path[i]]);
  for (int i = split + 1; i < n; ++i) outward_b.push_back(classes[path[i]]);
  const std::vector<int> slots_a = assign_slots(outward_a);
  const std::vector<int> slots_b = assign_slots(outward_b);

  ArchOrdering out;
  out.order = path;
  out.codes.resize(n);
  for (int i = 0; i <= split; ++i)
    out.codes[i] = central + slots_a[split - i];
  for (int i = split + 1; i < n; ++i)
    out.codes[i] = central + 1 - slots_b[i - split - 1];
  return out;
}

}  // namespace dentreg
