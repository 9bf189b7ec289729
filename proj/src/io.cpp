#include "dentreg/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "dentreg/errors.hpp"

namespace dentreg::io {

namespace {

constexpr int kSchemaVersion = 1;

void append_le32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char(v >> (8 * i) & 0xff));
}

void append_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  append_le32(out, bits);
}

std::uint32_t take_le32(const std::string& s, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = v << 8 | std::uint8_t(s[at + i]);
  return v;
}

float take_f32(const std::string& s, std::size_t at) {
  const std::uint32_t bits = take_le32(s, at);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

// Header line "dentreg-<kind> v<version>". Wrong kind is a malformed file;
// right kind with an unknown version is a schema mismatch.
std::string check_header(std::istream& in, const std::string& kind) {
  std::string line;
  if (!std::getline(in, line))
    throw MalformedField(kind + ": empty file");
  const std::string prefix = "dentreg-" + kind + " v";
  if (line.rfind(prefix, 0) != 0)
    throw MalformedField(kind + ": not a dentreg-" + kind + " file");
  if (line != prefix + std::to_string(kSchemaVersion))
    throw SchemaVersionMismatch(kind + ": unsupported version '" + line + "'");
  return line;
}

std::string header_line(const std::string& kind) {
  return "dentreg-" + kind + " v" + std::to_string(kSchemaVersion) + "\n";
}

double parse_double(const std::string& token, const std::string& context) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw MalformedField(context + ": bad number '" + token + "'");
  }
  if (used != token.size() || !std::isfinite(v))
    throw MalformedField(context + ": bad number '" + token + "'");
  return v;
}

long parse_long(const std::string& token, const std::string& context) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(token, &used);
  } catch (const std::exception&) {
    throw MalformedField(context + ": bad integer '" + token + "'");
  }
  if (used != token.size())
    throw MalformedField(context + ": bad integer '" + token + "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileIoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FileIoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw FileIoError("cannot rename into " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileIoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// STL

namespace {

struct SoupTriangle {
  float v[9];
};

std::vector<SoupTriangle> parse_stl_binary(const std::string& bytes) {
  if (bytes.size() < 84) throw MalformedStl("binary stl: truncated header");
  const std::uint32_t count = take_le32(bytes, 80);
  if (bytes.size() != 84 + 50ull * count)
    throw MalformedStl("binary stl: size does not match triangle count");
  std::vector<SoupTriangle> tris(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::size_t base = 84 + 50ull * t + 12;  // skip stored normal
    for (int k = 0; k < 9; ++k) {
      tris[t].v[k] = take_f32(bytes, base + 4ull * k);
      if (!std::isfinite(tris[t].v[k]))
        throw MalformedStl("binary stl: non-finite vertex");
    }
  }
  return tris;
}

std::vector<SoupTriangle> parse_stl_ascii(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string tok;
  std::vector<SoupTriangle> tris;
  SoupTriangle cur{};
  int coord = 0;
  bool in_facet = false;
  while (in >> tok) {
    if (tok == "facet") {
      in_facet = true;
      coord = 0;
    } else if (tok == "vertex") {
      if (!in_facet || coord >= 9)
        throw MalformedStl("ascii stl: stray vertex");
      for (int k = 0; k < 3; ++k) {
        std::string num;
        if (!(in >> num)) throw MalformedStl("ascii stl: truncated vertex");
        cur.v[coord + k] =
            static_cast<float>(parse_double(num, "ascii stl vertex"));
      }
      coord += 3;
    } else if (tok == "endfacet") {
      if (!in_facet || coord != 9)
        throw MalformedStl("ascii stl: facet without 3 vertices");
      tris.push_back(cur);
      in_facet = false;
    }
  }
  if (in_facet) throw MalformedStl("ascii stl: unterminated facet");
  return tris;
}

bool looks_binary(const std::string& bytes) {
  if (bytes.size() >= 84 &&
      bytes.size() == 84 + 50ull * take_le32(bytes, 80))
    return true;
  std::size_t at = 0;
  while (at < bytes.size() && std::isspace(std::uint8_t(bytes[at]))) ++at;
  return bytes.compare(at, 5, "solid") != 0;
}

struct VertexKey {
  float x, y, z;
  bool operator==(const VertexKey&) const = default;
};
struct VertexKeyHash {
  std::size_t operator()(const VertexKey& k) const {
    std::uint32_t a, b, c;
    std::memcpy(&a, &k.x, 4);
    std::memcpy(&b, &k.y, 4);
    std::memcpy(&c, &k.z, 4);
    std::size_t h = a;
    h = h * 0x9e3779b97f4a7c15ull ^ b;
    h = h * 0x9e3779b97f4a7c15ull ^ c;
    return h;
  }
};

SurfaceMesh weld_soup(const std::vector<SoupTriangle>& tris) {
  if (tris.empty()) throw MalformedStl("stl: no triangles");
  std::unordered_map<VertexKey, int, VertexKeyHash> ids;
  std::vector<VertexKey> verts;
  SurfaceMesh mesh;
  mesh.faces.resize(3, static_cast<Index>(tris.size()));
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int c = 0; c < 3; ++c) {
      const VertexKey key{tris[t].v[3 * c], tris[t].v[3 * c + 1],
                          tris[t].v[3 * c + 2]};
      auto [it, inserted] = ids.try_emplace(key, (int)verts.size());
      if (inserted) verts.push_back(key);
      mesh.faces(c, static_cast<Index>(t)) = it->second;
    }
  mesh.vertices.resize(3, static_cast<Index>(verts.size()));
  for (std::size_t v = 0; v < verts.size(); ++v)
    mesh.vertices.col(static_cast<Index>(v)) =
        Vec3(verts[v].x, verts[v].y, verts[v].z);
  return mesh;
}

}  // namespace

SurfaceMesh parse_stl(const std::string& bytes) {
  return weld_soup(looks_binary(bytes) ? parse_stl_binary(bytes)
                                       : parse_stl_ascii(bytes));
}

SurfaceMesh read_stl(const fs::path& path) { return parse_stl(read_file(path)); }

void write_stl(const SurfaceMesh& mesh, const fs::path& path, bool ascii) {
  if (mesh.face_count() == 0) throw MalformedStl("write_stl: empty mesh");
  std::string out;
  auto face_normal = [&](Index f) {
    const Vec3 a = mesh.vertices.col(mesh.faces(0, f));
    const Vec3 b = mesh.vertices.col(mesh.faces(1, f));
    const Vec3 c = mesh.vertices.col(mesh.faces(2, f));
    const Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    return len > 0 ? Vec3(n / len) : Vec3(0, 0, 0);
  };

  if (ascii) {
    out += "solid dentreg\n";
    char buf[256];
    for (Index f = 0; f < mesh.face_count(); ++f) {
      const Vec3 n = face_normal(f);
      std::snprintf(buf, sizeof buf, "  facet normal %g %g %g\n", n.x(), n.y(),
                    n.z());
      out += buf;
      out += "    outer loop\n";
      for (int c = 0; c < 3; ++c) {
        const Vec3 v = mesh.vertices.col(mesh.faces(c, f));
        std::snprintf(buf, sizeof buf, "      vertex %.9g %.9g %.9g\n",
                      float(v.x()), float(v.y()), float(v.z()));
        out += buf;
      }
      out += "    endloop\n  endfacet\n";
    }
    out += "endsolid dentreg\n";
  } else {
    out.assign(80, '\0');
    const char tag[] = "dentreg binary stl";
    std::memcpy(out.data(), tag, sizeof tag - 1);
    append_le32(out, static_cast<std::uint32_t>(mesh.face_count()));
    for (Index f = 0; f < mesh.face_count(); ++f) {
      const Vec3 n = face_normal(f);
      for (int k = 0; k < 3; ++k) append_f32(out, float(n[k]));
      for (int c = 0; c < 3; ++c) {
        const Vec3 v = mesh.vertices.col(mesh.faces(c, f));
        for (int k = 0; k < 3; ++k) append_f32(out, float(v[k]));
      }
      out.push_back('\0');
      out.push_back('\0');
    }
  }
  write_file_atomic(path, out);
}

SurfaceMesh canonical_stl_mesh(const SurfaceMesh& mesh,
                               std::vector<int>* old_to_new) {
  std::unordered_map<VertexKey, int, VertexKeyHash> ids;
  std::vector<VertexKey> verts;
  std::vector<int> remap(mesh.vertex_count(), -1);

  SurfaceMesh out;
  out.faces.resize(3, mesh.face_count());
  for (Index f = 0; f < mesh.face_count(); ++f)
    for (int c = 0; c < 3; ++c) {
      const int old = mesh.faces(c, f);
      const Vec3 v = mesh.vertices.col(old);
      const VertexKey key{float(v.x()), float(v.y()), float(v.z())};
      auto [it, inserted] = ids.try_emplace(key, (int)verts.size());
      if (inserted) verts.push_back(key);
      remap[old] = it->second;
      out.faces(c, f) = it->second;
    }
  out.vertices.resize(3, static_cast<Index>(verts.size()));
  for (std::size_t v = 0; v < verts.size(); ++v)
    out.vertices.col(static_cast<Index>(v)) =
        Vec3(verts[v].x, verts[v].y, verts[v].z);
  if (old_to_new) *old_to_new = std::move(remap);
  return out;
}

// ---------------------------------------------------------------------------
// labels

void write_labels(const LabelMap& labels, const fs::path& path) {
  std::string out = header_line("labels");
  out += labels.jaw == Jaw::maxilla ? "jaw maxilla\n" : "jaw mandible\n";
  for (const auto& [code, rows] : labels.segments) {
    out += "segment " + std::to_string(code);
    for (int r : rows) out += ' ' + std::to_string(r);
    out += '\n';
  }
  write_file_atomic(path, out);
}

LabelMap read_labels(const fs::path& path) {
  std::istringstream in(read_file(path));
  check_header(in, "labels");
  LabelMap out;
  std::string line;
  bool have_jaw = false;
  while (std::getline(in, line)) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "jaw") {
      if (tok.size() != 2 || (tok[1] != "maxilla" && tok[1] != "mandible"))
        throw MalformedField("labels: bad jaw line");
      out.jaw = tok[1] == "maxilla" ? Jaw::maxilla : Jaw::mandible;
      have_jaw = true;
    } else if (tok[0] == "segment") {
      if (tok.size() < 3) throw MalformedField("labels: segment needs indices");
      const int code = (int)parse_long(tok[1], "labels code");
      auto& rows = out.segments[code];
      if (!rows.empty()) throw MalformedField("labels: duplicate code");
      for (std::size_t i = 2; i < tok.size(); ++i)
        rows.push_back((int)parse_long(tok[i], "labels index"));
    } else {
      throw MalformedField("labels: unknown line '" + tok[0] + "'");
    }
  }
  if (!have_jaw) throw MalformedField("labels: missing jaw line");
  for (const auto& [code, rows] : out.segments)
    if (!valid_tooth_code(code, out.jaw))
      throw MalformedField("labels: code " + std::to_string(code) +
                           " invalid for jaw");
  return out;
}

LabeledArch arch_from_mesh(const SurfaceMesh& mesh, const LabelMap& labels) {
  const Index n = mesh.vertex_count();
  std::vector<int> owner(n, -1);
  for (const auto& [code, rows] : labels.segments)
    for (int r : rows) {
      if (r < 0 || r >= n)
        throw MalformedField("labels: vertex index out of range");
      if (owner[r] != -1)
        throw MalformedField("labels: vertex assigned to two segments");
      owner[r] = code;
    }

  LabeledArch arch;
  arch.jaw = labels.jaw;
  for (const auto& [code, rows] : labels.segments) {
    PointCloud cloud;
    cloud.points.resize(3, static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      cloud.points.col(static_cast<Index>(i)) = mesh.vertices.col(rows[i]);
    arch.segments[code] = std::move(cloud);
  }
  std::vector<Index> rest;
  for (Index i = 0; i < n; ++i)
    if (owner[i] == -1) rest.push_back(i);
  arch.residual.points.resize(3, static_cast<Index>(rest.size()));
  for (std::size_t i = 0; i < rest.size(); ++i)
    arch.residual.points.col(static_cast<Index>(i)) = mesh.vertices.col(rest[i]);
  arch.validate();
  return arch;
}

// ---------------------------------------------------------------------------
// transforms

void write_transform(const RigidTransform& t, const fs::path& path) {
  std::string out = header_line("transform");
  const Eigen::Matrix4d m = t.matrix();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (c) out += ' ';
      out += r == 3 ? (c == 3 ? "1" : "0") : format_double(m(r, c));
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

RigidTransform read_transform(const fs::path& path) {
  std::istringstream in(read_file(path));
  check_header(in, "transform");
  Eigen::Matrix4d m;
  std::string line;
  for (int r = 0; r < 4; ++r) {
    if (!std::getline(in, line))
      throw MalformedField("transform: fewer than 4 rows");
    const auto tok = split_ws(line);
    if (tok.size() != 4) throw MalformedField("transform: row needs 4 values");
    for (int c = 0; c < 4; ++c) m(r, c) = parse_double(tok[c], "transform");
  }
  if (m.row(3) != Eigen::RowVector4d(0, 0, 0, 1))
    throw MalformedField("transform: bottom row must be 0 0 0 1");
  RigidTransform t = RigidTransform::Identity();
  t.linear() = m.topLeftCorner<3, 3>();
  t.translation() = m.topRightCorner<3, 1>();
  if (!is_rigid(t, 1e-6))
    throw MalformedField("transform: rotation block is not orthonormal");
  return t;
}

// ---------------------------------------------------------------------------
// points

void write_points(const Eigen::Ref<const Points>& pts, const fs::path& path) {
  std::string out = header_line("points");
  out += "count " + std::to_string(pts.cols()) + '\n';
  for (Index i = 0; i < pts.cols(); ++i)
    out += format_double(pts(0, i)) + ' ' + format_double(pts(1, i)) + ' ' +
           format_double(pts(2, i)) + '\n';
  write_file_atomic(path, out);
}

Points read_points(const fs::path& path) {
  std::istringstream in(read_file(path));
  check_header(in, "points");
  std::string line;
  if (!std::getline(in, line)) throw MalformedField("points: missing count");
  const auto head = split_ws(line);
  if (head.size() != 2 || head[0] != "count")
    throw MalformedField("points: missing count");
  const long n = parse_long(head[1], "points count");
  if (n < 0) throw MalformedField("points: negative count");
  Points pts(3, n);
  for (long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw MalformedField("points: truncated");
    const auto tok = split_ws(line);
    if (tok.size() != 3) throw MalformedField("points: row needs 3 values");
    for (int c = 0; c < 3; ++c) pts(c, i) = parse_double(tok[c], "points");
  }
  return pts;
}

// ---------------------------------------------------------------------------
// boxes

void write_boxes(const std::vector<BoundingBox2D>& boxes,
                 const fs::path& path) {
  std::string out = header_line("boxes");
  for (const BoundingBox2D& b : boxes)
    out += "box " + format_double(b.u1) + ' ' + format_double(b.v1) + ' ' +
           format_double(b.u2) + ' ' + format_double(b.v2) + ' ' +
           to_string(b.tooth_class) + '\n';
  write_file_atomic(path, out);
}

std::vector<BoundingBox2D> read_boxes(const fs::path& path) {
  std::istringstream in(read_file(path));
  check_header(in, "boxes");
  std::vector<BoundingBox2D> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] != "box" || tok.size() != 6)
      throw MalformedField("boxes: expected 'box u1 v1 u2 v2 class'");
    BoundingBox2D b;
    b.u1 = parse_double(tok[1], "boxes");
    b.v1 = parse_double(tok[2], "boxes");
    b.u2 = parse_double(tok[3], "boxes");
    b.v2 = parse_double(tok[4], "boxes");
    b.tooth_class = tooth_class_from_string(tok[5]);
    b.validate();
    out.push_back(b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// voxel masks

void write_voxels(const VoxelMaskFile& file, const fs::path& path) {
  file.mask.validate();
  std::string out = header_line("voxels");
  out += "dims " + std::to_string(file.mask.dims.x()) + ' ' +
         std::to_string(file.mask.dims.y()) + ' ' +
         std::to_string(file.mask.dims.z()) + '\n';
  out += "spacing " + format_double(file.mask.spacing.x()) + ' ' +
         format_double(file.mask.spacing.y()) + ' ' +
         format_double(file.mask.spacing.z()) + '\n';
  out += "origin " + format_double(file.origin.x()) + ' ' +
         format_double(file.origin.y()) + ' ' +
         format_double(file.origin.z()) + '\n';
  out += "data\n";
  out.append(reinterpret_cast<const char*>(file.mask.values.data()),
             file.mask.values.size());
  write_file_atomic(path, out);
}

VoxelMaskFile read_voxels(const fs::path& path) {
  const std::string bytes = read_file(path);
  std::istringstream in(bytes);
  check_header(in, "voxels");
  VoxelMaskFile out;
  std::string line;
  bool have_dims = false, have_spacing = false;
  while (std::getline(in, line)) {
    if (line == "data") break;
    const auto tok = split_ws(line);
    if (tok.size() != 4) throw MalformedField("voxels: bad header line");
    if (tok[0] == "dims") {
      for (int k = 0; k < 3; ++k)
        out.mask.dims[k] = (int)parse_long(tok[k + 1], "voxels dims");
      have_dims = true;
    } else if (tok[0] == "spacing") {
      for (int k = 0; k < 3; ++k)
        out.mask.spacing[k] = parse_double(tok[k + 1], "voxels spacing");
      have_spacing = true;
    } else if (tok[0] == "origin") {
      for (int k = 0; k < 3; ++k)
        out.origin[k] = parse_double(tok[k + 1], "voxels origin");
    } else {
      throw MalformedField("voxels: unknown header line");
    }
  }
  if (!have_dims || !have_spacing)
    throw MalformedField("voxels: missing dims or spacing");
  const std::size_t count = (std::size_t)out.mask.dims.x() * out.mask.dims.y() *
                            out.mask.dims.z();
  const std::size_t data_at = (std::size_t)in.tellg();
  if (bytes.size() - data_at != count)
    throw MalformedField("voxels: payload size mismatch");
  out.mask.values.assign(bytes.begin() + data_at, bytes.end());
  for (std::uint8_t v : out.mask.values)
    if (v > 1) throw MalformedField("voxels: non-binary payload");
  out.mask.validate();
  return out;
}

// ---------------------------------------------------------------------------
// graymaps

void write_pgm16(const RasterImage& image, const fs::path& path) {
  std::string out = "P5\n" + std::to_string(image.width) + ' ' +
                    std::to_string(image.height) + "\n65535\n";
  for (int v = 1; v <= image.height; ++v)
    for (int u = 1; u <= image.width; ++u) {
      const double x = std::clamp(image.at(u, v), 0.0, 1.0);
      const auto q = (std::uint16_t)std::lround(65535.0 * x);
      out.push_back(char(q >> 8));
      out.push_back(char(q & 0xff));
    }
  write_file_atomic(path, out);
}

RasterImage read_pgm16(const fs::path& path) {
  const std::string bytes = read_file(path);
  std::istringstream in(bytes);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w <= 0 || h <= 0 || maxval != 65535)
    throw MalformedField("pgm: expected 16-bit P5");
  in.get();  // single whitespace after maxval
  const std::size_t data_at = (std::size_t)in.tellg();
  if (bytes.size() - data_at != 2ull * w * h)
    throw MalformedField("pgm: payload size mismatch");
  RasterImage img;
  img.width = w;
  img.height = h;
  img.values.resize(h, w);
  std::size_t at = data_at;
  for (int v = 1; v <= h; ++v)
    for (int u = 1; u <= w; ++u) {
      const int q = std::uint8_t(bytes[at]) << 8 | std::uint8_t(bytes[at + 1]);
      at += 2;
      img.at(u, v) = q / 65535.0;
    }
  return img;
}

void write_report(const std::vector<std::pair<std::string, std::string>>& rows,
                  const fs::path& path) {
  std::string out = header_line("report");
  for (const auto& [key, value] : rows) out += key + ' ' + value + '\n';
  write_file_atomic(path, out);
}

}  // namespace dentreg::io
