#include "smectic/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace smectic {

double SurfaceMesh::total_area() const {
  double s = 0.0;
  for (double a : face_areas) s += a;
  return s;
}

double SurfaceMesh::volume() const {
  // Divergence theorem with F = x/3: V = sum of signed tetrahedra to the
  // origin; positive for an outward-oriented closed surface.
  double v = 0.0;
  for (const auto& t : triangles) {
    const Vec3& a = vertices[t[0]];
    const Vec3& b = vertices[t[1]];
    const Vec3& c = vertices[t[2]];
    v += dot(a, cross(b, c));
  }
  return v / 6.0;
}

int SurfaceMesh::euler_characteristic() const {
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : triangles)
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      edges[{std::min(a, b), std::max(a, b)}]++;
    }
  return (int)vertices.size() - (int)edges.size() + (int)triangles.size();
}

void SurfaceMesh::validate() const {
  const std::size_t F = triangles.size();
  if (face_normals.size() != F || face_areas.size() != F ||
      face_centroids.size() != F)
    throw std::invalid_argument("mesh: derived per-face arrays out of sync");
  const int V = (int)vertices.size();
  for (const auto& t : triangles)
    for (int c : t)
      if (c < 0 || c >= V)
        throw std::invalid_argument("mesh: vertex index out of range");
  for (std::size_t f = 0; f < F; ++f) {
    if (!(face_areas[f] > 0.0))
      throw std::invalid_argument("mesh: degenerate face (zero area)");
    if (std::abs(norm(face_normals[f]) - 1.0) > 1e-12)
      throw std::invalid_argument("mesh: non-unit face normal");
  }
  // Closed orientable 2-manifold: every directed edge appears exactly once
  // and its reverse exactly once.
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : triangles)
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      if (a == b)
        throw std::invalid_argument("mesh: degenerate edge");
      if (++directed[{a, b}] > 1)
        throw std::invalid_argument(
            "mesh: directed edge shared by two faces (inconsistent "
            "winding)");
    }
  for (const auto& [edge, count] : directed) {
    (void)count;
    auto rev = directed.find({edge.second, edge.first});
    if (rev == directed.end())
      throw std::invalid_argument("mesh: boundary edge (surface not closed)");
  }
}

void SurfaceMesh::finalize() {
  // Outward orientation by signed volume, then per-face data.
  double v6 = 0.0;
  for (const auto& t : triangles) {
    v6 += dot(vertices[t[0]], cross(vertices[t[1]], vertices[t[2]]));
  }
  if (v6 < 0.0)
    for (auto& t : triangles) std::swap(t[1], t[2]);
  const std::size_t F = triangles.size();
  face_normals.resize(F);
  face_areas.resize(F);
  face_centroids.resize(F);
  for (std::size_t f = 0; f < F; ++f) {
    const auto& t = triangles[f];
    const Vec3& a = vertices[t[0]];
    const Vec3& b = vertices[t[1]];
    const Vec3& c = vertices[t[2]];
    const Vec3 n2 = cross(b - a, c - a);
    const double n2n = norm(n2);
    if (!(n2n > 0.0))
      throw std::invalid_argument("mesh: degenerate face (zero area)");
    face_areas[f] = 0.5 * n2n;
    face_normals[f] = (1.0 / n2n) * n2;
    face_centroids[f] = (1.0 / 3.0) * (a + b + c);
  }
}

namespace {

// Icosahedron with vertices on the unit sphere.
void base_icosahedron(std::vector<Vec3>& verts,
                      std::vector<std::array<int, 3>>& tris) {
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  const double s = 1.0 / std::sqrt(1.0 + phi * phi);
  const double a = s, b = phi * s;
  verts = {{-a, b, 0}, {a, b, 0},  {-a, -b, 0}, {a, -b, 0},
           {0, -a, b}, {0, a, b},  {0, -a, -b}, {0, a, -b},
           {b, 0, -a}, {b, 0, a},  {-b, 0, -a}, {-b, 0, a}};
  tris = {{0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
          {1, 5, 9},   {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
          {3, 9, 4},   {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
          {4, 9, 5},   {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
}

}  // namespace

SurfaceMesh SurfaceMesh::icosphere(double radius, int subdiv) {
  if (!(radius > 0.0) || subdiv < 0 || subdiv > 8)
    throw std::invalid_argument("icosphere: radius > 0, subdiv in [0, 8]");
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> tris;
  base_icosahedron(verts, tris);
  for (int level = 0; level < subdiv; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int i, int j) {
      const auto key = std::minmax(i, j);
      auto it = midpoint.find({key.first, key.second});
      if (it != midpoint.end()) return it->second;
      const int idx = (int)verts.size();
      verts.push_back(normalized(0.5 * (verts[i] + verts[j])));
      midpoint[{key.first, key.second}] = idx;
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(4 * tris.size());
    for (const auto& t : tris) {
      const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]),
                ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }
  SurfaceMesh m;
  m.vertices.reserve(verts.size());
  for (const auto& v : verts) m.vertices.push_back(radius * v);
  m.triangles = std::move(tris);
  m.finalize();
  m.validate();
  return m;
}

SurfaceMesh SurfaceMesh::ellipsoid(double a, double b, double c, int subdiv) {
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
    throw std::invalid_argument("ellipsoid: semi-axes must be positive");
  SurfaceMesh m = icosphere(1.0, subdiv);
  for (auto& v : m.vertices) v = {a * v.x, b * v.y, c * v.z};
  m.finalize();
  m.validate();
  return m;
}

SurfaceMesh SurfaceMesh::load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open OBJ file: " + path);
  SurfaceMesh m;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z))
        throw std::invalid_argument("OBJ: malformed vertex line");
      m.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> corners;
      std::string tok;
      while (ls >> tok) {
        // "i", "i/t", "i//n", "i/t/n" -- only the position index matters.
        const long idx = std::strtol(tok.c_str(), nullptr, 10);
        if (idx == 0) throw std::invalid_argument("OBJ: bad face index");
        const long resolved =
            idx > 0 ? idx - 1 : (long)m.vertices.size() + idx;
        if (resolved < 0 || resolved >= (long)m.vertices.size())
          throw std::invalid_argument("OBJ: face index out of range");
        corners.push_back((int)resolved);
      }
      if (corners.size() < 3)
        throw std::invalid_argument("OBJ: face with fewer than 3 corners");
      for (std::size_t k = 2; k < corners.size(); ++k)
        m.triangles.push_back({corners[0], corners[k - 1], corners[k]});
    }
  }
  if (m.triangles.empty())
    throw std::invalid_argument("OBJ: no faces found");
  m.finalize();
  m.validate();
  return m;
}

SurfaceMesh SurfaceMesh::load_stl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open STL file: " + path);
  char header[80];
  in.read(header, 80);
  std::uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in) throw std::invalid_argument("STL: truncated header");
  SurfaceMesh m;
  std::map<std::array<float, 3>, int> weld;
  for (std::uint32_t f = 0; f < count; ++f) {
    float rec[12];
    in.read(reinterpret_cast<char*>(rec), 48);
    char attr[2];
    in.read(attr, 2);
    if (!in) throw std::invalid_argument("STL: truncated facet record");
    std::array<int, 3> tri;
    for (int c = 0; c < 3; ++c) {
      const std::array<float, 3> key{rec[3 + 3 * c], rec[4 + 3 * c],
                                     rec[5 + 3 * c]};
      auto it = weld.find(key);
      if (it == weld.end()) {
        it = weld.emplace(key, (int)m.vertices.size()).first;
        m.vertices.push_back(
            {(double)key[0], (double)key[1], (double)key[2]});
      }
      tri[c] = it->second;
    }
    m.triangles.push_back(tri);
  }
  if (m.triangles.empty())
    throw std::invalid_argument("STL: no facets found");
  m.finalize();
  m.validate();
  return m;
}

void DirectorRotation::validate() const {
  const double n2 = quat[0] * quat[0] + quat[1] * quat[1] +
                    quat[2] * quat[2] + quat[3] * quat[3];
  if (std::abs(std::sqrt(n2) - 1.0) > 1e-12)
    throw std::invalid_argument("director rotation: quaternion not unit");
  if (!(tau > 0.0))
    throw std::invalid_argument("director rotation: tau must be positive");
}

Vec3 quat_rotate(const std::array<double, 4>& q, const Vec3& v) {
  const Vec3 im{q[1], q[2], q[3]};
  const Vec3 t = 2.0 * cross(im, v);
  return v + q[0] * t + cross(im, t);
}

std::array<double, 4> quat_mul(const std::array<double, 4>& a,
                               const std::array<double, 4>& b) {
  return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
          a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
          a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
          a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

std::array<double, 4> quat_exp(const Vec3& v) {
  const double th = norm(v);
  // sinc(th/2)/2 expanded near zero so the chart is smooth through the
  // identity.
  const double s = th < 1e-8 ? 0.5 - th * th / 48.0 : std::sin(0.5 * th) / th;
  return {std::cos(0.5 * th), s * v.x, s * v.y, s * v.z};
}

Vec3 director_at(const DirectorRotation& r, const Vec3& x) {
  const std::array<double, 4> conj{r.quat[0], -r.quat[1], -r.quat[2],
                                   -r.quat[3]};
  const Vec3 xl = quat_rotate(conj, x);
  const Vec3 nl{std::cos(r.tau * xl.z), std::sin(r.tau * xl.z), 0.0};
  return normalized(quat_rotate(r.quat, nl));
}

CTauResiduals verify_c_tau(const DirectorRotation& r,
                           const std::vector<Vec3>& samples, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step must be positive");
  CTauResiduals res;
  for (const Vec3& p : samples) {
    double J[3][3];
    for (int d = 0; d < 3; ++d) {
      Vec3 dp = p, dm = p;
      (&dp.x)[d] += h;
      (&dm.x)[d] -= h;
      const Vec3 np = director_at(r, dp), nm = director_at(r, dm);
      J[0][d] = (np.x - nm.x) / (2.0 * h);
      J[1][d] = (np.y - nm.y) / (2.0 * h);
      J[2][d] = (np.z - nm.z) / (2.0 * h);
    }
    const double div = J[0][0] + J[1][1] + J[2][2];
    const Vec3 curl{J[2][1] - J[1][2], J[0][2] - J[2][0], J[1][0] - J[0][1]};
    const Vec3 n = director_at(r, p);
    res.max_div = std::max(res.max_div, std::abs(div));
    res.max_curl = std::max(res.max_curl, norm(curl + r.tau * n));
  }
  return res;
}

double angle_nu(const Vec3& n, const Vec3& N) {
  if (std::abs(norm(n) - 1.0) > 1e-6 || std::abs(norm(N) - 1.0) > 1e-6)
    throw std::invalid_argument("contact angle needs unit vectors");
  const double s = std::min(std::abs(dot(n, N)), 1.0);
  return std::asin(s);
}

double surface_integral(const SurfaceMesh& mesh,
                        const std::vector<double>& face_values) {
  if (face_values.size() != mesh.face_areas.size())
    throw std::invalid_argument("per-face values do not match the mesh");
  double s = 0.0;
  for (std::size_t f = 0; f < face_values.size(); ++f)
    s += face_values[f] * mesh.face_areas[f];
  return s;
}

}  // namespace smectic
