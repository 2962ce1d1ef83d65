// Closed triangle-mesh surfaces, the chiral director family, and the contact
// angle between them.
//
// The director fields are the rotated helices n(x) = Q N_tau(Q^t x) with
// N_tau(x) = (cos(tau x3), sin(tau x3), 0); they are exactly the
// divergence-free unit fields with curl n + tau n = 0.  On a surface with
// outward normal N, the contact angle nu(x; n) = arcsin |n . N| in
// [0, pi/2] is what the surface energy density E(b, nu) is evaluated at.
//
// Meshes come from analytic generators (sphere by subdivided icosahedron,
// ellipsoid by radial scaling with freshly computed face normals) or from
// OBJ / binary-STL files; every ingestion path validates that the mesh is a
// closed orientable 2-manifold and orients it outward by signed volume.
#pragma once

#include "smectic/vec3.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace smectic {

struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW seen from outside
  std::vector<Vec3> face_normals;             // outward unit
  std::vector<double> face_areas;             // > 0
  std::vector<Vec3> face_centroids;

  std::size_t face_count() const { return triangles.size(); }
  double total_area() const;
  double volume() const;          // enclosed volume (positive when outward)
  int euler_characteristic() const;  // V - E + F

  // Throws std::invalid_argument unless the mesh is a closed orientable
  // 2-manifold with positive face areas and unit normals.
  void validate() const;

  // Derived per-face data (normals, areas, centroids) from vertices and
  // triangles; flips the global orientation first if the signed volume is
  // negative.  Called by every generator and reader.
  void finalize();

  // Unit sphere scaled to `radius`, icosahedron subdivided `subdiv` times
  // (20 * 4^subdiv faces), vertices projected onto the sphere.
  static SurfaceMesh icosphere(double radius, int subdiv);

  // Icosphere stretched to semi-axes (a, b, c); normals recomputed from the
  // stretched geometry, not transformed.
  static SurfaceMesh ellipsoid(double a, double b, double c, int subdiv);

  // Wavefront OBJ: `v` positions and `f` faces (fan-triangulated when a face
  // has more than three corners; `v/vt/vn` index forms accepted).
  static SurfaceMesh load_obj(const std::string& path);

  // Binary STL; coincident corner points are welded to recover
  // connectivity.
  static SurfaceMesh load_stl(const std::string& path);
};

// One member of the rotated chiral family: x -> Q N_tau(Q^t x).
struct DirectorRotation {
  std::array<double, 4> quat{1.0, 0.0, 0.0, 0.0};  // (w, x, y, z), unit
  double tau = 1.0;                                // chirality > 0

  void validate() const;  // throws std::invalid_argument
};

// Rotate v by the unit quaternion q.
Vec3 quat_rotate(const std::array<double, 4>& q, const Vec3& v);

// Hamilton product a b (composition: the rotation of b followed by a).
std::array<double, 4> quat_mul(const std::array<double, 4>& a,
                               const std::array<double, 4>& b);

// Exponential chart: the unit quaternion of the rotation by angle |v|
// about v/|v|; quat_exp({0,0,0}) is the identity.
std::array<double, 4> quat_exp(const Vec3& v);

// n(x) = Q N_tau(Q^t x); exactly unit length.
Vec3 director_at(const DirectorRotation& r, const Vec3& x);

struct CTauResiduals {
  double max_div = 0.0;       // max |div n|
  double max_curl = 0.0;      // max |curl n + tau n|
};

// Central-difference check of the defining equations div n = 0 and
// curl n + tau n = 0 at the sample points; both maxima are O(h^2 tau^3).
CTauResiduals verify_c_tau(const DirectorRotation& r,
                           const std::vector<Vec3>& samples, double h);

// Contact angle arcsin |n . N| in [0, pi/2]; both arguments must be unit
// vectors within 1e-6.
double angle_nu(const Vec3& n, const Vec3& N);

// Centroid-rule surface integral of a per-face scalar.
double surface_integral(const SurfaceMesh& mesh,
                        const std::vector<double>& face_values);

// Midpoint (3-point) rule evaluating f at the edge midpoints of each face;
// exact for quadratics on flat faces, used for quadrature convergence
// checks.
template <class F>
double surface_integral_3pt(const SurfaceMesh& mesh, F&& f) {
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const double fa = f(0.5 * (a + b)), fb = f(0.5 * (b + c)),
                 fc = f(0.5 * (c + a));
    s += mesh.face_areas[t] * (fa + fb + fc) / 3.0;
  }
  return s;
}

}  // namespace smectic
