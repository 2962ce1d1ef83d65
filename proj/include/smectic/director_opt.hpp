// Boundary surface energy of a rotated chiral director on a closed surface,
// and its minimization over the rotation group.
//
// The surface energy density E(b_frak, nu) of halfspace_gl.hpp depends on
// position only through the contact angle nu(x; n) between the director and
// the surface.  Tabulating E over nu once therefore turns the boundary
// functional
//
//   tilde_E(b_frak, n) = int_{boundary} E(b_frak, nu(x; n)) ds(x)
//
// into a cheap quadrature, and minimizing it over the rotated helix family
// n = Q N_tau(Q^t x) -- a copy of SO(3) -- gives the optimal director
// energy e0(b_frak, tau).  The same table yields the surface smectic region
// (where the spectral threshold sits below 1/b) and the leading-order
// ground-state and concentration predictions for the full coupled model at
// large kappa.
#pragma once

#include "smectic/halfplane.hpp"
#include "smectic/halfspace_gl.hpp"
#include "smectic/pchip.hpp"
#include "smectic/surface.hpp"

#include <array>
#include <string>
#include <vector>

namespace smectic {

// Tabulated nu -> E(b_frak, nu) on [0, pi/2] with per-node error bars and a
// shape-preserving interpolant.  Every value is <= 0, nodes with
// zeta(nu) >= b_frak vanish, and because the interpolant never overshoots
// the local data range it stays <= 0 wherever the data do.
struct ETable {
  double b_frak = 0.8;
  std::vector<double> nu_nodes;  // strictly increasing, spanning [0, pi/2]
  std::vector<double> E_values;  // surface energy density per node, <= 0
  std::vector<double> err_bars;  // >= 0, from the box-ladder error model

  // Run the half-space box ladder at node_count uniform nodes plus a
  // cluster around the sign change zeta(nu) = b_frak (where E is small but
  // its slope is not).  Subcritical nodes are certified zero by the strip
  // lower bound without any descent.  Nodes are independent problems, so
  // threads > 1 distributes them over a pool; the result is identical to
  // the sequential build.
  static ETable build(double b_frak, const ZetaTable& zeta,
                      const SurfaceEnergyPolicy& policy = {},
                      int node_count = 17, int threads = 1);

  double operator()(double nu) const;  // clamped to [0, pi/2]
  double max_err() const;
  bool all_zero() const;  // every node vanishes within its error bar

  void validate() const;  // throws std::invalid_argument
  void save_csv(const std::string& path) const;
  static ETable load_csv(const std::string& path);
  void rebuild_interp();

 private:
  MonotoneCubic interp_;
};

// Boundary functional: centroid-rule integral of E(b_frak, nu(x; n)) over
// the mesh for the rotated helix n = Q N_tau(Q^t x).
double tilde_E(const ETable& table, const SurfaceMesh& mesh,
               const DirectorRotation& r);

struct LandscapeSample {
  std::array<double, 4> quat;  // unit, w >= 0 hemisphere
  double value = 0.0;          // tilde_E at this rotation
};

struct DirectorOptimum {
  std::array<double, 4> quat_star{1.0, 0.0, 0.0, 0.0};
  double e0_value = 0.0;  // tilde_E at quat_star, never above any sample
  std::vector<LandscapeSample> landscape_samples;  // covering-phase values
  bool degenerate_flag = false;  // covering spread below 1% of |minimum|
};

// Two-phase search for e0 = min over rotations of tilde_E: a deterministic
// quasi-uniform quaternion covering (budget/2 evaluations) followed by
// Nelder-Mead refinement in the exponential chart from the best five seeds.
// budget >= 100 evaluations.  The minimizing set is often a positive-
// dimensional subgroup orbit (for the ball, all of SO(3)); degenerate_flag
// plus the landscape samples report such flatness instead of a pretended
// unique optimum.
DirectorOptimum minimize_over_so3(const ETable& table, const SurfaceMesh& mesh,
                                  double tau, int budget = 400);

// Faces whose contact angle keeps the spectral threshold below 1/b -- the
// part of the boundary that stays smectic at reduced temperature 1/b.
struct SmecticRegion {
  std::vector<int> faces;      // indices into mesh.triangles, ascending
  double area = 0.0;
  double area_fraction = 0.0;  // area / total mesh area
};

// Centroid classification zeta(nu(x; n)) < 1/b; requires b > 1.
SmecticRegion smectic_region(const SurfaceMesh& mesh, const DirectorRotation& r,
                             double b, const ZetaTable& zeta);

// Leading-order boundary concentration density -2 sqrt(b) E(1/b, nu(x; n))
// per face; >= 0 everywhere and supported on the smectic region.  The table
// must be tabulated at b_frak = 1/b.
std::vector<double> concentration_density(const ETable& table,
                                          const SurfaceMesh& mesh,
                                          const DirectorRotation& r, double b);

struct GroundStatePrediction {
  double e0 = 0.0;     // optimal director energy at b_frak = 1/b
  double value = 0.0;  // sqrt(b) * kappa * e0, the leading ground-state term
  DirectorOptimum optimum;
};

// Ground-state energy prediction at large coupling kappa: minimizes the
// boundary functional over rotations and scales by sqrt(b) * kappa.
// Requires kappa > 0, b > 1, and table.b_frak = 1/b.
GroundStatePrediction ground_state_prediction(const ETable& table,
                                              const SurfaceMesh& mesh,
                                              double kappa, double b,
                                              double tau, int budget = 400);

// Restriction of the prediction to a face subset at a fixed rotation:
// sqrt(b) * kappa * sum over the faces of E(1/b, nu) * area.  With all
// faces and the minimizing rotation this reproduces the global value.
double local_prediction(const ETable& table, const SurfaceMesh& mesh,
                        const DirectorRotation& r, double kappa, double b,
                        const std::vector<int>& faces);

}  // namespace smectic
