// Coupled minimization of the full Landau-de Gennes energy for a complex
// order parameter psi and a unit director field n on a desk-scale 3D grid.
//
//   E(psi, n) = G(psi, n) + F+(n) + (K2 + K4) * Lnull(n)
//
//   G     = integral |grad_{qn} psi|^2 - kappa^2 |psi|^2 + kappa^2/2 |psi|^4,
//           grad_{qn} = grad - i q n realized with covariant link phases
//           theta_ab = q h (n_a + n_b).e_ab / 2 on lattice edges;
//   F+    = integral K1 |div n|^2 + K2 |(curl n).n + tau|^2 + K3 |curl n x n|^2;
//   Lnull = integral tr((Dn)^2) - |div n|^2, a null Lagrangian: its value
//           depends only on the boundary trace of n.
//
// The domain is an axis-aligned box or a voxelized ball (staircase boundary,
// a documented geometry error at desk scale).  All derivative densities use
// centered differences and are accumulated over nodes whose full 6-point
// stencil lies inside the domain; psi carries no essential boundary
// condition (the natural discrete condition is the magnetic Neumann one),
// while n is pinned to a helical boundary field on the boundary layer and
// renormalized to unit length after every update.
//
// Minimization is an alternating projected gradient descent with Armijo
// backtracking and separate step-size schedules for psi and n; a step is
// accepted only if the total energy does not increase.
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smectic/surface.hpp"
#include "smectic/vec3.hpp"

namespace smectic {

/// Physical and elastic parameters of one run.
struct LdGParams {
  double kappa = 8.0;  ///< Ginzburg-Landau parameter, > 0.
  double q = 38.4;     ///< layering density, > 0.
  double tau = 2.0;    ///< chirality, > 0.
  double K1 = 64.0;    ///< splay constant, >= 0.
  double K2 = 64.0;    ///< twist constant, >= 0.
  double K3 = 64.0;    ///< bend constant, >= 0.
  double K4 = 0.0;     ///< saddle-splay constant (enters only via K2 + K4).
  /// When set, the null-Lagrangian term is dropped from the total (the
  /// K4 = -K2 convention); its integral is still reported.
  bool drop_null_lagrangian = false;

  /// Derived coupling b = q tau / kappa^2.
  double b() const { return q * tau / (kappa * kappa); }
  /// Throws std::invalid_argument on non-positive kappa/q/tau or negative
  /// K1..K3.
  void validate() const;
};

/// Uniform axis-aligned grid over a box [0,L]^3 or the inscribed ball,
/// with a node mask, a boundary layer, and quadrature weights (trapezoid
/// on the box so that the weights sum exactly to L^3; flat h^3 on the
/// ball).  Nodes are indexed by a dense "masked index" in lexicographic
/// order of the lattice.
class LdGDomain {
 public:
  enum class Shape { box, ball };
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// npts nodes per axis (npts >= 2), spacing h = length/(npts-1).
  LdGDomain(Shape shape, double length, int npts);

  Shape shape() const { return shape_; }
  double length() const { return length_; }
  int npts() const { return npts_; }
  double h() const { return h_; }
  /// Number of masked (in-domain) nodes.
  std::size_t size() const { return coords_.size(); }
  /// Sum of all node weights (the discrete |Omega|).
  double volume() const { return volume_; }
  /// Distance from the domain center to the nearest boundary point of the
  /// ideal shape (L/2 for both shapes).
  double inradius() const { return 0.5 * length_; }

  /// Masked index of lattice node (i,j,k), or npos if outside the domain.
  std::size_t masked_index(int i, int j, int k) const;
  /// Position of a masked node.
  const Vec3& coord(std::size_t m) const { return coords_[m]; }
  /// Quadrature weight of a masked node.
  double node_weight(std::size_t m) const { return weights_[m]; }
  /// Masked index of the lattice neighbor one step along axis (0,1,2) in
  /// direction dir (+1/-1), or npos if that node is outside the domain.
  std::size_t neighbor(std::size_t m, int axis, int dir) const {
    return neigh_[6 * m + 2 * axis + (dir > 0 ? 0 : 1)];
  }
  /// True for masked nodes with at least one of the 6 lattice neighbors
  /// outside the domain; these carry the essential director condition.
  bool is_boundary(std::size_t m) const { return boundary_[m] != 0; }
  /// Masked indices with a complete 6-point stencil, ascending.
  const std::vector<std::size_t>& interior() const { return interior_; }
  /// Weight of the kinetic edge from m one step along +axis (0 if the
  /// neighbor is outside): h * (transverse trapezoid factors) on the box,
  /// h^3 on the ball, divided by h^2 so the edge term is
  /// edge_weight * |psi_b e^{-i theta} - psi_a|^2.
  double edge_weight(std::size_t m, int axis) const {
    return edge_w_[3 * m + axis];
  }

  /// Distance from x to the ideal boundary (box faces / sphere).
  double boundary_distance(const Vec3& x) const;

 private:
  Shape shape_;
  double length_ = 0.0;
  int npts_ = 0;
  double h_ = 0.0;
  double volume_ = 0.0;
  std::vector<std::size_t> flat_to_masked_;
  std::vector<Vec3> coords_;
  std::vector<double> weights_;
  std::vector<double> edge_w_;
  std::vector<std::size_t> neigh_;
  std::vector<std::uint8_t> boundary_;
  std::vector<std::size_t> interior_;
};

/// One configuration (psi, n) on a grid, with the boundary rotation that
/// pins the director on the boundary layer.
struct LdGState {
  LdGDomain domain;
  std::vector<std::complex<double>> psi;  ///< size == domain.size()
  std::vector<Vec3> n;                    ///< unit vectors, size == domain.size()
  DirectorRotation boundary_director;

  /// Throws std::invalid_argument on size mismatch, |n| off unit length by
  /// more than 1e-9, or a boundary node departing from the pinned helical
  /// field by more than 1e-9.
  void validate() const;

  /// The standard initial state: n is the helical boundary field extended
  /// inward (so n lies in the admissible class and, being a global helical
  /// field, makes the elastic energy vanish up to discretization), and psi
  /// is small seeded complex noise, uniform on the disk of the given
  /// amplitude.
  static LdGState initial(const LdGDomain& dom, const DirectorRotation& bd,
                          std::uint64_t seed, double noise_amplitude = 0.1);
};

/// Energy breakdown; total honors drop_null_lagrangian.
struct LdGEnergy {
  double G = 0.0;       ///< Ginzburg-Landau part (kinetic + potential).
  double F_plus = 0.0;  ///< splay/twist/bend part.
  double L_null = 0.0;  ///< null-Lagrangian integral (without its coefficient).
  double total = 0.0;   ///< G + F_plus + (K2+K4) L_null (or without L_null).
};

/// Full energy of a state.  Throws on invalid state.
LdGEnergy ldg_energy(const LdGState& s, const LdGParams& p);

/// The Ginzburg-Landau kinetic term alone, for an arbitrary (not
/// necessarily unit) coupling field: sum over edges of
/// edge_weight * |psi_b e^{-i theta_ab} - psi_a|^2 with
/// theta_ab = q h (v_a + v_b).e_ab / 2.  Exposed for gauge-covariance
/// checks.
double ldg_kinetic(const LdGDomain& dom,
                   const std::vector<std::complex<double>>& psi,
                   const std::vector<Vec3>& v, double q);

/// Analytic gradients of the total energy.  g_psi is the complex gradient
/// (2 dE/d conj(psi)); g_n is the Euclidean director gradient projected
/// onto the tangent plane of the unit sphere at each node and zeroed on
/// boundary nodes.
void ldg_gradients(const LdGState& s, const LdGParams& p,
                   std::vector<std::complex<double>>& g_psi,
                   std::vector<Vec3>& g_n);

/// |Lnull(n1) - Lnull(n2)| for two unit director fields on the same grid
/// that agree on all boundary nodes (within 1e-9; otherwise throws).  For
/// the continuum functional this difference is exactly zero; the discrete
/// value is an O(h) consistency measure.
double null_lagrangian_check(const LdGDomain& dom, const std::vector<Vec3>& n1,
                             const std::vector<Vec3>& n2);

/// Outcome of one alternating descent step.
struct FlowStepResult {
  double energy_before = 0.0;
  double energy_after = 0.0;
  double delta = 0.0;        ///< energy_after - energy_before, <= 0.
  bool psi_accepted = false; ///< a psi update was taken this step.
  bool n_accepted = false;   ///< an n update was taken this step.
  /// Both step sizes collapsed below floor without an accepted update:
  /// the state is converged (or stuck) at this resolution.
  bool stalled = false;
};

/// One psi-descent sweep followed by one projected n-descent sweep, each
/// with Armijo backtracking; dt_psi and dt_n are adapted in place (grown
/// gently after clean accepts, halved on rejections).  A candidate is
/// accepted only if the total energy does not increase.  The director
/// update renormalizes every free node and never touches boundary nodes.
FlowStepResult flow_step(LdGState& s, const LdGParams& p, double& dt_psi,
                         double& dt_n);

/// Stopping rule for run_to_convergence.
struct LdGStopRule {
  double rel_tol = 1e-9;  ///< window-relative energy change threshold.
  int window = 25;        ///< iterations per convergence check.
  long max_iters = 20000;
  /// Fraction of the inradius used as the boundary-layer thickness in the
  /// reported concentration metric when 3/kappa exceeds it.
  double max_layer_fraction = 0.9;
};

/// Diagnostics of a finished run.
struct LdGDiagnostics {
  LdGEnergy energy;
  double est_residual = 0.0;   ///< ||div n||_2 + ||curl n + tau n||_2.
  double max_abs_psi = 0.0;
  double quartic_mass = 0.0;   ///< integral |psi|^4.
  /// |psi|^4-mass fraction within distance 3/kappa of the boundary
  /// (no value when the quartic mass vanishes).
  std::optional<double> boundary_fraction;
  double layer_thickness = 0.0;  ///< the thickness used for the fraction.
  long iters = 0;
  bool converged = false;  ///< stopped by the energy-change criterion.
  bool stalled = false;    ///< stopped because both step sizes collapsed.
};

struct LdGRunResult {
  LdGState state;
  LdGDiagnostics diag;
  /// Accepted total energy after each iteration (index 0 = initial energy).
  std::vector<double> trace;
};

/// Iterate flow_step until the energy change over a trailing window drops
/// below rel_tol * (|E| + 1), the step sizes collapse, or max_iters.
LdGRunResult run_to_convergence(LdGState s0, const LdGParams& p,
                                const LdGStopRule& stop = {});

/// ||div n||_2 + ||curl n + tau n||_2 over interior nodes.
double est_residual(const LdGDomain& dom, const std::vector<Vec3>& n,
                    double tau);

/// |psi|^4-mass fraction within distance t of the boundary; empty when the
/// total quartic mass vanishes ("no smectic mass").  Requires
/// 0 < t <= inradius.
std::optional<double> boundary_concentration(const LdGState& s, double t);

/// Discretization-quality gate for the magnetic kinetic term: for a field
/// u compactly supported in the interior and the affine potential
/// A(x) = 0.5 B x (x - x0), returns (kinetic energy, |B| * ||u||^2); the
/// first must dominate the second up to O(h^2).  Link phases use the exact
/// line integral of A along each edge.
std::pair<double, double> spectral_floor_check(
    const LdGDomain& dom, const std::vector<std::complex<double>>& u,
    const Vec3& B, const Vec3& x0);

}  // namespace smectic
