#include "smectic/halfplane.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace smectic {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Lattice-consistent well profile: reduces to F^2 as dx3 -> 0.
double well(double F, double dx3) {
  if (dx3 <= 0.0) return F * F;
  return (2.0 - 2.0 * std::cos(F * dx3)) / (dx3 * dx3);
}

// Golden-section minimizer for smooth unimodal functions.
template <class F>
double golden_min(F f, double a, double b, double xtol) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a); fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Lowest eigenvalue of -u'' + well(x - xi) on (0, R1), natural at 0,
// Dirichlet at R1, on the same lumped vertex grid as the 2D operator.
double lowest_1d(double xi, double R1, int n1, double link_dx3) {
  const double h = R1 / n1;
  Eigen::VectorXd diag(n1), sub(n1 - 1);
  for (int i = 0; i < n1; ++i)
    diag(i) = 2.0 / (h * h) + well(i * h - xi, link_dx3);
  for (int i = 0; i + 1 < n1; ++i)
    sub(i) = (i == 0) ? -std::sqrt(2.0) / (h * h) : -1.0 / (h * h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}


struct DeGennes { double value, xi; };

DeGennes de_gennes_minimum(double R1, int n1, double link_dx3) {
  auto mu = [&](double xi) { return lowest_1d(xi, R1, n1, link_dx3); };
  const double xi = golden_min(mu, 0.0, 2.0, 1e-6);
  return {mu(xi), xi};
}

}  // namespace

void HalfPlaneProblem::validate() const {
  if (!(nu >= 0.0 && nu <= kPi / 2 + 1e-12))
    throw std::invalid_argument("HalfPlaneProblem: nu must lie in [0, pi/2]");
  if (!(domain_R1 > 0.0 && domain_R2 > 0.0))
    throw std::invalid_argument("HalfPlaneProblem: domain extents must be positive");
  if (n1 < 4 || n2 < 4)
    throw std::invalid_argument("HalfPlaneProblem: need at least 4 cells per axis");
  if (link_dx3 < 0.0)
    throw std::invalid_argument("HalfPlaneProblem: link_dx3 must be >= 0");
  if (well_cap < 0.0)
    throw std::invalid_argument("HalfPlaneProblem: well_cap must be >= 0");
  if (!std::isfinite(xi))
    throw std::invalid_argument("HalfPlaneProblem: xi must be finite");
}

HalfPlaneOperator::HalfPlaneOperator(const HalfPlaneProblem& p) : prob_(p) {
  p.validate();
  nrow_ = p.n1;          // x1 nodes 0..n1-1 (node n1 is Dirichlet)
  ncol_ = p.n2 - 1;      // x2 nodes 1..n2-1 (0 and n2 are Dirichlet)
  const double h1 = p.h1(), h2 = p.h2();
  const std::size_t N = (std::size_t)nrow_ * ncol_;

  diag_.assign(N, 0.0);
  for (int j = 0; j < ncol_; ++j)
    for (int i = 0; i < nrow_; ++i)
      diag_[index(i, j)] = 2.0 / (h1 * h1) + 2.0 / (h2 * h2) + potential(i, j);

  // Forward and backward couplings are assembled independently so the
  // Hermiticity check below is meaningful.  The x1 = 0 row carries the
  // lumped-mass rescaling (factor sqrt(2) on its outgoing x1 edge).
  c1f_.assign((std::size_t)(nrow_ - 1) * ncol_, 0.0);
  c1b_.assign(c1f_.size(), 0.0);
  for (int j = 0; j < ncol_; ++j)
    for (int i = 0; i + 1 < nrow_; ++i) {
      const double c = (i == 0) ? -std::sqrt(2.0) / (h1 * h1) : -1.0 / (h1 * h1);
      c1f_[e1_(i, j)] = c;
      c1b_[e1_(i, j)] = c;
    }
  c2f_.assign((std::size_t)nrow_ * (ncol_ - 1), 0.0);
  c2b_.assign(c2f_.size(), 0.0);
  for (int j = 0; j + 1 < ncol_; ++j)
    for (int i = 0; i < nrow_; ++i) {
      c2f_[e2_(i, j)] = -1.0 / (h2 * h2);
      c2b_[e2_(i, j)] = -1.0 / (h2 * h2);
    }
}

double HalfPlaneOperator::potential(int i, int j) const {
  const double F = x1(i) * std::cos(prob_.nu) + x2(j) * std::sin(prob_.nu) - prob_.xi;
  const double V = well(F, prob_.link_dx3);
  return (prob_.well_cap > 0.0) ? std::min(V, prob_.well_cap) : V;
}

void HalfPlaneOperator::apply(const cvector& u, cvector& out) const {
  out.resize(u.size());
  const int nr = nrow_, nc = ncol_;
  for (int j = 0; j < nc; ++j) {
    for (int i = 0; i < nr; ++i) {
      const int a = index(i, j);
      std::complex<double> acc = diag_[a] * u[a];
      if (i + 1 < nr) acc += c1f_[e1_(i, j)] * u[a + 1];
      if (i > 0) acc += c1b_[e1_(i - 1, j)] * u[a - 1];
      if (j + 1 < nc) acc += c2f_[e2_(i, j)] * u[a + nr];
      if (j > 0) acc += c2b_[e2_(i, j - 1)] * u[a - nr];
      out[a] = acc;
    }
  }
}

double HalfPlaneOperator::max_hermiticity_defect() const {
  double m = 0.0;
  for (std::size_t e = 0; e < c1f_.size(); ++e)
    m = std::max(m, std::abs(c1f_[e] - std::conj(c1b_[e])));
  for (std::size_t e = 0; e < c2f_.size(); ++e)
    m = std::max(m, std::abs(c2f_[e] - std::conj(c2b_[e])));
  return m;
}

void HalfPlaneOperator::apply_gauge_phase(const std::vector<double>& chi) {
  if (chi.size() != size())
    throw std::invalid_argument("apply_gauge_phase: phase field size mismatch");
  auto ph = [](double t) { return std::complex<double>(std::cos(t), std::sin(t)); };
  for (int j = 0; j < ncol_; ++j)
    for (int i = 0; i + 1 < nrow_; ++i) {
      const double da = chi[index(i, j)], db = chi[index(i + 1, j)];
      c1f_[e1_(i, j)] *= ph(da - db);
      c1b_[e1_(i, j)] *= ph(db - da);
    }
  for (int j = 0; j + 1 < ncol_; ++j)
    for (int i = 0; i < nrow_; ++i) {
      const double da = chi[index(i, j)], db = chi[index(i, j + 1)];
      c2f_[e2_(i, j)] *= ph(da - db);
      c2b_[e2_(i, j)] *= ph(db - da);
    }
}

double HalfPlaneOperator::rayleigh(const cvector& u) const {
  cvector Au;
  apply(u, Au);
  std::complex<double> num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    num += std::conj(u[k]) * Au[k];
    den += std::norm(u[k]);
  }
  return std::real(num) / den;
}

namespace {

constexpr double kXi0 = 0.76818;  // minimizing offset of the half-line well

// Fit the strip to the state for each tilt, center the well with
// xi = xi0 sqrt(cos nu), and clip the far well.  The state extends
// ~ 1/cos(nu) into the strip (it slides along the well line as the tilt
// grows) and ~ 1.5/sqrt(sin nu) laterally.  At small tilt the strip is
// shrunk to the footprint at the given step size; once the footprint
// exceeds the given depth the strip is extended instead, with the node
// count capped so the steps coarsen -- harmless for the long-wavelength
// x1 structure in that regime.  The extension itself is capped at 8x the
// given depth: every steeper tilt shares that one grid, so the residual
// O(1/R1^2) confinement bias varies smoothly (and upward) in nu instead
// of jumping from node to node, which would read as spurious
// non-monotonicity near the steep end.
HalfPlaneProblem adapt_grid(const HalfPlaneProblem& given, double nu) {
  HalfPlaneProblem p = given;
  p.nu = nu;
  const double c = std::cos(nu), s = std::sin(nu);
  p.xi = kXi0 * std::sqrt(std::max(c, 0.0));
  const double h1 = given.h1(), h2 = given.h2();
  const double R1need = p.xi + 10.0 / std::max(c, 1e-12);
  if (R1need <= given.domain_R1) {
    p.n1 = std::max(4, (int)std::ceil(R1need / h1));
    p.domain_R1 = p.n1 * h1;
  } else {
    const int n1cap = std::max(given.n1, (8 * given.n1) / 5);
    p.domain_R1 = std::min(R1need, 8.0 * given.domain_R1);
    p.n1 = std::min((int)std::ceil(p.domain_R1 / h1), n1cap);
  }
  const double R2need =
      (s > 1e-12) ? std::max(9.0, 7.5 / std::sqrt(s)) : given.domain_R2;
  const int half2 =
      std::max(2, (int)std::ceil(std::min(given.domain_R2, R2need) / h2));
  p.n2 = 2 * half2;
  p.domain_R2 = half2 * h2;
  p.well_cap = 40.0;
  return p;
}

// Product ansatz for the ground state: half-line well profile in x1 times a
// transverse Gaussian, tapered to meet the Dirichlet edges.
cvector analytic_start(const HalfPlaneOperator& op) {
  const HalfPlaneProblem& p = op.problem();
  const double c = std::cos(p.nu), s = std::sin(p.nu);
  const double sig2 = (s > 1e-12) ? 1.5 / std::sqrt(s) : 0.5 * p.domain_R2;
  const double x1c = (c > 1e-12) ? kXi0 / std::sqrt(c) : 0.0;
  // Depth envelope: harmonic width at strong confinement, flattening to the
  // box scale once the state spreads along the nearly-parallel well line.
  const double sig1 =
      std::min((c > 1e-12) ? 1.0 / std::sqrt(c) : p.domain_R1,
               0.45 * p.domain_R1);
  cvector u(op.size());
  for (int j = 0; j < op.cols(); ++j)
    for (int i = 0; i < op.rows(); ++i) {
      const double x1 = op.x1(i), x2 = op.x2(j);
      const double t1 = (x1 - x1c) / sig1;
      u[op.index(i, j)] = std::exp(-0.5 * t1 * t1) *
                          std::exp(-0.5 * (x2 / sig2) * (x2 / sig2)) *
                          std::cos(0.5 * kPi * x1 / p.domain_R1) *
                          std::cos(0.5 * kPi * x2 / p.domain_R2);
    }
  return u;
}

struct SolveOut { double value, residual; int matvecs; };

SolveOut solve_2d(const HalfPlaneProblem& p, double tol, std::uint64_t seed,
                  const cvector* warm, cvector* out_vec) {
  HalfPlaneOperator op(p);
  LanczosOptions lo;
  lo.tol = tol;
  lo.seed = seed;
  auto apply = [&op](const cvector& u, cvector& v) { op.apply(u, v); };
  cvector x0;
  if (warm && warm->size() == op.size()) x0 = *warm;
  else x0 = analytic_start(op);
  LanczosResult r = lanczos_lowest(apply, op.size(), lo, &x0);
  if (out_vec) *out_vec = std::move(r.vector);
  return {r.value, r.residual, r.matvecs};
}

// Bilinear prolongation of a coarse eigenvector onto the doubled grid,
// used to warm-start the fine solve of a Richardson pair.
cvector prolong(const cvector& uc, const HalfPlaneProblem& pc,
                const HalfPlaneProblem& pf) {
  const int nrc = pc.n1, ncc = pc.n2 - 1;
  const int nrf = pf.n1, ncf = pf.n2 - 1;
  auto coarse = [&](int i, int j) -> std::complex<double> {
    if (i < 0) i = 0;
    if (i >= nrc || j < 0 || j >= ncc) return 0.0;  // Dirichlet sides
    return uc[i + (std::size_t)nrc * j];
  };
  cvector uf((std::size_t)nrf * ncf);
  for (int j = 0; j < ncf; ++j) {
    const double x2 = -pf.domain_R2 + (j + 1) * pf.h2();
    const double tj = (x2 + pc.domain_R2) / pc.h2() - 1.0;
    const int j0 = (int)std::floor(tj);
    const double fj = tj - j0;
    for (int i = 0; i < nrf; ++i) {
      const double ti = (i * pf.h1()) / pc.h1();
      const int i0 = (int)std::floor(ti);
      const double fi = ti - i0;
      uf[i + (std::size_t)nrf * j] =
          (1 - fi) * (1 - fj) * coarse(i0, j0) + fi * (1 - fj) * coarse(i0 + 1, j0) +
          (1 - fi) * fj * coarse(i0, j0 + 1) + fi * fj * coarse(i0 + 1, j0 + 1);
    }
  }
  return uf;
}

// ---------------------------------------------------------------------------
// Steep-tilt regime: transverse-channel expansion.
//
// Beyond kNuChannelSplit the state is the transverse well profile times a
// slow envelope along the wall whose extent grows like 1/cos(nu); resolving
// that on a 2D strip needs an enormous box, and the artificial far wall then
// biases each tilt differently, which reads as spurious non-monotonicity.
// Instead expand in the exact eigenfunctions of the transverse well at each
// depth,  u(x1, x2) = sum_n f_n(x1) psi_n(x2 - a(x1))  with center
// a(x1) = (xi - x1 cos nu)/sin nu and frequency w = sin nu.  The transverse
// direction then contributes the exact levels w(2n+1), and the drag of the
// moving center enters only through the constant rate alpha = -cos/sin and
// the ladder matrix D_mn = <psi_m, psi_n'>:
//
//   (H f)_m = -f_m'' + 2 alpha (D f')_m - alpha^2 (D^2 f)_m + w (2m+1) f_m
//
// with the natural wall condition f'(0) = alpha D f(0) (the self-adjoint
// closure of the first-order term).  Every tilt in the regime shares one
// fixed x1 grid, so the only box artifact -- the envelope's quarter-wave
// offset at the far Dirichlet end -- is common to the whole range, cancels
// from increments, and shrinks as the state localizes at smaller tilt, so
// it only ever pushes the curve in the direction it already increases.
constexpr double kNuChannelSplit = 1.0;  // handoff tilt to the expansion
constexpr int kChanCount = 16;           // transverse levels kept
constexpr double kChanR1 = 150.0;        // shared envelope box depth
constexpr int kChanN1 = 600;             // envelope cells; the envelope never
                                         // varies faster than the binding
                                         // length ~ 1/kappa >~ 10, so this
                                         // step is already deep in the h^2
                                         // tail while keeping the spectral
                                         // spread (and iteration count) low

// Ladder coefficient d_k = sqrt(w k / 2): D has +d_{n+1} above the
// diagonal and -d_n below (antisymmetric), truncated to the kept levels.
struct ChannelOperator {
  int n1, nch;
  double h, omega, alpha;

  std::size_t size() const { return (std::size_t)n1 * nch; }

  // Symmetric by construction: the envelope Laplacian and the level/D^2
  // blocks are symmetric, and the first-order term is (antisymmetric
  // envelope derivative) x (antisymmetric ladder).  The half-weight wall
  // node is folded in by the same sqrt(2) edge rescaling as the 2D strip.
  void apply(const cvector& f, cvector& out) const {
    out.assign(f.size(), 0.0);
    const double ih2 = 1.0 / (h * h), ihh = 0.5 / h;
    const double er = std::sqrt(2.0);
    std::vector<double> dl(nch + 1);
    for (int k = 0; k <= nch; ++k) dl[k] = std::sqrt(0.5 * omega * k);
    cvector g(n1);
    for (int n = 0; n < nch; ++n) {
      const std::size_t off = (std::size_t)n1 * n;
      // Diagonal in channels: envelope Laplacian + level + drag diagonal.
      const double lev = omega * (2 * n + 1) +
                         alpha * alpha * (dl[n] * dl[n] +
                                          (n + 1 < nch ? dl[n + 1] * dl[n + 1]
                                                       : 0.0));
      for (int i = 0; i < n1; ++i) {
        std::complex<double> v = (2.0 * ih2 + lev) * f[off + i];
        if (i == 0) v -= er * ih2 * f[off + 1];
        else if (i == 1) {
          v -= er * ih2 * f[off];
          if (n1 > 2) v -= ih2 * f[off + 2];
        } else {
          v -= ih2 * f[off + i - 1];
          if (i + 1 < n1) v -= ih2 * f[off + i + 1];
        }
        out[off + i] += v;
      }
      // Drag off-diagonal: -alpha^2 D^2 couples n to n±2.
      if (n + 2 < nch) {
        const double w2 = -alpha * alpha * dl[n + 1] * dl[n + 2];
        const std::size_t of2 = (std::size_t)n1 * (n + 2);
        for (int i = 0; i < n1; ++i) {
          out[off + i] += w2 * f[of2 + i];
          out[of2 + i] += w2 * f[off + i];
        }
      }
      // First-order drag: g = P f_n with P the antisymmetric envelope
      // derivative, mixed to n±1 through D.  The boundary pair carries
      // sqrt(2) ABOVE the interior weight -- trapezoid edge rule plus the
      // half-weight wall node -- which is what makes the discrete system
      // impose the natural wall condition f'(0) = alpha D f(0).
      g[0] = er * ihh * f[off + 1];
      g[1] = -er * ihh * f[off];
      if (n1 > 2) g[1] += ihh * f[off + 2];
      for (int i = 2; i < n1; ++i) {
        std::complex<double> gv = -ihh * f[off + i - 1];
        if (i + 1 < n1) gv += ihh * f[off + i + 1];
        g[i] = gv;
      }
      const double two_a = 2.0 * alpha;
      if (n >= 1) {
        const std::size_t ofm = (std::size_t)n1 * (n - 1);
        for (int i = 0; i < n1; ++i) out[ofm + i] += two_a * dl[n] * g[i];
      }
      if (n + 1 < nch) {
        const std::size_t ofp = (std::size_t)n1 * (n + 1);
        for (int i = 0; i < n1; ++i) out[ofp + i] -= two_a * dl[n + 1] * g[i];
      }
    }
  }
};

// Quarter-wave envelope in the lowest channel: exact at the steepest tilt,
// a good overlap everywhere in the regime.
cvector channel_start(const ChannelOperator& op) {
  cvector f(op.size(), 0.0);
  for (int i = 0; i < op.n1; ++i)
    f[i] = std::cos(0.5 * kPi * (i * op.h) / (op.n1 * op.h));
  return f;
}

struct ChanSolveOut { double value, residual; int matvecs; };

ChanSolveOut solve_channels(double nu, double R1, int n1, double tol,
                            std::uint64_t seed, const cvector* warm,
                            cvector* out_vec) {
  ChannelOperator op;
  op.n1 = n1;
  op.nch = kChanCount;
  op.h = R1 / n1;
  op.omega = std::sin(nu);
  op.alpha = -std::cos(nu) / op.omega;
  LanczosOptions lo;
  lo.tol = tol;
  lo.seed = seed;
  auto apply = [&op](const cvector& u, cvector& v) { op.apply(u, v); };
  cvector x0;
  if (warm && warm->size() == op.size()) x0 = *warm;
  else x0 = channel_start(op);
  LanczosResult r = lanczos_lowest(apply, op.size(), lo, &x0);
  if (out_vec) *out_vec = std::move(r.vector);
  return {r.value, r.residual, r.matvecs};
}

}  // namespace

ZetaResult zeta(double nu, const ZetaOptions& opts, const cvector* warm_start,
                cvector* out_vector) {
  if (!(nu >= 0.0 && nu <= kPi / 2 + 1e-12))
    throw std::invalid_argument("zeta: nu must lie in [0, pi/2]");

  ZetaResult res;
  opts.grid.validate();
  HalfPlaneProblem base = opts.adapt_domain ? adapt_grid(opts.grid, nu)
                                            : [&] {
                                                HalfPlaneProblem p = opts.grid;
                                                p.nu = nu;
                                                p.xi = kXi0 * std::sqrt(
                                                           std::max(std::cos(nu), 0.0));
                                                return p;
                                              }();
  base.validate();

  if (nu < 1e-12) {
    // Separated problem: uniform in x2, explicit minimization over the
    // well offset (removes the artificial lateral-wall penalty exactly).
    const HalfPlaneProblem& g = opts.grid;
    DeGennes dg = de_gennes_minimum(g.domain_R1, g.n1, g.link_dx3);
    res.value = dg.value;
    res.xi_opt = dg.xi;
    res.residual = 0.0;  // direct tridiagonal solve
    if (opts.richardson) {
      DeGennes fine = de_gennes_minimum(g.domain_R1, 2 * g.n1, g.link_dx3);
      res.value = (4.0 * fine.value - dg.value) / 3.0;
      res.xi_opt = fine.xi;
    }
    if (opts.estimate_truncation) {
      DeGennes probe =
          de_gennes_minimum(0.75 * g.domain_R1, (3 * g.n1) / 4, g.link_dx3);
      res.truncation_err = std::max(0.0, probe.value - dg.value);
      res.truncation_flagged = res.truncation_err > opts.accuracy;
    }
    if (out_vector) out_vector->clear();
    return res;
  }

  if (nu > kNuChannelSplit) {
    cvector cvec;
    ChanSolveOut s = solve_channels(nu, kChanR1, kChanN1, opts.lanczos_tol,
                                    opts.seed, warm_start, &cvec);
    res.value = s.value;
    res.residual = s.residual;
    res.matvecs = s.matvecs;
    res.xi_opt = base.xi;
    if (opts.richardson) {
      ChanSolveOut sf = solve_channels(nu, kChanR1, 2 * kChanN1,
                                       opts.lanczos_tol, opts.seed, nullptr,
                                       nullptr);
      res.matvecs += sf.matvecs;
      res.value = (4.0 * sf.value - s.value) / 3.0;
      res.residual = std::max(s.residual, sf.residual);
    }
    if (opts.estimate_truncation) {
      ChanSolveOut sp = solve_channels(nu, 0.75 * kChanR1, (3 * kChanN1) / 4,
                                       opts.lanczos_tol, opts.seed, nullptr,
                                       nullptr);
      res.matvecs += sp.matvecs;
      res.truncation_err = std::abs(sp.value - s.value);
      res.truncation_flagged = res.truncation_err > opts.accuracy;
    }
    if (out_vector) *out_vector = std::move(cvec);
    return res;
  }

  cvector vec;
  SolveOut s = solve_2d(base, opts.lanczos_tol, opts.seed, warm_start, &vec);
  res.matvecs += s.matvecs;
  res.value = s.value;
  res.residual = s.residual;

  if (opts.richardson) {
    HalfPlaneProblem fine = base;
    fine.n1 *= 2;
    fine.n2 *= 2;
    cvector warm_f = prolong(vec, base, fine);
    cvector vec_f;
    SolveOut sf = solve_2d(fine, opts.lanczos_tol, opts.seed, &warm_f, &vec_f);
    res.matvecs += sf.matvecs;
    res.value = (4.0 * sf.value - s.value) / 3.0;
    res.residual = std::max(s.residual, sf.residual);
    vec = std::move(vec_f);
  }

  if (opts.estimate_truncation) {
    HalfPlaneProblem probe = base;
    probe.domain_R1 *= 0.75;
    probe.domain_R2 *= 0.75;
    probe.n1 = (3 * base.n1) / 4;
    probe.n2 = (3 * base.n2) / 4;
    if (probe.n2 % 2) ++probe.n2;
    SolveOut sp = solve_2d(probe, opts.lanczos_tol, opts.seed, nullptr, nullptr);
    res.matvecs += sp.matvecs;
    res.truncation_err = std::max(0.0, sp.value - s.value);
    res.truncation_flagged = res.truncation_err > opts.accuracy;
  }

  res.xi_opt = base.xi;
  if (out_vector) *out_vector = std::move(vec);
  return res;
}

ZetaTable ZetaTable::build(int node_count, const ZetaOptions& opts, int check_points) {
  if (node_count < 2)
    throw std::invalid_argument("ZetaTable::build: need at least 2 nodes");
  ZetaTable t;
  t.nu.resize(node_count);
  for (int k = 0; k < node_count; ++k)
    t.nu[k] = (kPi / 4.0) * (1.0 - std::cos(kPi * k / (node_count - 1)));
  t.nu.front() = 0.0;
  t.nu.back() = kPi / 2.0;

  cvector prev, cur;
  for (int k = 0; k < node_count; ++k) {
    ZetaResult r = zeta(t.nu[k], opts, prev.empty() ? nullptr : &prev, &cur);
    t.value.push_back(r.value);
    t.residual.push_back(r.residual);
    t.trunc_err.push_back(r.truncation_err);
    if (!cur.empty()) prev = cur;
  }
  t.rebuild_interp();

  // Spot-check the interpolant against fresh solves between nodes.
  check_points = std::min(check_points, node_count - 1);
  for (int c = 0; c < check_points; ++c) {
    const int gap = (int)(((c + 1) * (std::size_t)(node_count - 1)) / (check_points + 1));
    const double mid = 0.5 * (t.nu[gap] + t.nu[gap + 1]);
    ZetaResult r = zeta(mid, opts);
    t.interp_check_err = std::max(t.interp_check_err, std::abs(r.value - t(mid)));
  }
  return t;
}

void ZetaTable::rebuild_interp() { interp_ = MonotoneCubic(nu, value); }

double ZetaTable::operator()(double v) const {
  if (interp_.empty()) throw std::logic_error("ZetaTable: empty");
  return interp_(v);
}

double ZetaTable::inverse(double s) const {
  if (interp_.empty()) throw std::logic_error("ZetaTable: empty");
  if (s < value.front() - 1e-12 || s > value.back() + 1e-12) {
    std::ostringstream msg;
    msg << "ZetaTable::inverse: value " << s << " outside tabulated range ["
        << value.front() << ", " << value.back() << "]";
    throw std::domain_error(msg.str());
  }
  return interp_.invert(s);
}

void ZetaTable::save_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("ZetaTable::save_csv: cannot open " + path);
  f << "nu_rad,zeta,residual,truncation_err\n";
  char line[256];
  for (std::size_t k = 0; k < nu.size(); ++k) {
    std::snprintf(line, sizeof line, "%.12e,%.12e,%.3e,%.3e\n", nu[k], value[k],
                  residual[k], trunc_err[k]);
    f << line;
  }
  if (!f) throw std::runtime_error("ZetaTable::save_csv: write failed: " + path);
}

ZetaTable ZetaTable::load_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("ZetaTable::load_csv: cannot open " + path);
  ZetaTable t;
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("ZetaTable::load_csv: empty file " + path);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double a, b, c, d;
    char comma;
    if (!(ss >> a >> comma >> b >> comma >> c >> comma >> d))
      throw std::runtime_error("ZetaTable::load_csv: malformed line: " + line);
    t.nu.push_back(a);
    t.value.push_back(b);
    t.residual.push_back(c);
    t.trunc_err.push_back(d);
  }
  if (t.nu.size() < 2)
    throw std::runtime_error("ZetaTable::load_csv: too few rows in " + path);
  t.rebuild_interp();
  return t;
}

}  // namespace smectic
