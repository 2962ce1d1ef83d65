#include "smectic/halfspace_gl.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>

namespace smectic {

namespace {

using cdouble = std::complex<double>;

double node_weight(int i) { return (i == 0) ? 0.5 : 1.0; }

// Global minimum of p(t) = a0 + a1 t + a2 t^2 + a3 t^3 + a4 t^4 with a4 > 0:
// evaluate p at the real roots of its derivative cubic.
double quartic_argmin(double a1, double a2, double a3, double a4) {
  const double scale =
      std::max({std::abs(a1), std::abs(a2), std::abs(a3), std::abs(a4)});
  if (scale == 0.0) return 0.0;
  if (a4 <= scale * 1e-14) {
    // Degenerate quartic term (direction nearly null in the quartic metric):
    // fall back to the parabola when it is convex.
    if (a2 > scale * 1e-14) return -a1 / (2.0 * a2);
    return 0.0;
  }
  // p'(t) = a1 + 2 a2 t + 3 a3 t^2 + 4 a4 t^3; normalize to monic
  // t^3 + b2 t^2 + b1 t + b0.
  const double b2 = 3.0 * a3 / (4.0 * a4);
  const double b1 = 2.0 * a2 / (4.0 * a4);
  const double b0 = a1 / (4.0 * a4);
  // Depressed cubic y^3 + p y + q with t = y - b2/3.
  const double p = b1 - b2 * b2 / 3.0;
  const double q = b0 + b2 * (2.0 * b2 * b2 - 9.0 * b1) / 27.0;
  double roots[3];
  int nroots = 0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    const double u = std::cbrt(-q / 2.0 + s);
    const double v = std::cbrt(-q / 2.0 - s);
    roots[nroots++] = u + v;
  } else {
    // Three real roots (trigonometric form).
    const double r = std::sqrt(std::max(-p / 3.0, 0.0));
    if (r == 0.0) {
      roots[nroots++] = std::cbrt(-q);
    } else {
      const double arg =
          std::clamp(3.0 * q / (2.0 * p * r), -1.0, 1.0);
      const double phi = std::acos(arg) / 3.0;
      for (int m = 0; m < 3; ++m)
        roots[nroots++] =
            2.0 * r * std::cos(phi - 2.0 * M_PI * m / 3.0);
    }
  }
  double best_t = 0.0;
  double best_p = 0.0;  // p(0) with a0 dropped
  for (int m = 0; m < nroots; ++m) {
    const double t = roots[m] - b2 / 3.0;
    const double val = ((a4 * t + a3) * t + a2) * t * t + a1 * t;
    if (val < best_p) {
      best_p = val;
      best_t = t;
    }
  }
  return best_t;
}

double real_dot(const cvector& a, const cvector& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n)
    s += a[n].real() * b[n].real() + a[n].imag() * b[n].imag();
  return s;
}

}  // namespace

HalfSpaceGLProblem HalfSpaceGLProblem::for_box(double b_frak, double nu,
                                               double ell) {
  HalfSpaceGLProblem p;
  p.b_frak = b_frak;
  p.nu = nu;
  p.ell = ell;
  p.depth_R = 10.0;
  p.n1 = 40;  // h1 = 0.25
  const int lat = std::max(12, (int)std::lround(3.0 * 2.0 * ell));
  p.n2 = lat;  // h2 = h3 = 1/3
  p.n3 = lat;
  return p;
}

void HalfSpaceGLProblem::validate() const {
  if (!(b_frak > 0.0) || b_frak > 1.0)
    throw std::invalid_argument("b_frak must be in (0, 1]");
  if (!(nu >= 0.0) || nu > M_PI / 2.0 + 1e-12)
    throw std::invalid_argument("nu must be in [0, pi/2]");
  if (!(ell >= 4.0))
    throw std::invalid_argument("ell must be >= 4");
  if (!(depth_R >= 8.0))
    throw std::invalid_argument("depth_R must be >= 8");
  if (n1 < 4 || n2 < 4 || n3 < 4)
    throw std::invalid_argument("grid counts must be >= 4");
  if (!(grad_tol > 0.0))
    throw std::invalid_argument("grad_tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
}

HalfSpaceGL::HalfSpaceGL(HalfSpaceGLProblem p) : p_(p) {
  p_.validate();
  klo_ = p_.periodic_x3 ? 0 : 1;
  kcount_ = p_.periodic_x3 ? p_.n3 : p_.n3 - 1;
  vol_ = p_.h1() * p_.h2() * p_.h3();
  build_phases();
}

void HalfSpaceGL::build_phases() {
  const double c = std::cos(p_.nu), s = std::sin(p_.nu);
  const double h3 = p_.h3();
  cos_t_.assign((std::size_t)p_.n1 * (p_.n2 - 1), 0.0);
  sin_t_.assign(cos_t_.size(), 0.0);
  for (int j = 1; j < p_.n2; ++j)
    for (int i = 0; i < p_.n1; ++i) {
      const double a3 = x1(i) * c + x2(j) * s;
      const double theta = a3 * h3;
      const std::size_t m = (std::size_t)i + (std::size_t)p_.n1 * (j - 1);
      cos_t_[m] = std::cos(theta);
      sin_t_[m] = std::sin(theta);
    }
}

std::size_t HalfSpaceGL::size() const {
  return (std::size_t)p_.n1 * (p_.n2 - 1) * kcount_;
}

std::size_t HalfSpaceGL::index(int i, int j, int k) const {
  return (std::size_t)i +
         (std::size_t)p_.n1 *
             ((std::size_t)(j - 1) + (std::size_t)(p_.n2 - 1) * (k - klo_));
}

GLEnergyBreakdown HalfSpaceGL::energy(const cvector& u) const {
  if (u.size() != size())
    throw std::invalid_argument("field size does not match the grid (" +
                                std::to_string(u.size()) + " vs " +
                                std::to_string(size()) + ")");
  const int n1 = p_.n1, n2 = p_.n2;
  const double ih1 = 1.0 / (p_.h1() * p_.h1());
  const double ih2 = 1.0 / (p_.h2() * p_.h2());
  const double ih3 = 1.0 / (p_.h3() * p_.h3());
  GLEnergyBreakdown e;
  for (int k = klo_; k < klo_ + kcount_; ++k)
    for (int j = 1; j < n2; ++j) {
      const std::size_t base = index(0, j, k);
      for (int i = 0; i < n1; ++i) {
        const cdouble ui = u[base + i];
        const double w = node_weight(i);
        // x1 links (transverse trapezoid weight is 1 on stored nodes);
        // the link into the Dirichlet end at i = n1 uses a zero ghost.
        const cdouble up1 = (i + 1 < n1) ? u[base + i + 1] : cdouble(0.0);
        e.kinetic += vol_ * ih1 * std::norm(up1 - ui);
        // x2 links towards j+1 (the j = n2 wall is a zero ghost).
        const cdouble up2 =
            (j + 1 < n2) ? u[index(i, j + 1, k)] : cdouble(0.0);
        e.kinetic += w * vol_ * ih2 * std::norm(up2 - ui);
        if (j == 1)  // wall link 0 -> 1 not covered by the forward sweep
          e.kinetic += w * vol_ * ih2 * std::norm(ui);
        // x3 links towards k+1 with the Peierls phase of this column.
        const std::size_t m = (std::size_t)i + (std::size_t)n1 * (j - 1);
        const cdouble ph(cos_t_[m], -sin_t_[m]);
        cdouble up3(0.0);
        if (p_.periodic_x3)
          up3 = u[index(i, j, (k + 1) % p_.n3)];
        else if (k + 1 < p_.n3)
          up3 = u[index(i, j, k + 1)];
        e.kinetic += w * vol_ * ih3 * std::norm(ph * up3 - ui);
        if (!p_.periodic_x3 && k == 1)  // wall link 0 -> 1 in x3
          e.kinetic += w * vol_ * ih3 * std::norm(ui);
        const double u2 = std::norm(ui);
        e.mass -= w * vol_ * p_.b_frak * u2;
        e.quartic += w * vol_ * 0.5 * p_.b_frak * u2 * u2;
      }
    }
  return e;
}

void HalfSpaceGL::apply_quad(const cvector& u, cvector& out) const {
  if (u.size() != size())
    throw std::invalid_argument("field size does not match the grid");
  out.assign(u.size(), cdouble(0.0));
  const int n1 = p_.n1, n2 = p_.n2;
  const double ih1 = vol_ / (p_.h1() * p_.h1());
  const double ih2 = vol_ / (p_.h2() * p_.h2());
  const double ih3 = vol_ / (p_.h3() * p_.h3());
  for (int k = klo_; k < klo_ + kcount_; ++k)
    for (int j = 1; j < n2; ++j) {
      for (int i = 0; i < n1; ++i) {
        const std::size_t a = index(i, j, k);
        const cdouble ui = u[a];
        const double wi = node_weight(i);
        cdouble acc = -wi * vol_ * p_.b_frak * ui;
        // x1 direction: i = 0 has one link, interior two.
        if (i + 1 < n1)
          acc += ih1 * (ui - u[a + 1]);
        else
          acc += ih1 * ui;  // Dirichlet ghost at i = n1
        if (i > 0) acc += ih1 * (ui - u[a - 1]);
        // x2 direction, weight wi on both links at this node.
        {
          const cdouble um = (j > 1) ? u[index(i, j - 1, k)] : cdouble(0.0);
          const cdouble up = (j + 1 < n2) ? u[index(i, j + 1, k)]
                                          : cdouble(0.0);
          acc += wi * ih2 * (2.0 * ui - um - up);
        }
        // x3 direction with link phases: the link k -> k+1 carries
        // |e^{-i theta} u_{k+1} - u_k|^2, so the operator row picks up
        // -e^{-i theta} u_{k+1} - e^{+i theta} u_{k-1} + 2 u_k.
        {
          const std::size_t m = (std::size_t)i + (std::size_t)n1 * (j - 1);
          const cdouble ph(cos_t_[m], -sin_t_[m]);
          cdouble up(0.0), um(0.0);
          if (p_.periodic_x3) {
            up = u[index(i, j, (k + 1) % p_.n3)];
            um = u[index(i, j, (k + p_.n3 - 1) % p_.n3)];
          } else {
            if (k + 1 < p_.n3) up = u[index(i, j, k + 1)];
            if (k > 1) um = u[index(i, j, k - 1)];
          }
          acc += wi * ih3 * (2.0 * ui - ph * up - std::conj(ph) * um);
        }
        out[a] = acc;
      }
    }
}

void HalfSpaceGL::gradient(const cvector& u, cvector& g) const {
  apply_quad(u, g);
  for (std::size_t n = 0; n < g.size(); ++n) g[n] *= 2.0;
  const int n1 = p_.n1, n2 = p_.n2;
  for (int k = klo_; k < klo_ + kcount_; ++k)
    for (int j = 1; j < n2; ++j) {
      const std::size_t base = index(0, j, k);
      for (int i = 0; i < n1; ++i) {
        const cdouble ui = u[base + i];
        g[base + i] +=
            2.0 * node_weight(i) * vol_ * p_.b_frak * std::norm(ui) * ui;
      }
    }
}

void HalfSpaceGL::kinetic_apply(const cvector& u, cvector& v) const {
  if (u.size() != size())
    throw std::invalid_argument("field size does not match the grid");
  v.assign(u.size(), cdouble(0.0));
  const int n1 = p_.n1, n2 = p_.n2;
  const double ih1 = 1.0 / (p_.h1() * p_.h1());
  const double ih2 = 1.0 / (p_.h2() * p_.h2());
  const double ih3 = 1.0 / (p_.h3() * p_.h3());
  const double r2 = std::sqrt(2.0);
  for (int k = klo_; k < klo_ + kcount_; ++k)
    for (int j = 1; j < n2; ++j) {
      const std::size_t base = index(0, j, k);
      for (int i = 0; i < n1; ++i) {
        const std::size_t a = base + i;
        const cdouble ui = u[a];
        cdouble acc = (2.0 * ih1 + 2.0 * ih2 + 2.0 * ih3) * ui;
        // x1 stencil with the weight-rescaled wall edge (sqrt 2 coupling),
        // identical to the half-plane operator's free-face convention.
        if (i + 1 < n1) acc -= ((i == 0) ? r2 : 1.0) * ih1 * u[a + 1];
        if (i > 0) acc -= ((i == 1) ? r2 : 1.0) * ih1 * u[a - 1];
        if (j > 1) acc -= ih2 * u[index(i, j - 1, k)];
        if (j + 1 < n2) acc -= ih2 * u[index(i, j + 1, k)];
        const std::size_t m = (std::size_t)i + (std::size_t)n1 * (j - 1);
        const cdouble ph(cos_t_[m], -sin_t_[m]);
        if (p_.periodic_x3) {
          acc -= ih3 * ph * u[index(i, j, (k + 1) % p_.n3)];
          acc -= ih3 * std::conj(ph) * u[index(i, j, (k + p_.n3 - 1) % p_.n3)];
        } else {
          if (k + 1 < p_.n3) acc -= ih3 * ph * u[index(i, j, k + 1)];
          if (k > 1) acc -= ih3 * std::conj(ph) * u[index(i, j, k - 1)];
        }
        v[a] = acc;
      }
    }
}

namespace {

// Node-wise quartic energy sum(c_n |u_n|^4) with c_n = w_n vol b/2, plus the
// line-profile coefficients along a direction.
double quartic_sum(const HalfSpaceGL& op, const cvector& u) {
  const auto& p = op.problem();
  const double vol = p.h1() * p.h2() * p.h3();
  const int n1 = p.n1;
  double s = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const int i = (int)(n % n1);
    const double c = node_weight(i) * vol * 0.5 * p.b_frak;
    const double a = std::norm(u[n]);
    s += c * a * a;
  }
  return s;
}

void quartic_line(const HalfSpaceGL& op, const cvector& u, const cvector& d,
                  double out[5]) {
  const auto& p = op.problem();
  const double vol = p.h1() * p.h2() * p.h3();
  const int n1 = p.n1;
  double q0 = 0, q1 = 0, q2 = 0, q3 = 0, q4 = 0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const int i = (int)(n % n1);
    const double c = node_weight(i) * vol * 0.5 * p.b_frak;
    const double A = std::norm(u[n]);
    const double B = 2.0 * (u[n].real() * d[n].real() +
                            u[n].imag() * d[n].imag());
    const double C = std::norm(d[n]);
    q0 += c * A * A;
    q1 += c * 2.0 * A * B;
    q2 += c * (B * B + 2.0 * A * C);
    q3 += c * 2.0 * B * C;
    q4 += c * C * C;
  }
  out[0] = q0;
  out[1] = q1;
  out[2] = q2;
  out[3] = q3;
  out[4] = q4;
}

GLMinimizeResult minimize_once(const HalfSpaceGLProblem& p,
                               std::uint64_t seed,
                               const cvector* warm_start) {
  HalfSpaceGL op(p);
  const std::size_t N = op.size();
  GLMinimizeResult res;

  if (warm_start && warm_start->size() != N)
    throw std::invalid_argument("warm start does not match the grid");

  // Condensation-aware start.  A plain random field can relax onto the
  // stable manifold of the u = 0 saddle and stall there with a vanishing
  // gradient (a direct Lanczos probe of the 3D quadratic form is no better:
  // the lateral envelope ladder makes its low end a near-degenerate cluster
  // it cannot resolve in budget).  Instead build the trial mode the physics
  // dictates: the half-plane strip ground state on the box-matched grid,
  // times the lateral Dirichlet sine envelope, twisted by the optimal
  // wall-parallel phase e^{i xi* x3}.  If the exact quadratic form is
  // negative on that trial, seed it at its exact ray-minimizing amplitude:
  // the start energy is then strictly negative and monotone descent can
  // never return to zero.  Deterministic in the seed either way.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  cvector u(N);
  cvector trial;
  if (!warm_start) {
    const double cn = std::cos(p.nu);
    const double xi_star =
        0.76818 * std::sqrt(std::max(cn, 0.0));  // half-line well optimum
    HalfPlaneProblem hp;
    hp.nu = p.nu;
    hp.xi = xi_star;
    hp.domain_R1 = p.depth_R;
    hp.n1 = p.n1;
    hp.domain_R2 = p.ell;
    hp.n2 = p.n2;
    hp.link_dx3 = p.h3();
    try {
      HalfPlaneOperator strip(hp);
      LanczosOptions lopt;
      lopt.tol = 1e-7;
      lopt.seed = seed;
      auto mode2d = lanczos_lowest(
          [&strip](const cvector& a, cvector& b) { strip.apply(a, b); },
          strip.size(), lopt);
      trial.assign(N, cdouble(0.0));
      const int n1 = p.n1, n3 = p.n3;
      const int klo = p.periodic_x3 ? 0 : 1;
      const int kcount = p.periodic_x3 ? n3 : n3 - 1;
      for (int k = klo; k < klo + kcount; ++k) {
        const double x3 = -p.ell + k * p.h3();
        const double env =
            p.periodic_x3 ? 1.0 : std::sin(M_PI * k / (double)n3);
        const cdouble tw = env * std::exp(cdouble(0.0, xi_star * x3));
        for (int j = 1; j < p.n2; ++j)
          for (int i = 0; i < n1; ++i) {
            // The strip eigenvector lives in sqrt(weight)-rescaled
            // coordinates; undo the wall-face rescale for the physical
            // field.
            const double wall = (i == 0) ? std::sqrt(2.0) : 1.0;
            trial[op.index(i, j, k)] =
                wall * mode2d.vector[(std::size_t)i + (std::size_t)n1 * (j - 1)] * tw;
          }
      }
    } catch (const std::runtime_error&) {
      trial.clear();  // fall back to the plain random start
    }
  }
  if (warm_start) {
    u = *warm_start;
  } else {
    double q_trial = 1.0, q4_trial = 0.0;
    if (!trial.empty()) {
      cvector At(N);
      op.apply_quad(trial, At);
      q_trial = real_dot(trial, At);
      q4_trial = quartic_sum(op, trial);
    }
    // In the condensed branch the noise is only a deterministic tie-breaker:
    // white noise costs ~ amp^2/h^2 per unit volume in gradient energy, so
    // it must stay far below the condensate's own (possibly shallow) well
    // depth to keep the start energy negative.
    const bool condensed = q_trial < -1e-14 && q4_trial > 0.0;
    const double amp = condensed ? 1e-4 : 0.5 / std::sqrt(2.0);
    for (auto& z : u) {
      const double a = uni(rng), b = uni(rng);
      z = cdouble(amp * a, amp * b);
    }
    if (condensed) {
      const double cstar = std::sqrt(-q_trial / (2.0 * q4_trial));
      for (std::size_t n = 0; n < N; ++n) u[n] += cstar * trial[n];
    }
  }

  cvector Au(N), Ad(N), g(N), gnew(N), d(N);
  op.apply_quad(u, Au);
  double energy = real_dot(u, Au) + quartic_sum(op, u);

  auto grad_from_cache = [&](const cvector& uu, const cvector& Auu,
                             cvector& gg) {
    const int n1 = p.n1;
    const double vol = p.h1() * p.h2() * p.h3();
    for (std::size_t n = 0; n < N; ++n) {
      const int i = (int)(n % n1);
      gg[n] = 2.0 * Auu[n] + 2.0 * node_weight(i) * vol * p.b_frak *
                                 std::norm(uu[n]) * uu[n];
    }
  };

  grad_from_cache(u, Au, g);
  double gg = real_dot(g, g);
  for (std::size_t n = 0; n < N; ++n) d[n] = -g[n];
  bool steepest = true;

  const double sqrtN = std::sqrt((double)N);
  res.gradient_norm = std::sqrt(gg) / sqrtN;
  int iter = 0;
  for (; iter < p.max_iters; ++iter) {
    if (std::sqrt(gg) / sqrtN < p.grad_tol) {
      res.converged = true;
      break;
    }
    op.apply_quad(d, Ad);
    double q[5];
    quartic_line(op, u, d, q);
    const double a1 = 2.0 * real_dot(d, Au) + q[1];
    const double a2 = real_dot(d, Ad) + q[2];
    const double t = quartic_argmin(a1, a2, q[3], q[4]);
    if (t == 0.0) {  // no descent along d
      if (steepest) break;  // stuck at a flat point
      for (std::size_t n = 0; n < N; ++n) d[n] = -g[n];
      steepest = true;
      continue;
    }
    steepest = false;
    for (std::size_t n = 0; n < N; ++n) {
      u[n] += t * d[n];
      Au[n] += t * Ad[n];
    }
    if ((iter & 63) == 63) op.apply_quad(u, Au);  // flush cache drift
    const double enew = real_dot(u, Au) + quartic_sum(op, u);
    if (enew > energy + 1e-12 * std::max(1.0, std::abs(energy)))
      throw std::logic_error(
          "reduced-GL descent accepted an energy increase");
    energy = enew;
    grad_from_cache(u, Au, gnew);
    const double ggnew = real_dot(gnew, gnew);
    double beta = 0.0;
    if (gg > 0.0) {
      double num = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        const cdouble diff = gnew[n] - g[n];
        num += gnew[n].real() * diff.real() + gnew[n].imag() * diff.imag();
      }
      beta = std::max(0.0, num / gg);
    }
    double slope = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      d[n] = -gnew[n] + beta * d[n];
      slope += gnew[n].real() * d[n].real() + gnew[n].imag() * d[n].imag();
    }
    if (slope >= 0.0) {
      for (std::size_t n = 0; n < N; ++n) d[n] = -gnew[n];
      steepest = true;
    }
    g.swap(gnew);
    gg = ggnew;
  }

  res.u = std::move(u);
  res.breakdown = op.energy(res.u);
  res.d_value = res.breakdown.total();
  res.gradient_norm = std::sqrt(gg) / sqrtN;
  res.iters = iter;
  // The zero field is always admissible with energy exactly zero; when the
  // iterate only approached it from above (no condensation), return it.
  if (res.d_value > 0.0) {
    res.u.assign(N, cdouble(0.0));
    res.breakdown = GLEnergyBreakdown{};
    res.d_value = 0.0;
    res.gradient_norm = 0.0;
  }
  return res;
}

// Copy a field between boxes that share the node spacing on every axis and
// the depth grid; the larger box pads with zeros.  The link phases depend on
// (x1, x2) only, so a lattice-aligned copy preserves the field's energy up
// to the new-edge terms.  Returns empty when the grids are not nested.
cvector embed_field(const cvector& us, const HalfSpaceGLProblem& ps,
                    const HalfSpaceGLProblem& pb) {
  if (ps.periodic_x3 || pb.periodic_x3) return {};
  if (ps.n1 != pb.n1 || std::abs(ps.depth_R - pb.depth_R) > 1e-12) return {};
  if (std::abs(ps.h2() - pb.h2()) > 1e-12 ||
      std::abs(ps.h3() - pb.h3()) > 1e-12)
    return {};
  const double dj_real = (pb.ell - ps.ell) / pb.h2();
  const double dk_real = (pb.ell - ps.ell) / pb.h3();
  const long dj = std::lround(dj_real), dk = std::lround(dk_real);
  if (std::abs(dj_real - dj) > 1e-9 || std::abs(dk_real - dk) > 1e-9 ||
      dj < 0 || dk < 0)
    return {};
  HalfSpaceGL small(ps), big(pb);
  if (us.size() != small.size()) return {};
  cvector ub(big.size(), cdouble(0.0));
  for (int k = 1; k < ps.n3; ++k)
    for (int j = 1; j < ps.n2; ++j)
      for (int i = 0; i < ps.n1; ++i)
        ub[big.index(i, j + (int)dj, k + (int)dk)] =
            us[small.index(i, j, k)];
  return ub;
}

}  // namespace

GLMinimizeResult minimize_reduced_gl(const HalfSpaceGLProblem& p,
                                     int restarts,
                                     const cvector* warm_start) {
  p.validate();
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  GLMinimizeResult best;
  for (int r = 0; r < restarts; ++r) {
    GLMinimizeResult run =
        minimize_once(p, p.seed + 1000003ull * r, r == 0 ? warm_start : nullptr);
    if (r == 0 || run.d_value < best.d_value) best = std::move(run);
  }
  return best;
}

double box_threshold(const HalfSpaceGLProblem& p) {
  p.validate();
  HalfPlaneProblem hp;
  hp.nu = p.nu;
  hp.domain_R1 = p.depth_R;
  hp.n1 = p.n1;
  hp.domain_R2 = p.ell;
  hp.n2 = p.n2;
  hp.link_dx3 = p.h3();
  double worst_residual = 0.0;
  auto val = [&](double xi) {
    hp.xi = xi;
    HalfPlaneOperator op(hp);
    LanczosOptions lo;
    lo.tol = 2e-6;
    lo.seed = p.seed;
    auto r = lanczos_lowest(
        [&op](const cvector& a, cvector& b) { op.apply(a, b); }, op.size(),
        lo);
    worst_residual = std::max(worst_residual, r.residual);
    return r.value;
  };
  // The link well is periodic in the offset with period 2 pi / h3, so one
  // period of the admissible window covers every branch.
  const double cn = std::cos(p.nu), sn = std::sin(p.nu);
  const double period = 2.0 * M_PI / p.h3();
  double lo = -sn * p.ell - 1.0, hi = cn * p.depth_R + sn * p.ell + 1.0;
  if (hi - lo > period) {
    const double mid = 0.5 * (lo + hi);
    lo = mid - 0.5 * period;
    hi = mid + 0.5 * period;
  }
  const int M = 48;
  const double step = (hi - lo) / M;
  std::vector<double> vals(M + 1);
  int ibest = 0;
  for (int m = 0; m <= M; ++m) {
    vals[m] = val(lo + m * step);
    if (vals[m] < vals[ibest]) ibest = m;
  }
  double best = vals[ibest];
  // Parabolic refinement, then a short golden shrink of the bracket.
  if (ibest > 0 && ibest < M) {
    const double f0 = vals[ibest - 1], f1 = vals[ibest], f2 = vals[ibest + 1];
    const double denom = f0 - 2.0 * f1 + f2;
    if (denom > 1e-14) {
      const double xc =
          lo + ibest * step + 0.5 * step * (f0 - f2) / denom;
      best = std::min(best, val(xc));
    }
    double a = lo + (ibest - 1) * step, b = lo + (ibest + 1) * step;
    const double gr = 0.381966;
    double x1 = a + gr * (b - a), x2 = b - gr * (b - a);
    double fx1 = val(x1), fx2 = val(x2);
    for (int it = 0; it < 6; ++it) {
      if (fx1 < fx2) {
        b = x2; x2 = x1; fx2 = fx1;
        x1 = a + gr * (b - a); fx1 = val(x1);
      } else {
        a = x1; x1 = x2; fx1 = fx2;
        x2 = b - gr * (b - a); fx2 = val(x2);
      }
      best = std::min(best, std::min(fx1, fx2));
    }
  }
  // Lanczos approaches the lowest eigenvalue from above; subtract the
  // residual so the returned number is a true lower bound on the form.
  return best - worst_residual;
}

SurfaceEnergyResult surface_energy_E(double b_frak, double nu,
                                     const SurfaceEnergyPolicy& policy,
                                     const ZetaTable* zeta_table) {
  const std::vector<double>& ells = policy.ells;
  if (ells.size() < 2)
    throw std::invalid_argument("need at least two box sizes");
  for (std::size_t m = 1; m < ells.size(); ++m)
    if (!(ells[m] > ells[m - 1]))
      throw std::invalid_argument("box sizes must increase");
  SurfaceEnergyResult out;
  out.weak_decay =
      zeta_table && std::abs((*zeta_table)(nu) - b_frak) < 0.03;
  cvector prev_u;
  HalfSpaceGLProblem prev_p;
  bool have_prev = false;
  for (double ell : ells) {
    HalfSpaceGLProblem p = HalfSpaceGLProblem::for_box(b_frak, nu, ell);
    if (out.weak_decay) {
      // Near the spectral threshold the minimum is shallow and decays
      // weakly in depth; tighten the descent tolerance tenfold.
      p.grad_tol *= 0.1;
      p.max_iters *= 2;
    }
    if (policy.grad_tol > 0.0) p.grad_tol = policy.grad_tol;
    if (policy.max_iters > 0) p.max_iters = policy.max_iters;
    if (policy.certify_zero) {
      const double thr = box_threshold(p);
      out.thresholds.push_back(thr);
      // 3e-3 guard covers the offset-scan discreteness on top of the
      // residual-corrected eigenvalue bound.
      if (b_frak <= thr - 3e-3) {
        out.certified_zero.push_back(1);
        out.ells.push_back(ell);
        out.d_over_area.push_back(0.0);
        have_prev = false;
        prev_u.clear();
        continue;
      }
      out.certified_zero.push_back(0);
    }
    cvector warm;
    if (policy.warm_chain && have_prev)
      warm = embed_field(prev_u, prev_p, p);
    GLMinimizeResult r = minimize_reduced_gl(
        p, policy.restarts, warm.empty() ? nullptr : &warm);
    out.all_converged = out.all_converged && r.converged;
    out.ells.push_back(ell);
    out.d_over_area.push_back(r.d_value / (4.0 * ell * ell));
    if (r.d_value < 0.0) {
      prev_u = std::move(r.u);
      prev_p = p;
      have_prev = true;
    } else {
      have_prev = false;
      prev_u.clear();
    }
  }
  const std::size_t last = out.ells.size() - 1;
  out.value = out.d_over_area[last];
  const double spread =
      std::abs(out.d_over_area[last] - out.d_over_area[last - 1]);
  // Model E(ell) = E_inf + c ell^(-2/3) through the last two points; the
  // fitted tail at the largest ell bounds the residual truncation bias.
  const double w_prev = std::pow(out.ells[last - 1], -2.0 / 3.0);
  const double w_last = std::pow(out.ells[last], -2.0 / 3.0);
  const double c_fit =
      (out.d_over_area[last - 1] - out.d_over_area[last]) / (w_prev - w_last);
  // Floor: an all-zero (certified) sequence still reports a nonzero bar, so
  // vanishing estimates compare as |E| < err_bar rather than tying at zero.
  out.err_bar = std::max(spread + std::abs(c_fit) * w_last, 1e-12);
  if (out.ells.size() >= 3) {
    const double gap1 =
        std::abs(out.d_over_area[last - 1] - out.d_over_area[last - 2]);
    out.flagged = spread > std::max(1.5 * gap1, 1e-12);
  }
  return out;
}

double decay_profile(const cvector& u, const HalfSpaceGLProblem& p,
                     double p_exp) {
  if (!(p_exp > 0.0) || !(p_exp < 1.0))
    throw std::invalid_argument("decay exponent must be in (0, 1)");
  HalfSpaceGL op(p);
  if (u.size() != op.size())
    throw std::invalid_argument("field size does not match the grid");
  const double vol = p.h1() * p.h2() * p.h3();
  const int n1 = p.n1;
  double s = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const int i = (int)(n % n1);
    s += node_weight(i) * vol * std::pow(i * p.h1(), p_exp) *
         std::norm(u[n]);
  }
  return s / (4.0 * p.ell * p.ell);
}

}  // namespace smectic
