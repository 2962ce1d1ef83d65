#include "smectic/ldg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace smectic {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double u64_to_unit(std::uint64_t x) {
  // 53 uniform mantissa bits -> [0,1); identical on every platform, unlike
  // std::uniform_real_distribution.
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Centered-difference matrix P[i][j] = d_i n_j at an interior node.
struct DerivMatrix {
  double p[3][3];
};

DerivMatrix deriv_matrix(const LdGDomain& dom, const std::vector<Vec3>& n,
                         std::size_t m) {
  DerivMatrix out;
  const double inv2h = 0.5 / dom.h();
  for (int axis = 0; axis < 3; ++axis) {
    const Vec3& fwd = n[dom.neighbor(m, axis, +1)];
    const Vec3& bwd = n[dom.neighbor(m, axis, -1)];
    out.p[axis][0] = (fwd.x - bwd.x) * inv2h;
    out.p[axis][1] = (fwd.y - bwd.y) * inv2h;
    out.p[axis][2] = (fwd.z - bwd.z) * inv2h;
  }
  return out;
}

double div_of(const DerivMatrix& d) {
  return d.p[0][0] + d.p[1][1] + d.p[2][2];
}

Vec3 curl_of(const DerivMatrix& d) {
  return {d.p[1][2] - d.p[2][1], d.p[2][0] - d.p[0][2],
          d.p[0][1] - d.p[1][0]};
}

double trace_sq(const DerivMatrix& d) {
  double t = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t += d.p[i][j] * d.p[j][i];
  return t;
}

double vec_component(const Vec3& v, int j) {
  return j == 0 ? v.x : (j == 1 ? v.y : v.z);
}

void add_component(Vec3& v, int j, double a) {
  if (j == 0)
    v.x += a;
  else if (j == 1)
    v.y += a;
  else
    v.z += a;
}

// Elastic energy density terms at one interior node.  Gradient pieces are
// optional: dP[i][j] = d(density)/dP[i][j] and ddirect = d(density)/dn.
struct ElasticDensity {
  double f_plus = 0.0;
  double l_null = 0.0;
};

ElasticDensity elastic_density(const DerivMatrix& P, const Vec3& n,
                               const LdGParams& p, double null_coef,
                               DerivMatrix* dP, Vec3* ddirect) {
  const double D = div_of(P);
  const Vec3 C = curl_of(P);
  const double s = dot(C, n) + p.tau;
  const Vec3 v = cross(C, n);
  ElasticDensity out;
  out.f_plus = p.K1 * D * D + p.K2 * s * s + p.K3 * dot(v, v);
  out.l_null = trace_sq(P) - D * D;
  if (dP != nullptr) {
    const Vec3 u = 2.0 * p.K2 * s * n + 2.0 * p.K3 * cross(n, v);
    const double diag = 2.0 * (p.K1 - null_coef) * D;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        dP->p[i][j] = (i == j ? diag : 0.0) + 2.0 * null_coef * P.p[j][i];
    // Curl adjoint: C_k = eps_{kij} P[i][j].
    dP->p[1][2] += u.x;
    dP->p[2][1] -= u.x;
    dP->p[2][0] += u.y;
    dP->p[0][2] -= u.y;
    dP->p[0][1] += u.z;
    dP->p[1][0] -= u.z;
    *ddirect = 2.0 * p.K2 * s * C + 2.0 * p.K3 * cross(v, C);
  }
  return out;
}

// Total energy without re-validation; used by the descent inner loops.
LdGEnergy energy_impl(const LdGDomain& dom,
                      const std::vector<std::complex<double>>& psi,
                      const std::vector<Vec3>& n, const LdGParams& p) {
  LdGEnergy e;
  const double h = dom.h();
  const double half_qh = 0.5 * p.q * h;
  const double kap2 = p.kappa * p.kappa;
  double kin = 0.0, pot = 0.0;
  for (std::size_t m = 0; m < dom.size(); ++m) {
    const double w = dom.node_weight(m);
    const double a2 = std::norm(psi[m]);
    pot += w * kap2 * a2 * (0.5 * a2 - 1.0);
    for (int axis = 0; axis < 3; ++axis) {
      const std::size_t nb = dom.neighbor(m, axis, +1);
      if (nb == LdGDomain::npos) continue;
      const double theta =
          half_qh * (vec_component(n[m], axis) + vec_component(n[nb], axis));
      const std::complex<double> d =
          psi[nb] * std::polar(1.0, -theta) - psi[m];
      kin += dom.edge_weight(m, axis) * std::norm(d);
    }
  }
  e.G = kin + pot;
  const double null_coef = p.drop_null_lagrangian ? 0.0 : (p.K2 + p.K4);
  for (std::size_t m : dom.interior()) {
    const DerivMatrix P = deriv_matrix(dom, n, m);
    const ElasticDensity d =
        elastic_density(P, n[m], p, null_coef, nullptr, nullptr);
    const double w = dom.node_weight(m);
    e.F_plus += w * d.f_plus;
    e.L_null += w * d.l_null;
  }
  e.total = e.G + e.F_plus + null_coef * e.L_null;
  return e;
}

void gradients_impl(const LdGDomain& dom,
                    const std::vector<std::complex<double>>& psi,
                    const std::vector<Vec3>& n, const LdGParams& p,
                    std::vector<std::complex<double>>& g_psi,
                    std::vector<Vec3>& g_n) {
  const double h = dom.h();
  const double half_qh = 0.5 * p.q * h;
  const double kap2 = p.kappa * p.kappa;
  g_psi.assign(dom.size(), {0.0, 0.0});
  g_n.assign(dom.size(), Vec3{0.0, 0.0, 0.0});
  for (std::size_t m = 0; m < dom.size(); ++m) {
    const double w = dom.node_weight(m);
    g_psi[m] += 2.0 * w * kap2 * (std::norm(psi[m]) - 1.0) * psi[m];
    for (int axis = 0; axis < 3; ++axis) {
      const std::size_t nb = dom.neighbor(m, axis, +1);
      if (nb == LdGDomain::npos) continue;
      const double we = dom.edge_weight(m, axis);
      const double theta =
          half_qh * (vec_component(n[m], axis) + vec_component(n[nb], axis));
      const std::complex<double> phase = std::polar(1.0, -theta);
      const std::complex<double> d = psi[nb] * phase - psi[m];
      g_psi[m] -= 2.0 * we * d;
      g_psi[nb] += 2.0 * we * d * std::conj(phase);
      const double dtheta =
          2.0 * we * std::imag(std::conj(d) * psi[nb] * phase);
      add_component(g_n[m], axis, dtheta * half_qh);
      add_component(g_n[nb], axis, dtheta * half_qh);
    }
  }
  const double null_coef = p.drop_null_lagrangian ? 0.0 : (p.K2 + p.K4);
  const double inv2h = 0.5 / h;
  for (std::size_t m : dom.interior()) {
    const DerivMatrix P = deriv_matrix(dom, n, m);
    DerivMatrix dP;
    Vec3 ddirect;
    elastic_density(P, n[m], p, null_coef, &dP, &ddirect);
    const double w = dom.node_weight(m);
    g_n[m] += w * ddirect;
    for (int i = 0; i < 3; ++i) {
      const std::size_t fwd = dom.neighbor(m, i, +1);
      const std::size_t bwd = dom.neighbor(m, i, -1);
      for (int j = 0; j < 3; ++j) {
        const double a = w * dP.p[i][j] * inv2h;
        add_component(g_n[fwd], j, a);
        add_component(g_n[bwd], j, -a);
      }
    }
  }
  // Project on the unit-sphere tangent planes; boundary nodes are pinned.
  for (std::size_t m = 0; m < dom.size(); ++m) {
    if (dom.is_boundary(m)) {
      g_n[m] = Vec3{0.0, 0.0, 0.0};
    } else {
      g_n[m] -= dot(g_n[m], n[m]) * n[m];
    }
  }
}

void check_unit(const std::vector<Vec3>& n, const char* what) {
  for (const Vec3& v : n) {
    if (std::abs(norm(v) - 1.0) > 1e-9)
      throw std::invalid_argument(std::string(what) +
                                  ": director field is not unit length");
  }
}

void check_state_params(const LdGState& s, const LdGParams& p) {
  if (std::abs(s.boundary_director.tau - p.tau) > 1e-12)
    throw std::invalid_argument(
        "boundary chirality differs from the energy's tau");
}

double lnull_integral(const LdGDomain& dom, const std::vector<Vec3>& n) {
  double out = 0.0;
  for (std::size_t m : dom.interior()) {
    const DerivMatrix P = deriv_matrix(dom, n, m);
    out += dom.node_weight(m) * (trace_sq(P) - div_of(P) * div_of(P));
  }
  return out;
}

}  // namespace

void LdGParams::validate() const {
  if (!(kappa > 0.0))
    throw std::invalid_argument("LdGParams: kappa must be positive");
  if (!(q >= 0.0) || !(tau >= 0.0))
    throw std::invalid_argument("LdGParams: q and tau must be nonnegative");
  if (!(K1 >= 0.0) || !(K2 >= 0.0) || !(K3 >= 0.0))
    throw std::invalid_argument("LdGParams: K1..K3 must be nonnegative");
  if (!std::isfinite(K4))
    throw std::invalid_argument("LdGParams: K4 must be finite");
}

LdGDomain::LdGDomain(Shape shape, double length, int npts)
    : shape_(shape), length_(length), npts_(npts) {
  if (!(length > 0.0))
    throw std::invalid_argument("LdGDomain: length must be positive");
  if (npts < 2) throw std::invalid_argument("LdGDomain: npts must be >= 2");
  h_ = length_ / (npts_ - 1);
  const std::size_t nflat =
      static_cast<std::size_t>(npts_) * npts_ * npts_;
  flat_to_masked_.assign(nflat, npos);
  const Vec3 center{0.5 * length_, 0.5 * length_, 0.5 * length_};
  const double radius = 0.5 * length_;
  std::vector<std::array<int, 3>> ijk;
  for (int k = 0; k < npts_; ++k)
    for (int j = 0; j < npts_; ++j)
      for (int i = 0; i < npts_; ++i) {
        const Vec3 x{i * h_, j * h_, k * h_};
        const bool in = shape_ == Shape::box
                            ? true
                            : norm(x - center) <= radius + 1e-12;
        if (!in) continue;
        const std::size_t flat =
            static_cast<std::size_t>(i) +
            static_cast<std::size_t>(npts_) *
                (static_cast<std::size_t>(j) +
                 static_cast<std::size_t>(npts_) * k);
        flat_to_masked_[flat] = coords_.size();
        coords_.push_back(x);
        ijk.push_back({i, j, k});
      }
  const std::size_t nmask = coords_.size();
  auto end_factor = [this](int idx) {
    return (idx == 0 || idx == npts_ - 1) ? 0.5 : 1.0;
  };
  weights_.resize(nmask);
  neigh_.assign(6 * nmask, npos);
  boundary_.assign(nmask, 0);
  edge_w_.assign(3 * nmask, 0.0);
  const double h3 = h_ * h_ * h_;
  for (std::size_t m = 0; m < nmask; ++m) {
    const auto [i, j, k] = ijk[m];
    weights_[m] = shape_ == Shape::box
                      ? h3 * end_factor(i) * end_factor(j) * end_factor(k)
                      : h3;
    const int di[3] = {1, 0, 0}, dj[3] = {0, 1, 0}, dk[3] = {0, 0, 1};
    for (int axis = 0; axis < 3; ++axis) {
      for (int dir : {+1, -1}) {
        const int ni = i + dir * di[axis], nj = j + dir * dj[axis],
                  nk = k + dir * dk[axis];
        const std::size_t nb = masked_index(ni, nj, nk);
        neigh_[6 * m + 2 * axis + (dir > 0 ? 0 : 1)] = nb;
        if (nb == npos) boundary_[m] = 1;
      }
      if (neigh_[6 * m + 2 * axis] != npos) {
        double t = 1.0;
        if (shape_ == Shape::box) {
          if (axis != 0) t *= end_factor(i);
          if (axis != 1) t *= end_factor(j);
          if (axis != 2) t *= end_factor(k);
        }
        edge_w_[3 * m + axis] = h_ * t;
      }
    }
    if (!boundary_[m]) interior_.push_back(m);
  }
  for (double w : weights_) volume_ += w;
}

std::size_t LdGDomain::masked_index(int i, int j, int k) const {
  if (i < 0 || j < 0 || k < 0 || i >= npts_ || j >= npts_ || k >= npts_)
    return npos;
  return flat_to_masked_[static_cast<std::size_t>(i) +
                         static_cast<std::size_t>(npts_) *
                             (static_cast<std::size_t>(j) +
                              static_cast<std::size_t>(npts_) * k)];
}

double LdGDomain::boundary_distance(const Vec3& x) const {
  if (shape_ == Shape::box) {
    const double dx = std::min(x.x, length_ - x.x);
    const double dy = std::min(x.y, length_ - x.y);
    const double dz = std::min(x.z, length_ - x.z);
    return std::min({dx, dy, dz});
  }
  const Vec3 center{0.5 * length_, 0.5 * length_, 0.5 * length_};
  return 0.5 * length_ - norm(x - center);
}

void LdGState::validate() const {
  if (psi.size() != domain.size() || n.size() != domain.size())
    throw std::invalid_argument("LdGState: field sizes do not match the grid");
  boundary_director.validate();
  check_unit(n, "LdGState");
  for (std::size_t m = 0; m < domain.size(); ++m) {
    if (!domain.is_boundary(m)) continue;
    const Vec3 pin = director_at(boundary_director, domain.coord(m));
    if (norm(n[m] - pin) > 1e-9)
      throw std::invalid_argument(
          "LdGState: boundary director departs from the pinned helical "
          "field");
  }
}

LdGState LdGState::initial(const LdGDomain& dom, const DirectorRotation& bd,
                           std::uint64_t seed, double noise_amplitude) {
  bd.validate();
  if (!(noise_amplitude >= 0.0))
    throw std::invalid_argument("LdGState: noise amplitude must be >= 0");
  LdGState s{dom, {}, {}, bd};
  s.psi.resize(dom.size());
  s.n.resize(dom.size());
  std::mt19937_64 rng(seed);
  for (std::size_t m = 0; m < dom.size(); ++m) {
    s.n[m] = director_at(bd, dom.coord(m));
    const double r = noise_amplitude * std::sqrt(u64_to_unit(rng()));
    const double phi = kTwoPi * u64_to_unit(rng());
    s.psi[m] = std::polar(r, phi);
  }
  return s;
}

LdGEnergy ldg_energy(const LdGState& s, const LdGParams& p) {
  p.validate();
  s.validate();
  check_state_params(s, p);
  return energy_impl(s.domain, s.psi, s.n, p);
}

double ldg_kinetic(const LdGDomain& dom,
                   const std::vector<std::complex<double>>& psi,
                   const std::vector<Vec3>& v, double q) {
  if (psi.size() != dom.size() || v.size() != dom.size())
    throw std::invalid_argument("ldg_kinetic: field sizes do not match");
  const double half_qh = 0.5 * q * dom.h();
  double kin = 0.0;
  for (std::size_t m = 0; m < dom.size(); ++m) {
    for (int axis = 0; axis < 3; ++axis) {
      const std::size_t nb = dom.neighbor(m, axis, +1);
      if (nb == LdGDomain::npos) continue;
      const double theta =
          half_qh * (vec_component(v[m], axis) + vec_component(v[nb], axis));
      const std::complex<double> d =
          psi[nb] * std::polar(1.0, -theta) - psi[m];
      kin += dom.edge_weight(m, axis) * std::norm(d);
    }
  }
  return kin;
}

void ldg_gradients(const LdGState& s, const LdGParams& p,
                   std::vector<std::complex<double>>& g_psi,
                   std::vector<Vec3>& g_n) {
  p.validate();
  s.validate();
  check_state_params(s, p);
  gradients_impl(s.domain, s.psi, s.n, p, g_psi, g_n);
}

double null_lagrangian_check(const LdGDomain& dom, const std::vector<Vec3>& n1,
                             const std::vector<Vec3>& n2) {
  if (n1.size() != dom.size() || n2.size() != dom.size())
    throw std::invalid_argument(
        "null_lagrangian_check: field sizes do not match");
  check_unit(n1, "null_lagrangian_check");
  check_unit(n2, "null_lagrangian_check");
  for (std::size_t m = 0; m < dom.size(); ++m) {
    if (dom.is_boundary(m) && norm(n1[m] - n2[m]) > 1e-9)
      throw std::invalid_argument(
          "null_lagrangian_check: fields disagree on the boundary");
  }
  return std::abs(lnull_integral(dom, n1) - lnull_integral(dom, n2));
}

FlowStepResult flow_step(LdGState& s, const LdGParams& p, double& dt_psi,
                         double& dt_n) {
  const LdGDomain& dom = s.domain;
  if (s.psi.size() != dom.size() || s.n.size() != dom.size())
    throw std::invalid_argument("flow_step: field sizes do not match");
  const double h2 = dom.h() * dom.h();
  const double dt_floor = 1e-12 * h2;
  const double dt_cap = 1e6 * h2;
  constexpr int kMaxBacktracks = 40;

  FlowStepResult res;
  std::vector<std::complex<double>> g_psi;
  std::vector<Vec3> g_n;
  gradients_impl(dom, s.psi, s.n, p, g_psi, g_n);
  double e_cur = energy_impl(dom, s.psi, s.n, p).total;
  res.energy_before = e_cur;

  double gp2 = 0.0;
  for (const auto& g : g_psi) gp2 += std::norm(g);
  if (gp2 > 1e-300) {
    std::vector<std::complex<double>> cand(dom.size());
    for (int bt = 0; bt < kMaxBacktracks && dt_psi >= dt_floor; ++bt) {
      for (std::size_t m = 0; m < dom.size(); ++m)
        cand[m] = s.psi[m] - dt_psi * g_psi[m];
      const double e_cand = energy_impl(dom, cand, s.n, p).total;
      if (e_cand <= e_cur) {
        s.psi.swap(cand);
        e_cur = e_cand;
        res.psi_accepted = true;
        if (bt == 0) dt_psi = std::min(dt_psi * 1.3, dt_cap);
        break;
      }
      dt_psi *= 0.5;
    }
  }

  gradients_impl(dom, s.psi, s.n, p, g_psi, g_n);
  double gn2 = 0.0;
  for (const auto& g : g_n) gn2 += dot(g, g);
  if (gn2 > 1e-300) {
    std::vector<Vec3> cand(dom.size());
    for (int bt = 0; bt < kMaxBacktracks && dt_n >= dt_floor; ++bt) {
      for (std::size_t m = 0; m < dom.size(); ++m) {
        if (dom.is_boundary(m)) {
          cand[m] = s.n[m];
          continue;
        }
        const Vec3 v = s.n[m] - dt_n * g_n[m];
        const double len = norm(v);
        cand[m] = len > 1e-14 ? (1.0 / len) * v : s.n[m];
      }
      const double e_cand = energy_impl(dom, s.psi, cand, p).total;
      if (e_cand <= e_cur) {
        s.n.swap(cand);
        e_cur = e_cand;
        res.n_accepted = true;
        if (bt == 0) dt_n = std::min(dt_n * 1.3, dt_cap);
        break;
      }
      dt_n *= 0.5;
    }
  }

  res.energy_after = e_cur;
  res.delta = res.energy_after - res.energy_before;
  res.stalled = !res.psi_accepted && !res.n_accepted && dt_psi < dt_floor &&
                dt_n < dt_floor;
  return res;
}

double est_residual(const LdGDomain& dom, const std::vector<Vec3>& n,
                    double tau) {
  if (n.size() != dom.size())
    throw std::invalid_argument("est_residual: field size does not match");
  double div2 = 0.0, tw2 = 0.0;
  for (std::size_t m : dom.interior()) {
    const DerivMatrix P = deriv_matrix(dom, n, m);
    const double w = dom.node_weight(m);
    const double D = div_of(P);
    const Vec3 r = curl_of(P) + tau * n[m];
    div2 += w * D * D;
    tw2 += w * dot(r, r);
  }
  return std::sqrt(div2) + std::sqrt(tw2);
}

std::optional<double> boundary_concentration(const LdGState& s, double t) {
  const LdGDomain& dom = s.domain;
  if (!(t > 0.0) || !(t <= dom.inradius()))
    throw std::invalid_argument(
        "boundary_concentration: thickness must lie in (0, inradius]");
  if (s.psi.size() != dom.size())
    throw std::invalid_argument(
        "boundary_concentration: field size does not match");
  double near = 0.0, total = 0.0;
  for (std::size_t m = 0; m < dom.size(); ++m) {
    const double q4 = dom.node_weight(m) * std::norm(s.psi[m]) *
                      std::norm(s.psi[m]);
    total += q4;
    if (dom.boundary_distance(dom.coord(m)) < t) near += q4;
  }
  if (total <= 0.0) return std::nullopt;
  return near / total;
}

LdGRunResult run_to_convergence(LdGState s0, const LdGParams& p,
                                const LdGStopRule& stop) {
  p.validate();
  s0.validate();
  check_state_params(s0, p);
  if (stop.window < 1 || stop.max_iters < 1 || !(stop.rel_tol > 0.0) ||
      !(stop.max_layer_fraction > 0.0) || !(stop.max_layer_fraction <= 1.0))
    throw std::invalid_argument("run_to_convergence: malformed stop rule");
  LdGRunResult out{std::move(s0), {}, {}};
  const double h2 = out.state.domain.h() * out.state.domain.h();
  double dt_psi = 0.5 * h2, dt_n = 0.5 * h2;
  out.trace.push_back(
      energy_impl(out.state.domain, out.state.psi, out.state.n, p).total);
  long it = 0;
  for (; it < stop.max_iters; ++it) {
    const FlowStepResult step = flow_step(out.state, p, dt_psi, dt_n);
    out.trace.push_back(step.energy_after);
    if (step.stalled) {
      out.diag.stalled = true;
      ++it;
      break;
    }
    if ((it + 1) % stop.window == 0 &&
        out.trace.size() > static_cast<std::size_t>(stop.window)) {
      const double e_now = out.trace.back();
      const double e_then =
          out.trace[out.trace.size() - 1 - stop.window];
      if (std::abs(e_now - e_then) <=
          stop.rel_tol * (std::abs(e_now) + 1.0)) {
        out.diag.converged = true;
        ++it;
        break;
      }
    }
  }
  out.diag.iters = it;
  const LdGDomain& dom = out.state.domain;
  out.diag.energy = energy_impl(dom, out.state.psi, out.state.n, p);
  out.diag.est_residual = est_residual(dom, out.state.n, p.tau);
  double maxpsi = 0.0, quart = 0.0;
  for (std::size_t m = 0; m < dom.size(); ++m) {
    maxpsi = std::max(maxpsi, std::abs(out.state.psi[m]));
    quart += dom.node_weight(m) * std::norm(out.state.psi[m]) *
             std::norm(out.state.psi[m]);
  }
  out.diag.max_abs_psi = maxpsi;
  out.diag.quartic_mass = quart;
  out.diag.layer_thickness =
      std::min(3.0 / p.kappa, stop.max_layer_fraction * dom.inradius());
  out.diag.boundary_fraction =
      boundary_concentration(out.state, out.diag.layer_thickness);
  return out;
}

std::pair<double, double> spectral_floor_check(
    const LdGDomain& dom, const std::vector<std::complex<double>>& u,
    const Vec3& B, const Vec3& x0) {
  if (u.size() != dom.size())
    throw std::invalid_argument(
        "spectral_floor_check: field size does not match");
  auto potential = [&](const Vec3& x) { return 0.5 * cross(B, x - x0); };
  double kin = 0.0, mass = 0.0;
  for (std::size_t m = 0; m < dom.size(); ++m) {
    mass += dom.node_weight(m) * std::norm(u[m]);
    for (int axis = 0; axis < 3; ++axis) {
      const std::size_t nb = dom.neighbor(m, axis, +1);
      if (nb == LdGDomain::npos) continue;
      // Exact line integral of the affine potential along the edge.
      const double theta =
          0.5 * dom.h() *
          (vec_component(potential(dom.coord(m)), axis) +
           vec_component(potential(dom.coord(nb)), axis));
      const std::complex<double> d =
          u[nb] * std::polar(1.0, -theta) - u[m];
      kin += dom.edge_weight(m, axis) * std::norm(d);
    }
  }
  return {kin, norm(B) * mass};
}

}  // namespace smectic
