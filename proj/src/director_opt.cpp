#include "smectic/director_opt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

namespace smectic {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::array<double, 4> normalize_quat(std::array<double, 4> q) {
  const double n =
      std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  for (double& c : q) c /= n;
  return q;
}

// Low-discrepancy spiral point i of n on the unit 3-sphere (irrational
// angle ratios sqrt(2) and the positive root of x^4 = x + 4), folded onto
// the w >= 0 hemisphere: q and -q are the same rotation, so one hemisphere
// covers the whole group.
std::array<double, 4> super_fib_point(int i, int n) {
  const double phi = std::sqrt(2.0);
  const double psi = 1.533751168755204288;
  const double s = i + 0.5, t = s / n, d = 2.0 * kPi * s;
  const double r = std::sqrt(t), rr = std::sqrt(1.0 - t);
  std::array<double, 4> q{r * std::sin(d / phi), r * std::cos(d / phi),
                          rr * std::sin(d / psi), rr * std::cos(d / psi)};
  if (q[0] < 0.0)
    for (double& c : q) c = -c;
  return q;
}

// Budgeted Nelder-Mead on R^3 (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2).  Deterministic; returns the best vertex seen.
template <class F>
std::pair<Vec3, double> nelder_mead3(F&& f, double scale, int max_evals) {
  struct P {
    Vec3 v;
    double f;
  };
  int evals = 0;
  auto ev = [&](const Vec3& v) {
    ++evals;
    return f(v);
  };
  std::array<P, 4> s;
  s[0] = {{0.0, 0.0, 0.0}, ev({0.0, 0.0, 0.0})};
  for (int k = 0; k < 3; ++k) {
    Vec3 v{};
    (&v.x)[k] = scale;
    s[k + 1] = {v, ev(v)};
  }
  auto by_f = [](const P& a, const P& b) { return a.f < b.f; };
  std::sort(s.begin(), s.end(), by_f);
  while (evals < max_evals) {
    double diam = 0.0;
    for (int k = 1; k < 4; ++k) diam = std::max(diam, norm(s[k].v - s[0].v));
    if (s[3].f - s[0].f <= 1e-13 * (1.0 + std::abs(s[0].f)) || diam < 1e-7)
      break;
    const Vec3 c = (1.0 / 3.0) * (s[0].v + s[1].v + s[2].v);
    const Vec3 xr = c + (c - s[3].v);
    const double fr = ev(xr);
    if (fr < s[0].f) {
      const Vec3 xe = c + 2.0 * (c - s[3].v);
      const double fe = ev(xe);
      s[3] = fe < fr ? P{xe, fe} : P{xr, fr};
    } else if (fr < s[2].f) {
      s[3] = {xr, fr};
    } else {
      const bool outside = fr < s[3].f;
      const Vec3 xc = outside ? c + 0.5 * (c - s[3].v) : c - 0.5 * (c - s[3].v);
      const double fc = ev(xc);
      if (fc < (outside ? fr : s[3].f)) {
        s[3] = {xc, fc};
      } else {
        for (int k = 1; k < 4; ++k) {
          s[k].v = s[0].v + 0.5 * (s[k].v - s[0].v);
          s[k].f = ev(s[k].v);
        }
      }
    }
    std::sort(s.begin(), s.end(), by_f);
  }
  return {s[0].v, s[0].f};
}

}  // namespace

ETable ETable::build(double b_frak, const ZetaTable& zeta,
                     const SurfaceEnergyPolicy& policy, int node_count,
                     int threads) {
  if (node_count < 5)
    throw std::invalid_argument("ETable::build: need at least 5 nodes");
  if (threads < 1)
    throw std::invalid_argument("ETable::build: threads must be >= 1");
  if (!(b_frak > 0.0))
    throw std::invalid_argument("ETable::build: b_frak must be positive");
  const double hi = kPi / 2;
  const double step = hi / (node_count - 1);
  std::vector<double> nodes;
  for (int k = 0; k < node_count; ++k) nodes.push_back(k * step);
  if (b_frak > zeta.min_value() && b_frak < zeta.max_value()) {
    const double nuc = zeta.inverse(b_frak);
    for (double d : {-step / 3.0, 0.0, step / 3.0}) {
      const double v = nuc + d;
      if (v > 1e-9 && v < hi - 1e-9) nodes.push_back(v);
    }
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [](double a, double b) { return b - a < 1e-6; }),
              nodes.end());

  ETable t;
  t.b_frak = b_frak;
  t.nu_nodes = nodes;
  t.E_values.assign(nodes.size(), 0.0);
  t.err_bars.assign(nodes.size(), 0.0);
  const int pool = std::min<int>(threads, static_cast<int>(nodes.size()));
  if (pool <= 1) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const SurfaceEnergyResult r =
          surface_energy_E(b_frak, nodes[k], policy, &zeta);
      t.E_values[k] = r.value;
      t.err_bars[k] = r.err_bar;
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(pool);
    std::vector<std::thread> workers;
    for (int w = 0; w < pool; ++w) {
      workers.emplace_back([&, w] {
        for (;;) {
          const std::size_t k = next.fetch_add(1);
          if (k >= nodes.size()) return;
          try {
            const SurfaceEnergyResult r =
                surface_energy_E(b_frak, nodes[k], policy, &zeta);
            t.E_values[k] = r.value;
            t.err_bars[k] = r.err_bar;
          } catch (const std::exception& e) {
            errors[w] = e.what();
            return;
          }
        }
      });
    }
    for (auto& th : workers) th.join();
    for (const std::string& e : errors)
      if (!e.empty()) throw std::runtime_error("ETable::build: " + e);
  }
  t.rebuild_interp();
  t.validate();
  return t;
}

double ETable::operator()(double nu) const {
  if (interp_.empty())
    throw std::logic_error("ETable: rebuild_interp() has not been called");
  return interp_(std::clamp(nu, 0.0, kPi / 2));
}

double ETable::max_err() const {
  double m = 0.0;
  for (double e : err_bars) m = std::max(m, e);
  return m;
}

bool ETable::all_zero() const {
  for (std::size_t k = 0; k < E_values.size(); ++k)
    if (std::abs(E_values[k]) > err_bars[k]) return false;
  return true;
}

void ETable::validate() const {
  const std::size_t n = nu_nodes.size();
  if (n < 2 || E_values.size() != n || err_bars.size() != n)
    throw std::invalid_argument("ETable: node/value/error lengths disagree");
  if (!(b_frak > 0.0))
    throw std::invalid_argument("ETable: b_frak must be positive");
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 && !(nu_nodes[k] > nu_nodes[k - 1]))
      throw std::invalid_argument("ETable: nodes must be strictly increasing");
    if (nu_nodes[k] < -1e-12 || nu_nodes[k] > kPi / 2 + 1e-12)
      throw std::invalid_argument("ETable: nodes must lie in [0, pi/2]");
    if (E_values[k] > 1e-15)
      throw std::invalid_argument("ETable: energy values must be <= 0");
    if (!(err_bars[k] >= 0.0))
      throw std::invalid_argument("ETable: error bars must be >= 0");
  }
  if (nu_nodes.front() > 1e-6 || nu_nodes.back() < kPi / 2 - 1e-6)
    throw std::invalid_argument("ETable: nodes must span [0, pi/2]");
}

void ETable::rebuild_interp() {
  interp_ = MonotoneCubic(nu_nodes, E_values);
}

void ETable::save_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("ETable::save_csv: cannot open " + path);
  char line[256];
  std::snprintf(line, sizeof line, "b_frak,%.17g\n", b_frak);
  f << line << "nu_rad,E,err_bar\n";
  for (std::size_t k = 0; k < nu_nodes.size(); ++k) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", nu_nodes[k],
                  E_values[k], err_bars[k]);
    f << line;
  }
  if (!f) throw std::runtime_error("ETable::save_csv: write failed: " + path);
}

ETable ETable::load_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("ETable::load_csv: cannot open " + path);
  ETable t;
  std::string line;
  if (!std::getline(f, line) ||
      std::sscanf(line.c_str(), "b_frak,%lf", &t.b_frak) != 1)
    throw std::runtime_error("ETable::load_csv: missing b_frak header in " +
                             path);
  if (!std::getline(f, line))
    throw std::runtime_error("ETable::load_csv: missing column header in " +
                             path);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double a, b, c;
    char comma;
    if (!(ss >> a >> comma >> b >> comma >> c))
      throw std::runtime_error("ETable::load_csv: malformed line: " + line);
    t.nu_nodes.push_back(a);
    t.E_values.push_back(b);
    t.err_bars.push_back(c);
  }
  t.rebuild_interp();
  t.validate();
  return t;
}

double tilde_E(const ETable& table, const SurfaceMesh& mesh,
               const DirectorRotation& r) {
  std::vector<double> vals(mesh.face_count());
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Vec3 n = director_at(r, mesh.face_centroids[f]);
    vals[f] = table(angle_nu(n, mesh.face_normals[f]));
  }
  return surface_integral(mesh, vals);
}

DirectorOptimum minimize_over_so3(const ETable& table, const SurfaceMesh& mesh,
                                  double tau, int budget) {
  if (budget < 100)
    throw std::invalid_argument(
        "minimize_over_so3: budget must be >= 100 evaluations");
  table.validate();

  DirectorOptimum out;
  const auto eval_q = [&](const std::array<double, 4>& q) {
    return tilde_E(table, mesh, DirectorRotation{q, tau});
  };

  // Covering phase: deterministic quasi-uniform rotations.
  const int ncover = budget / 2;
  out.landscape_samples.reserve(ncover);
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (int i = 0; i < ncover; ++i) {
    const std::array<double, 4> q = super_fib_point(i, ncover);
    const double v = eval_q(q);
    out.landscape_samples.push_back({q, v});
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  out.degenerate_flag = vmax - vmin <= 1e-2 * std::abs(vmin);

  std::vector<int> order(ncover);
  std::iota(order.begin(), order.end(), 0);
  const int nseeds = std::min(5, ncover);
  std::partial_sort(order.begin(), order.begin() + nseeds, order.end(),
                    [&](int a, int b) {
                      return out.landscape_samples[a].value <
                             out.landscape_samples[b].value;
                    });

  std::array<double, 4> best_q = out.landscape_samples[order[0]].quat;
  double best_v = out.landscape_samples[order[0]].value;

  // Refinement phase: Nelder-Mead in the exponential chart at each seed,
  // with the initial simplex at the covering resolution (ncover balls of
  // this rotation-angle radius tile the group's volume pi^2).
  const double scale = 2.0 * std::cbrt(3.0 * kPi / (4.0 * ncover));
  const int per_seed = (budget - ncover) / nseeds;
  for (int s = 0; s < nseeds; ++s) {
    const std::array<double, 4> q0 = out.landscape_samples[order[s]].quat;
    const auto chart = [&](const Vec3& v) {
      return eval_q(normalize_quat(quat_mul(q0, quat_exp(v))));
    };
    const auto [v, fv] = nelder_mead3(chart, scale, per_seed);
    if (fv < best_v) {
      best_v = fv;
      best_q = normalize_quat(quat_mul(q0, quat_exp(v)));
    }
  }

  if (best_q[0] < 0.0)
    for (double& c : best_q) c = -c;
  out.quat_star = best_q;
  out.e0_value = best_v;
  return out;
}

SmecticRegion smectic_region(const SurfaceMesh& mesh,
                             const DirectorRotation& r, double b,
                             const ZetaTable& zeta) {
  if (!(b > 1.0))
    throw std::invalid_argument("smectic_region: b must exceed 1");
  SmecticRegion out;
  const double thr = 1.0 / b;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Vec3 n = director_at(r, mesh.face_centroids[f]);
    if (zeta(angle_nu(n, mesh.face_normals[f])) < thr) {
      out.faces.push_back(static_cast<int>(f));
      out.area += mesh.face_areas[f];
    }
  }
  const double tot = mesh.total_area();
  out.area_fraction = tot > 0.0 ? out.area / tot : 0.0;
  return out;
}

std::vector<double> concentration_density(const ETable& table,
                                          const SurfaceMesh& mesh,
                                          const DirectorRotation& r,
                                          double b) {
  if (!(b > 1.0))
    throw std::invalid_argument("concentration_density: b must exceed 1");
  if (std::abs(table.b_frak * b - 1.0) > 1e-8)
    throw std::invalid_argument(
        "concentration_density: table must be tabulated at b_frak = 1/b");
  std::vector<double> dens(mesh.face_count());
  const double c = -2.0 * std::sqrt(b);
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Vec3 n = director_at(r, mesh.face_centroids[f]);
    dens[f] = c * table(angle_nu(n, mesh.face_normals[f]));
  }
  return dens;
}

GroundStatePrediction ground_state_prediction(const ETable& table,
                                              const SurfaceMesh& mesh,
                                              double kappa, double b,
                                              double tau, int budget) {
  if (!(kappa > 0.0))
    throw std::invalid_argument(
        "ground_state_prediction: kappa must be positive");
  if (!(b > 1.0))
    throw std::invalid_argument("ground_state_prediction: b must exceed 1");
  if (std::abs(table.b_frak * b - 1.0) > 1e-8)
    throw std::invalid_argument(
        "ground_state_prediction: table must be tabulated at b_frak = 1/b");
  GroundStatePrediction out;
  out.optimum = minimize_over_so3(table, mesh, tau, budget);
  out.e0 = out.optimum.e0_value;
  out.value = std::sqrt(b) * kappa * out.e0;
  return out;
}

double local_prediction(const ETable& table, const SurfaceMesh& mesh,
                        const DirectorRotation& r, double kappa, double b,
                        const std::vector<int>& faces) {
  if (!(kappa > 0.0))
    throw std::invalid_argument("local_prediction: kappa must be positive");
  if (!(b > 1.0))
    throw std::invalid_argument("local_prediction: b must exceed 1");
  if (std::abs(table.b_frak * b - 1.0) > 1e-8)
    throw std::invalid_argument(
        "local_prediction: table must be tabulated at b_frak = 1/b");
  double s = 0.0;
  for (int f : faces) {
    if (f < 0 || static_cast<std::size_t>(f) >= mesh.face_count())
      throw std::out_of_range("local_prediction: face index out of range");
    const Vec3 n = director_at(r, mesh.face_centroids[f]);
    s += mesh.face_areas[f] * table(angle_nu(n, mesh.face_normals[f]));
  }
  return std::sqrt(b) * kappa * s;
}

}  // namespace smectic
