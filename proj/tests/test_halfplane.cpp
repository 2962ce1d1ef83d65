#include "doctest.h"
#include "smectic/halfplane.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

using namespace smectic;

namespace {

constexpr double kPi = 3.14159265358979323846;

LanczosResult solve_op(const HalfPlaneOperator& op, double tol = 1e-10,
                       std::uint64_t seed = 20260822) {
  LanczosOptions lo;
  lo.tol = tol;
  lo.seed = seed;
  auto apply = [&op](const cvector& u, cvector& v) { op.apply(u, v); };
  return lanczos_lowest(apply, op.size(), lo);
}

// Independent dense reference for small operators (real couplings only).
double dense_lowest(const HalfPlaneOperator& op) {
  const int N = (int)op.size();
  Eigen::MatrixXd A(N, N);
  cvector e(N, 0.0), col;
  for (int k = 0; k < N; ++k) {
    e[k] = 1.0;
    op.apply(e, col);
    for (int r = 0; r < N; ++r) {
      REQUIRE(std::abs(std::imag(col[r])) == 0.0);
      A(r, k) = std::real(col[r]);
    }
    e[k] = 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Lowest eigenvalue of a symmetric tridiagonal chain (independent helper for
// the tensor-factorization oracles below).
double tridiag_lowest(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

TEST_SUITE("halfplane") {

TEST_CASE("problem validation rejects bad parameters") {
  HalfPlaneProblem p;
  p.nu = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.nu = 2.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.n1 = 2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.domain_R2 = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.xi = std::nan("");
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("stored couplings are exactly Hermitian") {
  HalfPlaneProblem p;
  p.nu = 0.6;
  p.domain_R1 = 6;
  p.domain_R2 = 6;
  p.n1 = 24;
  p.n2 = 48;
  HalfPlaneOperator op(p);
  CHECK(op.max_hermiticity_defect() == 0.0);
}

TEST_CASE("Rayleigh quotient is real and bounded below by the minimum") {
  HalfPlaneProblem p;
  p.nu = 0.9;
  p.domain_R1 = 5;
  p.domain_R2 = 5;
  p.n1 = 20;
  p.n2 = 40;
  HalfPlaneOperator op(p);
  auto r = solve_op(op);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    cvector u(op.size());
    for (auto& z : u) z = {uni(rng), uni(rng)};
    CHECK(op.rayleigh(u) >= r.value - 1e-9);
  }
  CHECK(op.rayleigh(r.vector) == doctest::Approx(r.value).epsilon(1e-10));
}

TEST_CASE("lowest eigenvalue matches a dense solve away from separability") {
  HalfPlaneProblem p;
  p.nu = 0.7;
  p.domain_R1 = 6;
  p.domain_R2 = 6;
  p.n1 = 24;
  p.n2 = 48;
  HalfPlaneOperator op(p);
  const double exact = dense_lowest(op);
  auto r = solve_op(op);
  CHECK(r.value == doctest::Approx(exact).epsilon(1e-9));
  CHECK(r.residual < 1e-9);
}

TEST_CASE("separable tilt 0: spectrum factorizes over the two axes") {
  // At nu = 0 with a fixed offset the well depends on x1 only, so the lowest
  // 2D eigenvalue must equal (1D well chain) + (free Dirichlet chain).
  HalfPlaneProblem p;
  p.nu = 0.0;
  p.xi = 0.7681;
  p.domain_R1 = 10;
  p.domain_R2 = 12;
  p.n1 = 50;
  p.n2 = 120;
  HalfPlaneOperator op(p);

  const double h1 = p.h1(), h2 = p.h2();
  Eigen::VectorXd d1(p.n1), s1(p.n1 - 1);
  for (int i = 0; i < p.n1; ++i) {
    const double x = i * h1 - p.xi;
    d1(i) = 2.0 / (h1 * h1) + x * x;
  }
  for (int i = 0; i + 1 < p.n1; ++i)
    s1(i) = (i == 0 ? -std::sqrt(2.0) : -1.0) / (h1 * h1);
  const double mu1 = tridiag_lowest(d1, s1);
  // Dirichlet chain of n2 - 1 interior nodes: lowest mode known in closed form.
  const double lam2 = (2.0 / (h2 * h2)) * (1.0 - std::cos(kPi / p.n2));

  auto r = solve_op(op);
  CHECK(r.value == doctest::Approx(mu1 + lam2).epsilon(1e-9));
}

TEST_CASE("separable tilt pi/2: spectrum factorizes the other way") {
  HalfPlaneProblem p;
  p.nu = kPi / 2;
  p.xi = 0.0;
  p.domain_R1 = 8;
  p.domain_R2 = 8;
  p.n1 = 40;
  p.n2 = 80;
  HalfPlaneOperator op(p);

  const double h1 = p.h1(), h2 = p.h2();
  // x1 chain: natural at 0 (lumped half-weight), Dirichlet at R1, no well.
  Eigen::VectorXd d1(p.n1), s1(p.n1 - 1);
  for (int i = 0; i < p.n1; ++i) d1(i) = 2.0 / (h1 * h1);
  for (int i = 0; i + 1 < p.n1; ++i)
    s1(i) = (i == 0 ? -std::sqrt(2.0) : -1.0) / (h1 * h1);
  // x2 chain: Dirichlet walls with the well on the interior nodes.
  Eigen::VectorXd d2(p.n2 - 1), s2(p.n2 - 2);
  for (int j = 0; j + 1 < p.n2; ++j) {
    const double x = -p.domain_R2 + (j + 1) * h2;
    d2(j) = 2.0 / (h2 * h2) + x * x;
  }
  for (int j = 0; j + 2 < p.n2; ++j) s2(j) = -1.0 / (h2 * h2);

  auto r = solve_op(op);
  CHECK(r.value ==
        doctest::Approx(tridiag_lowest(d1, s1) + tridiag_lowest(d2, s2)).epsilon(1e-9));
}

TEST_CASE("gauge phases leave the spectrum unchanged") {
  HalfPlaneProblem p;
  p.nu = 0.8;
  p.domain_R1 = 6;
  p.domain_R2 = 6;
  p.n1 = 24;
  p.n2 = 48;
  HalfPlaneOperator op(p);
  auto base = solve_op(op);

  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> uni(0.0, 2.0 * kPi);
  std::vector<double> chi(op.size());
  for (auto& c : chi) c = uni(rng);
  op.apply_gauge_phase(chi);
  CHECK(op.max_hermiticity_defect() < 1e-15);
  auto gauged = solve_op(op);
  CHECK(gauged.value == doctest::Approx(base.value).epsilon(1e-8));
}

TEST_CASE("tilt 0 value reproduces the classical half-line well constant") {
  ZetaOptions opts;  // default grid; tilt-0 path is one-dimensional
  auto r = zeta(0.0, opts);
  CHECK(r.value == doctest::Approx(0.59010).epsilon(2e-3));
  CHECK(r.xi_opt == doctest::Approx(0.7681).epsilon(2e-2));

  ZetaOptions rich = opts;
  rich.richardson = true;
  auto r2 = zeta(0.0, rich);
  CHECK(std::abs(r2.value - 0.590106) <= std::abs(r.value - 0.590106) + 1e-12);
  CHECK(r2.value == doctest::Approx(0.590106).epsilon(5e-4));
}

TEST_CASE("zeta is strictly increasing in the tilt") {
  ZetaOptions opts;
  opts.grid.domain_R1 = 10;
  opts.grid.domain_R2 = 12;
  opts.grid.n1 = 50;
  opts.grid.n2 = 120;
  opts.lanczos_tol = 1e-8;
  const double nus[] = {0.15, 0.45, 0.8, 1.15, 1.45, kPi / 2};
  double prev_val = zeta(0.0, opts).value;
  cvector warm, cur;
  for (double nu : nus) {
    auto r = zeta(nu, opts, warm.empty() ? nullptr : &warm, &cur);
    CHECK(r.value > prev_val);
    CHECK(r.value > 0.5);
    CHECK(r.value < 1.2);
    prev_val = r.value;
    warm = cur;
  }
}

TEST_CASE("tiny domains are flagged by the truncation probe") {
  ZetaOptions opts;
  opts.grid.domain_R1 = 4;
  opts.grid.domain_R2 = 4;
  opts.grid.n1 = 20;
  opts.grid.n2 = 40;
  opts.adapt_domain = false;  // keep the domain deliberately too small
  opts.estimate_truncation = true;
  opts.accuracy = 1e-6;
  auto r = zeta(0.9, opts);
  CHECK(r.truncation_err > 1e-6);
  CHECK(r.truncation_flagged);
}

TEST_CASE("table is monotone, invertible, and round-trips through CSV") {
  ZetaOptions opts;
  opts.grid.domain_R1 = 10;
  opts.grid.domain_R2 = 12;
  opts.grid.n1 = 50;
  opts.grid.n2 = 120;
  opts.lanczos_tol = 1e-8;
  ZetaTable t = ZetaTable::build(7, opts, 2);

  REQUIRE(t.nu.size() == 7);
  CHECK(t.nu.front() == 0.0);
  CHECK(t.nu.back() == doctest::Approx(kPi / 2));
  for (std::size_t k = 0; k + 1 < t.value.size(); ++k)
    CHECK(t.value[k] < t.value[k + 1]);
  CHECK(t.interp_check_err < 5e-3);

  // Inverse consistency scanned over the attained range.
  for (int k = 1; k < 25; ++k) {
    const double s =
        t.min_value() + (t.max_value() - t.min_value()) * k / 25.0;
    const double nu = t.inverse(s);
    CHECK(t(nu) == doctest::Approx(s).epsilon(1e-9));
  }
  CHECK_THROWS_AS((void)t.inverse(t.min_value() - 0.1), std::domain_error);
  CHECK_THROWS_AS((void)t.inverse(t.max_value() + 0.1), std::domain_error);

  const std::string path = "zeta_roundtrip_test.csv";
  t.save_csv(path);
  ZetaTable u = ZetaTable::load_csv(path);
  REQUIRE(u.nu.size() == t.nu.size());
  for (std::size_t k = 0; k < t.nu.size(); ++k) {
    CHECK(u.nu[k] == doctest::Approx(t.nu[k]).epsilon(1e-11));
    CHECK(u.value[k] == doctest::Approx(t.value[k]).epsilon(1e-11));
  }
  CHECK(u(0.33) == doctest::Approx(t(0.33)).epsilon(1e-9));
  std::remove(path.c_str());
}

TEST_CASE("warm starts do not change the answer") {
  ZetaOptions opts;
  opts.grid.domain_R1 = 8;
  opts.grid.domain_R2 = 8;
  opts.grid.n1 = 40;
  opts.grid.n2 = 80;
  cvector v1, v0;
  auto a = zeta(0.6, opts, nullptr, &v0);
  auto b = zeta(0.7, opts, &v0, &v1);   // warm
  auto c = zeta(0.7, opts, nullptr, nullptr);  // cold
  CHECK(b.value == doctest::Approx(c.value).epsilon(1e-8));
  CHECK(a.value < b.value);
}

// At the steepest tilt the well depends on the transverse coordinate alone,
// so the steep-tilt expansion decouples exactly: the value must equal the
// lowest transverse level (= 1) plus the quarter-wave offset of the free
// envelope chain on the solver's shared grid (depth 150, 600 cells, natural
// wall / Dirichlet far end).
TEST_CASE("steepest tilt separates into level one plus the envelope offset") {
  const int n1 = 600;
  const double h = 150.0 / n1;
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(n1, 2.0 / (h * h));
  Eigen::VectorXd sub(n1 - 1);
  for (int i = 0; i + 1 < n1; ++i)
    sub(i) = (i == 0) ? -std::sqrt(2.0) / (h * h) : -1.0 / (h * h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const double env = es.eigenvalues()(0);
  CHECK(env == doctest::Approx(std::pow(kPi / 300.0, 2)).epsilon(1e-3));

  auto r = zeta(kPi / 2);
  CHECK(r.value == doctest::Approx(1.0 + env).epsilon(1e-9));
}

// Far from the wall the steep-tilt expansion must reproduce the full-plane
// value: the minimum over the envelope wavenumber of the bulk dispersion
// matrix  k^2 + w(2n+1) + a^2(D^2 terms) + 2 a k (i D)  is exactly 1 for
// every tilt.  This pins down the ladder coefficients sqrt(w n / 2) and the
// relative signs of the drag terms.
TEST_CASE("bulk dispersion of the steep-tilt expansion bottoms out at one") {
  const int N = 16;
  for (double nu : {1.05, 1.25, 1.45}) {
    const double w = std::sin(nu), a = -std::cos(nu) / w;
    double best = 1e9;
    for (double k = -1.5; k <= 1.5; k += 0.001) {
      Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(N, N);
      for (int n = 0; n < N; ++n) {
        const double dn = std::sqrt(0.5 * w * n);
        const double dn1 = std::sqrt(0.5 * w * (n + 1));
        M(n, n) = k * k + w * (2 * n + 1) +
                  a * a * (dn * dn + (n + 1 < N ? dn1 * dn1 : 0.0));
        if (n + 1 < N) {
          M(n, n + 1) = std::complex<double>(0.0, 2.0 * a * k) * dn1;
          M(n + 1, n) = std::conj(M(n, n + 1));
        }
        if (n + 2 < N) {
          const double w2 = -a * a * dn1 * std::sqrt(0.5 * w * (n + 2));
          M(n, n + 2) = w2;
          M(n + 2, n) = w2;
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ev(M,
                                                         Eigen::EigenvaluesOnly);
      best = std::min(best, ev.eigenvalues()(0));
    }
    CHECK(best == doctest::Approx(1.0).epsilon(5e-4));
  }
}

// The two solve regimes must agree where they meet: values computed just
// below and just above the handoff tilt continue the same increasing curve.
TEST_CASE("strip and steep-tilt regimes line up across the handoff") {
  auto lo = zeta(0.98);
  auto hi = zeta(1.02);
  CHECK(lo.value < hi.value);
  CHECK(hi.value - lo.value < 4e-3);  // no gross method jump either
}

// Step-halving extrapolation at a steep tilt reproduces the step-converged
// value (frozen from an 8x finer off-line solve of the same system).
TEST_CASE("steep-tilt extrapolation matches the step-converged value") {
  ZetaOptions opts;
  opts.richardson = true;
  auto r = zeta(1.39252, opts);
  CHECK(r.value == doctest::Approx(0.9998952).epsilon(3e-6));
}

}  // TEST_SUITE
