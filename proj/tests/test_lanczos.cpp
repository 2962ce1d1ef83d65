#include "doctest.h"
#include "smectic/lanczos.hpp"

#include <Eigen/Dense>

#include <random>
#include <stdexcept>

using smectic::cvector;
using smectic::LanczosOptions;
using smectic::lanczos_lowest;

namespace {

// Dense Hermitian test matrix with a deterministic random spectrum.
Eigen::MatrixXcd random_hermitian(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::MatrixXcd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = std::complex<double>(uni(rng), uni(rng));
  return 0.5 * (A + A.adjoint());
}

}  // namespace

TEST_CASE("matches a dense Hermitian eigensolver") {
  const int n = 120;
  Eigen::MatrixXcd A = random_hermitian(n, 7);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
  const double exact = es.eigenvalues()(0);

  auto apply = [&A](const cvector& u, cvector& v) {
    v.resize(u.size());
    Eigen::Map<const Eigen::VectorXcd> um(u.data(), (Eigen::Index)u.size());
    Eigen::Map<Eigen::VectorXcd> vm(v.data(), (Eigen::Index)v.size());
    vm = A * um;
  };
  LanczosOptions opts;
  opts.tol = 1e-10;
  auto r = lanczos_lowest(apply, n, opts);
  CHECK(r.value == doctest::Approx(exact).epsilon(1e-10));
  CHECK(r.residual < 1e-10);

  // Residual check against the reported eigenpair.
  Eigen::Map<const Eigen::VectorXcd> xm(r.vector.data(), n);
  CHECK((A * xm - r.value * xm).norm() < 2e-10);
}

TEST_CASE("deterministic across repeated runs") {
  const int n = 80;
  Eigen::MatrixXcd A = random_hermitian(n, 11);
  auto apply = [&A](const cvector& u, cvector& v) {
    v.resize(u.size());
    Eigen::Map<const Eigen::VectorXcd> um(u.data(), n);
    Eigen::Map<Eigen::VectorXcd> vm(v.data(), n);
    vm = A * um;
  };
  auto r1 = lanczos_lowest(apply, n);
  auto r2 = lanczos_lowest(apply, n);
  CHECK(r1.value == r2.value);
  CHECK(r1.matvecs == r2.matvecs);
  for (int i = 0; i < n; ++i) CHECK(r1.vector[i] == r2.vector[i]);
}

TEST_CASE("unreachable tolerance raises after the restart cap") {
  const int n = 60;
  Eigen::MatrixXcd A = random_hermitian(n, 3);
  auto apply = [&A](const cvector& u, cvector& v) {
    v.resize(u.size());
    Eigen::Map<const Eigen::VectorXcd> um(u.data(), n);
    Eigen::Map<Eigen::VectorXcd> vm(v.data(), n);
    vm = A * um;
  };
  LanczosOptions opts;
  opts.block = 4;
  opts.max_restarts = 1;
  opts.tol = 1e-300;
  CHECK_THROWS_AS((void)lanczos_lowest(apply, n, opts), std::runtime_error);
}

TEST_CASE("warm start converges and agrees") {
  const int n = 100;
  Eigen::MatrixXcd A = random_hermitian(n, 5);
  auto apply = [&A](const cvector& u, cvector& v) {
    v.resize(u.size());
    Eigen::Map<const Eigen::VectorXcd> um(u.data(), n);
    Eigen::Map<Eigen::VectorXcd> vm(v.data(), n);
    vm = A * um;
  };
  auto cold = lanczos_lowest(apply, n);
  auto warm = lanczos_lowest(apply, n, {}, &cold.vector);
  CHECK(warm.value == doctest::Approx(cold.value).epsilon(1e-12));
  CHECK(warm.matvecs <= cold.matvecs);
}
