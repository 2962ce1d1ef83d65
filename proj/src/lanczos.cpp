#include "smectic/lanczos.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>

namespace smectic {

namespace {

double nrm2(const cvector& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

std::complex<double> dot(const cvector& a, const cvector& b) {
  std::complex<double> s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

void axpy(std::complex<double> alpha, const cvector& x, cvector& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scal(double alpha, cvector& v) {
  for (auto& z : v) z *= alpha;
}

}  // namespace

// Thick-restart Lanczos: after each cycle the lowest Ritz vectors are kept
// in the basis, which handles the clustered low spectra that arise when the
// well is nearly aligned with the boundary.  Full reorthogonalization keeps
// the basis orthonormal; the projected matrix is accumulated from the
// orthogonalization coefficients, so restart bookkeeping stays exact.
LanczosResult lanczos_lowest(
    const std::function<void(const cvector&, cvector&)>& apply, std::size_t n,
    const LanczosOptions& opts, const cvector* start) {
  if (n == 0) throw std::invalid_argument("lanczos_lowest: empty operator");
  const int m = std::min(std::min(opts.block, 64), (int)n);
  if (m < 2) throw std::invalid_argument("lanczos_lowest: block must be >= 2");
  const int keep = std::max(1, std::min(m / 3, m - 2));

  LanczosResult res;
  cvector w(n), x(n), tmp(n);

  std::vector<cvector> V;
  V.reserve(m + 1);
  if (start && start->size() == n && nrm2(*start) > 1e-300) {
    V.push_back(*start);
  } else {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    cvector v0(n);
    for (auto& z : v0) z = {uni(rng), uni(rng)};
    V.push_back(std::move(v0));
  }
  scal(1.0 / nrm2(V[0]), V[0]);

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
  double last_resid = -1.0;
  double beta_last = 0.0;  // norm of the trailing residual direction

  for (int cycle = 0; cycle < opts.max_restarts; ++cycle) {
    // Extend the basis to m vectors plus the trailing residual vector.  The
    // projected matrix is accumulated entirely from the orthogonalization
    // coefficients, so H is exactly V'AV regardless of restart structure.
    bool invariant = false;
    while ((int)V.size() <= m) {
      const int k = (int)V.size() - 1;
      apply(V[k], w);
      ++res.matvecs;
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= k; ++i) {
          const std::complex<double> c = dot(V[i], w);
          H(i, k) += std::real(c);
          axpy(-c, V[i], w);
        }
      for (int i = 0; i < k; ++i) H(k, i) = H(i, k);
      const double beta = nrm2(w);
      if (beta < 1e-13) { invariant = true; break; }
      beta_last = beta;
      cvector v = w;
      scal(1.0 / beta, v);
      V.push_back(std::move(v));
    }
    const int kdim = std::min<int>((int)V.size(), m);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(kdim, kdim));
    const Eigen::MatrixXd& S = es.eigenvectors();
    res.value = es.eigenvalues()(0);

    std::fill(x.begin(), x.end(), std::complex<double>(0.0));
    for (int i = 0; i < kdim; ++i) axpy(S(i, 0), V[i], x);
    scal(1.0 / nrm2(x), x);

    const double est = invariant ? 0.0 : std::abs(beta_last * S(kdim - 1, 0));
    if (est < opts.tol || invariant) {
      apply(x, tmp);
      ++res.matvecs;
      for (std::size_t i = 0; i < n; ++i) tmp[i] -= res.value * x[i];
      last_resid = nrm2(tmp);
      if (last_resid < opts.tol || invariant) {
        res.vector = x;
        res.residual = last_resid;
        return res;
      }
    }
    if (invariant) break;

    // Thick restart: keep the lowest Ritz vectors and the residual vector.
    std::vector<cvector> newV;
    newV.reserve(m + 1);
    for (int r = 0; r < keep; ++r) {
      cvector y(n, 0.0);
      for (int i = 0; i < kdim; ++i) axpy(S(i, r), V[i], y);
      scal(1.0 / nrm2(y), y);
      newV.push_back(std::move(y));
    }
    newV.push_back(V[m]);  // normalized residual direction
    V.swap(newV);
    H.setZero();
    // Couplings of the kept Ritz vectors to the residual column are picked
    // up when that column is orthogonalized, so only the diagonal is preset.
    for (int r = 0; r < keep; ++r) H(r, r) = es.eigenvalues()(r);
  }
  throw std::runtime_error("lanczos_lowest: no convergence after restart cap, residual=" +
                           std::to_string(last_resid < 0 ? -1.0 : last_resid));
}

}  // namespace smectic
