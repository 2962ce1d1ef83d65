// Lowest eigenpair of a Hermitian operator by restarted Lanczos iteration.
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace smectic {

using cvector = std::vector<std::complex<double>>;

struct LanczosOptions {
  int block = 40;            // Krylov vectors kept per cycle (<= 64)
  int max_restarts = 400;    // restart cycles before giving up
  double tol = 1e-10;        // residual ||A x - lambda x|| target
  std::uint64_t seed = 20260822;  // start-vector RNG seed
};

struct LanczosResult {
  double value = 0.0;    // lowest eigenvalue estimate
  cvector vector;        // corresponding unit eigenvector
  double residual = 0.0; // explicit residual norm at return
  int matvecs = 0;       // operator applications used
};

// Runs restarted Lanczos with full reorthogonalization.  `apply` must act as
// a Hermitian operator on vectors of length n.  An optional start vector
// replaces the seeded random initial Krylov seed (useful for warm starts
// across nearby parameter values).  Throws std::runtime_error if the
// residual target is not met within the restart budget (the message reports
// the last residual).
LanczosResult lanczos_lowest(
    const std::function<void(const cvector&, cvector&)>& apply, std::size_t n,
    const LanczosOptions& opts = {}, const cvector* start = nullptr);

}  // namespace smectic
