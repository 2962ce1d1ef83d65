#include "doctest.h"
#include "smectic/pchip.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using smectic::MonotoneCubic;

TEST_CASE("interpolant reproduces node values exactly") {
  std::vector<double> x{0.0, 0.3, 1.0, 2.5, 4.0};
  std::vector<double> y{-1.0, -0.2, 0.1, 0.1, 3.0};
  MonotoneCubic f(x, y);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(f(x[i]) == doctest::Approx(y[i]).epsilon(1e-14));
}

TEST_CASE("monotone data gives a monotone interpolant") {
  std::vector<double> x, y;
  for (int i = 0; i <= 10; ++i) {
    x.push_back(0.2 * i);
    y.push_back(std::tanh(x.back() - 1.0));  // strictly increasing
  }
  MonotoneCubic f(x, y);
  double prev = f(x.front());
  for (int k = 1; k <= 1000; ++k) {
    const double t = x.front() + (x.back() - x.front()) * k / 1000.0;
    const double v = f(t);
    CHECK(v >= prev - 1e-13);
    prev = v;
  }
}

TEST_CASE("no overshoot beyond the local data range") {
  // Step-like data: a naive cubic spline would overshoot near the jump.
  std::vector<double> x{0, 1, 2, 3, 4, 5};
  std::vector<double> y{0, 0, 0, 1, 1, 1};
  MonotoneCubic f(x, y);
  for (int k = 0; k <= 500; ++k) {
    const double t = 5.0 * k / 500.0;
    CHECK(f(t) >= -1e-13);
    CHECK(f(t) <= 1.0 + 1e-13);
  }
}

TEST_CASE("interpolation error is small for a smooth function") {
  std::vector<double> x, y;
  for (int i = 0; i <= 20; ++i) {
    x.push_back(i * 0.1);
    y.push_back(std::sin(x.back()));
  }
  MonotoneCubic f(x, y);
  double err = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double t = 2.0 * k / 400.0;
    err = std::max(err, std::abs(f(t) - std::sin(t)));
  }
  // Shape-limited slopes near extrema cost an order: O(h^3), not O(h^4).
  CHECK(err < 2e-3);
}

TEST_CASE("invert solves f(t) = y on monotone data") {
  std::vector<double> x, y;
  for (int i = 0; i <= 8; ++i) {
    x.push_back(i * 0.25);
    y.push_back(x.back() * x.back() + 0.5 * x.back());
  }
  MonotoneCubic f(x, y);
  for (double target : {0.1, 0.9, 2.0, 4.4}) {
    const double t = f.invert(target);
    CHECK(f(t) == doctest::Approx(target).epsilon(1e-9));
  }
  CHECK_THROWS_AS((void)f.invert(100.0), std::domain_error);
  CHECK_THROWS_AS((void)f.invert(-0.5), std::domain_error);
}

TEST_CASE("constructor rejects bad input") {
  CHECK_THROWS_AS(MonotoneCubic({1.0}, {2.0}), std::invalid_argument);
  CHECK_THROWS_AS(MonotoneCubic({0.0, 0.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(MonotoneCubic({0.0, 1.0, 0.5}, {1.0, 2.0, 3.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(MonotoneCubic({0.0, 1.0}, {1.0}), std::invalid_argument);
}
