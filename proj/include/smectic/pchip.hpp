// Monotone piecewise-cubic Hermite interpolation (Fritsch-Carlson slopes).
#pragma once

#include <vector>

namespace smectic {

// Shape-preserving C^1 interpolant through (x_i, y_i).  If the data are
// monotone the interpolant is monotone; it never overshoots the local data
// range.  Nodes must be strictly increasing and there must be at least two.
class MonotoneCubic {
public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  // Evaluate at t; clamps to the end values outside [x.front(), x.back()].
  double operator()(double t) const;

  // Solve f(t) = y by bisection on [x.front(), x.back()].  Requires the
  // interpolant to be monotone (which it is for monotone data); throws
  // std::domain_error if y is outside the attained range.
  double invert(double y, double tol = 1e-12) const;

  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  bool empty() const { return x_.empty(); }

private:
  std::vector<double> x_, y_, d_;  // nodes, values, node slopes
};

}  // namespace smectic
