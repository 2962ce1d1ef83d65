#include "smectic/pchip.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smectic {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const int n = (int)x_.size();
  if (n < 2 || y_.size() != x_.size())
    throw std::invalid_argument("MonotoneCubic: need >= 2 nodes, matching sizes");
  for (int i = 0; i + 1 < n; ++i)
    if (!(x_[i] < x_[i + 1]))
      throw std::invalid_argument("MonotoneCubic: nodes must be strictly increasing");

  std::vector<double> h(n - 1), m(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    h[i] = x_[i + 1] - x_[i];
    m[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  // Interior slopes: weighted harmonic mean when the secants agree in sign.
  for (int i = 1; i < n - 1; ++i) {
    if (m[i - 1] * m[i] <= 0.0) {
      d_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / m[i - 1] + w2 / m[i]);
    }
  }
  // One-sided endpoint slopes, limited to preserve shape.
  auto endpoint = [](double h0, double h1, double m0, double m1) {
    double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (d * m0 <= 0.0) d = 0.0;
    else if (m0 * m1 < 0.0 && std::abs(d) > 3.0 * std::abs(m0)) d = 3.0 * m0;
    return d;
  };
  if (n == 2) {
    d_[0] = d_[1] = m[0];
  } else {
    d_[0] = endpoint(h[0], h[1], m[0], m[1]);
    d_[n - 1] = endpoint(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
  }
}

double MonotoneCubic::operator()(double t) const {
  if (x_.empty()) throw std::logic_error("MonotoneCubic: empty");
  if (t <= x_.front()) return y_.front();
  if (t >= x_.back()) return y_.back();
  int lo = (int)(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
  const double h = x_[lo + 1] - x_[lo];
  const double s = (t - x_[lo]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * y_[lo] + h * h10 * d_[lo] + h01 * y_[lo + 1] + h * h11 * d_[lo + 1];
}

double MonotoneCubic::invert(double y, double tol) const {
  if (x_.empty()) throw std::logic_error("MonotoneCubic: empty");
  double a = x_.front(), b = x_.back();
  double fa = y_.front(), fb = y_.back();
  const bool increasing = fb >= fa;
  double lo = increasing ? fa : fb, hi = increasing ? fb : fa;
  if (y < lo - 1e-14 || y > hi + 1e-14)
    throw std::domain_error("MonotoneCubic::invert: value outside attained range");
  y = std::clamp(y, lo, hi);
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    const double c = 0.5 * (a + b);
    const double fc = (*this)(c);
    if ((fc < y) == increasing) a = c; else b = c;
  }
  return 0.5 * (a + b);
}

}  // namespace smectic
