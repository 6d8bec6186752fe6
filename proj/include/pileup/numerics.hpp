#pragma once

// Small numerical building blocks shared across modules: Euler-Maclaurin
// tails of power sums and ordinary least-squares line fits.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "pileup/error.hpp"

namespace pileup::numerics {

/// A truncated series value together with a bound on its truncation error.
struct TailEstimate {
  double value = 0.0;
  double bound = 0.0;
};

/// sum_{k > K} k^{-s} for s > 1 by Euler-Maclaurin at the first omitted
/// index m = K + 1:  m^{1-s}/(s-1) + m^{-s}/2 + s m^{-s-1}/12.
/// The bound is 0.01 |f''(m)|, dominating the B3 remainder (2 zeta(3)/(2 pi)^3).
inline TailEstimate power_tail_sum(double s, double K) {
  if (!(s > 1.0)) throw Divergence("power sum diverges for exponent <= 1");
  const double m = K + 1.0;
  TailEstimate t;
  t.value = std::pow(m, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(m, -s) + s * std::pow(m, -s - 1.0) / 12.0;
  t.bound = 0.01 * s * (s + 1.0) * std::pow(m, -s - 2.0);
  return t;
}

/// Ordinary least-squares line y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("fit_line: size mismatch");
  const std::size_t m = x.size();
  if (m < 2) throw FitUndefined("line fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitUndefined("degenerate design: all abscissae coincide");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    sse += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return f;
}

/// Unit in the last place of |x| (spacing to the next representable double).
inline double ulp(double x) {
  x = std::abs(x);
  return std::nextafter(x, std::numeric_limits<double>::infinity()) - x;
}

}  // namespace pileup::numerics
