#pragma once

// Interaction potentials for the pile-up problem: the repulsive power law
// V(x) = |x|^-a and the dislocation-wall potential
// V(x) = x coth x - log|2 sinh x|, with closed-form derivatives up to order 3.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pileup/error.hpp"

namespace pileup {

enum class PotentialFamily { PowerLaw, DislocationWall };

/// Which potential and its decay exponent. Immutable once built.
///
/// Arguments are always positive distances; callers pass |x| and apply the
/// parity of each derivative themselves (V even, V' odd, ...).
class PotentialSpec {
 public:
  static PotentialSpec power_law(double a) {
    if (!(a > 1.0) || !std::isfinite(a)) {
      throw ParameterError("power-law exponent must satisfy a > 1, got " + std::to_string(a));
    }
    return PotentialSpec(PotentialFamily::PowerLaw, a);
  }

  static PotentialSpec wall() {
    return PotentialSpec(PotentialFamily::DislocationWall, std::numeric_limits<double>::infinity());
  }

  /// Parses `powerlaw:a=<value>` or `wall`.
  static PotentialSpec parse(std::string_view text) {
    if (text == "wall") return wall();
    constexpr std::string_view prefix = "powerlaw:a=";
    if (text.substr(0, prefix.size()) == prefix) {
      const std::string value(text.substr(prefix.size()));
      std::size_t used = 0;
      double a = 0.0;
      try {
        a = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size()) {
        throw ParameterError("cannot parse exponent in potential spec '" + std::string(text) + "'");
      }
      return power_law(a);
    }
    throw ParameterError("unknown potential spec '" + std::string(text) +
                         "' (expected 'powerlaw:a=<value>' or 'wall')");
  }

  PotentialFamily family() const noexcept { return family_; }

  /// Decay exponent; +inf for the wall potential (exponential tails).
  double a() const noexcept { return a_; }

  bool is_power_law() const noexcept { return family_ == PotentialFamily::PowerLaw; }

  std::string to_string() const {
    if (!is_power_law()) return "wall";
    char buf[64];
    std::snprintf(buf, sizeof buf, "powerlaw:a=%.17g", a_);
    return buf;
  }

  /// Distance beyond which V and all exposed derivatives evaluate to exactly
  /// zero in double precision. Pair sums may skip such pairs without changing
  /// a single bit of the result.
  double negligible_range() const noexcept {
    return is_power_law() ? std::numeric_limits<double>::infinity() : 400.0;
  }

  /// V^(order)(x) for x > 0 and order in 0..3.
  double eval(int order, double x) const {
    if (!(x > 0.0)) throw DomainError("potential evaluated at non-positive distance");
    switch (order) {
      case 0: return value(x);
      case 1: return d1(x);
      case 2: return d2(x);
      case 3: return d3(x);
      default: throw DomainError("derivative order must be in 0..3");
    }
  }

  // Unchecked kernels for hot loops; x > 0 is the caller's responsibility.

  double value(double x) const noexcept {
    if (is_power_law()) return inv_pow(x, 0);
    const Wall w(x);
    // log(1-q) via log1p once q is small, where 1-q rounds to 1.
    return 2.0 * x * w.q / w.omq - (w.q > 0.5 ? std::log(w.omq) : std::log1p(-w.q));
  }

  double d1(double x) const noexcept {
    if (is_power_law()) return -a_ * inv_pow(x, 1);
    const Wall w(x);
    return -x * w.csch2();
  }

  double d2(double x) const noexcept {
    if (is_power_law()) return a_ * (a_ + 1.0) * inv_pow(x, 2);
    const Wall w(x);
    return w.csch2() * (2.0 * x * w.coth() - 1.0);
  }

  double d3(double x) const noexcept {
    if (is_power_law()) return -a_ * (a_ + 1.0) * (a_ + 2.0) * inv_pow(x, 3);
    const Wall w(x);
    const double c = w.coth();
    return w.csch2() * (4.0 * c - 6.0 * x * c * c + 2.0 * x);
  }

 private:
  PotentialSpec(PotentialFamily family, double a) : family_(family), a_(a) {
    if (family == PotentialFamily::PowerLaw && a == std::floor(a) && a <= 16.0) {
      int_a_ = static_cast<int>(a);
    }
  }

  // x^-(a + extra), exact repeated multiplication for small integer a.
  double inv_pow(double x, int extra) const noexcept {
    if (int_a_ > 0) {
      double p = x;
      for (int k = 1; k < int_a_ + extra; ++k) p *= x;
      return 1.0 / p;
    }
    return std::pow(x, -(a_ + extra));
  }

  // Exponential form: with q = e^{-2x}, csch^2 x = 4q/(1-q)^2 and
  // coth x = (1+q)/(1-q). No overflow for large x; q underflows to 0.
  struct Wall {
    explicit Wall(double x) : q(std::exp(-2.0 * x)), omq(-std::expm1(-2.0 * x)) {}
    double csch2() const noexcept { return 4.0 * q / (omq * omq); }
    double coth() const noexcept { return (1.0 + q) / omq; }
    double q;
    double omq;
  };

  PotentialFamily family_;
  double a_;
  int int_a_ = 0;
};

/// Convexity modulus lambda(x) = V''(x). Valid as the infimum of V'' over
/// (0, x] because V'' is decreasing for both built-in families.
inline double lambda_modulus(const PotentialSpec& p, double x) {
  if (!(x > 0.0)) throw DomainError("lambda_modulus requires x > 0");
  return p.d2(x);
}

struct ValidationReport {
  /// Largest relative error of V', V'', V''' against central differences.
  std::array<double, 3> max_rel_error{0.0, 0.0, 0.0};
  bool second_derivative_decreasing = true;
  double threshold = 1e-5;
  bool passed = true;
};

/// Compares each closed-form derivative with a central difference of the
/// derivative one order below, and checks V'' decreases along the grid.
inline ValidationReport check_derivatives(const PotentialSpec& p, std::span<const double> grid,
                                          double step, double threshold = 1e-5) {
  if (grid.empty()) throw ParameterError("check_derivatives needs a nonempty grid");
  if (!(step > 0.0)) throw ParameterError("finite-difference step must be positive");
  for (double x : grid) {
    if (!(x > 2.0 * step)) throw ParameterError("grid points must exceed twice the step");
  }

  ValidationReport report;
  report.threshold = threshold;
  for (double x : grid) {
    for (int order = 1; order <= 3; ++order) {
      const double exact = p.eval(order, x);
      const double fd = (p.eval(order - 1, x + step) - p.eval(order - 1, x - step)) / (2.0 * step);
      const double rel = std::abs(fd - exact) / std::abs(exact);
      auto& slot = report.max_rel_error[static_cast<std::size_t>(order - 1)];
      slot = std::max(slot, std::isfinite(rel) ? rel : std::numeric_limits<double>::infinity());
    }
  }

  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] > sorted[i - 1] && !(p.d2(sorted[i]) < p.d2(sorted[i - 1]))) {
      report.second_derivative_decreasing = false;
    }
  }

  report.passed = report.second_derivative_decreasing;
  for (double e : report.max_rel_error) report.passed = report.passed && e <= threshold;
  return report;
}

/// True when V''' <= 0 at every grid point; the Euler-Maclaurin remainder
/// bound |R| <= V''(c)/12 relies on it.
inline bool third_derivative_nonpositive(const PotentialSpec& p, std::span<const double> grid) {
  return std::all_of(grid.begin(), grid.end(), [&](double x) { return p.eval(3, x) <= 0.0; });
}

}  // namespace pileup
