#pragma once

// Closed-form asymptotic predictions: zeta(a), the second moment Z(V), the
// bulk profile xi(s; n) in its three regimes, and the boundary-layer strain
// tail.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pileup/error.hpp"
#include "pileup/numerics.hpp"
#include "pileup/potential.hpp"

namespace pileup {

/// Riemann zeta by direct summation to N plus an Euler-Maclaurin tail.
inline double zeta(double a) {
  if (!(a > 1.0)) throw Divergence("zeta diverges for a <= 1");
  const long N = std::max(10000L, static_cast<long>(std::ceil(std::pow(1e-13, -1.0 / (a + 1.0)))));
  long double s = numerics::power_tail_sum(a, double(N)).value;
  for (long k = N; k >= 1; --k) s += std::pow(static_cast<long double>(k), -static_cast<long double>(a));
  return static_cast<double>(s);
}

/// Z(V) = sum_{k>=1} V''(k) k^2 to absolute error <= tol.
inline double interaction_second_moment(const PotentialSpec& p, double tol = 1e-12) {
  if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
  if (p.is_power_law()) {
    const double a = p.a();
    if (!(a > 1.0)) throw Divergence("Z(V) diverges for a <= 1");
    // V''(k) k^2 = a(a+1) k^{-a}; sum to K, then the tail.
    const double c = a * (a + 1.0);
    long K = 10000;
    while (c * numerics::power_tail_sum(a, double(K)).bound > 0.5 * tol) K *= 2;
    long double s = c * numerics::power_tail_sum(a, double(K)).value;
    for (long k = K; k >= 1; --k) s += c * std::pow(static_cast<long double>(k), -static_cast<long double>(a));
    return static_cast<double>(s);
  }
  // Terms are 4 k^3 e^{-2k} (1 + o(1)); stop once the geometric tail bound is below tol.
  long double s = 0.0L;
  long K = 1;
  while (8.0 * std::pow(double(K), 3.0) * std::exp(-2.0 * double(K)) > 0.5 * tol) ++K;
  for (long k = K; k >= 1; --k) s += p.d2(double(k)) * double(k) * double(k);
  return static_cast<double>(s);
}

enum class BulkRegime { Sub2, Exactly2, Super2 };

struct BulkProfileParams {
  double a = 2.0;
  BulkRegime regime = BulkRegime::Exactly2;
  std::vector<double> p_k;  ///< p_1..p_ceil(a-2); empty for a <= 2
  double p_tilde = 0.0;
  double p_tilde_star = 2.0 / (std::numbers::pi * std::numbers::pi);
  double zeta_a = 0.0;  ///< zeta(a) cached by make(); 0 means compute on use

  static BulkRegime regime_for(double a) {
    if (!(a > 1.0)) throw ParameterError("bulk profile needs a > 1");
    return a < 2.0 ? BulkRegime::Sub2 : (a == 2.0 ? BulkRegime::Exactly2 : BulkRegime::Super2);
  }

  /// Parameters for exponent a. For non-integer a, p_tilde is fixed at
  /// -2/(zeta(a)(a-2)(a^3-a)); otherwise the given p_tilde (an estimate from
  /// the boundary layer) is used. p_k must hold ceil(a-2) entries when a > 2.
  static BulkProfileParams make(double a, std::vector<double> p_k = {}, double p_tilde = 0.0) {
    BulkProfileParams b;
    b.a = a;
    b.regime = regime_for(a);
    const std::size_t need = a > 2.0 ? static_cast<std::size_t>(std::ceil(a - 2.0)) : 0;
    if (p_k.size() != need) throw ParameterError("p_k must hold ceil(a-2) matching constants");
    b.p_k = std::move(p_k);
    b.zeta_a = b.regime == BulkRegime::Exactly2 ? 0.0 : zeta(a);
    b.p_tilde = a != std::floor(a) ? -2.0 / (b.zeta_a * (a - 2.0) * (a * a * a - a)) : p_tilde;
    return b;
  }

  void validate() const {
    if (regime != regime_for(a)) throw ParameterError("bulk regime inconsistent with a");
    const std::size_t need = a > 2.0 ? static_cast<std::size_t>(std::ceil(a - 2.0)) : 0;
    if (p_k.size() != need) throw ParameterError("p_k must hold ceil(a-2) matching constants");
  }
};

/// Truncated bulk expansion xi(s; n) for 0 < s < 1.
inline double bulk_profile(const BulkProfileParams& b, double s, double n) {
  b.validate();
  if (!(s > 0.0 && s < 1.0)) throw DomainError("bulk profile needs 0 < s < 1");
  if (!(n > 1.0)) throw ParameterError("bulk profile needs n > 1");
  const double a = b.a;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double h = s - 0.5;
  const auto zeta_term = [&] { return (b.zeta_a > 0.0 ? b.zeta_a : zeta(a)) * (a - 2.0) * (a * a * a - a); };
  switch (b.regime) {
    case BulkRegime::Sub2: {
      const double z = zeta_term();
      const double g = std::pow(s, 2.0 - a) - std::pow(1.0 - s, 2.0 - a) - 2.0 * h;
      return s + g / z * std::pow(n, 1.0 - a);
    }
    case BulkRegime::Exactly2:
      return s + 2.0 * h / pi2 * std::log(n) / n + ((std::log1p(-s) - std::log(s)) / pi2 + h * b.p_tilde) / n;
    case BulkRegime::Super2: {
      double x = s;
      for (std::size_t k = 0; k < b.p_k.size(); ++k) x += h * b.p_k[k] * std::pow(n, -double(k + 1));
      const double z = zeta_term();
      const double g = std::pow(s, 2.0 - a) - std::pow(1.0 - s, 2.0 - a);
      return x + (g / z + h * b.p_tilde) * std::pow(n, 1.0 - a);
    }
  }
  return s;
}

/// Predicted boundary-layer strain -i^{-(a-1)} / (Z(V)(a-1)); zero for the
/// wall potential, whose strain decays faster than any power.
inline double predicted_strain_tail(const PotentialSpec& p, int i) {
  if (i < 1) throw IndexError("strain index starts at 1");
  if (!p.is_power_law()) return 0.0;
  const double a = p.a();
  if (!(a > 1.0)) throw Divergence("strain tail undefined for a <= 1");
  return -std::pow(double(i), 1.0 - a) / (interaction_second_moment(p) * (a - 1.0));
}

}  // namespace pileup
