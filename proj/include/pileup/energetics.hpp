#pragma once

// Renormalised energy of a strain field, its splitting into Taylor remainders
// phi_k plus a linear stress term, the stresses sigma^n and sigma^inf, and the
// one-sided limit energy on finitely supported strains.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pileup/blayer.hpp"
#include "pileup/equilibrium.hpp"
#include "pileup/error.hpp"
#include "pileup/numerics.hpp"
#include "pileup/potential.hpp"

namespace pileup {

struct StressVector {
  enum class Kind { FiniteN, Infinity };
  Kind kind = Kind::Infinity;
  int n = 0;  ///< meaningful for FiniteN
  std::vector<double> values;  ///< values[i-1] = sigma(i)

  double operator()(int i) const {
    if (i < 1) throw IndexError("stress index starts at 1");
    return static_cast<std::size_t>(i) <= values.size() ? values[static_cast<std::size_t>(i - 1)] : 0.0;
  }
};

/// phi_k(y) = V(k+y) - V(k) - V'(k) y. For |y| < 1e-3 the difference
/// cancels badly, so the cubic Taylor polynomial is used instead; its
/// truncation error there is at most about 2e-6 relative.
inline double phi(const PotentialSpec& p, int k, double y) {
  if (k < 1) throw ParameterError("phi needs k >= 1");
  if (!(y > -k)) throw DomainError("phi needs y > -k");
  if (std::abs(y) < 1e-3) return y * y * (0.5 * p.d2(k) + p.d3(k) * y / 6.0);
  return p.value(k + y) - p.value(k) - p.d1(k) * y;
}

/// Quadratic-then-linear lower bound of phi_k with modulus lambda(k+1).
inline double phi_lower_bound(const PotentialSpec& p, int k, double y) {
  if (k < 1) throw ParameterError("phi_lower_bound needs k >= 1");
  if (!(y > -k)) throw DomainError("phi_lower_bound needs y > -k");
  const double lam = lambda_modulus(p, k + 1.0);
  return y <= 1.0 ? 0.5 * lam * y * y : lam * (y - 0.5);
}

/// sigma^n(i) = sum_{k=i+1}^{n-i} min(k-i, n-i+1-k) |V'(k)| for i <= n/2.
/// With w(k) = min(k, n+1-k) the weight is w(k) - i, so two prefix sums give
/// every entry in O(1).
inline StressVector sigma_n(const PotentialSpec& p, int n) {
  if (n < 2) throw ParameterError("sigma_n needs n >= 2");
  const int half = n / 2;
  std::vector<long double> g_pre(static_cast<std::size_t>(n) + 1, 0.0L), wg_pre(g_pre);
  for (int k = 1; k <= n; ++k) {
    const long double g = -p.d1(k);
    const auto u = static_cast<std::size_t>(k);
    g_pre[u] = g_pre[u - 1] + g;
    wg_pre[u] = wg_pre[u - 1] + std::min(k, n + 1 - k) * g;
  }
  StressVector s{StressVector::Kind::FiniteN, n, std::vector<double>(static_cast<std::size_t>(half), 0.0)};
  for (int i = 1; i <= half; ++i) {
    const auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - i);
    if (hi <= lo) continue;
    const long double v = (wg_pre[hi] - wg_pre[lo]) - i * (g_pre[hi] - g_pre[lo]);
    s.values[lo - 1] = static_cast<double>(std::max(v, 0.0L));
  }
  return s;
}

namespace detail {

// Cutoff K >= imax and tail values T(K) = sum_{k>K} |V'(k)| and
// sigma(K) = sum_{k>K} (k-K)|V'(k)|, with a bound on the accumulated error of
// the backward recursion down to i = 1.
struct StressTail {
  long K = 0;
  long double T = 0.0L;
  long double sigma = 0.0L;
};

inline StressTail stress_tail(const PotentialSpec& p, int imax, double tol) {
  StressTail t;
  if (!p.is_power_law()) {
    // sigma(K) <= sum_{k>K} k |V'(k)| ~ K^2 e^{-2K}; the bound 10 K^2 e^{-2K}
    // is generous for K >= 5.
    long K = 5;
    while (10.0 * double(K) * double(K) * std::exp(-2.0 * double(K)) > tol) ++K;
    t.K = std::max<long>(K, imax);
    return t;
  }
  const double a = p.a();
  // Euler-Maclaurin remainders after the B2 term: 0.01 int |f'''|.
  auto err = [&](double K) {
    const double rt = 0.01 * a * (a + 1.0) * (a + 2.0) * std::pow(K, -a - 3.0);
    const double rs = 0.04 * a * (a + 1.0) * std::pow(K, -a - 2.0);
    return rs + K * rt;
  };
  double K = std::max(64.0, double(imax));
  while (err(K) > 0.5 * tol) K *= 2.0;
  t.K = static_cast<long>(K);
  const double Kd = double(t.K);
  t.T = p.value(Kd) + 0.5 * p.d1(Kd) + p.d2(Kd) / 12.0;
  t.sigma = std::pow(Kd, 1.0 - a) / (a - 1.0) + p.d1(Kd) / 12.0;
  return t;
}

}  // namespace detail

/// sigma^inf(i) = sum_{k>i} (k-i)|V'(k)| for i = 1..imax, each entry to
/// absolute error <= tol. Backward recursion T(i) = T(i+1) + |V'(i+1)|,
/// sigma(i) = sigma(i+1) + T(i) from a cutoff K with closed-form tails.
inline StressVector sigma_inf(const PotentialSpec& p, int imax, double tol = 1e-12) {
  if (imax < 1) throw ParameterError("sigma_inf needs imax >= 1");
  if (!(tol > 0.0)) throw ParameterError("sigma_inf needs tol > 0");
  if (p.is_power_law() && !(p.a() > 1.0)) throw Divergence("sigma_inf diverges for a <= 1");
  const detail::StressTail tail = detail::stress_tail(p, imax, tol);
  StressVector s{StressVector::Kind::Infinity, 0, std::vector<double>(static_cast<std::size_t>(imax), 0.0)};
  long double T = tail.T, sig = tail.sigma;
  for (long i = tail.K - 1; i >= 1; --i) {
    T += -p.d1(double(i + 1));
    sig += T;
    if (i <= imax) s.values[static_cast<std::size_t>(i - 1)] = static_cast<double>(sig);
  }
  if (tail.K <= imax) s.values[static_cast<std::size_t>(tail.K - 1)] = static_cast<double>(tail.sigma);
  return s;
}

/// ||sigma^inf - sigma^n||_{l2}. Entries beyond 64n are closed with the
/// continuum tail sum of (i+1/2)^{2-2a}/(a-1)^2 (power law only).
inline double stress_l2_gap(const PotentialSpec& p, int n, double tol = 1e-13) {
  if (!p.is_power_law()) throw ParameterError("stress_l2_gap is defined for the power law only");
  const double a = p.a();
  if (!(a > 1.5)) throw Divergence("sigma^inf is not square summable for a <= 3/2");
  const long M = 64L * n;
  const StressVector inf = sigma_inf(p, static_cast<int>(M), tol);
  const StressVector fin = sigma_n(p, n);
  long double s = 0.0L;
  for (long i = M; i >= 1; --i) {
    const long double d = inf(static_cast<int>(i)) - fin(static_cast<int>(i));
    s += d * d;
  }
  s += std::pow(M + 0.5, 3.0 - 2.0 * a) / ((2.0 * a - 3.0) * (a - 1.0) * (a - 1.0));
  return std::sqrt(static_cast<double>(s));
}

namespace detail {

inline std::vector<long double> prefix(std::span<const double> e) {
  std::vector<long double> u(e.size() + 1, 0.0L);
  for (std::size_t l = 0; l < e.size(); ++l) u[l + 1] = u[l] + e[l];
  return u;
}

}  // namespace detail

/// E_n^1(eps) = sum_k sum_j [V(k + window sum) - V(k)]; +inf if a window
/// sum reaches -k.
inline double renorm_energy(const PotentialSpec& p, const StrainField& e) {
  e.validate();
  const int n = e.n;
  const auto u = detail::prefix(e.eps);
  long double s = 0.0L;
  for (int k = 1; k <= n; ++k) {
    const double vk = p.value(k);
    for (int j = 0; j + k <= n; ++j) {
      const double d = k + static_cast<double>(u[static_cast<std::size_t>(j + k)] - u[static_cast<std::size_t>(j)]);
      if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
      s += p.value(d) - vk;
    }
  }
  return static_cast<double>(s);
}

struct EnergySplit {
  double q_part = 0.0;
  double linear_part = 0.0;
};

/// q_part = sum of phi_k over all windows; linear_part = (sigma^n, eps + reversed eps).
inline EnergySplit renorm_energy_split(const PotentialSpec& p, const StrainField& e) {
  e.validate();
  const int n = e.n;
  const auto u = detail::prefix(e.eps);
  long double q = 0.0L;
  for (int k = 1; k <= n; ++k) {
    const double vk = p.value(k), dk = p.d1(k);
    for (int j = 0; j + k <= n; ++j) {
      const double w = static_cast<double>(u[static_cast<std::size_t>(j + k)] - u[static_cast<std::size_t>(j)]);
      if (!(k + w > 0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
      q += p.value(k + w) - vk - dk * w;
    }
  }
  EnergySplit out;
  out.q_part = static_cast<double>(q);
  if (n >= 2) {
    const StressVector sig = sigma_n(p, n);
    long double lin = 0.0L;
    for (int i = 1; i <= n / 2; ++i) lin += static_cast<long double>(sig(i)) * (e(i) + e(n + 1 - i));
    out.linear_part = static_cast<double>(lin);
  }
  return out;
}

/// One-sided limit energy on a strain supported in 1..e.size():
/// sum_{k<=kmax} sum_j phi_k(window sum) + (sigma, eps). Windows starting
/// past the support vanish and are skipped.
inline double limit_energy_trunc(const PotentialSpec& p, std::span<const double> e, long kmax,
                                 const StressVector& sigma) {
  const long I = static_cast<long>(e.size());
  if (kmax < I) throw ParameterError("limit_energy_trunc needs kmax >= support length");
  if (static_cast<std::size_t>(I) > sigma.values.size()) {
    throw ParameterError("stress vector shorter than the strain support");
  }
  for (double v : e) {
    if (!(v >= -1.0)) throw DomainError("strain entries must be >= -1");
  }
  const auto u = detail::prefix(e);
  long double q = 0.0L;
  for (long k = 1; k <= kmax; ++k) {
    const double kd = double(k);
    const double vk = p.value(kd), dk = p.d1(kd);
    long double row = 0.0L;
    for (long j = 0; j < I; ++j) {
      const double w = static_cast<double>(u[static_cast<std::size_t>(std::min(j + k, I))] - u[static_cast<std::size_t>(j)]);
      if (!(kd + w > 0.0)) return std::numeric_limits<double>::infinity();
      row += p.value(kd + w) - vk - dk * w;
    }
    q += row;
  }
  long double lin = 0.0L;
  for (long i = 0; i < I; ++i) lin += static_cast<long double>(sigma.values[static_cast<std::size_t>(i)]) * e[static_cast<std::size_t>(i)];
  return static_cast<double>(q + lin);
}

/// Euler-Lagrange residual in displacement form, u(i) = y(i) - i: entry i is
/// sum_{j<J, j!=i} V'(u(i) - u(j) + i - j) plus the same tail as bl_residual.
inline std::vector<double> el_residual(const PotentialSpec& p, const BoundaryLayerSolution& sol) {
  sol.validate();
  const int I = sol.I, J = sol.J;
  std::vector<double> u(sol.y.size());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = sol.y[j] - static_cast<double>(j);
  std::vector<double> g(static_cast<std::size_t>(I), 0.0);
  const double range = p.negligible_range();
  for (int i = 1; i <= I; ++i) {
    const double ui = u[static_cast<std::size_t>(i)];
    double s = 0.0;
    for (int j = 0; j < J; ++j) {
      if (j == i) continue;
      const double d = ui - u[static_cast<std::size_t>(j)] + static_cast<double>(i - j);
      const double ad = std::abs(d);
      if (!(ad > 0.0)) throw DomainError("coincident boundary-layer positions");
      if (ad > range) continue;
      s += d > 0.0 ? p.d1(ad) : -p.d1(ad);
    }
    const double c = u[static_cast<std::size_t>(J)] - ui + static_cast<double>(J - i);
    s += p.value(c) - 0.5 * p.d1(c);
    g[static_cast<std::size_t>(i - 1)] = s;
  }
  return g;
}

/// Lower bound -||sigma^inf||^2 / (2 lambda(2)) of the limit energy over
/// strains with -1 <= eps <= 1 (nearest-neighbour quadratic bound against the
/// stress term). Finite only when sigma^inf is square summable, a > 3/2.
inline double coercivity_floor(const PotentialSpec& p) {
  if (p.is_power_law() && !(p.a() > 1.5)) throw Divergence("sigma^inf is not square summable for a <= 3/2");
  const long M = 1L << 20;
  const StressVector sig = sigma_inf(p, static_cast<int>(M));
  long double s2 = 0.0L;
  for (auto it = sig.values.rbegin(); it != sig.values.rend(); ++it) s2 += static_cast<long double>(*it) * *it;
  if (p.is_power_law()) {
    const double a = p.a();
    s2 += std::pow(M + 0.5, 3.0 - 2.0 * a) / ((2.0 * a - 3.0) * (a - 1.0) * (a - 1.0));
  }
  return -static_cast<double>(s2) / (2.0 * lambda_modulus(p, 2.0));
}

/// The sequence stays in a bounded band: no value below the coercivity floor
/// and each increment smaller in size than the one before.
inline bool within_band(const PotentialSpec& p, const std::vector<double>& e) {
  if (e.empty()) return true;
  bool ok = *std::min_element(e.begin(), e.end()) >= coercivity_floor(p);
  for (std::size_t k = 2; k < e.size(); ++k) ok = ok && std::abs(e[k] - e[k - 1]) < std::abs(e[k - 1] - e[k - 2]);
  return ok;
}

/// Truncated limit energy of eps(i) = -i^{-b}/2 on 1..N for each N, with
/// kmax = 2N. Unbounded below when 1 < a < 3/2 and 1/2 < b < 2 - a.
///
/// Admissible region: power law with a > 1 and b > 1/2, and additionally
/// b < 2 - a when a < 3/2 so the sequence demonstrates the divergence.
inline std::vector<double> illposedness_demo(const PotentialSpec& p, double b, std::span<const int> N_list) {
  if (!p.is_power_law()) throw ParameterError("illposedness_demo needs a power-law potential");
  const double a = p.a();
  if (!(b > 0.5)) throw ParameterError("illposedness_demo needs b > 1/2");
  if (a < 1.5 && !(b < 2.0 - a)) throw ParameterError("illposedness_demo needs b < 2 - a when a < 3/2");
  if (N_list.empty()) throw ParameterError("illposedness_demo needs at least one N");
  for (std::size_t m = 0; m < N_list.size(); ++m) {
    if (N_list[m] < 1 || (m > 0 && N_list[m] <= N_list[m - 1])) {
      throw ParameterError("N_list must be increasing positive integers");
    }
  }
  const int Nmax = N_list.back();
  const StressVector sig = sigma_inf(p, Nmax, 1e-12);
  std::vector<double> out;
  for (int N : N_list) {
    std::vector<double> e(static_cast<std::size_t>(N));
    for (int i = 1; i <= N; ++i) e[static_cast<std::size_t>(i - 1)] = -0.5 * std::pow(double(i), -b);
    out.push_back(limit_energy_trunc(p, e, 2L * N, sig));
  }
  return out;
}

}  // namespace pileup
