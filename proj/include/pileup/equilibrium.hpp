#pragma once

// Finite-n equilibrium of n+1 particles pinned at 0 and 1: force balance,
// total energy, Newton solver, and strain/density diagnostics.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "pileup/error.hpp"
#include "pileup/numerics.hpp"
#include "pileup/potential.hpp"

namespace pileup {

/// Positions x(0) = 0 < x(1) < ... < x(n) = 1.
struct Configuration {
  int n = 0;
  std::vector<double> x;

  static Configuration equispaced(int n) {
    if (n < 1) throw ParameterError("configuration needs n >= 1");
    Configuration c{n, std::vector<double>(static_cast<std::size_t>(n) + 1)};
    for (int i = 0; i <= n; ++i) c.x[static_cast<std::size_t>(i)] = static_cast<double>(i) / n;
    c.x.back() = 1.0;
    return c;
  }

  void validate() const {
    if (n < 1) throw ParameterError("configuration needs n >= 1");
    if (x.size() != static_cast<std::size_t>(n) + 1) {
      throw ParameterError("configuration must hold n+1 positions");
    }
    if (x.front() != 0.0 || x.back() != 1.0) {
      throw ParameterError("configuration endpoints must be exactly 0 and 1");
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (!(x[i] > x[i - 1])) throw DomainError("positions must be strictly increasing");
    }
  }
};

/// eps(i) = n [x(i) - x(i-1)] - 1, stored 0-based: eps[i-1] holds eps(i).
struct StrainField {
  int n = 0;
  std::vector<double> eps;

  double operator()(int i) const { return eps[static_cast<std::size_t>(i - 1)]; }

  /// Length n, entries >= -1, and zero sum to 1e-12 n.
  void validate() const {
    if (n < 1 || eps.size() != static_cast<std::size_t>(n)) throw ParameterError("strain field must hold n >= 1 entries");
    long double sum = 0.0L;
    for (double e : eps) {
      if (!(e >= -1.0)) throw DomainError("strain entries must be >= -1");
      sum += e;
    }
    if (std::abs(static_cast<double>(sum)) > 1e-12 * n) throw DomainError("strain field must sum to zero");
  }

  /// Index reversal i -> n+1-i.
  StrainField reversed() const {
    StrainField r{n, eps};
    std::reverse(r.eps.begin(), r.eps.end());
    return r;
  }
};

enum class HessianMode { Auto, Dense, Banded };

struct SolverOptions {
  double residual_tol = 1e-12;  ///< sup-norm force tolerance
  int max_iters = 200;
  double backtrack_factor = 0.5;
  HessianMode hessian = HessianMode::Auto;
  int bandwidth = 64;      ///< neighbour range kept by the banded Hessian
  int dense_limit = 1024;  ///< Auto switches to banded above this n

  void validate() const {
    if (!(residual_tol > 0.0)) throw ParameterError("residual_tol must be positive");
    if (max_iters < 1) throw ParameterError("max_iters must be positive");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
      throw ParameterError("backtrack_factor must lie in (0,1)");
    }
    if (bandwidth < 1) throw ParameterError("bandwidth must be positive");
  }
};

/// Newton corrections this many ulps of each unknown or smaller are treated
/// as rounding noise: the step is applied and the iteration stops.
inline constexpr double kFloorUlps = 64.0;

struct SolverReport {
  bool converged = false;
  /// Stopped at the representability floor (the last Newton correction was
  /// within kFloorUlps ulps of every unknown) with the residual still above
  /// residual_tol.
  bool roundoff_limited = false;
  int iterations = 0;
  double residual_sup = 0.0;
  std::vector<double> residual_history;
  std::vector<double> energy_history;
  double seconds = 0.0;
  std::string hessian;
};

struct FiniteSolve {
  Configuration configuration;
  SolverReport report;
};

namespace detail {

// Visits every pair i < k whose rescaled distance n (x_k - x_i) is within the
// potential's non-negligible range. Throws on coincident positions.
template <typename F>
void for_each_pair(const PotentialSpec& p, const std::vector<double>& x, double scale, F&& f) {
  const std::size_t m = x.size();
  const double range = p.negligible_range();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    for (std::size_t k = i + 1; k < m; ++k) {
      const double d = scale * (x[k] - x[i]);
      if (!(d > 0.0)) throw DomainError("coincident or unordered particle positions");
      if (d > range) break;
      f(i, k, d);
    }
  }
}

inline std::vector<double> residual_raw(const PotentialSpec& p, const std::vector<double>& x, int n) {
  std::vector<double> r(x.size(), 0.0);
  for_each_pair(p, x, static_cast<double>(n), [&](std::size_t i, std::size_t k, double d) {
    const double f = p.d1(d);  // V'(x_k - x_i) < 0; V'(x_i - x_k) = -f
    r[i] -= f;
    r[k] += f;
  });
  return {r.begin() + 1, r.end() - 1};
}

// n E_n, accumulated in extended precision; +inf if any gap is not positive.
inline double scaled_energy(const PotentialSpec& p, const std::vector<double>& x, int n) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) return std::numeric_limits<double>::infinity();
  }
  long double e = 0.0L;
  for_each_pair(p, x, static_cast<double>(n),
                [&](std::size_t, std::size_t, double d) { e += p.value(d); });
  return static_cast<double>(e);
}

// Newton correction dx = -H^{-1} r for the free coordinates, where H is the
// Jacobian of the residual (Hessian of E_n).
inline std::vector<double> newton_step(const PotentialSpec& p, const std::vector<double>& x, int n,
                                       const std::vector<double>& r, bool banded, int bandwidth) {
  const int m = n - 1;
  const double scale = static_cast<double>(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) rhs[i] = -r[static_cast<std::size_t>(i)];

  if (!banded) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    for_each_pair(p, x, scale, [&](std::size_t i, std::size_t k, double d) {
      const double w = scale * p.d2(d);
      const int fi = static_cast<int>(i) - 1, fk = static_cast<int>(k) - 1;
      if (fi >= 0 && fi < m) h(fi, fi) += w;
      if (fk >= 0 && fk < m) h(fk, fk) += w;
      if (fi >= 0 && fk < m) h(fk, fi) -= w;
    });
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(h);
    if (llt.info() != Eigen::Success) throw DomainError("Hessian is not positive definite");
    const Eigen::VectorXd dx = llt.solve(rhs);
    return {dx.data(), dx.data() + m};
  }

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(bandwidth + 1));
  // Truncated Laplacian: pairs further apart than the bandwidth are dropped
  // from the diagonal as well, which preserves the smooth low modes.
  for_each_pair(p, x, scale, [&](std::size_t i, std::size_t k, double d) {
    if (k - i > static_cast<std::size_t>(bandwidth)) return;
    const double w = scale * p.d2(d);
    const int fi = static_cast<int>(i) - 1, fk = static_cast<int>(k) - 1;
    if (fi >= 0 && fi < m) diag[fi] += w;
    if (fk >= 0 && fk < m) diag[fk] += w;
    if (fi >= 0 && fk < m) entries.emplace_back(fk, fi, -w);
  });
  for (int i = 0; i < m; ++i) entries.emplace_back(i, i, diag[i]);
  Eigen::SparseMatrix<double> h(m, m);
  h.setFromTriplets(entries.begin(), entries.end());
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(h);
  if (llt.info() != Eigen::Success) throw DomainError("banded Hessian is not positive definite");
  const Eigen::VectorXd dx = llt.solve(rhs);
  return {dx.data(), dx.data() + m};
}

// Largest t <= 1 keeping every gap at >= 10% of its current size.
inline double gap_preserving_cap(const std::vector<double>& gaps, const std::vector<double>& dgaps) {
  double t = 1.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (dgaps[i] < 0.0) t = std::min(t, 0.9 * gaps[i] / -dgaps[i]);
  }
  return t;
}

inline double sup_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s = std::max(s, std::abs(e));
  return s;
}

}  // namespace detail

/// Force residual dE_n/dx(i) = -sum_{k != i} V'(n[x(k) - x(i)]), i = 1..n-1.
inline std::vector<double> residual(const PotentialSpec& p, const Configuration& c) {
  c.validate();
  return detail::residual_raw(p, c.x, c.n);
}

/// E_n(x) = (1/n) sum over pairs of V(n |x(k) - x(j)|); +inf when a gap vanishes.
inline double energy_total(const PotentialSpec& p, const Configuration& c) {
  if (c.n < 1 || c.x.size() != static_cast<std::size_t>(c.n) + 1) {
    throw ParameterError("configuration must hold n+1 positions");
  }
  return detail::scaled_energy(p, c.x, c.n) / c.n;
}

/// Unique interior minimiser of E_n by damped Newton from the equispaced
/// configuration. Steps are capped so every gap keeps 10% of its size, then
/// backtracked until the energy does not increase (up to rounding).
inline FiniteSolve solve_finite(const PotentialSpec& p, int n, const SolverOptions& opts = {}) {
  opts.validate();
  const auto start = std::chrono::steady_clock::now();
  FiniteSolve out{Configuration::equispaced(n), {}};
  SolverReport& rep = out.report;
  const bool banded = opts.hessian == HessianMode::Banded ||
                      (opts.hessian == HessianMode::Auto && n > opts.dense_limit);
  rep.hessian = banded ? "banded:" + std::to_string(opts.bandwidth) : "dense";

  auto finish = [&] {
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  if (n == 1) {
    rep.converged = true;
    finish();
    return out;
  }

  std::vector<double>& x = out.configuration.x;
  std::vector<double> r = detail::residual_raw(p, x, n);
  double energy = detail::scaled_energy(p, x, n);
  rep.energy_history.push_back(energy);

  for (int iter = 0;; ++iter) {
    rep.residual_sup = detail::sup_norm(r);
    rep.residual_history.push_back(rep.residual_sup);
    rep.iterations = iter;
    if (rep.residual_sup <= opts.residual_tol) {
      rep.converged = true;
      break;
    }
    if (iter >= opts.max_iters) {
      finish();
      throw NonConvergence("solve_finite: no convergence in " + std::to_string(opts.max_iters) +
                               " iterations (n = " + std::to_string(n) + ")",
                           x, rep.residual_history);
    }

    const std::vector<double> dx = detail::newton_step(p, x, n, r, banded, opts.bandwidth);
    double ulps = 0.0;
    for (int i = 1; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      ulps = std::max(ulps, std::abs(dx[u - 1]) / numerics::ulp(x[u]));
    }
    const bool at_floor = ulps <= kFloorUlps;

    std::vector<double> gaps(static_cast<std::size_t>(n)), dgaps(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      gaps[u - 1] = x[u] - x[u - 1];
      const double hi = i < n ? dx[u - 1] : 0.0;
      const double lo = i > 1 ? dx[u - 2] : 0.0;
      dgaps[u - 1] = hi - lo;
    }
    double t = detail::gap_preserving_cap(gaps, dgaps);
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(energy);
    std::vector<double> trial(x);
    bool accepted = false;
    while (t > 1e-14) {
      for (int i = 1; i < n; ++i) {
        trial[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + t * dx[static_cast<std::size_t>(i - 1)];
      }
      const double e_trial = detail::scaled_energy(p, trial, n);
      if (e_trial <= energy + slack) {
        accepted = true;
        energy = e_trial;
        break;
      }
      t *= opts.backtrack_factor;
    }
    if (!accepted) {
      finish();
      throw NonConvergence("solve_finite: line search failed (n = " + std::to_string(n) + ")", x,
                           rep.residual_history);
    }
    x.swap(trial);
    rep.energy_history.push_back(energy);
    r = detail::residual_raw(p, x, n);
    if (at_floor) {
      rep.residual_sup = detail::sup_norm(r);
      rep.residual_history.push_back(rep.residual_sup);
      rep.iterations = iter + 1;
      rep.converged = true;
      rep.roundoff_limited = rep.residual_sup > opts.residual_tol;
      break;
    }
  }
  finish();
  return out;
}

inline StrainField strain(const Configuration& c) {
  c.validate();
  StrainField s{c.n, std::vector<double>(static_cast<std::size_t>(c.n))};
  for (std::size_t i = 1; i < c.x.size(); ++i) {
    s.eps[i - 1] = c.n * (c.x[i] - c.x[i - 1]) - 1.0;
  }
  return s;
}

/// rho(i) = 2 / (n [x(i+1) - x(i-1)]), i = 1..n-1.
inline std::vector<double> discrete_density(const Configuration& c) {
  c.validate();
  if (c.n < 2) throw ParameterError("discrete density needs n >= 2");
  std::vector<double> rho(static_cast<std::size_t>(c.n) - 1);
  for (std::size_t i = 1; i + 1 < c.x.size(); ++i) {
    rho[i - 1] = 2.0 / (c.n * (c.x[i + 1] - c.x[i - 1]));
  }
  return rho;
}

}  // namespace pileup
