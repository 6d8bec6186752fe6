#pragma once

// Truncated boundary-layer problem: particles y(0) = 0 < y(1) < ... with
// y(j) = y(I) + (j - I) beyond the last free index I, and interactions past
// the truncation index J replaced by an Euler-Maclaurin integral plus
// half-term correction.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pileup/equilibrium.hpp"
#include "pileup/error.hpp"
#include "pileup/numerics.hpp"
#include "pileup/potential.hpp"

namespace pileup {

struct BoundaryLayerSolution {
  int I = 0;  ///< last free index
  int J = 0;  ///< truncation index, J > I
  std::vector<double> y;      ///< y(0..J)
  std::vector<double> eps_l;  ///< eps_l[i-1] = y(i) - y(i-1) - 1, i = 1..I

  /// Builds y from strains eps(1..I); equispaced beyond I.
  static BoundaryLayerSolution from_strain(int I, int J, std::vector<double> eps) {
    if (I < 1 || J <= I) throw ParameterError("boundary layer needs 1 <= I < J");
    if (eps.size() != static_cast<std::size_t>(I)) throw ParameterError("strain must hold I entries");
    BoundaryLayerSolution s{I, J, std::vector<double>(static_cast<std::size_t>(J) + 1, 0.0), std::move(eps)};
    for (int i = 1; i <= J; ++i) {
      const auto u = static_cast<std::size_t>(i);
      s.y[u] = s.y[u - 1] + 1.0 + (i <= I ? s.eps_l[u - 1] : 0.0);
    }
    return s;
  }

  static BoundaryLayerSolution equispaced(int I, int J) {
    return from_strain(I, J, std::vector<double>(static_cast<std::size_t>(std::max(I, 0)), 0.0));
  }

  void validate() const {
    if (I < 1 || J <= I) throw ParameterError("boundary layer needs 1 <= I < J");
    if (y.size() != static_cast<std::size_t>(J) + 1 || eps_l.size() != static_cast<std::size_t>(I)) {
      throw ParameterError("boundary-layer arrays have inconsistent lengths");
    }
    if (y.front() != 0.0) throw ParameterError("boundary layer requires y(0) = 0");
    for (std::size_t j = 1; j < y.size(); ++j) {
      if (!(y[j] > y[j - 1])) throw DomainError("boundary-layer positions must be strictly increasing");
    }
  }
};

struct BoundaryLayerSolve {
  BoundaryLayerSolution solution;
  SolverReport report;
};

namespace detail {

// Gradient-sign residual of the truncated system:
//   g(i) = sum_{j<J, j!=i} V'(y_i - y_j) + V(c) - V'(c)/2,  c = y_J - y_i.
// Its zero set is the force balance; sign chosen to match dE/dy.
inline std::vector<double> bl_residual_raw(const PotentialSpec& p, const std::vector<double>& y, int I, int J) {
  std::vector<double> g(static_cast<std::size_t>(I), 0.0);
  const double range = p.negligible_range();
  for (int i = 1; i <= I; ++i) {
    const double yi = y[static_cast<std::size_t>(i)];
    double s = 0.0;
    for (int j = 0; j < J; ++j) {
      if (j == i) continue;
      const double d = yi - y[static_cast<std::size_t>(j)];
      const double ad = std::abs(d);
      if (!(ad > 0.0)) throw DomainError("coincident boundary-layer positions");
      if (ad > range) continue;
      s += d > 0.0 ? p.d1(ad) : -p.d1(ad);
    }
    const double c = y[static_cast<std::size_t>(J)] - yi;
    s += p.value(c) - 0.5 * p.d1(c);
    g[static_cast<std::size_t>(i - 1)] = s;
  }
  return g;
}

inline Eigen::MatrixXd bl_jacobian(const PotentialSpec& p, const std::vector<double>& y, int I, int J) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(I, I);
  const double range = p.negligible_range();
  // Positions beyond I move rigidly with y(I).
  auto owner = [I](int j) { return j == 0 ? -1 : std::min(j, I) - 1; };
  for (int i = 1; i <= I; ++i) {
    const int row = i - 1;
    const double yi = y[static_cast<std::size_t>(i)];
    for (int j = 0; j < J; ++j) {
      if (j == i) continue;
      const double ad = std::abs(yi - y[static_cast<std::size_t>(j)]);
      if (ad > range) continue;
      const double w = p.d2(ad);
      jac(row, row) += w;
      if (const int col = owner(j); col >= 0) jac(row, col) -= w;
    }
    const double c = y[static_cast<std::size_t>(J)] - yi;
    const double t = p.d1(c) - 0.5 * p.d2(c);
    jac(row, I - 1) += t;
    jac(row, row) -= t;
  }
  return jac;
}

inline void bl_positions(std::vector<double>& y, int I, int J) {
  for (int j = I + 1; j <= J; ++j) {
    y[static_cast<std::size_t>(j)] = y[static_cast<std::size_t>(I)] + static_cast<double>(j - I);
  }
}

inline double sq_norm(const std::vector<double>& v) {
  long double s = 0.0L;
  for (double e : v) s += static_cast<long double>(e) * e;
  return static_cast<double>(s);
}

}  // namespace detail

/// Residual of the truncated boundary-layer system at indices 1..I, in
/// gradient sign (the negated net force on each particle).
inline std::vector<double> bl_residual(const PotentialSpec& p, const BoundaryLayerSolution& sol) {
  sol.validate();
  return detail::bl_residual_raw(p, sol.y, sol.I, sol.J);
}

/// Damped Newton on y(1..I) from the equispaced guess y(i) = i. Steps keep
/// every free gap at >= 10% of its size and are backtracked on the squared
/// residual norm.
inline BoundaryLayerSolve solve_bl(const PotentialSpec& p, int I, int J, const SolverOptions& opts = {}) {
  opts.validate();
  if (I < 1 || J <= I) throw ParameterError("solve_bl needs 1 <= I < J");
  const auto start = std::chrono::steady_clock::now();
  BoundaryLayerSolve out{BoundaryLayerSolution::equispaced(I, J), {}};
  SolverReport& rep = out.report;
  rep.hessian = "dense-lu";
  std::vector<double>& y = out.solution.y;

  std::vector<double> g = detail::bl_residual_raw(p, y, I, J);
  double merit = detail::sq_norm(g);
  for (int iter = 0;; ++iter) {
    rep.residual_sup = detail::sup_norm(g);
    rep.residual_history.push_back(rep.residual_sup);
    rep.iterations = iter;
    if (rep.residual_sup <= opts.residual_tol) {
      rep.converged = true;
      break;
    }
    if (iter >= opts.max_iters) {
      throw NonConvergence("solve_bl: no convergence in " + std::to_string(opts.max_iters) + " iterations", y,
                           rep.residual_history);
    }

    const Eigen::MatrixXd jac = detail::bl_jacobian(p, y, I, J);
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(g.data(), I);
    const Eigen::VectorXd dy = jac.partialPivLu().solve(rhs);

    double ulps = 0.0;
    double t = 1.0;
    for (int i = 1; i <= I; ++i) {
      const auto u = static_cast<std::size_t>(i);
      ulps = std::max(ulps, std::abs(dy[i - 1]) / numerics::ulp(y[u]));
      const double gap = y[u] - y[u - 1];
      const double dgap = dy[i - 1] - (i > 1 ? dy[i - 2] : 0.0);
      if (dgap < 0.0) t = std::min(t, 0.9 * gap / -dgap);
    }
    const bool at_floor = ulps <= kFloorUlps;

    std::vector<double> trial(y);
    std::vector<double> g_trial;
    bool accepted = false;
    while (t > 1e-14) {
      for (int i = 1; i <= I; ++i) trial[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] + t * dy[i - 1];
      detail::bl_positions(trial, I, J);
      g_trial = detail::bl_residual_raw(p, trial, I, J);
      const double m_trial = detail::sq_norm(g_trial);
      if (m_trial <= merit || at_floor) {
        merit = m_trial;
        accepted = true;
        break;
      }
      t *= opts.backtrack_factor;
    }
    if (!accepted) {
      throw NonConvergence("solve_bl: line search failed", y, rep.residual_history);
    }
    y.swap(trial);
    g.swap(g_trial);
    if (at_floor) {
      rep.residual_sup = detail::sup_norm(g);
      rep.residual_history.push_back(rep.residual_sup);
      rep.iterations = iter + 1;
      rep.converged = true;
      rep.roundoff_limited = rep.residual_sup > opts.residual_tol;
      break;
    }
  }
  for (int i = 1; i <= I; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out.solution.eps_l[u - 1] = y[u] - y[u - 1] - 1.0;
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Inclusive index window [lo, hi].
struct IndexRange {
  int lo = 0;
  int hi = 0;
};

struct DecayFit {
  double C = 0.0;  ///< prefactor in -eps_l(i) ~ C i^{-q}
  double q = 0.0;
  double r2 = 0.0;
};

/// Least-squares fit of log(-eps_l(i)) = log C - q log i over the window.
inline DecayFit extract_decay_constant(const BoundaryLayerSolution& sol, IndexRange window) {
  if (window.lo < 1 || window.hi > sol.I || window.hi - window.lo < 1) {
    throw ParameterError("decay window must lie within 1..I and hold at least two indices");
  }
  std::vector<double> lx, ly;
  for (int i = window.lo; i <= window.hi; ++i) {
    const double e = sol.eps_l[static_cast<std::size_t>(i - 1)];
    if (!(e < 0.0)) throw FitUndefined("strain is not negative at i = " + std::to_string(i));
    lx.push_back(std::log(static_cast<double>(i)));
    ly.push_back(std::log(-e));
  }
  const numerics::LineFit f = numerics::fit_line(lx, ly);
  return {std::exp(f.intercept), -f.slope, f.r2};
}

/// 2 * mean of (i - y(i)) over the window: estimate of p1 (a > 2) or the
/// constant p-tilde (a = 2).
inline double extract_p1(const BoundaryLayerSolution& sol, IndexRange window) {
  if (window.lo < 1 || window.hi > sol.J || window.hi < window.lo) {
    throw ParameterError("p1 window must lie within 1..J");
  }
  long double s = 0.0L;
  for (int i = window.lo; i <= window.hi; ++i) s += i - sol.y[static_cast<std::size_t>(i)];
  return static_cast<double>(2.0L * s / (window.hi - window.lo + 1));
}

struct Predictor {
  Configuration configuration;
  /// Factor applied to the left half minus one (zero for odd n).
  double correction = 0.0;
};

/// x(i) = y(i)/n on the left half, mirrored as x(n-i) = 1 - x(i). For even n
/// the left half is rescaled by n / (2 y(n/2)) so the midpoint sits at 1/2.
inline Predictor predictor_positions(const BoundaryLayerSolution& sol, int n) {
  sol.validate();
  if (n < 2) throw ParameterError("predictor needs n >= 2");
  const int half = n / 2;
  if (half > sol.I) throw IndexError("predictor needs n/2 <= I");
  Predictor out{Configuration{n, std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0)}, 0.0};
  auto& x = out.configuration.x;
  const double scale = n % 2 == 0 ? n / (2.0 * sol.y[static_cast<std::size_t>(half)]) : 1.0;
  out.correction = scale - 1.0;
  for (int i = 0; i <= half; ++i) {
    x[static_cast<std::size_t>(i)] = scale * sol.y[static_cast<std::size_t>(i)] / n;
  }
  if (n % 2 == 0) x[static_cast<std::size_t>(half)] = 0.5;
  for (int i = 0; i <= half; ++i) x[static_cast<std::size_t>(n - i)] = 1.0 - x[static_cast<std::size_t>(i)];
  out.configuration.validate();
  return out;
}

struct TailCheck {
  double approx = 0.0;  ///< -V(c) + V'(c)/2
  double direct = 0.0;  ///< sum_{k=0}^{kmax} V'(c+k) plus its own tail estimate
  double bound = 0.0;   ///< V''(c)/12
  bool bound_valid = false;  ///< V''' <= 0 verified on [c, c + kmax]
};

/// Euler-Maclaurin check for sum_{k>=0} V'(c+k).
inline TailCheck em_tail_check(const PotentialSpec& p, double c, long kmax) {
  if (!(c > 0.0)) throw DomainError("em_tail_check needs c > 0");
  if (kmax < 100000) throw ParameterError("em_tail_check needs kmax >= 1e5");
  TailCheck t;
  t.approx = -p.value(c) + 0.5 * p.d1(c);
  const double far = c + static_cast<double>(kmax) + 1.0;
  long double s = -p.value(far) + 0.5 * p.d1(far);
  for (long k = kmax; k >= 0; --k) s += p.d1(c + static_cast<double>(k));
  t.direct = static_cast<double>(s);
  t.bound = p.d2(c) / 12.0;
  std::vector<double> grid;
  for (double x = c; x <= far; x = x * 1.25 + 0.25) grid.push_back(x);
  t.bound_valid = third_derivative_nonpositive(p, grid);
  return t;
}

}  // namespace pileup
