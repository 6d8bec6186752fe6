#pragma once

// The acceptance suite: thirteen quantitative checks, each reporting one
// pass/fail line. Criteria share finite and boundary-layer solves through a
// Context, so running the whole suite solves each problem once.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "pileup/asymptotics.hpp"
#include "pileup/blayer.hpp"
#include "pileup/energetics.hpp"
#include "pileup/equilibrium.hpp"
#include "pileup/harness.hpp"
#include "pileup/potential.hpp"
#include "pileup/testing/oracles.hpp"

namespace pileup::acceptance {

struct Result {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  ///< seconds; 0 means no limit
};

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

class Context {
 public:
  Context() : a2_(PotentialSpec::power_law(2.0), {}), wall_(PotentialSpec::wall(), {}) {}

  SolveCache& a2() { return a2_; }
  SolveCache& wall() { return wall_; }

  const BoundaryLayerSolve& bl(double a) {
    auto& slot = a == 2.0 ? bl2_ : bl3_;
    if (!slot) slot = std::make_unique<BoundaryLayerSolve>(solve_bl(PotentialSpec::power_law(a), 1000, 1100));
    return *slot;
  }

  /// Every finite solve made by criteria 1-4, for the symmetry audit.
  std::vector<std::pair<std::string, std::shared_ptr<const FiniteSolve>>> solves;
  bool ran[14] = {};

 private:
  SolveCache a2_, wall_;
  std::unique_ptr<BoundaryLayerSolve> bl2_, bl3_;
};

inline const std::vector<int>& sweep_n() {
  static const std::vector<int> n{64, 128, 256, 512, 1024, 2048, 4096};
  return n;
}

inline Result c1_trivial(Context& ctx) {
  Result r{1, "trivial equilibrium n=2", true, "", 0.0, 1e-3};
  double worst = 0.0;
  for (const auto& p : {PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    auto s = std::make_shared<const FiniteSolve>(solve_finite(p, 2));
    worst = std::max(worst, std::abs(s->configuration.x[1] - 0.5));
    ctx.solves.emplace_back(p.to_string() + " n=2", s);
  }
  r.passed = worst <= 1e-12;
  r.detail = "max |x(1)-0.5| = " + fmt("%.3g", worst);
  return r;
}

inline Result c2_oracle(Context& ctx) {
  Result r{2, "brute-force oracle n=3,4,5", true, "", 0.0, 10.0};
  double worst = 0.0;
  for (const auto& p : {PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    for (int n : {3, 4, 5}) {
      auto s = std::make_shared<const FiniteSolve>(solve_finite(p, n));
      const auto ref = testing::brute_force_minimize(p, n);
      for (int i = 0; i <= n; ++i) {
        worst = std::max(worst, std::abs(s->configuration.x[static_cast<std::size_t>(i)] - ref[static_cast<std::size_t>(i)]));
      }
      ctx.solves.emplace_back(p.to_string() + " n=" + std::to_string(n), s);
    }
  }
  r.passed = worst <= 1e-8;
  r.detail = "max coordinate gap " + fmt("%.3g", worst);
  return r;
}

inline Result sweep_rates(Context& ctx, int id, bool wall) {
  Result r{id, wall ? "incremental-error rates, wall" : "incremental-error rates, a=2", true, "", 0.0, 180.0};
  SolveCache& cache = wall ? ctx.wall() : ctx.a2();
  SweepPlan plan{cache.potential(), sweep_n(), {1, 9, 81}, cache.options()};
  const IncrementalResult res = incremental_error(plan, cache);
  for (int n : sweep_n()) {
    for (int m : {n, 2 * n}) {
      ctx.solves.emplace_back(cache.potential().to_string() + " n=" + std::to_string(m), cache.get(m));
    }
  }
  const RateModel model = wall ? RateModel::PurePower : RateModel::PowerTimesLog;
  double smin = 1e300, smax = -1e300;
  for (int i : plan.i_probes) {
    const RateFit f = fit_rate(probe_points(res.rows, i), model);
    smin = std::min(smin, f.slope);
    smax = std::max(smax, f.slope);
    const bool ok = f.slope >= -1.15 && f.slope <= -0.85 && f.r2 >= 0.98;
    r.passed = r.passed && ok;
    r.detail += "i=" + std::to_string(i) + " slope " + fmt("%.4f", f.slope) + " r2 " + fmt("%.4f", f.r2) + "; ";
  }
  r.passed = r.passed && smax - smin <= 0.1;
  r.detail += std::string(to_string(model)) + ", spread " + fmt("%.4f", smax - smin);
  return r;
}

inline Result c3_rates_a2(Context& ctx) { return sweep_rates(ctx, 3, false); }
inline Result c4_rates_wall(Context& ctx) { return sweep_rates(ctx, 4, true); }

inline Result c5_decay(Context& ctx) {
  Result r{5, "boundary-layer decay constants a=2,3", true, "", 0.0, 60.0};
  const DecayFit f2 = extract_decay_constant(ctx.bl(2.0).solution, {20, 100});
  const double C2 = 1.0 / (std::numbers::pi * std::numbers::pi);
  const DecayFit f3 = extract_decay_constant(ctx.bl(3.0).solution, {10, 60});
  const double C3 = 1.0 / (24.0 * zeta(3.0));
  r.passed = f2.q >= 0.9 && f2.q <= 1.1 && std::abs(f2.C - C2) <= 0.10 * C2 && f3.q >= 1.8 && f3.q <= 2.2 &&
             std::abs(f3.C - C3) <= 0.15 * C3;
  r.detail = "a=2: q " + fmt("%.4f", f2.q) + " C " + fmt("%.5f", f2.C) + " (pred " + fmt("%.5f", C2) +
             "); a=3: q " + fmt("%.4f", f3.q) + " C " + fmt("%.5f", f3.C) + " (pred " + fmt("%.5f", C3) + ")";
  return r;
}

inline Result c6_splitting(Context&) {
  Result r{6, "energy splitting identity", true, "", 0.0, 5.0};
  std::mt19937_64 rng(20240606);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  double worst = 0.0;
  for (const auto& p : {PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    for (int n : {4, 8, 16, 32}) {
      for (int t = 0; t < 100; ++t) {
        StrainField e{n, std::vector<double>(static_cast<std::size_t>(n))};
        double mean = 0.0;
        for (auto& v : e.eps) mean += (v = U(rng));
        mean /= n;
        for (auto& v : e.eps) v -= mean;
        const double direct = renorm_energy(p, e);
        const EnergySplit s = renorm_energy_split(p, e);
        worst = std::max(worst, std::abs(direct - (s.q_part + s.linear_part)) / (1.0 + std::abs(direct)));
      }
    }
  }
  r.passed = worst <= 1e-10;
  r.detail = "max scaled mismatch " + fmt("%.3g", worst) + " over 800 strains";
  return r;
}

inline Result c7_phi_bounds(Context&) {
  Result r{7, "Taylor remainder bounds", true, "", 0.0, 1.0};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> K(1, 50);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  long lower_bad = 0, upper_bad = 0, upper_tested = 0;
  for (const auto& p : {PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    for (int t = 0; t < 10000; ++t) {
      const int k = K(rng);
      const double y = -k + 0.01 + U(rng) * (20.0 + k - 0.01);
      const double f = phi(p, k, y);
      if (f < phi_lower_bound(p, k, y)) ++lower_bad;
      for (double delta : {0.5, 0.9}) {
        if (y >= k * (delta - 1.0)) {
          ++upper_tested;
          if (f > 0.5 * y * y * p.d2(k * delta)) ++upper_bad;
        }
      }
    }
  }
  r.passed = lower_bad == 0 && upper_bad == 0;
  r.detail = "lower-bound violations " + std::to_string(lower_bad) + "/20000, upper-bound violations " +
             std::to_string(upper_bad) + "/" + std::to_string(upper_tested);
  return r;
}

inline Result c8_stress(Context&) {
  Result r{8, "stress l2 convergence a=2", true, "", 0.0, 30.0};
  const PotentialSpec p = PotentialSpec::power_law(2.0);
  std::vector<std::pair<double, double>> pts;
  for (int n = 64; n <= 16384; n *= 2) pts.emplace_back(n, stress_l2_gap(p, n));
  const RateFit f = fit_rate(pts, RateModel::PurePower);
  r.passed = f.slope >= -0.6 && f.slope <= -0.4;
  r.detail = "slope " + fmt("%.4f", f.slope) + " r2 " + fmt("%.5f", f.r2);
  return r;
}

inline Result c9_euler_maclaurin(Context&) {
  Result r{9, "Euler-Maclaurin remainder bound", true, "", 0.0, 30.0};
  int bad = 0;
  double worst_ratio = 0.0;
  for (double a : {2.0, 3.0}) {
    for (double c : {5.0, 10.0, 20.0}) {
      const TailCheck t = em_tail_check(PotentialSpec::power_law(a), c, 10000000L);
      const double err = std::abs(t.approx - t.direct);
      worst_ratio = std::max(worst_ratio, err / t.bound);
      if (!(err <= t.bound) || !t.bound_valid) ++bad;
    }
  }
  r.passed = bad == 0;
  r.detail = std::to_string(bad) + " violations, max |R|/bound " + fmt("%.4f", worst_ratio);
  return r;
}

inline Result c10_gradient(Context&) {
  Result r{10, "force residual vs energy gradient", true, "", 0.0, 10.0};
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> U(0.5, 1.5);
  double worst = 0.0;
  for (const auto& p : {PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    for (int n : {4, 16, 64}) {
      for (int t = 0; t < 50; ++t) {
        std::vector<double> gaps(static_cast<std::size_t>(n));
        double total = 0.0;
        for (auto& g : gaps) total += (g = U(rng));
        Configuration c{n, std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0)};
        for (int i = 1; i < n; ++i) {
          c.x[static_cast<std::size_t>(i)] = c.x[static_cast<std::size_t>(i - 1)] + gaps[static_cast<std::size_t>(i - 1)] / total;
        }
        c.x[static_cast<std::size_t>(n)] = 1.0;
        const std::vector<double> res = residual(p, c);
        std::vector<long double> x(c.x.begin(), c.x.end());
        const long double h = 1e-7L / n;  // step 1e-7 in y = n x
        double err = 0.0, scale = 0.0;
        for (int i = 1; i < n; ++i) {
          const auto u = static_cast<std::size_t>(i);
          const long double x0 = x[u];
          x[u] = x0 + h;
          const long double ep = testing::scaled_energy_ld(p, x);
          x[u] = x0 - h;
          const long double em = testing::scaled_energy_ld(p, x);
          x[u] = x0;
          const double fd = static_cast<double>((ep - em) / (2.0L * h * n));
          err = std::max(err, std::abs(fd - res[u - 1]));
          scale = std::max(scale, std::abs(res[u - 1]));
        }
        worst = std::max(worst, err / scale);
      }
    }
  }
  r.passed = worst <= 1e-6;
  r.detail = "max relative error " + fmt("%.3g", worst) + " over 300 configurations";
  return r;
}

inline Result c11_symmetry(Context& ctx) {
  Result r{11, "reversal symmetry and zero sum", true, "", 0.0, 0.0};
  double sym = 0.0, zero = 0.0;
  for (const auto& [label, s] : ctx.solves) {
    const StrainField e = strain(s->configuration);
    const int n = e.n;
    long double sum = 0.0L;
    for (int i = 1; i <= n; ++i) {
      sym = std::max(sym, std::abs(e(i) - e(n + 1 - i)));
      sum += e(i);
    }
    zero = std::max(zero, std::abs(static_cast<double>(sum)) / n);
  }
  r.passed = !ctx.solves.empty() && sym <= 1e-8 && zero <= 1e-12;
  r.detail = std::to_string(ctx.solves.size()) + " solves; max asymmetry " + fmt("%.3g", sym) +
             ", max |sum|/n " + fmt("%.3g", zero);
  return r;
}

inline Result c12_illposed(Context&) {
  Result r{12, "ill-posedness for a<3/2", true, "", 0.0, 60.0};
  const std::vector<int> N{100, 1000, 10000};
  const auto bad = illposedness_demo(PotentialSpec::power_law(1.2), 0.6, N);
  const auto good = illposedness_demo(PotentialSpec::power_law(2.0), 0.6, N);
  bool dec = true;
  for (std::size_t k = 1; k < bad.size(); ++k) dec = dec && bad[k] < bad[k - 1];
  const double floor = coercivity_floor(PotentialSpec::power_law(2.0));
  const bool band = within_band(PotentialSpec::power_law(2.0), good);
  r.passed = dec && bad.back() < bad.front() - 1.0 && band;
  r.detail = "a=1.2: " + fmt("%.5g", bad[0]) + ", " + fmt("%.5g", bad[1]) + ", " + fmt("%.5g", bad[2]) +
             "; a=2: " + fmt("%.5g", good[0]) + ", " + fmt("%.5g", good[1]) + ", " + fmt("%.5g", good[2]) +
             " (floor " + fmt("%.4g", floor) + ")";
  return r;
}

inline Result c13_gamma(Context& ctx) {
  Result r{13, "renormalised energy vs twice the limit energy", true, "", 0.0, 60.0};
  const PotentialSpec p = PotentialSpec::power_law(2.0);
  const auto& bl = ctx.bl(2.0).solution;
  const double limit = limit_energy_trunc(p, bl.eps_l, 4L * bl.I, sigma_inf(p, bl.I));
  std::vector<double> gaps;
  for (int n : {64, 256, 1024}) {
    const double en1 = renorm_energy(p, strain(ctx.a2().get(n)->configuration));
    gaps.push_back(std::abs(en1 - 2.0 * limit));
  }
  r.passed = gaps[1] <= gaps[0] && gaps[2] <= gaps[1];
  r.detail = "2 E_inf = " + fmt("%.8f", 2.0 * limit) + "; gaps " + fmt("%.3e", gaps[0]) + ", " +
             fmt("%.3e", gaps[1]) + ", " + fmt("%.3e", gaps[2]);
  return r;
}

inline const std::vector<std::function<Result(Context&)>>& criteria() {
  static const std::vector<std::function<Result(Context&)>> all{
      c1_trivial, c2_oracle,  c3_rates_a2, c4_rates_wall, c5_decay,     c6_splitting, c7_phi_bounds,
      c8_stress,  c9_euler_maclaurin, c10_gradient, c11_symmetry, c12_illposed, c13_gamma};
  return all;
}

inline std::string format_line(const Result& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-44s %8.3f s", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.seconds);
  return std::string(head) + "  " + r.detail;
}

/// Runs one criterion, timing it and failing it on a budget overrun.
inline Result run_one(Context& ctx, int id) {
  const auto t0 = std::chrono::steady_clock::now();
  Result r;
  try {
    r = criteria().at(static_cast<std::size_t>(id - 1))(ctx);
  } catch (const std::exception& e) {
    r = Result{id, "criterion " + std::to_string(id), false, std::string("exception: ") + e.what(), 0.0, 0.0};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.budget > 0.0 && r.seconds > r.budget) {
    r.passed = false;
    r.detail += "; over budget " + fmt("%.3g", r.budget) + " s";
  }
  return r;
}

/// Runs the criteria in order, printing one line each. The symmetry audit
/// (11) needs the solves of 1-4 and runs them first when not selected.
inline std::vector<Result> run(std::ostream& out, const std::vector<int>& ids = {}) {
  std::vector<int> sel = ids;
  if (sel.empty()) {
    for (int i = 1; i <= static_cast<int>(criteria().size()); ++i) sel.push_back(i);
  }
  Context ctx;
  std::vector<Result> results;
  for (int id : sel) {
    if (id == 11) {
      for (int pre = 1; pre <= 4; ++pre) {
        if (!ctx.ran[pre]) {
          run_one(ctx, pre);
          ctx.ran[pre] = true;
        }
      }
    }
    results.push_back(run_one(ctx, id));
    if (id >= 1 && id <= 13) ctx.ran[id] = true;
    out << format_line(results.back()) << std::endl;
  }
  return results;
}

}  // namespace pileup::acceptance
