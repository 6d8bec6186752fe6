#pragma once

// Parameter sweeps, incremental errors and rate fits, CSV/JSON export, and
// the config-driven experiment runner behind `pileup run`.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pileup/asymptotics.hpp"
#include "pileup/blayer.hpp"
#include "pileup/energetics.hpp"
#include "pileup/equilibrium.hpp"
#include "pileup/error.hpp"
#include "pileup/numerics.hpp"
#include "pileup/potential.hpp"

namespace pileup {

/// Worker count for sweeps: PILEUP_THREADS if set and positive, else the
/// hardware concurrency.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PILEUP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return hw;
}

/// Runs body(k) for k in [0, count) on up to `threads` workers. The first
/// exception in index order is rethrown after all workers finish.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < count;) {
      try {
        body(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned m = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < m; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Finite solves keyed by n. A cached entry is the very object a fresh solve
/// returned, so reuse is bit-exact.
class SolveCache {
 public:
  SolveCache(PotentialSpec p, SolverOptions opts) : p_(std::move(p)), opts_(opts) {}

  const PotentialSpec& potential() const { return p_; }
  const SolverOptions& options() const { return opts_; }

  std::shared_ptr<const FiniteSolve> get(int n) {
    {
      std::lock_guard lock(mu_);
      if (auto it = solves_.find(n); it != solves_.end()) return it->second;
    }
    auto s = std::make_shared<const FiniteSolve>(solve_finite(p_, n, opts_));
    std::lock_guard lock(mu_);
    return solves_.emplace(n, std::move(s)).first->second;
  }

  /// Solves every missing n, largest first so the long jobs start early.
  void prefetch(std::vector<int> ns, unsigned threads) {
    std::sort(ns.begin(), ns.end(), std::greater<>());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    parallel_for(ns.size(), threads, [&](std::size_t k) { get(ns[k]); });
  }

  bool contains(int n) const {
    std::lock_guard lock(mu_);
    return solves_.count(n) != 0;
  }

 private:
  PotentialSpec p_;
  SolverOptions opts_;
  mutable std::mutex mu_;
  std::map<int, std::shared_ptr<const FiniteSolve>> solves_;
};

struct SweepPlan {
  PotentialSpec potential = PotentialSpec::power_law(2.0);
  std::vector<int> n_values;
  std::vector<int> i_probes{1, 3, 9, 27, 81};
  SolverOptions solver;

  void validate() const {
    if (n_values.empty()) throw ParameterError("n_values must not be empty");
    for (std::size_t k = 0; k < n_values.size(); ++k) {
      if (n_values[k] < 2) throw ParameterError("n_values entries must be >= 2");
      if (k > 0 && n_values[k] <= n_values[k - 1]) throw ParameterError("n_values must be strictly increasing");
    }
    if (i_probes.empty()) throw ParameterError("i_probes must not be empty");
    for (int i : i_probes) {
      if (i < 1) throw ParameterError("i_probes entries must be positive");
    }
    solver.validate();
  }

  /// A probe is reported at n only when it lies in the left half, i <= ceil(n/2).
  static bool probe_applies(int i, int n) { return i <= (n + 1) / 2; }
};

struct IncrementRow {
  int n = 0;
  int i = 0;
  double dn = 0.0;
};

/// d^n(i) = |eps^n(i) - eps^{2n}(i)| from strains keyed by n. Every n in
/// n_values needs both n and 2n present.
inline std::vector<IncrementRow> incremental_rows(const std::map<int, StrainField>& strains,
                                                  const std::vector<int>& n_values,
                                                  const std::vector<int>& i_probes) {
  std::vector<IncrementRow> rows;
  for (int n : n_values) {
    const auto a = strains.find(n), b = strains.find(2 * n);
    if (a == strains.end() || b == strains.end()) {
      throw ParameterError("incremental error at n = " + std::to_string(n) + " needs strains at n and 2n");
    }
    for (int i : i_probes) {
      if (!SweepPlan::probe_applies(i, n)) continue;
      rows.push_back({n, i, std::abs(a->second(i) - b->second(i))});
    }
  }
  return rows;
}

struct IncrementalResult {
  std::vector<IncrementRow> rows;
  std::map<int, SolverReport> reports;  ///< every solve used, keyed by n
};

/// Solves at every n and 2n (cached, concurrent up to `threads`) and tabulates
/// d^n(i) ordered by n then probe.
inline IncrementalResult incremental_error(const SweepPlan& plan, SolveCache& cache,
                                           unsigned threads = worker_count()) {
  plan.validate();
  std::vector<int> ns;
  for (int n : plan.n_values) {
    ns.push_back(n);
    ns.push_back(2 * n);
  }
  try {
    cache.prefetch(ns, threads);
  } catch (const NonConvergence& e) {
    throw NonConvergence(std::string("sweep: ") + e.what(), e.last_iterate(), e.residual_history());
  }
  IncrementalResult out;
  std::map<int, StrainField> strains;
  for (int n : ns) {
    const auto s = cache.get(n);
    strains.emplace(n, strain(s->configuration));
    out.reports.emplace(n, s->report);
  }
  out.rows = incremental_rows(strains, plan.n_values, plan.i_probes);
  return out;
}

inline IncrementalResult incremental_error(const SweepPlan& plan, unsigned threads = worker_count()) {
  SolveCache cache(plan.potential, plan.solver);
  return incremental_error(plan, cache, threads);
}

enum class RateModel { PurePower, PowerTimesLog };

inline const char* to_string(RateModel m) { return m == RateModel::PurePower ? "PurePower" : "PowerTimesLog"; }

inline RateModel parse_rate_model(const std::string& s) {
  if (s == "PurePower") return RateModel::PurePower;
  if (s == "PowerTimesLog") return RateModel::PowerTimesLog;
  throw ParameterError("unknown rate model '" + s + "'");
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  RateModel model = RateModel::PurePower;
};

/// Least squares of log(value) (PurePower) or log(value / log n)
/// (PowerTimesLog) against log n.
inline RateFit fit_rate(const std::vector<std::pair<double, double>>& points, RateModel model) {
  if (points.size() < 3) throw FitUndefined("rate fit needs at least three points");
  std::vector<double> lx, ly;
  for (const auto& [n, v] : points) {
    if (!(v > 0.0)) throw FitUndefined("rate fit needs positive values");
    if (!(n > 0.0) || (model == RateModel::PowerTimesLog && !(n > 1.0))) {
      throw FitUndefined("rate fit needs n > 1");
    }
    lx.push_back(std::log(n));
    ly.push_back(model == RateModel::PurePower ? std::log(v) : std::log(v / std::log(n)));
  }
  std::vector<double> sorted(lx);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw FitUndefined("rate fit has repeated n values");
  }
  const numerics::LineFit f = numerics::fit_line(lx, ly);
  return {f.slope, f.intercept, f.r2, model};
}

/// Points (n, d^n(i)) for one probe.
inline std::vector<std::pair<double, double>> probe_points(const std::vector<IncrementRow>& rows, int i) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (r.i == i) pts.emplace_back(r.n, r.dn);
  }
  return pts;
}

// ---- export ---------------------------------------------------------------

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Comma-separated, one header line, LF endings, %.17g numbers.
inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << fmt17(row[c]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline nlohmann::json to_json(const RateFit& f) {
  return {{"model", to_string(f.model)}, {"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
}

inline nlohmann::json to_json(const SolverReport& r) {
  return {{"converged", r.converged},       {"roundoff_limited", r.roundoff_limited},
          {"iterations", r.iterations},     {"residual_sup", r.residual_sup},
          {"seconds", r.seconds},           {"hessian", r.hessian},
          {"residual_history", r.residual_history}};
}

inline std::vector<std::vector<double>> configuration_rows(const Configuration& c) {
  const StrainField e = strain(c);
  const std::vector<double> rho = c.n >= 2 ? discrete_density(c) : std::vector<double>{};
  std::vector<std::vector<double>> rows;
  for (int i = 0; i <= c.n; ++i) {
    const double eps = i >= 1 ? e(i) : std::nan("");
    const double r = i >= 1 && i < c.n ? rho[static_cast<std::size_t>(i - 1)] : std::nan("");
    rows.push_back({double(i), c.x[static_cast<std::size_t>(i)], eps, r});
  }
  return rows;
}

// ---- experiments ------------------------------------------------------------

struct ExperimentConfig {
  std::string experiment;
  PotentialSpec potential = PotentialSpec::power_law(2.0);
  std::vector<int> n_values;
  std::vector<int> i_probes{1, 3, 9, 27, 81};
  int I = 0;
  int J = 0;
  double tol = 1e-12;
  int max_iters = 200;
  std::filesystem::path out_dir = "out";
  nlohmann::json raw;  ///< echo of the parsed file

  static ExperimentConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParameterError("config must be a JSON object");
    ExperimentConfig c;
    c.raw = j;
    if (!j.contains("experiment")) throw ParameterError("config lacks 'experiment'");
    c.experiment = j.at("experiment").get<std::string>();
    if (j.contains("potential")) c.potential = PotentialSpec::parse(j.at("potential").get<std::string>());
    if (j.contains("n_values")) c.n_values = j.at("n_values").get<std::vector<int>>();
    if (j.contains("i_probes")) c.i_probes = j.at("i_probes").get<std::vector<int>>();
    const bool wall = !c.potential.is_power_law();
    c.I = j.value("I", wall ? 200 : 1000);
    c.J = j.value("J", wall ? 220 : 1100);
    c.tol = j.value("tol", 1e-12);
    c.max_iters = j.value("max_iters", 200);
    c.out_dir = j.value("out_dir", std::string("out"));
    static const char* known[] = {"incremental-error", "boundary-layer", "stress-convergence", "ill-posedness",
                                  "density-profile"};
    if (std::find(std::begin(known), std::end(known), c.experiment) == std::end(known)) {
      throw ParameterError("unknown experiment '" + c.experiment + "'");
    }
    const bool needs_n = c.experiment != "boundary-layer";
    if (needs_n && c.n_values.empty()) throw ParameterError("n_values must not be empty");
    c.solver().validate();
    return c;
  }

  SolverOptions solver() const {
    SolverOptions o;
    o.residual_tol = tol;
    o.max_iters = max_iters;
    return o;
  }

  /// Optional numeric setting under "check".
  double check_value(const char* key, double fallback) const {
    if (raw.contains("check") && raw.at("check").contains(key)) return raw.at("check").at(key).get<double>();
    return fallback;
  }
};

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitSolver = 2, kExitCheck = 3 };

struct ExperimentOutcome {
  nlohmann::json report;
  std::vector<std::string> violations;  ///< empty when every check passed
};

namespace detail {

inline double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline ExperimentOutcome run_incremental(const ExperimentConfig& cfg) {
  SweepPlan plan{cfg.potential, cfg.n_values, cfg.i_probes, {}};
  plan.solver = cfg.solver();
  const auto t0 = std::chrono::steady_clock::now();
  const IncrementalResult res = incremental_error(plan);
  std::vector<std::vector<double>> rows;
  for (const auto& r : res.rows) rows.push_back({double(r.n), double(r.i), r.dn});
  write_csv(cfg.out_dir / "incremental_error.csv", {"n", "i", "dn"}, rows);

  const bool a2 = cfg.potential.is_power_law() && cfg.potential.a() == 2.0;
  const RateModel model = cfg.raw.contains("model") ? parse_rate_model(cfg.raw.at("model").get<std::string>())
                                                     : (a2 ? RateModel::PowerTimesLog : RateModel::PurePower);
  ExperimentOutcome out;
  nlohmann::json fits = nlohmann::json::array();
  std::vector<double> slopes;
  const double lo = cfg.check_value("slope_min", -1.15), hi = cfg.check_value("slope_max", -0.85);
  const double r2_min = cfg.check_value("r2_min", 0.98), spread = cfg.check_value("probe_spread", 0.1);
  for (int i : cfg.i_probes) {
    const auto pts = probe_points(res.rows, i);
    nlohmann::json f = {{"i", i}, {"points", pts.size()}};
    if (pts.size() < 3) {
      f["skipped"] = "fewer than three n values reach this probe";
      fits.push_back(f);
      continue;
    }
    const RateFit pure = fit_rate(pts, RateModel::PurePower), logm = fit_rate(pts, RateModel::PowerTimesLog);
    f["PurePower"] = to_json(pure);
    f["PowerTimesLog"] = to_json(logm);
    fits.push_back(f);
    const RateFit& used = model == RateModel::PurePower ? pure : logm;
    slopes.push_back(used.slope);
    if (used.slope < lo || used.slope > hi) {
      out.violations.push_back("probe " + std::to_string(i) + ": slope " + fmt17(used.slope) + " outside [" +
                               fmt17(lo) + ", " + fmt17(hi) + "]");
    }
    if (used.r2 < r2_min) out.violations.push_back("probe " + std::to_string(i) + ": r2 " + fmt17(used.r2));
  }
  if (slopes.empty()) out.violations.push_back("no probe has three or more points");
  if (!slopes.empty()) {
    const auto [mn, mx] = std::minmax_element(slopes.begin(), slopes.end());
    if (*mx - *mn > spread) out.violations.push_back("probe slopes differ by " + fmt17(*mx - *mn));
  }
  nlohmann::json solves = nlohmann::json::object();
  for (const auto& [n, r] : res.reports) {
    solves[std::to_string(n)] = {{"iterations", r.iterations}, {"residual_sup", r.residual_sup},
                                 {"roundoff_limited", r.roundoff_limited}, {"seconds", r.seconds},
                                 {"hessian", r.hessian}};
  }
  out.report = {{"check_model", to_string(model)}, {"fits", fits}, {"solves", solves}, {"seconds", elapsed(t0)}};
  return out;
}

inline ExperimentOutcome run_boundary_layer(const ExperimentConfig& cfg) {
  const SolverOptions opts = cfg.solver();
  const auto t0 = std::chrono::steady_clock::now();
  const BoundaryLayerSolve bl = solve_bl(cfg.potential, cfg.I, cfg.J, opts);
  const auto& s = bl.solution;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i <= s.J; ++i) {
    rows.push_back({double(i), s.y[static_cast<std::size_t>(i)],
                    i >= 1 && i <= s.I ? s.eps_l[static_cast<std::size_t>(i - 1)] : 0.0});
  }
  write_csv(cfg.out_dir / "boundary_layer.csv", {"i", "y", "eps_l"}, rows);

  ExperimentOutcome out;
  out.report = {{"solve", to_json(bl.report)}, {"I", s.I}, {"J", s.J}};
  IndexRange pw{std::max(1, s.I / 2), std::max(1, 9 * s.I / 10)};
  out.report["p1_window"] = {pw.lo, pw.hi};
  out.report["p1_estimate"] = extract_p1(s, pw);
  if (cfg.potential.is_power_law()) {
    IndexRange dw{std::max(2, s.I / 50), std::max(3, s.I / 10)};
    if (cfg.raw.contains("window")) {
      const auto w = cfg.raw.at("window").get<std::vector<int>>();
      if (w.size() != 2) throw ParameterError("window must be [lo, hi]");
      dw = {w[0], w[1]};
    }
    const double a = cfg.potential.a();
    const double C_pred = 1.0 / (zeta(a) * (a * a * a - a));
    const DecayFit f = extract_decay_constant(s, dw);
    out.report["decay"] = {{"window", {dw.lo, dw.hi}}, {"C", f.C},       {"q", f.q},
                           {"r2", f.r2},                {"C_predicted", C_pred}, {"q_predicted", a - 1.0}};
    const double q_tol = cfg.check_value("q_rel_tol", 0.1), c_tol = cfg.check_value("C_rel_tol", 0.15);
    if (std::abs(f.q - (a - 1.0)) > q_tol * (a - 1.0)) out.violations.push_back("decay exponent " + fmt17(f.q));
    if (std::abs(f.C - C_pred) > c_tol * C_pred) out.violations.push_back("decay constant " + fmt17(f.C));
  }
  out.report["seconds"] = elapsed(t0);
  return out;
}

inline ExperimentOutcome run_stress(const ExperimentConfig& cfg) {
  if (!cfg.potential.is_power_law()) throw ParameterError("stress-convergence runs for power laws only");
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::pair<double, double>> pts;
  std::vector<std::vector<double>> rows;
  for (int n : cfg.n_values) {
    const double g = stress_l2_gap(cfg.potential, n);
    pts.emplace_back(n, g);
    rows.push_back({double(n), g});
  }
  write_csv(cfg.out_dir / "stress_gap.csv", {"n", "l2_gap"}, rows);
  ExperimentOutcome out;
  const double expected = -(cfg.potential.a() - 1.5);
  out.report = {{"expected_slope", expected}, {"seconds", 0.0}};
  if (pts.size() >= 3) {
    const RateFit f = fit_rate(pts, RateModel::PurePower);
    out.report["fit"] = to_json(f);
    if (std::abs(f.slope - expected) > cfg.check_value("slope_tol", 0.1)) {
      out.violations.push_back("stress slope " + fmt17(f.slope));
    }
  } else {
    out.violations.push_back("stress fit needs three n values");
  }
  out.report["seconds"] = elapsed(t0);
  return out;
}

inline ExperimentOutcome run_illposed(const ExperimentConfig& cfg) {
  const double b = cfg.raw.value("b", 0.6);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> e = illposedness_demo(cfg.potential, b, cfg.n_values);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < e.size(); ++k) rows.push_back({double(cfg.n_values[k]), e[k]});
  write_csv(cfg.out_dir / "illposedness.csv", {"N", "energy"}, rows);
  ExperimentOutcome out;
  out.report = {{"b", b}, {"energies", e}, {"seconds", elapsed(t0)}};
  if (cfg.potential.a() < 1.5) {
    for (std::size_t k = 1; k < e.size(); ++k) {
      if (!(e[k] < e[k - 1])) out.violations.push_back("energy not strictly decreasing at N = " +
                                                       std::to_string(cfg.n_values[k]));
    }
    if (!(e.back() < e.front() - cfg.check_value("drop", 1.0))) out.violations.push_back("energy drop too small");
  } else {
    out.report["floor"] = coercivity_floor(cfg.potential);
    if (!within_band(cfg.potential, e)) out.violations.push_back("energy leaves the bounded band");
  }
  return out;
}

inline ExperimentOutcome run_density(const ExperimentConfig& cfg) {
  const SolverOptions opts = cfg.solver();
  const auto t0 = std::chrono::steady_clock::now();
  std::unique_ptr<BoundaryLayerSolve> bl;
  if (cfg.raw.contains("I")) bl = std::make_unique<BoundaryLayerSolve>(solve_bl(cfg.potential, cfg.I, cfg.J, opts));
  ExperimentOutcome out;
  nlohmann::json per_n = nlohmann::json::array();
  for (int n : cfg.n_values) {
    const FiniteSolve fs = solve_finite(cfg.potential, n, opts);
    auto rows = configuration_rows(fs.configuration);
    std::vector<std::string> header{"i", "x", "eps", "rho"};
    const std::vector<double> rho = n >= 2 ? discrete_density(fs.configuration) : std::vector<double>{};
    nlohmann::json entry = {{"n", n}, {"solve", to_json(fs.report)}};
    if (!rho.empty()) entry["rho_max"] = *std::max_element(rho.begin(), rho.end());
    if (bl && n >= 2 && n / 2 <= bl->solution.I) {
      const Predictor pr = predictor_positions(bl->solution, n);
      const std::vector<double> rho_p = discrete_density(pr.configuration);
      header.insert(header.end(), {"x_pred", "rho_pred"});
      double gap = 0.0;
      for (int i = 0; i <= n; ++i) {
        const bool inner = i >= 1 && i < n;
        const double rp = inner ? rho_p[static_cast<std::size_t>(i - 1)] : std::nan("");
        if (inner) gap = std::max(gap, std::abs(rp - rho[static_cast<std::size_t>(i - 1)]));
        rows[static_cast<std::size_t>(i)].push_back(pr.configuration.x[static_cast<std::size_t>(i)]);
        rows[static_cast<std::size_t>(i)].push_back(rp);
      }
      entry["predictor_density_gap"] = gap;
      entry["predictor_correction"] = pr.correction;
    }
    write_csv(cfg.out_dir / ("density_n" + std::to_string(n) + ".csv"), header, rows);
    per_n.push_back(entry);
  }
  out.report = {{"profiles", per_n}, {"seconds", elapsed(t0)}};
  if (bl) out.report["boundary_layer"] = to_json(bl->report);
  return out;
}

}  // namespace detail

/// Runs the experiment named in a JSON config, writing CSV data and
/// report.json into out_dir. Returns an ExitCode; with `check`, a threshold
/// violation yields kExitCheck.
inline int run_experiment(const std::filesystem::path& config_path, bool check, std::ostream& log) {
  ExperimentConfig cfg;
  try {
    std::ifstream in(config_path);
    if (!in) throw ParameterError("cannot open config " + config_path.string());
    cfg = ExperimentConfig::from_json(nlohmann::json::parse(in));
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  ExperimentOutcome out;
  try {
    if (cfg.experiment == "incremental-error") out = detail::run_incremental(cfg);
    else if (cfg.experiment == "boundary-layer") out = detail::run_boundary_layer(cfg);
    else if (cfg.experiment == "stress-convergence") out = detail::run_stress(cfg);
    else if (cfg.experiment == "ill-posedness") out = detail::run_illposed(cfg);
    else out = detail::run_density(cfg);
  } catch (const NonConvergence& e) {
    log << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  out.report["experiment"] = cfg.experiment;
  out.report["potential"] = cfg.potential.to_string();
  out.report["config"] = cfg.raw;
  out.report["violations"] = out.violations;
  write_json(cfg.out_dir / "report.json", out.report);
  for (const auto& v : out.violations) log << "threshold: " << v << '\n';
  if (check && !out.violations.empty()) return kExitCheck;
  return kExitOk;
}

}  // namespace pileup
