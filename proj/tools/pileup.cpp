// pileup: command-line front end for the finite solver, the boundary-layer
// solver, stresses, energies, asymptotic predictions, sweeps, config-driven
// experiments and the acceptance suite.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pileup/acceptance.hpp"
#include "pileup/pileup.hpp"

namespace {

using namespace pileup;

void print15(const char* label, double v) { std::printf("%s %.15g\n", label, v); }

// Reads the "eps" column of a CSV (or its last column when there is none),
// skipping blank and non-finite entries.
StrainField read_strain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open strain file " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParameterError("strain file is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string h; std::getline(ss, h, ',');) header.push_back(h);
  }
  std::size_t col = header.size() - 1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "eps") col = c;
  }
  std::vector<double> eps;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t c = 0; c <= col && std::getline(ss, cell, ','); ++c) {
    }
    const double v = std::strtod(cell.c_str(), nullptr);
    if (std::isfinite(v)) eps.push_back(v);
  }
  if (eps.empty()) throw ParameterError("no strain values in " + path);
  return StrainField{static_cast<int>(eps.size()), eps};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibria of repulsive particle pile-ups and their boundary layers"};
  app.require_subcommand(1);

  std::string potential = "powerlaw:a=2";
  double tol = 1e-12;
  std::string out;

  auto* fin = app.add_subcommand("solve-finite", "Solve the n-particle force balance");
  int n = 64;
  fin->add_option("--potential", potential, "powerlaw:a=<value> or wall");
  fin->add_option("--n", n, "number of gaps")->required()->check(CLI::PositiveNumber);
  fin->add_option("--tol", tol, "residual sup-norm tolerance");
  fin->add_option("--out", out, "CSV with columns i,x,eps,rho")->required();

  auto* bl = app.add_subcommand("solve-bl", "Solve the truncated boundary-layer system");
  int I = 1000, J = 1100;
  bl->add_option("--potential", potential);
  bl->add_option("--I", I, "last free index")->required();
  bl->add_option("--J", J, "truncation index")->required();
  bl->add_option("--tol", tol);
  bl->add_option("--out", out, "CSV with columns i,y,eps_l")->required();

  auto* st = app.add_subcommand("stress", "Tabulate sigma^n or sigma^inf");
  std::string n_text = "inf";
  int imax = 100;
  st->add_option("--potential", potential);
  st->add_option("--n", n_text, "integer n, or inf")->required();
  st->add_option("--imax", imax)->required()->check(CLI::PositiveNumber);
  st->add_option("--out", out, "CSV with columns i,sigma")->required();

  auto* en = app.add_subcommand("energy", "Renormalised energy of a strain field and its splitting");
  std::string strain_path;
  en->add_option("--potential", potential);
  en->add_option("--strain", strain_path, "CSV holding an eps column")->required();

  auto* pr = app.add_subcommand("predict", "Asymptotic predictions");
  std::string what;
  double s = 0.25, bulk_n = 1000.0, p_tilde = 0.0;
  int i_index = 1;
  std::vector<double> p_k;
  pr->add_option("--potential", potential);
  pr->add_option("--what", what)->required()->check(CLI::IsMember({"zeta", "Z", "bulk", "strain-tail"}));
  pr->add_option("--s", s, "bulk coordinate in (0,1)");
  pr->add_option("--n", bulk_n, "system size for the bulk profile");
  pr->add_option("--i", i_index, "index for the strain tail");
  pr->add_option("--p-tilde", p_tilde, "matching constant for integer a >= 2");
  pr->add_option("--p-k", p_k, "matching constants p_1.. for a > 2");

  auto* sw = app.add_subcommand("sweep", "Incremental errors d^n(i) over a list of n");
  std::vector<int> n_values{64, 128, 256, 512, 1024};
  std::vector<int> probes{1, 3, 9, 27, 81};
  sw->add_option("--potential", potential);
  sw->add_option("--n", n_values, "increasing list of n")->delimiter(',');
  sw->add_option("--probes", probes, "probe indices")->delimiter(',');
  sw->add_option("--tol", tol);
  sw->add_option("--out", out, "CSV with columns n,i,dn")->required();

  auto* ck = app.add_subcommand("check", "Run the acceptance suite");
  std::vector<int> only;
  ck->add_option("--only", only, "criterion numbers to run")->delimiter(',');

  auto* rn = app.add_subcommand("run", "Run an experiment described by a JSON config");
  std::string config;
  bool check_mode = false;
  rn->add_option("config", config)->required();
  rn->add_flag("--check", check_mode, "exit 3 when an acceptance threshold is violated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    SolverOptions opts;
    opts.residual_tol = tol;
    if (*rn) return run_experiment(config, check_mode, std::cerr);

    if (*ck) {
      const auto results = acceptance::run(std::cout, only);
      bool ok = true;
      for (const auto& r : results) ok = ok && r.passed;
      return ok ? kExitOk : kExitCheck;
    }

    const PotentialSpec p = PotentialSpec::parse(potential);

    if (*fin) {
      const FiniteSolve fs = solve_finite(p, n, opts);
      write_csv(out, {"i", "x", "eps", "rho"}, configuration_rows(fs.configuration));
      std::printf("iterations %d residual %.3e%s seconds %.3f\n", fs.report.iterations, fs.report.residual_sup,
                  fs.report.roundoff_limited ? " (roundoff floor)" : "", fs.report.seconds);
      return kExitOk;
    }

    if (*bl) {
      const BoundaryLayerSolve b = solve_bl(p, I, J, opts);
      std::vector<std::vector<double>> rows;
      for (int i = 0; i <= J; ++i) {
        rows.push_back({double(i), b.solution.y[static_cast<std::size_t>(i)],
                        i >= 1 && i <= I ? b.solution.eps_l[static_cast<std::size_t>(i - 1)] : 0.0});
      }
      write_csv(out, {"i", "y", "eps_l"}, rows);
      std::printf("iterations %d residual %.3e seconds %.3f\n", b.report.iterations, b.report.residual_sup,
                  b.report.seconds);
      return kExitOk;
    }

    if (*st) {
      StressVector sv;
      if (n_text == "inf") {
        sv = sigma_inf(p, imax);
      } else {
        std::size_t used = 0;
        const int nn = std::stoi(n_text, &used);
        if (used != n_text.size()) throw ParameterError("--n must be an integer or inf");
        sv = sigma_n(p, nn);
      }
      std::vector<std::vector<double>> rows;
      for (int i = 1; i <= imax; ++i) rows.push_back({double(i), sv(i)});
      write_csv(out, {"i", "sigma"}, rows);
      return kExitOk;
    }

    if (*en) {
      const StrainField e = read_strain(strain_path);
      const double direct = renorm_energy(p, e);
      const EnergySplit sp = renorm_energy_split(p, e);
      print15("direct", direct);
      print15("q_part", sp.q_part);
      print15("linear_part", sp.linear_part);
      return kExitOk;
    }

    if (*pr) {
      if (what == "zeta") {
        if (!p.is_power_law()) throw ParameterError("zeta needs a power-law potential");
        print15("zeta", zeta(p.a()));
      } else if (what == "Z") {
        print15("Z", interaction_second_moment(p));
      } else if (what == "bulk") {
        if (!p.is_power_law()) throw ParameterError("the bulk profile needs a power-law potential");
        print15("xi", bulk_profile(BulkProfileParams::make(p.a(), p_k, p_tilde), s, bulk_n));
      } else {
        print15("eps", predicted_strain_tail(p, i_index));
      }
      return kExitOk;
    }

    if (*sw) {
      SweepPlan plan{p, n_values, probes, opts};
      const IncrementalResult res = incremental_error(plan);
      std::vector<std::vector<double>> rows;
      for (const auto& r : res.rows) rows.push_back({double(r.n), double(r.i), r.dn});
      write_csv(out, {"n", "i", "dn"}, rows);
      for (int i : probes) {
        const auto pts = probe_points(res.rows, i);
        if (pts.size() < 3) continue;
        const RateFit a = fit_rate(pts, RateModel::PurePower), b = fit_rate(pts, RateModel::PowerTimesLog);
        std::printf("i=%d PurePower slope %.4f r2 %.4f | PowerTimesLog slope %.4f r2 %.4f\n", i, a.slope, a.r2,
                    b.slope, b.r2);
      }
      return kExitOk;
    }
  } catch (const NonConvergence& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
