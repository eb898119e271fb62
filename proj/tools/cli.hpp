#pragma once

// optdes command-line front end. Subcommands:
//   grid    write the candidate CSV of a polynomial / product model on a grid
//   eval    criterion value, eps, efficiency bounds and equivalence verdict
//   bound   support bound C(xi, p) and the per-point keep mask
//   solve   multiplicative algorithm with periodic candidate deletion
//   bench   relative timings with and without deletion, plus figure data
//
// Exit codes: 0 success, 2 input error, 3 numeric error, 4 non-convergence.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "optdes/optdes.hpp"

namespace optdes::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kInput = 2, kNumeric = 3, kNotConverged = 4 };

struct RunConfig {
  std::string candidates;
  std::string design;
  std::optional<double> example1_tau;
  std::string out_dir;
  std::string output;

  double p = 0.0;
  std::optional<double> a;
  std::optional<double> t_star;
  double eff_tol = 1e-6;
  std::size_t max_iters = 100000;
  std::size_t prune_period = 10;
  std::size_t trace_every = 1;
  unsigned threads = 1;
  double grid_step = 0.1;
  bool full = false;

  std::size_t factors = 2;
  int degree = 2;
  double lo = -1.0;
  double hi = 1.0;

  double tol = 1e-6;
  bool sweep = false;
  std::size_t sweep_points = 33;

  CriterionConfig criterion() const { return CriterionConfig{p, t_star}; }
  SolveConfig solve_config() const {
    SolveConfig s;
    s.p = p;
    s.a = a;
    s.t_star = t_star;
    s.eff_tol = eff_tol;
    s.max_iters = max_iters;
    s.prune_period = prune_period;
    s.trace_every = trace_every;
    s.threads = threads;
    return s;
  }
};

namespace detail {

inline nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

inline std::string dump(const nlohmann::json& j) {
  // nlohmann prints the shortest round-tripping representation of each double.
  return j.dump(2);
}

inline std::filesystem::path out_path(const RunConfig& c, const std::string& name) {
  std::filesystem::path dir = c.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(c.out_dir);
  std::filesystem::create_directories(dir);
  return dir / name;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot open '" + path.string() + "' for writing");
  f << content;
}

// Candidates and design from files, or the three-point quadratic design
// (optionally embedded in an s-grid).
inline std::pair<CandidateSet, DesignMeasure> load_problem(const RunConfig& c) {
  if (c.example1_tau) {
    if (c.grid_step == 1.0) return example1_design(*c.example1_tau);
    return example1_design_on_grid(*c.example1_tau, c.grid_step);
  }
  if (c.candidates.empty() || c.design.empty())
    throw InputError("either --example1-tau or both --candidates and --design are required");
  auto cands = read_candidates_csv(c.candidates);
  auto file = read_design_json(c.design);
  if (file.active.size() != cands.size())
    throw InputError("design has " + std::to_string(file.active.size()) + " entries but the candidate set has " +
                     std::to_string(cands.size()) + " points");
  cands.set_active_mask(file.active);
  validate_design(cands, file.design);
  return {std::move(cands), std::move(file.design)};
}

inline ModelSpec grid_model(const RunConfig& c) {
  return ModelSpec::product(c.factors, c.degree, c.lo, c.hi, c.full ? 0.01 : c.grid_step);
}

inline nlohmann::json bound_json(const BoundReport& r) {
  auto j = to_json(r);
  for (auto& [k, v] : j.items())
    if (v.is_number_float()) v = number(v.get<double>());
  return j;
}

}  // namespace detail

inline int cmd_grid(const RunConfig& c, std::ostream& out) {
  const auto cands = grid_candidates(detail::grid_model(c));
  if (c.output.empty()) {
    write_candidates_csv(out, cands);
  } else {
    std::ofstream f(c.output);
    if (!f) throw InputError("cannot open '" + c.output + "' for writing");
    write_candidates_csv(f, cands);
    out << "wrote " << cands.size() << " candidates (m=" << cands.dim() << ") to " << c.output << "\n";
  }
  return kOk;
}

inline int cmd_eval(const RunConfig& c, std::ostream& out) {
  const auto [cands, xi] = detail::load_problem(c);
  const auto cfg = c.criterion();
  const CriterionState state(info_matrix(cands, xi), cfg);
  const auto e = epsilon(cands, state, c.threads);
  const auto eb = efficiency_bounds(state, e.eps);
  const auto eq = equivalence_check(cands, xi, cfg, c.tol, 1e-8, c.threads);
  double worst = 0.0;
  for (const auto& s : eq.support) worst = std::max(worst, std::abs(s.residual));

  nlohmann::json j{{"m", cands.dim()},
                   {"N", cands.size()},
                   {"n_active", cands.active_count()},
                   {"p", c.p},
                   {"phi", state.phi()},
                   {"t", state.t()},
                   {"eps", e.eps},
                   {"argmax", e.argmax},
                   {"efficiency", {{"lower", eb.lower}, {"upper", eb.upper}}},
                   {"equivalence",
                    {{"optimal", eq.optimal},
                     {"tol", c.tol},
                     {"violations", eq.violating.size()},
                     {"support_points", eq.support.size()},
                     {"max_support_residual", worst}}}};
  out << detail::dump(j) << "\n";
  if (!c.out_dir.empty()) detail::write_file(detail::out_path(c, "eval.json"), detail::dump(j) + "\n");
  return kOk;
}

inline int cmd_bound_sweep(const RunConfig& c, std::ostream& out) {
  const double t_star = c.t_star.value_or(example1_t_star(c.p));
  const double lo = 3.0 / 16.0;
  const double hi = 5.0 / 16.0;
  const std::size_t n = std::max<std::size_t>(2, c.sweep_points);
  std::ostringstream csv;
  csv << "tau,eps,C_unknown,C_known,t\n";
  for (std::size_t j = 0; j < n; ++j) {
    const double tau = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1);
    const auto [cands, xi] =
        c.grid_step == 1.0 ? example1_design(tau) : example1_design_on_grid(tau, c.grid_step);
    const CriterionState state(info_matrix(cands, xi), CriterionConfig{c.p, {}});
    const auto unknown = support_bound(cands, state, CriterionConfig{c.p, {}}, c.threads);
    const auto known = support_bound(cands, state, CriterionConfig{c.p, t_star}, c.threads);
    csv << format_double(tau) << "," << format_double(unknown.eps) << "," << format_double(unknown.C) << ","
        << format_double(known.C) << "," << format_double(state.t()) << "\n";
  }
  if (c.out_dir.empty()) {
    out << csv.str();
  } else {
    const auto path = detail::out_path(c, "bound_sweep.csv");
    detail::write_file(path, csv.str());
    out << "wrote " << n << " sweep points to " << path.string() << "\n";
  }
  return kOk;
}

inline int cmd_bound(const RunConfig& c, std::ostream& out) {
  if (c.sweep) return cmd_bound_sweep(c, out);
  const auto [cands, xi] = detail::load_problem(c);
  const auto cfg = c.criterion();
  const CriterionState state(info_matrix(cands, xi), cfg);
  const auto d = variance_function(cands, state, c.threads);
  auto rep = bound_at(state, epsilon_from_variances(cands, d, state.t()).eps, cfg);
  rep.argmax = epsilon_from_variances(cands, d, state.t()).argmax;
  const auto keep = prune_mask(cands, d, rep);

  std::size_t pruned = 0;
  std::ostringstream csv;
  csv << "index,d,keep\n";
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (cands.active(i) && !keep[i]) ++pruned;
    csv << i << "," << (cands.active(i) ? format_double(d[i]) : std::string()) << "," << (keep[i] ? 1 : 0) << "\n";
  }
  const auto j = detail::bound_json(rep);
  out << detail::dump(j) << "\n";
  out << "pruned " << pruned << " of " << cands.active_count() << " active candidates\n";
  if (!c.out_dir.empty()) {
    detail::write_file(detail::out_path(c, "bound.json"), detail::dump(j) + "\n");
    detail::write_file(detail::out_path(c, "points.csv"), csv.str());
  }
  return kOk;
}

inline int cmd_solve(const RunConfig& c, std::ostream& out) {
  CandidateSet cands = c.candidates.empty() ? grid_candidates(detail::grid_model(c)) : read_candidates_csv(c.candidates);
  std::optional<DesignMeasure> init;
  if (!c.design.empty()) {
    auto file = read_design_json(c.design);
    if (file.active.size() != cands.size()) throw InputError("initial design is not aligned with the candidate set");
    cands.set_active_mask(file.active);
    init = std::move(file.design);
  }
  const auto cfg = c.solve_config();
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = solve(cands, cfg, init);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  {
    std::ostringstream design;
    write_design_json(design, res.design, res.active);
    detail::write_file(detail::out_path(c, "design.json"), design.str());
    std::ostringstream trace;
    write_trace_csv(trace, res.trace);
    detail::write_file(detail::out_path(c, "trace.csv"), trace.str());
    detail::write_file(detail::out_path(c, "bound.json"), detail::dump(detail::bound_json(res.bound)) + "\n");
  }
  const auto eb = efficiency_bounds(CriterionState(info_matrix(cands, res.design), cfg.criterion()),
                                    res.eps);
  nlohmann::json j{{"converged", res.converged},
                   {"iterations", res.iterations},
                   {"m", cands.dim()},
                   {"N0", cands.active_count()},
                   {"N_final", res.trace.rows.back().n_active},
                   {"p", c.p},
                   {"a", cfg.exponent()},
                   {"phi", res.phi},
                   {"eps", res.eps},
                   {"t", res.t},
                   {"efficiency", {{"lower", eb.lower}, {"upper", eb.upper}}},
                   {"support_size", support_of(res.design).size()},
                   {"seconds", seconds}};
  out << detail::dump(j) << "\n";
  return res.converged ? kOk : kNotConverged;
}

inline int cmd_bench(const RunConfig& c, std::ostream& out) {
  const auto spec = detail::grid_model(c);
  const auto cands = grid_candidates(spec);
  out << "grid: " << cands.size() << " candidates, m=" << cands.dim() << ", step "
      << spec.factors.front().step << "\n";

  struct Cell {
    double p;
    std::size_t period;
    std::string status;
    std::size_t iterations = 0;
    double phi = 0.0;
    double gap = 0.0;
    std::size_t n_final = 0;
    double seconds = 0.0;
  };
  std::vector<Cell> cells;
  for (double p : {0.0, 1.0}) {
    for (std::size_t period : {std::size_t{1}, std::size_t{10}, std::size_t{0}}) {
      Cell cell{p, period, "ok"};
      try {
        auto cfg = c.solve_config();
        cfg.p = p;
        cfg.a.reset();
        cfg.t_star.reset();
        cfg.prune_period = period;
        cfg.trace_every = cfg.max_iters + 1;
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = solve(cands, cfg);
        cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        cell.iterations = res.iterations;
        cell.phi = res.phi;
        cell.gap = res.eps / res.t;
        cell.n_final = res.trace.rows.back().n_active;
        if (!res.converged) cell.status = "max-iters";
      } catch (const std::exception& e) {
        cell.status = std::string("failed: ") + e.what();
      }
      cells.push_back(cell);
    }
  }
  const double base = cells.front().seconds > 0.0 ? cells.front().seconds : 1.0;
  std::ostringstream table;
  table << "p,prune_period,iterations,phi,eps_over_t,N_final,seconds,time_ratio,status\n";
  for (const auto& cell : cells) {
    table << cell.p << "," << cell.period << "," << cell.iterations << "," << format_double(cell.phi) << ","
          << format_double(cell.gap) << "," << cell.n_final << "," << format_double(cell.seconds) << ","
          << format_double(cell.seconds / base) << "," << cell.status << "\n";
  }
  out << table.str();

  // tau*(p) and tau(p, eps) for the quadratic model, and the bound at xi_{tau(p, eps)}.
  std::ostringstream left;
  std::ostringstream right;
  left << "p,tau_star,tau_eps_0.1,tau_eps_0.5\n";
  right << "p,eps,C_unknown,C_known\n";
  constexpr int kSteps = 30;
  for (int j = 0; j <= kSteps; ++j) {
    const double p = -0.5 + 1.5 * j / kSteps;
    const double tau_star = example1_tau_star(p);
    const double t_star = example1_t_star(p);
    left << format_double(p) << "," << format_double(tau_star);
    for (double eps : {0.1, 0.5}) {
      try {
        const double tau = example1_tau_for_epsilon(p, eps);
        left << "," << format_double(tau);
        const CriterionState state(example1_info(tau), CriterionConfig{p, {}});
        const double e = example1_epsilon(tau, p);
        const auto unknown = bound_at(state, e, CriterionConfig{p, {}});
        const auto known = bound_at(state, e, CriterionConfig{p, t_star});
        right << format_double(p) << "," << format_double(eps) << "," << format_double(unknown.C) << ","
              << format_double(known.C) << "\n";
      } catch (const Error& e) {
        left << ",";
        out << "p=" << p << " eps=" << eps << ": " << e.what() << "\n";
      }
    }
    left << "\n";
  }
  out << "tau*(-1/2)=" << format_double(example1_tau_star(-0.5)) << " tau*(0)=" << format_double(example1_tau_star(0.0))
      << " tau*(1)=" << format_double(example1_tau_star(1.0)) << "\n";
  if (!c.out_dir.empty()) {
    detail::write_file(detail::out_path(c, "bench.csv"), table.str());
    detail::write_file(detail::out_path(c, "tau_star.csv"), left.str());
    detail::write_file(detail::out_path(c, "bound_vs_p.csv"), right.str());
    out << "wrote bench.csv, tau_star.csv, bound_vs_p.csv to " << c.out_dir << "\n";
  }
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"phi_p-optimal experimental design with support delimitation", "optdes"};
  app.require_subcommand(1);
  RunConfig c;

  auto criterion_flags = [&](CLI::App* s) {
    s->add_option("--p", c.p, "criterion exponent p > -1 (0: D-optimal, 1: A-optimal)");
    s->add_option("--t-star", c.t_star, "known tr(M_*^{-p}) at the optimum");
    s->add_option("--threads", c.threads, "threads for candidate scans")->check(CLI::PositiveNumber);
  };
  auto problem_flags = [&](CLI::App* s) {
    s->add_option("--candidates", c.candidates, "candidate CSV")->check(CLI::ExistingFile);
    s->add_option("--design", c.design, "design JSON")->check(CLI::ExistingFile);
    s->add_option("--example1-tau", c.example1_tau, "three-point design on {-1,0,1} for x(s)=(1,s,s^2)");
    s->add_option("--grid-step", c.grid_step, "s-grid step for --example1-tau (1 = the three points only)");
    s->add_option("--out-dir", c.out_dir, "directory for output files");
  };
  auto grid_flags = [&](CLI::App* s) {
    s->add_option("--factors", c.factors, "number of model factors")->check(CLI::PositiveNumber);
    s->add_option("--degree", c.degree, "polynomial degree per factor")->check(CLI::NonNegativeNumber);
    s->add_option("--lo", c.lo, "lower end of each factor range");
    s->add_option("--hi", c.hi, "upper end of each factor range");
    s->add_option("--grid-step", c.grid_step, "grid step per factor");
    s->add_flag("--full", c.full, "use the 0.01 grid");
  };
  auto solve_flags = [&](CLI::App* s) {
    s->add_option("--a", c.a, "multiplicative exponent (default 1/(p+1))");
    s->add_option("--eff-tol", c.eff_tol, "stop when eps/t <= eff-tol");
    s->add_option("--max-iters", c.max_iters, "iteration limit")->check(CLI::PositiveNumber);
    s->add_option("--prune-period", c.prune_period, "apply the support bound every n iterations (0: never)");
    s->add_option("--trace-every", c.trace_every, "trace row period")->check(CLI::PositiveNumber);
    s->add_option("--out-dir", c.out_dir, "directory for output files");
  };

  auto* grid = app.add_subcommand("grid", "write a candidate CSV for a polynomial or product model");
  grid_flags(grid);
  grid->add_option("--output,-o", c.output, "output CSV (default: stdout)");

  auto* eval = app.add_subcommand("eval", "evaluate a design");
  criterion_flags(eval);
  problem_flags(eval);
  eval->add_option("--tol", c.tol, "relative tolerance of the equivalence check");

  auto* bound = app.add_subcommand("bound", "support bound and keep mask for a design");
  criterion_flags(bound);
  problem_flags(bound);
  bound->add_flag("--sweep", c.sweep, "sweep C(xi_tau, p) over tau in [3/16, 5/16] for both t_* regimes");
  bound->add_option("--sweep-points", c.sweep_points, "number of tau values in the sweep");

  auto* solve_cmd = app.add_subcommand("solve", "compute an optimal design");
  criterion_flags(solve_cmd);
  grid_flags(solve_cmd);
  solve_flags(solve_cmd);
  solve_cmd->add_option("--candidates", c.candidates, "candidate CSV (default: generated grid)")
      ->check(CLI::ExistingFile);
  solve_cmd->add_option("--design", c.design, "initial design JSON (default: uniform)")->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("bench", "timings with and without candidate deletion, plus figure data");
  bench->add_option("--threads", c.threads, "threads for candidate scans")->check(CLI::PositiveNumber);
  grid_flags(bench);
  solve_flags(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (c.p <= -1.0) throw InputError("--p must be > -1");
    if (*grid) return cmd_grid(c, out);
    if (*eval) return cmd_eval(c, out);
    if (*bound) return cmd_bound(c, out);
    if (*solve_cmd) return cmd_solve(c, out);
    if (*bench) return cmd_bench(c, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const SingularityError& e) {
    err << "singular design: " << e.what() << "\n";
    return kInput;
  } catch (const NumericalError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}

}  // namespace optdes::cli
