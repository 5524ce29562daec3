#include "radauhp/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "radauhp/driver.hpp"
#include "radauhp/io.hpp"
#include "radauhp/problem.hpp"

namespace radauhp {

namespace {

std::vector<int> parse_orders(const std::string& text) {
  std::vector<int> orders;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int a = std::stoi(text.substr(0, dots));
    const int b = std::stoi(text.substr(dots + 2));
    for (int m = a; m <= b; ++m) orders.push_back(m);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) orders.push_back(std::stoi(item));
  }
  if (orders.empty()) throw std::invalid_argument("empty order list: " + text);
  return orders;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
  if (values.empty()) throw std::invalid_argument("empty list: " + text);
  return values;
}

struct RunFlags {
  std::string problem = "min-time-di";
  double tol = 1e-6;
  double mu = 1.0;
  double eta = 0.1;
  std::string orders = "1..6";
  int max_iters = 20;
  int initial_intervals = 10;
  int initial_degree = 4;
  bool no_jump_detection = false;
  std::string out, history, plot_data;
  unsigned seed = 0;
  int repeats = 1;
};

void add_run_flags(CLI::App* cmd, RunFlags* f, bool single_run) {
  cmd->add_option("--problem", f->problem, "problem name")
      ->envname("RADAUHP_PROBLEM");
  if (single_run) {
    cmd->add_option("--tol", f->tol, "error tolerance")->envname("RADAUHP_TOL");
    cmd->add_option("--mu", f->mu, "bracket safety factor")->envname("RADAUHP_MU");
  }
  cmd->add_option("--eta", f->eta, "detection threshold")->envname("RADAUHP_ETA");
  cmd->add_option("--orders", f->orders, "jump approximation orders, a..b or list")
      ->envname("RADAUHP_ORDERS");
  cmd->add_option("--max-iters", f->max_iters, "refinement iteration budget")
      ->envname("RADAUHP_MAX_ITERS");
  cmd->add_option("--initial-intervals", f->initial_intervals, "initial mesh size")
      ->envname("RADAUHP_INITIAL_INTERVALS");
  cmd->add_option("--initial-degree", f->initial_degree,
                  "initial collocation points per interval")
      ->envname("RADAUHP_INITIAL_DEGREE");
  cmd->add_flag("--no-jump-detection", f->no_jump_detection,
                "disable discontinuity detection (pure smooth refinement)")
      ->envname("RADAUHP_NO_JUMP_DETECTION");
  cmd->add_option("--out", f->out,
                  single_run ? "solution record path" : "record output directory")
      ->envname("RADAUHP_OUT");
  cmd->add_option("--history", f->history, "mesh history CSV path")
      ->envname("RADAUHP_HISTORY");
  cmd->add_option("--plot-data", f->plot_data, "plot series directory")
      ->envname("RADAUHP_PLOT_DATA");
  cmd->add_option("--seed", f->seed, "seed echoed into the record")
      ->envname("RADAUHP_SEED");
  cmd->add_option("--repeats", f->repeats, "timing repetitions (median reported)")
      ->envname("RADAUHP_REPEATS");
}

RunConfig make_config(const RunFlags& f, double tol, double mu) {
  RunConfig cfg;
  cfg.epsilon = tol;
  cfg.max_refinements = f.max_iters;
  cfg.initial_intervals = f.initial_intervals;
  cfg.initial_degree = f.initial_degree;
  cfg.jump.safety = mu;
  cfg.jump.threshold = f.eta;
  cfg.jump.orders = parse_orders(f.orders);
  cfg.no_jump_detection = f.no_jump_detection;
  return cfg;
}

double total_wall(const RunHistory& history) {
  double t = 0.0;
  for (const IterationRecord& rec : history.iterations) t += rec.wall_seconds;
  return t;
}

struct CellResult {
  RunRecord record;
  double median_wall = 0.0;
};

CellResult run_cell(const RunFlags& f, double tol, double mu) {
  const OcpProblem problem = make_problem(f.problem);
  const RunConfig cfg = make_config(f, tol, mu);
  CellResult cell;
  std::vector<double> walls;
  const int repeats = std::max(1, f.repeats);
  for (int r = 0; r < repeats; ++r) {
    RunHistory history = run(problem, cfg);
    walls.push_back(total_wall(history));
    if (r == 0) cell.record = {f.problem, cfg, f.seed, std::move(history)};
  }
  std::sort(walls.begin(), walls.end());
  cell.median_wall = walls[walls.size() / 2];
  return cell;
}

int nonsmooth_count(const Mesh& mesh) {
  int n = 0;
  for (const Segment& s : mesh.segments) n += s.kind == SegmentKind::nonsmooth;
  return n;
}

int max_degree_used(const Mesh& mesh) {
  return *std::max_element(mesh.degrees.begin(), mesh.degrees.end());
}

void write_outputs(const CellResult& cell, const std::string& out,
                   const std::string& history, const std::string& plot_data) {
  if (!out.empty()) write_record(cell.record, out);
  if (!history.empty()) write_history_csv(cell.record.history, history);
  if (!plot_data.empty()) write_plot_data(cell.record.history, plot_data);
}

int do_solve(const RunFlags& f) {
  const CellResult cell = run_cell(f, f.tol, f.mu);
  write_outputs(cell, f.out, f.history, f.plot_data);
  const RunHistory& h = cell.record.history;
  std::printf(
      "%s: %s after %zu iterations, cost=%.12g, intervals=%d, "
      "nonsmooth_segments=%d, wall=%.3fs\n",
      f.problem.c_str(), h.converged ? "converged" : "did not converge",
      h.iterations.size(), h.solution.cost, h.final_mesh.num_intervals(),
      nonsmooth_count(h.final_mesh), cell.median_wall);
  return h.converged ? 0 : 2;
}

int do_sweep(const RunFlags& f, const std::string& tols_text,
             const std::string& mus_text) {
  const std::vector<double> tols = parse_list(tols_text);
  const std::vector<double> mus = parse_list(mus_text);
  if (!f.out.empty()) std::filesystem::create_directories(f.out);

  std::printf("%-14s %-10s %-6s %-6s %-6s %-7s %-7s %-10s\n", "problem", "tol",
              "mu", "conv", "iters", "final_K", "max_P", "wall_s");
  bool all_converged = true;
  for (double tol : tols) {
    for (double mu : mus) {
      const CellResult cell = run_cell(f, tol, mu);
      const RunHistory& h = cell.record.history;
      all_converged = all_converged && h.converged;
      if (!f.out.empty()) {
        char name[160];
        std::snprintf(name, sizeof name, "%s/%s_tol%.1e_mu%g.json",
                      f.out.c_str(), f.problem.c_str(), tol, mu);
        write_record(cell.record, name);
      }
      std::printf("%-14s %-10.2e %-6g %-6s %-6zu %-7d %-7d %-10.3f\n",
                  f.problem.c_str(), tol, mu, h.converged ? "yes" : "no",
                  h.iterations.size(), h.final_mesh.num_intervals(),
                  max_degree_used(h.final_mesh), cell.median_wall);
    }
  }
  return all_converged ? 0 : 2;
}

}  // namespace

int cli_run(std::vector<std::string> args) {
  CLI::App app{"hp-adaptive LGR collocation with control-jump bracketing"};
  app.require_subcommand(1);

  RunFlags solve_flags;
  CLI::App* solve_cmd = app.add_subcommand("solve", "run one configuration");
  add_run_flags(solve_cmd, &solve_flags, true);

  RunFlags sweep_flags;
  std::string tols = "1e-6", mus = "1";
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "run a tolerance x safety-factor matrix");
  add_run_flags(sweep_cmd, &sweep_flags, false);
  sweep_cmd->add_option("--tols", tols, "comma-separated tolerances")
      ->envname("RADAUHP_TOLS");
  sweep_cmd->add_option("--mus", mus, "comma-separated safety factors")
      ->envname("RADAUHP_MUS");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (solve_cmd->parsed()) return do_solve(solve_flags);
    return do_sweep(sweep_flags, tols, mus);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace radauhp
