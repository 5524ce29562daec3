#include "radauhp/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <span>
#include <stdexcept>

#include "radauhp/basis.hpp"

namespace radauhp {

namespace {

double bound_midpoint(double lo, double up) {
  const bool fl = std::isfinite(lo), fu = std::isfinite(up);
  if (fl && fu) return 0.5 * (lo + up);
  if (fl) return lo;
  if (fu) return up;
  return 0.0;
}

double clip(double v, double lo, double up) {
  return std::min(std::max(v, lo), up);
}

Eigen::VectorXd endpoint_guess(const Eigen::VectorXd& given,
                               const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& up) {
  if (given.size() == lo.size()) return given;
  Eigen::VectorXd g(lo.size());
  for (int i = 0; i < lo.size(); ++i) g[i] = bound_midpoint(lo[i], up[i]);
  return g;
}

}  // namespace

Eigen::VectorXd initial_guess(const OcpProblem& problem, const Mesh& mesh,
                              const DecisionLayout& layout) {
  Eigen::VectorXd z(layout.num_vars);
  const Eigen::VectorXd y0 =
      endpoint_guess(problem.y0_guess, problem.y_lower, problem.y_upper);
  const Eigen::VectorXd yf =
      endpoint_guess(problem.yf_guess, problem.y_lower, problem.y_upper);
  Eigen::VectorXd u_mid(problem.n_u);
  for (int i = 0; i < problem.n_u; ++i) {
    u_mid[i] = bound_midpoint(problem.u_lower[i], problem.u_upper[i]);
  }

  for (int k = 0; k < mesh.num_intervals(); ++k) {
    const int p = mesh.degrees[k];
    const IntervalGrid grid =
        interval_grid(lgr_rule(p), mesh.left(k), mesh.right(k));
    const Eigen::VectorXd support = grid.support();
    const int j0 = k == 0 ? 0 : 1;
    for (int j = j0; j <= p; ++j) {
      const double frac = 0.5 * (support[j] + 1.0);
      for (int i = 0; i < problem.n_y; ++i) {
        const double v = y0[i] + frac * (yf[i] - y0[i]);
        z[layout.state_index(k, j, i)] =
            clip(v, problem.y_lower[i], problem.y_upper[i]);
      }
    }
    for (int j = 0; j < p; ++j) {
      for (int i = 0; i < problem.n_u; ++i) {
        z[layout.control_index(k, j, i)] = u_mid[i];
      }
    }
  }
  z[layout.t0_index] = bound_midpoint(problem.t0_lower, problem.t0_upper);
  z[layout.tf_index] = bound_midpoint(problem.tf_lower, problem.tf_upper);
  return z;
}

Eigen::VectorXd warm_start(const OcpProblem& problem,
                           const CollocationSolution& prev, const Mesh& mesh,
                           const DecisionLayout& layout) {
  if (prev.intervals.empty()) {
    throw std::invalid_argument("warm_start: empty previous solution");
  }
  // Interval lookup on the previous mesh's support spans.
  std::vector<double> prev_left(prev.intervals.size());
  for (size_t q = 0; q < prev.intervals.size(); ++q) {
    prev_left[q] = prev.intervals[q].tau_support[0];
  }
  auto locate = [&prev, &prev_left](double tau) {
    const auto it =
        std::upper_bound(prev_left.begin(), prev_left.end(), tau);
    int q = static_cast<int>(it - prev_left.begin()) - 1;
    q = std::clamp(q, 0, static_cast<int>(prev.intervals.size()) - 1);
    return q;
  };
  auto eval_state = [&](double tau, int i) {
    const IntervalSolution& sol = prev.intervals[locate(tau)];
    const Eigen::VectorXd vals = sol.states.col(i);
    return lagrange_eval_one(
        std::span<const double>(sol.tau_support.data(), sol.tau_support.size()),
        std::span<const double>(vals.data(), vals.size()), tau);
  };
  auto eval_control = [&](double tau, int i) {
    const IntervalSolution& sol = prev.intervals[locate(tau)];
    const Eigen::VectorXd vals = sol.controls.col(i);
    return lagrange_eval_one(
        std::span<const double>(sol.tau_support.data(), vals.size()),
        std::span<const double>(vals.data(), vals.size()), tau);
  };

  Eigen::VectorXd z(layout.num_vars);
  for (int k = 0; k < mesh.num_intervals(); ++k) {
    const int p = mesh.degrees[k];
    const IntervalGrid grid =
        interval_grid(lgr_rule(p), mesh.left(k), mesh.right(k));
    const Eigen::VectorXd support = grid.support();
    const int j0 = k == 0 ? 0 : 1;
    for (int j = j0; j <= p; ++j) {
      for (int i = 0; i < problem.n_y; ++i) {
        z[layout.state_index(k, j, i)] = clip(
            eval_state(support[j], i), problem.y_lower[i], problem.y_upper[i]);
      }
    }
    for (int j = 0; j < p; ++j) {
      for (int i = 0; i < problem.n_u; ++i) {
        z[layout.control_index(k, j, i)] =
            clip(eval_control(grid.colloc[j], i), problem.u_lower[i],
                 problem.u_upper[i]);
      }
    }
  }
  z[layout.t0_index] = clip(prev.t0, problem.t0_lower, problem.t0_upper);
  z[layout.tf_index] = clip(prev.tf, problem.tf_lower, problem.tf_upper);
  return z;
}

RunHistory run(const OcpProblem& problem, const RunConfig& config) {
  if (!(config.epsilon > 0.0) || config.initial_intervals < 1 ||
      config.initial_degree < 1) {
    throw std::invalid_argument("run: invalid configuration");
  }
  RunHistory history;
  Mesh mesh = uniform_mesh(config.initial_intervals, config.initial_degree);
  CollocationSolution prev;
  bool have_prev = false;
  InteriorPointSolver solver;

  for (int m = 0; ; ++m) {
    const auto tic = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.iteration = m;
    rec.mesh = mesh;

    const Transcription tr = transcribe(problem, mesh);
    const Eigen::VectorXd z0 = have_prev
                                   ? warm_start(problem, prev, mesh, tr.layout)
                                   : initial_guess(problem, mesh, tr.layout);
    rec.outcome = solver.solve(tr.nlp, z0, config.solver);

    const bool usable = rec.outcome.status == SolveStatus::optimal ||
                        rec.outcome.status == SolveStatus::acceptable;
    CollocationSolution sol;
    if (usable) {
      sol = unpack(rec.outcome.z, tr.layout, mesh);
      sol.cost = tr.nlp.objective(rec.outcome.z);
      rec.cost = sol.cost;
      const ErrorReport err = estimate_errors(problem, mesh, sol);
      rec.e_max = err.e_max;

      const bool all_pass =
          *std::max_element(err.e_max.begin(), err.e_max.end()) <= config.epsilon;
      if (!all_pass && m < config.max_refinements) {
        if (!config.no_jump_detection) {
          rec.detections =
              detect_jumps(mesh, sol, err, config.epsilon, config.jump);
        }
        RefineResult rr =
            refine_mesh(mesh, rec.detections, err, config.epsilon);
        rec.refinement = std::move(rr.log);
        mesh = std::move(rr.mesh);
      }
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - tic)
              .count();
      history.final_mesh = rec.mesh;
      history.solution = sol;
      prev = std::move(sol);
      have_prev = true;
      const bool done = all_pass || m >= config.max_refinements;
      history.converged = all_pass;
      history.iterations.push_back(std::move(rec));
      if (done) break;
    } else {
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - tic)
              .count();
      history.converged = false;
      history.final_mesh = rec.mesh;
      history.iterations.push_back(std::move(rec));
      break;
    }
  }
  return history;
}

}  // namespace radauhp
