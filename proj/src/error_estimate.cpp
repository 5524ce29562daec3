#include "radauhp/error_estimate.hpp"

#include <cmath>
#include <span>
#include <stdexcept>

#include "radauhp/basis.hpp"

namespace radauhp {

ErrorReport estimate_errors(const OcpProblem& problem, const Mesh& mesh,
                            const CollocationSolution& solution) {
  const int n_k = mesh.num_intervals();
  if (static_cast<int>(solution.intervals.size()) != n_k) {
    throw std::invalid_argument("estimate_errors: solution/mesh interval mismatch");
  }
  const int n_y = problem.n_y;
  const double half_span = 0.5 * (solution.tf - solution.t0);

  // Global per-component state magnitude over all stored support values.
  Eigen::VectorXd y_scale = Eigen::VectorXd::Ones(n_y);
  for (const auto& sol : solution.intervals) {
    for (int i = 0; i < n_y; ++i) {
      y_scale[i] = std::max(y_scale[i], 1.0 + sol.states.col(i).cwiseAbs().maxCoeff());
    }
  }

  ErrorReport report;
  report.e_max.resize(n_k);
  report.abs_error.resize(n_k);
  report.rel_error.resize(n_k);

  for (int k = 0; k < n_k; ++k) {
    const IntervalSolution& sol = solution.intervals[k];
    const int p = mesh.degrees[k];
    const int m = p + 1;
    const LgrRule fine_rule = lgr_rule(m);
    const IntervalGrid fine = interval_grid(fine_rule, mesh.left(k), mesh.right(k));
    const Eigen::VectorXd fine_support = fine.support();

    std::span<const double> coarse_support(sol.tau_support.data(),
                                           sol.tau_support.size());
    std::span<const double> coarse_colloc(sol.tau_support.data(), p);

    // Interpolated states at all fine support points, controls at the fine
    // collocation points (controls are only defined at collocation points).
    Eigen::MatrixXd y_fine(m + 1, n_y);
    for (int i = 0; i < n_y; ++i) {
      const Eigen::VectorXd vals = sol.states.col(i);
      y_fine.col(i) = lagrange_eval(
          coarse_support, std::span<const double>(vals.data(), vals.size()),
          std::span<const double>(fine_support.data(), fine_support.size()));
    }
    Eigen::MatrixXd u_fine(m, problem.n_u);
    for (int i = 0; i < problem.n_u; ++i) {
      const Eigen::VectorXd vals = sol.controls.col(i);
      u_fine.col(i) = lagrange_eval(
          coarse_colloc, std::span<const double>(vals.data(), vals.size()),
          std::span<const double>(fine.colloc.data(), fine.colloc.size()));
    }

    Eigen::MatrixXd dyn(m, n_y);
    for (int j = 0; j < m; ++j) {
      const double t = tau_to_t(fine.colloc[j], solution.t0, solution.tf);
      dyn.row(j) = problem.dynamics(y_fine.row(j), u_fine.row(j), t).transpose();
    }

    const Eigen::MatrixXd integ = integ_matrix(fine_rule, fine);
    // Quadrature reconstruction from the left endpoint vs the interpolant
    // at fine support points 1..m.
    Eigen::MatrixXd y_hat =
        y_fine.row(0).replicate(m, 1) + half_span * (integ * dyn);

    Eigen::MatrixXd abs_err = (y_hat - y_fine.bottomRows(m)).cwiseAbs();
    Eigen::MatrixXd rel_err = abs_err * y_scale.cwiseInverse().asDiagonal();
    report.e_max[k] = rel_err.maxCoeff();
    report.abs_error[k] = std::move(abs_err);
    report.rel_error[k] = std::move(rel_err);
  }
  return report;
}

}  // namespace radauhp
