#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <vector>

namespace radauhp {

/// Column-oriented sparsity pattern: cols[j] lists the rows with a
/// structural nonzero in column j, sorted ascending.
struct SparsityPattern {
  int rows = 0;
  std::vector<std::vector<int>> cols;

  bool empty() const { return cols.empty(); }
  int num_cols() const { return static_cast<int>(cols.size()); }
  int nnz() const;
};

/// Finite-dimensional nonlinear program
///   minimize    objective(z)
///   subject to  c_lower <= constraints(z) <= c_upper
///               z_lower <= z <= z_upper.
/// Constraint rows with c_lower == c_upper are equalities; otherwise exactly
/// one of the two bounds must be finite.  The Jacobian pattern is required;
/// the Hessian pattern (of the Lagrangian) is optional and treated as dense
/// when empty.
struct NlpProblem {
  int num_vars = 0;
  int num_constraints = 0;
  std::function<double(const Eigen::VectorXd&)> objective;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> constraints;
  Eigen::VectorXd c_lower, c_upper;
  Eigen::VectorXd z_lower, z_upper;
  SparsityPattern jacobian;
  SparsityPattern hessian;
};

struct SolverOptions {
  double kkt_tolerance = 1e-9;
  int max_iterations = 500;
  double fd_step_scale = 6.0554544523933429e-6;  // cbrt(machine epsilon)
  double constraint_tolerance = 1e-8;
  double mu_init = 1e-1;
  bool verbose = false;  // per-iteration progress on stderr
};

enum class SolveStatus { optimal, acceptable, max_iter, infeasible, error };

struct SolveOutcome {
  SolveStatus status = SolveStatus::error;
  Eigen::VectorXd z;
  Eigen::VectorXd multipliers;  // one per constraint row
  double kkt_residual = 0.0;
  int iterations = 0;
  std::string message;
};

std::string to_string(SolveStatus status);

/// Solver contract.  The bundled interior-point solver is the default
/// implementation; external solver adapters can substitute it.
class NlpSolver {
 public:
  virtual ~NlpSolver() = default;
  virtual SolveOutcome solve(const NlpProblem& nlp, const Eigen::VectorXd& z0,
                             const SolverOptions& options) const = 0;
};

/// Primal-dual interior-point solver with slack-based inequalities,
/// log barrier with monotone mu reduction, sparse LU Newton steps, a
/// fraction-to-boundary rule and an l1 merit line search.  All derivatives
/// come from sparse central finite differences.
class InteriorPointSolver final : public NlpSolver {
 public:
  SolveOutcome solve(const NlpProblem& nlp, const Eigen::VectorXd& z0,
                     const SolverOptions& options) const override;
};

/// Solves with the bundled interior-point solver.
SolveOutcome solve(const NlpProblem& nlp, const Eigen::VectorXd& z0,
                   const SolverOptions& options = {});

/// Central-difference constraint Jacobian with step h_i =
/// step_scale * max(1, |z_i|).  Structurally independent columns (no shared
/// constraint row) are perturbed together in groups.
Eigen::SparseMatrix<double> fd_jacobian(
    const NlpProblem& nlp, const Eigen::VectorXd& z,
    double step_scale = SolverOptions{}.fd_step_scale);

/// Central-difference objective gradient, h_i = step_scale * max(1, |z_i|).
Eigen::VectorXd fd_gradient(const NlpProblem& nlp, const Eigen::VectorXd& z,
                            double step_scale = SolverOptions{}.fd_step_scale);

/// Greedy structurally-orthogonal column grouping: columns sharing a row
/// never share a group.  Returns the group index of every column.
std::vector<int> color_columns(const SparsityPattern& pattern);

}  // namespace radauhp
