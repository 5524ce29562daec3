#pragma once

#include <Eigen/Dense>
#include <vector>

#include "radauhp/mesh.hpp"
#include "radauhp/problem.hpp"
#include "radauhp/transcription.hpp"

namespace radauhp {

/// Per-interval discretization error estimate.  For interval k the matrices
/// have M_k = P_k + 1 rows (one per comparison point, the last being the
/// interval's right endpoint) and n_y columns.
struct ErrorReport {
  std::vector<double> e_max;             // max relative error per interval
  std::vector<Eigen::MatrixXd> abs_error;
  std::vector<Eigen::MatrixXd> rel_error;
};

/// Compares each interval's state interpolant against an LGR quadrature of
/// the dynamics on a rule one degree higher.  The state and control
/// interpolants are evaluated at the finer rule's points, the dynamics are
/// integrated with the finer rule's integration matrix from the interval's
/// left endpoint, and the discrepancy is scaled by one plus the largest
/// state magnitude over the whole mesh, per component.
ErrorReport estimate_errors(const OcpProblem& problem, const Mesh& mesh,
                            const CollocationSolution& solution);

}  // namespace radauhp
