#pragma once

#include <Eigen/Dense>
#include <vector>

#include "radauhp/mesh.hpp"
#include "radauhp/nlp.hpp"
#include "radauhp/problem.hpp"

namespace radauhp {

/// Per-interval collocation solution values.
struct IntervalSolution {
  Eigen::VectorXd tau_support;  // P+1 points, last is the interval boundary
  Eigen::MatrixXd states;       // (P+1) x n_y
  Eigen::MatrixXd controls;     // P x n_u
};

struct CollocationSolution {
  std::vector<IntervalSolution> intervals;
  double t0 = 0.0;
  double tf = 0.0;
  double cost = 0.0;
};

/// Index map of the NLP decision vector.  Ordering is interval-major with
/// the state block before the control block in each interval and the two
/// time variables last.  Interval boundary states are shared: interval k's
/// endpoint state variable is interval k+1's first state variable, stored
/// once in interval k's block.
struct DecisionLayout {
  int n_y = 0;
  int n_u = 0;
  int num_vars = 0;
  int t0_index = 0;
  int tf_index = 0;
  std::vector<int> degrees;
  std::vector<int> state_offset;    // start of interval k's own state nodes
  std::vector<int> control_offset;  // start of interval k's control nodes

  /// Variable index of state component i at support node j (0..P_k) of
  /// interval k.  Node 0 of interval k > 0 resolves to the previous
  /// interval's endpoint node.
  int state_index(int k, int j, int i) const;
  int control_index(int k, int j, int i) const;
  int num_intervals() const { return static_cast<int>(degrees.size()); }
};

struct Transcription {
  NlpProblem nlp;
  DecisionLayout layout;
};

/// Assembles the multiple-interval LGR collocation NLP: defect equalities
/// at the collocation points, LGR-quadrature cost, path constraints at
/// collocation points, boundary constraint on the first and last support
/// points.  Constraint rows are ordered defects, then path, then boundary.
Transcription transcribe(const OcpProblem& problem, const Mesh& mesh);

DecisionLayout make_layout(const OcpProblem& problem, const Mesh& mesh);

/// Constraint Jacobian pattern of the transcribed NLP.
SparsityPattern jacobian_sparsity(const DecisionLayout& layout, const Mesh& mesh,
                                  const OcpProblem& problem);

/// Lagrangian Hessian pattern: one dense block per collocation point over
/// its state/control values plus the times, and one endpoint block.
SparsityPattern hessian_sparsity(const DecisionLayout& layout, const Mesh& mesh,
                                 const OcpProblem& problem);

CollocationSolution unpack(const Eigen::VectorXd& z, const DecisionLayout& layout,
                           const Mesh& mesh);
Eigen::VectorXd pack(const CollocationSolution& solution,
                     const DecisionLayout& layout);

}  // namespace radauhp
