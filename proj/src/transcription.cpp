#include "radauhp/transcription.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <stdexcept>

#include "radauhp/basis.hpp"

namespace radauhp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct IntervalWork {
  IntervalGrid grid;
  Eigen::MatrixXd diff;        // P x (P+1)
  Eigen::VectorXd quad_weights;  // P, scaled to the interval width in tau
};

struct Workspace {
  OcpProblem problem;
  DecisionLayout layout;
  std::vector<IntervalWork> intervals;
  int defect_rows = 0;
  int path_rows = 0;
};

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

Eigen::VectorXd state_at(const Workspace& ws, const Eigen::VectorXd& z, int k,
                         int j) {
  Eigen::VectorXd y(ws.layout.n_y);
  for (int i = 0; i < ws.layout.n_y; ++i) y[i] = z[ws.layout.state_index(k, j, i)];
  return y;
}

Eigen::VectorXd control_at(const Workspace& ws, const Eigen::VectorXd& z, int k,
                           int j) {
  Eigen::VectorXd u(ws.layout.n_u);
  for (int i = 0; i < ws.layout.n_u; ++i)
    u[i] = z[ws.layout.control_index(k, j, i)];
  return u;
}

}  // namespace

int DecisionLayout::state_index(int k, int j, int i) const {
  if (k > 0 && j == 0) return state_index(k - 1, degrees[k - 1], i);
  const int skip = (k == 0) ? 0 : 1;  // node 0 lives in the previous block
  return state_offset[k] + (j - skip) * n_y + i;
}

int DecisionLayout::control_index(int k, int j, int i) const {
  return control_offset[k] + j * n_u + i;
}

DecisionLayout make_layout(const OcpProblem& problem, const Mesh& mesh) {
  DecisionLayout layout;
  layout.n_y = problem.n_y;
  layout.n_u = problem.n_u;
  layout.degrees = mesh.degrees;
  const int k_total = mesh.num_intervals();
  layout.state_offset.resize(k_total);
  layout.control_offset.resize(k_total);
  int offset = 0;
  for (int k = 0; k < k_total; ++k) {
    const int own_nodes = mesh.degrees[k] + (k == 0 ? 1 : 0);
    layout.state_offset[k] = offset;
    offset += own_nodes * problem.n_y;
    layout.control_offset[k] = offset;
    offset += mesh.degrees[k] * problem.n_u;
  }
  layout.t0_index = offset;
  layout.tf_index = offset + 1;
  layout.num_vars = offset + 2;
  return layout;
}

SparsityPattern jacobian_sparsity(const DecisionLayout& layout, const Mesh& mesh,
                                  const OcpProblem& problem) {
  const int p_total = mesh.total_colloc_points();
  SparsityPattern pat;
  pat.rows = problem.n_y * p_total + problem.n_c * p_total + problem.n_b;
  pat.cols.resize(layout.num_vars);

  int row = 0;
  for (int k = 0; k < mesh.num_intervals(); ++k) {
    const int p = mesh.degrees[k];
    for (int i = 0; i < p; ++i) {
      for (int r = 0; r < problem.n_y; ++r, ++row) {
        for (int j = 0; j <= p; ++j) pat.cols[layout.state_index(k, j, r)].push_back(row);
        for (int c = 0; c < problem.n_y; ++c) pat.cols[layout.state_index(k, i, c)].push_back(row);
        for (int c = 0; c < problem.n_u; ++c) pat.cols[layout.control_index(k, i, c)].push_back(row);
        pat.cols[layout.t0_index].push_back(row);
        pat.cols[layout.tf_index].push_back(row);
      }
    }
  }
  for (int k = 0; k < mesh.num_intervals(); ++k) {
    const int p = mesh.degrees[k];
    for (int i = 0; i < p; ++i) {
      for (int r = 0; r < problem.n_c; ++r, ++row) {
        for (int c = 0; c < problem.n_y; ++c) pat.cols[layout.state_index(k, i, c)].push_back(row);
        for (int c = 0; c < problem.n_u; ++c) pat.cols[layout.control_index(k, i, c)].push_back(row);
        pat.cols[layout.t0_index].push_back(row);
        pat.cols[layout.tf_index].push_back(row);
      }
    }
  }
  const int last = mesh.num_intervals() - 1;
  for (int r = 0; r < problem.n_b; ++r, ++row) {
    for (int c = 0; c < problem.n_y; ++c) {
      pat.cols[layout.state_index(0, 0, c)].push_back(row);
      pat.cols[layout.state_index(last, mesh.degrees[last], c)].push_back(row);
    }
    pat.cols[layout.t0_index].push_back(row);
    pat.cols[layout.tf_index].push_back(row);
  }
  for (auto& col : pat.cols) sort_unique(col);
  return pat;
}

SparsityPattern hessian_sparsity(const DecisionLayout& layout, const Mesh& mesh,
                                 const OcpProblem& problem) {
  SparsityPattern pat;
  pat.rows = layout.num_vars;
  pat.cols.resize(layout.num_vars);

  auto add_block = [&pat](const std::vector<int>& vars) {
    for (int a : vars)
      for (int b : vars) pat.cols[a].push_back(b);
  };

  for (int k = 0; k < mesh.num_intervals(); ++k) {
    for (int i = 0; i < mesh.degrees[k]; ++i) {
      std::vector<int> vars;
      for (int c = 0; c < problem.n_y; ++c) vars.push_back(layout.state_index(k, i, c));
      for (int c = 0; c < problem.n_u; ++c) vars.push_back(layout.control_index(k, i, c));
      vars.push_back(layout.t0_index);
      vars.push_back(layout.tf_index);
      add_block(vars);
    }
  }
  const int last = mesh.num_intervals() - 1;
  std::vector<int> endpoint_vars;
  for (int c = 0; c < problem.n_y; ++c) {
    endpoint_vars.push_back(layout.state_index(0, 0, c));
    endpoint_vars.push_back(layout.state_index(last, mesh.degrees[last], c));
  }
  endpoint_vars.push_back(layout.t0_index);
  endpoint_vars.push_back(layout.tf_index);
  add_block(endpoint_vars);

  for (auto& col : pat.cols) sort_unique(col);
  return pat;
}

Transcription transcribe(const OcpProblem& problem, const Mesh& mesh) {
  mesh.validate();
  if (problem.n_y < 1 || !problem.dynamics) {
    throw std::invalid_argument("transcribe: problem must define dynamics");
  }
  if (problem.n_b > 0 && !problem.boundary) {
    throw std::invalid_argument("transcribe: n_b > 0 without boundary evaluator");
  }
  if (problem.n_c > 0 && !problem.path) {
    throw std::invalid_argument("transcribe: n_c > 0 without path evaluator");
  }

  auto ws = std::make_shared<Workspace>();
  ws->problem = problem;
  ws->layout = make_layout(problem, mesh);
  const int k_total = mesh.num_intervals();
  const int p_total = mesh.total_colloc_points();
  ws->defect_rows = problem.n_y * p_total;
  ws->path_rows = problem.n_c * p_total;
  for (int k = 0; k < k_total; ++k) {
    const LgrRule rule = lgr_rule(mesh.degrees[k]);
    IntervalWork w;
    w.grid = interval_grid(rule, mesh.left(k), mesh.right(k));
    w.diff = diff_matrix(w.grid);
    w.quad_weights = 0.5 * mesh.width(k) * rule.weights;
    ws->intervals.push_back(std::move(w));
  }

  NlpProblem nlp;
  nlp.num_vars = ws->layout.num_vars;
  nlp.num_constraints = ws->defect_rows + ws->path_rows + problem.n_b;

  nlp.objective = [ws](const Eigen::VectorXd& z) {
    const DecisionLayout& lay = ws->layout;
    const double t0 = z[lay.t0_index];
    const double tf = z[lay.tf_index];
    const int last = lay.num_intervals() - 1;
    double cost = 0.0;
    if (ws->problem.mayer) {
      cost += ws->problem.mayer(state_at(*ws, z, 0, 0), t0,
                                state_at(*ws, z, last, lay.degrees[last]), tf);
    }
    if (ws->problem.lagrange) {
      double quad = 0.0;
      for (int k = 0; k <= last; ++k) {
        const IntervalWork& w = ws->intervals[k];
        for (int j = 0; j < lay.degrees[k]; ++j) {
          const double t = 0.5 * (tf - t0) * w.grid.colloc[j] + 0.5 * (tf + t0);
          quad += w.quad_weights[j] *
                  ws->problem.lagrange(state_at(*ws, z, k, j), control_at(*ws, z, k, j), t);
        }
      }
      cost += 0.5 * (tf - t0) * quad;
    }
    return cost;
  };

  nlp.constraints = [ws](const Eigen::VectorXd& z) {
    const DecisionLayout& lay = ws->layout;
    const double t0 = z[lay.t0_index];
    const double tf = z[lay.tf_index];
    const int n_y = lay.n_y;
    Eigen::VectorXd c(ws->defect_rows + ws->path_rows + ws->problem.n_b);
    int row = 0;
    for (int k = 0; k < lay.num_intervals(); ++k) {
      const IntervalWork& w = ws->intervals[k];
      const int p = lay.degrees[k];
      Eigen::MatrixXd y_nodes(p + 1, n_y);
      for (int j = 0; j <= p; ++j)
        for (int i = 0; i < n_y; ++i) y_nodes(j, i) = z[lay.state_index(k, j, i)];
      const Eigen::MatrixXd dy = w.diff * y_nodes;  // p x n_y
      for (int i = 0; i < p; ++i) {
        const double t = 0.5 * (tf - t0) * w.grid.colloc[i] + 0.5 * (tf + t0);
        const Eigen::VectorXd a =
            ws->problem.dynamics(y_nodes.row(i).transpose(), control_at(*ws, z, k, i), t);
        for (int r = 0; r < n_y; ++r, ++row) {
          c[row] = dy(i, r) - 0.5 * (tf - t0) * a[r];
        }
      }
    }
    if (ws->problem.n_c > 0) {
      for (int k = 0; k < lay.num_intervals(); ++k) {
        const IntervalWork& w = ws->intervals[k];
        for (int i = 0; i < lay.degrees[k]; ++i) {
          const double t = 0.5 * (tf - t0) * w.grid.colloc[i] + 0.5 * (tf + t0);
          const Eigen::VectorXd g =
              ws->problem.path(state_at(*ws, z, k, i), control_at(*ws, z, k, i), t);
          for (int r = 0; r < ws->problem.n_c; ++r, ++row) c[row] = g[r];
        }
      }
    }
    if (ws->problem.n_b > 0) {
      const int last = lay.num_intervals() - 1;
      const Eigen::VectorXd b = ws->problem.boundary(
          state_at(*ws, z, 0, 0), t0, state_at(*ws, z, last, lay.degrees[last]), tf);
      for (int r = 0; r < ws->problem.n_b; ++r, ++row) c[row] = b[r];
    }
    return c;
  };

  // Constraint bounds: defects are equalities, path rows are one-sided,
  // boundary rows take the problem's declared range.
  nlp.c_lower.resize(nlp.num_constraints);
  nlp.c_upper.resize(nlp.num_constraints);
  nlp.c_lower.head(ws->defect_rows).setZero();
  nlp.c_upper.head(ws->defect_rows).setZero();
  nlp.c_lower.segment(ws->defect_rows, ws->path_rows).setConstant(-kInf);
  nlp.c_upper.segment(ws->defect_rows, ws->path_rows).setZero();
  if (problem.n_b > 0) {
    if (problem.boundary_lower.size() == problem.n_b) {
      nlp.c_lower.tail(problem.n_b) = problem.boundary_lower;
      nlp.c_upper.tail(problem.n_b) = problem.boundary_upper;
    } else {
      nlp.c_lower.tail(problem.n_b).setConstant(-kInf);
      nlp.c_upper.tail(problem.n_b).setZero();
    }
  }

  // Variable bounds.
  nlp.z_lower.resize(nlp.num_vars);
  nlp.z_upper.resize(nlp.num_vars);
  const DecisionLayout& lay = ws->layout;
  for (int k = 0; k < k_total; ++k) {
    const int j0 = (k == 0) ? 0 : 1;
    for (int j = j0; j <= lay.degrees[k]; ++j) {
      for (int i = 0; i < problem.n_y; ++i) {
        const int idx = lay.state_index(k, j, i);
        nlp.z_lower[idx] = problem.y_lower[i];
        nlp.z_upper[idx] = problem.y_upper[i];
      }
    }
    for (int j = 0; j < lay.degrees[k]; ++j) {
      for (int i = 0; i < problem.n_u; ++i) {
        const int idx = lay.control_index(k, j, i);
        nlp.z_lower[idx] = problem.u_lower[i];
        nlp.z_upper[idx] = problem.u_upper[i];
      }
    }
  }
  nlp.z_lower[lay.t0_index] = problem.t0_lower;
  nlp.z_upper[lay.t0_index] = problem.t0_upper;
  nlp.z_lower[lay.tf_index] = problem.tf_lower;
  nlp.z_upper[lay.tf_index] = problem.tf_upper;

  nlp.jacobian = jacobian_sparsity(lay, mesh, problem);
  nlp.hessian = hessian_sparsity(lay, mesh, problem);
  return Transcription{std::move(nlp), lay};
}

CollocationSolution unpack(const Eigen::VectorXd& z, const DecisionLayout& layout,
                           const Mesh& mesh) {
  if (z.size() != layout.num_vars) {
    throw std::invalid_argument("unpack: decision vector length mismatch");
  }
  CollocationSolution sol;
  sol.t0 = z[layout.t0_index];
  sol.tf = z[layout.tf_index];
  for (int k = 0; k < mesh.num_intervals(); ++k) {
    const int p = mesh.degrees[k];
    IntervalSolution s;
    s.tau_support = interval_grid(lgr_rule(p), mesh.left(k), mesh.right(k)).support();
    s.states.resize(p + 1, layout.n_y);
    s.controls.resize(p, layout.n_u);
    for (int j = 0; j <= p; ++j)
      for (int i = 0; i < layout.n_y; ++i) s.states(j, i) = z[layout.state_index(k, j, i)];
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < layout.n_u; ++i) s.controls(j, i) = z[layout.control_index(k, j, i)];
    sol.intervals.push_back(std::move(s));
  }
  return sol;
}

Eigen::VectorXd pack(const CollocationSolution& solution,
                     const DecisionLayout& layout) {
  Eigen::VectorXd z(layout.num_vars);
  z[layout.t0_index] = solution.t0;
  z[layout.tf_index] = solution.tf;
  for (int k = 0; k < layout.num_intervals(); ++k) {
    const IntervalSolution& s = solution.intervals[k];
    const int p = layout.degrees[k];
    for (int j = 0; j <= p; ++j)
      for (int i = 0; i < layout.n_y; ++i) z[layout.state_index(k, j, i)] = s.states(j, i);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < layout.n_u; ++i) z[layout.control_index(k, j, i)] = s.controls(j, i);
  }
  return z;
}

}  // namespace radauhp
