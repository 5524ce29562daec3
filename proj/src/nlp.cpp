#include "radauhp/nlp.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace radauhp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> color_columns_masked(const SparsityPattern& pattern,
                                      const std::vector<char>& skip_col,
                                      const std::vector<char>& skip_row,
                                      int* n_colors_out) {
  const int n = pattern.num_cols();
  // row -> columns adjacency over the columns being colored
  std::unordered_map<int, std::vector<int>> row_cols;
  for (int j = 0; j < n; ++j) {
    if (!skip_col.empty() && skip_col[j]) continue;
    for (int r : pattern.cols[j]) {
      if (!skip_row.empty() && skip_row[r]) continue;
      row_cols[r].push_back(j);
    }
  }
  std::vector<int> color(n, -1);
  int n_colors = 0;
  std::vector<char> forbidden;
  for (int j = 0; j < n; ++j) {
    if (!skip_col.empty() && skip_col[j]) continue;
    forbidden.assign(n_colors, 0);
    for (int r : pattern.cols[j]) {
      if (!skip_row.empty() && skip_row[r]) continue;
      for (int other : row_cols[r]) {
        if (color[other] >= 0) forbidden[color[other]] = 1;
      }
    }
    int c = 0;
    while (c < n_colors && forbidden[c]) ++c;
    if (c == n_colors) ++n_colors;
    color[j] = c;
  }
  *n_colors_out = n_colors;
  return color;
}

Eigen::SparseMatrix<double> fd_jacobian_colored(
    const NlpProblem& nlp, const Eigen::VectorXd& z, double step_scale,
    const std::vector<int>& color, int n_colors) {
  const int n = nlp.num_vars;
  const int m = nlp.num_constraints;
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd zp = z, zm = z;
  for (int c = 0; c < n_colors; ++c) {
    for (int j = 0; j < n; ++j) {
      if (color[j] != c) continue;
      const double h = step_scale * std::max(1.0, std::abs(z[j]));
      zp[j] = z[j] + h;
      zm[j] = z[j] - h;
    }
    const Eigen::VectorXd cp = nlp.constraints(zp);
    const Eigen::VectorXd cm = nlp.constraints(zm);
    for (int j = 0; j < n; ++j) {
      if (color[j] != c) continue;
      const double h = step_scale * std::max(1.0, std::abs(z[j]));
      for (int r : nlp.jacobian.cols[j]) {
        trips.emplace_back(r, j, (cp[r] - cm[r]) / (2.0 * h));
      }
      zp[j] = z[j];
      zm[j] = z[j];
    }
  }
  Eigen::SparseMatrix<double> jac(m, n);
  jac.setFromTriplets(trips.begin(), trips.end());
  return jac;
}

// Plan for the sparse finite-difference Lagrangian Hessian.  Columns whose
// pattern degree is large (the time variables) get their own seed vector;
// the rest are grouped, and rows belonging to singleton columns are
// recovered by symmetry.
struct HessianPlan {
  SparsityPattern pattern;
  std::vector<char> singleton;
  std::vector<int> color;
  int n_colors = 0;
};

HessianPlan make_hessian_plan(const NlpProblem& nlp) {
  HessianPlan plan;
  if (!nlp.hessian.empty()) {
    plan.pattern = nlp.hessian;
  } else {
    plan.pattern.rows = nlp.num_vars;
    plan.pattern.cols.resize(nlp.num_vars);
    std::vector<int> all(nlp.num_vars);
    for (int i = 0; i < nlp.num_vars; ++i) all[i] = i;
    for (auto& col : plan.pattern.cols) col = all;
  }
  const int n = nlp.num_vars;
  const int threshold = std::max(24, 4 * static_cast<int>(std::sqrt(double(n))));
  plan.singleton.assign(n, 0);
  int n_dense = 0;
  for (int j = 0; j < n; ++j) {
    if (static_cast<int>(plan.pattern.cols[j].size()) > threshold) {
      plan.singleton[j] = 1;
      ++n_dense;
    }
  }
  if (n_dense > n / 2) plan.singleton.assign(n, 1);  // dense fallback
  plan.color = color_columns_masked(plan.pattern, plan.singleton, plan.singleton,
                                    &plan.n_colors);
  return plan;
}

class LagrangianGradient {
 public:
  LagrangianGradient(const NlpProblem& nlp, double step_scale)
      : nlp_(nlp), step_(step_scale) {
    jac_color_ = color_columns_masked(nlp.jacobian, {}, {}, &jac_colors_);
  }

  Eigen::VectorXd objective_gradient(const Eigen::VectorXd& z) const {
    const int n = nlp_.num_vars;
    Eigen::VectorXd g(n);
    Eigen::VectorXd zt = z;
    for (int j = 0; j < n; ++j) {
      const double h = step_ * std::max(1.0, std::abs(z[j]));
      zt[j] = z[j] + h;
      const double fp = nlp_.objective(zt);
      zt[j] = z[j] - h;
      const double fm = nlp_.objective(zt);
      zt[j] = z[j];
      g[j] = (fp - fm) / (2.0 * h);
    }
    return g;
  }

  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& z) const {
    return fd_jacobian_colored(nlp_, z, step_, jac_color_, jac_colors_);
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& z,
                             const Eigen::VectorXd& y) const {
    Eigen::VectorXd g = objective_gradient(z);
    if (nlp_.num_constraints > 0) g += jacobian(z).transpose() * y;
    return g;
  }

 private:
  const NlpProblem& nlp_;
  double step_;
  std::vector<int> jac_color_;
  int jac_colors_ = 0;
};

Eigen::SparseMatrix<double> fd_hessian(const NlpProblem& nlp,
                                       const HessianPlan& plan,
                                       const LagrangianGradient& grad,
                                       const Eigen::VectorXd& z,
                                       const Eigen::VectorXd& y,
                                       double hess_step) {
  const int n = nlp.num_vars;
  // key -> (sum, count) for symmetrization
  std::unordered_map<long long, std::pair<double, int>> entries;
  auto record = [&entries, n](int r, int c, double v) {
    auto& e = entries[static_cast<long long>(r) * n + c];
    e.first += v;
    e.second += 1;
  };

  Eigen::VectorXd zp = z, zm = z;
  // Singleton (dense) columns: one seed each, full column recovered.
  for (int j = 0; j < n; ++j) {
    if (!plan.singleton[j]) continue;
    const double h = hess_step * std::max(1.0, std::abs(z[j]));
    zp[j] = z[j] + h;
    zm[j] = z[j] - h;
    const Eigen::VectorXd gd = (grad(zp, y) - grad(zm, y)) / (2.0 * h);
    zp[j] = z[j];
    zm[j] = z[j];
    for (int r : plan.pattern.cols[j]) {
      record(r, j, gd[r]);
      record(j, r, gd[r]);
    }
  }
  // Grouped columns: rows owned by singleton columns already recovered above.
  for (int c = 0; c < plan.n_colors; ++c) {
    bool any = false;
    for (int j = 0; j < n; ++j) {
      if (plan.singleton[j] || plan.color[j] != c) continue;
      const double h = hess_step * std::max(1.0, std::abs(z[j]));
      zp[j] = z[j] + h;
      zm[j] = z[j] - h;
      any = true;
    }
    if (!any) continue;
    const Eigen::VectorXd gd = grad(zp, y) - grad(zm, y);
    for (int j = 0; j < n; ++j) {
      if (plan.singleton[j] || plan.color[j] != c) continue;
      const double h = hess_step * std::max(1.0, std::abs(z[j]));
      for (int r : plan.pattern.cols[j]) {
        if (plan.singleton[r]) continue;
        const double v = gd[r] / (2.0 * h);
        record(r, j, v);
        record(j, r, v);
      }
      zp[j] = z[j];
      zm[j] = z[j];
    }
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(entries.size());
  for (const auto& [key, e] : entries) {
    const int r = static_cast<int>(key / n);
    const int c = static_cast<int>(key % n);
    trips.emplace_back(r, c, e.first / e.second);
  }
  Eigen::SparseMatrix<double> hess(n, n);
  hess.setFromTriplets(trips.begin(), trips.end());
  return hess;
}

struct EvalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace

int SparsityPattern::nnz() const {
  int total = 0;
  for (const auto& c : cols) total += static_cast<int>(c.size());
  return total;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::acceptable: return "acceptable";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::error: return "error";
  }
  return "unknown";
}

std::vector<int> color_columns(const SparsityPattern& pattern) {
  int n_colors = 0;
  return color_columns_masked(pattern, {}, {}, &n_colors);
}

Eigen::SparseMatrix<double> fd_jacobian(const NlpProblem& nlp,
                                        const Eigen::VectorXd& z,
                                        double step_scale) {
  int n_colors = 0;
  const std::vector<int> color = color_columns_masked(nlp.jacobian, {}, {}, &n_colors);
  return fd_jacobian_colored(nlp, z, step_scale, color, n_colors);
}

Eigen::VectorXd fd_gradient(const NlpProblem& nlp, const Eigen::VectorXd& z,
                            double step_scale) {
  LagrangianGradient grad(nlp, step_scale);
  return grad.objective_gradient(z);
}

SolveOutcome solve(const NlpProblem& nlp, const Eigen::VectorXd& z0,
                   const SolverOptions& options) {
  return InteriorPointSolver{}.solve(nlp, z0, options);
}

SolveOutcome InteriorPointSolver::solve(const NlpProblem& nlp,
                                        const Eigen::VectorXd& z0,
                                        const SolverOptions& opt) const {
  const int n = nlp.num_vars;
  const int m = nlp.num_constraints;
  SolveOutcome out;
  out.z = z0;
  out.multipliers = Eigen::VectorXd::Zero(m);

  enum RowType { kEq, kUpper, kLower };
  std::vector<RowType> row_type(m);
  Eigen::VectorXd rhs(m);
  std::vector<int> slack_row;  // constraint row of each slack
  for (int j = 0; j < m; ++j) {
    const double lo = nlp.c_lower[j], up = nlp.c_upper[j];
    if (lo == up) {
      row_type[j] = kEq;
      rhs[j] = lo;
    } else if (std::isfinite(up) && !std::isfinite(lo)) {
      row_type[j] = kUpper;
      rhs[j] = up;
      slack_row.push_back(j);
    } else if (std::isfinite(lo) && !std::isfinite(up)) {
      row_type[j] = kLower;
      rhs[j] = lo;
      slack_row.push_back(j);
    } else {
      out.status = SolveStatus::error;
      out.message = "unsupported two-sided inequality row " + std::to_string(j);
      return out;
    }
  }
  const int n_s = static_cast<int>(slack_row.size());
  auto sigma = [&row_type, &slack_row](int q) {
    return row_type[slack_row[q]] == kUpper ? 1.0 : -1.0;
  };

  std::vector<char> fixed(n, 0);
  std::vector<int> free_idx;
  for (int i = 0; i < n; ++i) {
    if (nlp.z_lower[i] == nlp.z_upper[i]) {
      fixed[i] = 1;
    } else {
      free_idx.push_back(i);
    }
  }
  const int nf = static_cast<int>(free_idx.size());
  std::vector<int> local(n, -1);
  for (int a = 0; a < nf; ++a) local[free_idx[a]] = a;

  // Initial point: project into the box, then push strictly inside.
  Eigen::VectorXd x = z0;
  for (int i = 0; i < n; ++i) {
    const double lo = nlp.z_lower[i], up = nlp.z_upper[i];
    if (fixed[i]) {
      x[i] = lo;
      continue;
    }
    x[i] = std::min(std::max(x[i], lo), up);
    const double pad = std::isfinite(lo) && std::isfinite(up)
                           ? std::min(1e-2 * (up - lo), 1e-2)
                           : 1e-2;
    if (std::isfinite(lo)) x[i] = std::max(x[i], lo + pad);
    if (std::isfinite(up)) x[i] = std::min(x[i], up - pad);
  }

  LagrangianGradient grad(nlp, opt.fd_step_scale);
  const HessianPlan hess_plan = make_hessian_plan(nlp);
  const double hess_step = std::sqrt(opt.fd_step_scale);  // ~ eps^(1/6) coarser
  const double hstep = std::pow(std::numeric_limits<double>::epsilon(), 0.25);

  auto eval_f = [&nlp](const Eigen::VectorXd& z) {
    const double f = nlp.objective(z);
    if (!std::isfinite(f)) throw EvalFailure("objective returned a non-finite value");
    return f;
  };
  auto eval_c = [&nlp, m](const Eigen::VectorXd& z) {
    if (m == 0) return Eigen::VectorXd(0);
    Eigen::VectorXd c = nlp.constraints(z);
    if (!c.allFinite()) {
      int where = 0;
      for (int j = 0; j < c.size(); ++j) {
        if (!std::isfinite(c[j])) { where = j; break; }
      }
      throw EvalFailure("constraint row " + std::to_string(where) +
                        " returned a non-finite value");
    }
    return c;
  };

  try {
    double f = eval_f(x);
    Eigen::VectorXd c = eval_c(x);

    double mu = opt.mu_init;
    const double mu_min = std::max(1e-13, opt.kkt_tolerance / 10.0);

    Eigen::VectorXd s(n_s), w(n_s);
    for (int q = 0; q < n_s; ++q) {
      const int j = slack_row[q];
      const double ideal = sigma(q) > 0 ? rhs[j] - c[j] : c[j] - rhs[j];
      s[q] = std::max(ideal, 1e-2);
      w[q] = mu / s[q];
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    for (int q = 0; q < n_s; ++q) y[slack_row[q]] = sigma(q) * w[q];

    Eigen::VectorXd vl = Eigen::VectorXd::Zero(n), vu = Eigen::VectorXd::Zero(n);
    for (int i : free_idx) {
      if (std::isfinite(nlp.z_lower[i]))
        vl[i] = std::min(std::max(mu / (x[i] - nlp.z_lower[i]), 1e-8), 1e8);
      if (std::isfinite(nlp.z_upper[i]))
        vu[i] = std::min(std::max(mu / (nlp.z_upper[i] - x[i]), 1e-8), 1e8);
    }

    double nu = 1.0;
    int iter = 0;
    bool converged = false;
    bool stalled = false;
    double e0 = kInf;
    double theta = 0.0;
    double best_e0 = kInf;
    int stagnant = 0;
    // Two-cycle damping: Newton's dual updates can overshoot symmetrically
    // on degenerate bound pairs; halve the dual step while the KKT error
    // ping-pongs between the same two values.
    double e0_prev = kInf, e0_prev2 = kInf;
    double dual_damp = 1.0;
    int restarts = 0;
    Eigen::VectorXd best_x = x, best_y = y;
    double best_theta = kInf;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

    for (iter = 0; iter < opt.max_iterations; ++iter) {
      const Eigen::SparseMatrix<double> jac = grad.jacobian(x);
      const Eigen::VectorXd g = grad.objective_gradient(x);
      if (!g.allFinite()) throw EvalFailure("non-finite objective gradient");

      Eigen::VectorXd r_pri(m);
      for (int j = 0; j < m; ++j) r_pri[j] = c[j] - rhs[j];
      for (int q = 0; q < n_s; ++q) r_pri[slack_row[q]] += sigma(q) * s[q];
      theta = m > 0 ? r_pri.lpNorm<Eigen::Infinity>() : 0.0;

      Eigen::VectorXd rd = g;
      if (m > 0) rd += jac.transpose() * y;
      rd -= vl;
      rd += vu;

      double dual_inf = 0.0;
      for (int i : free_idx) dual_inf = std::max(dual_inf, std::abs(rd[i]));

      // Endgame multiplier refinement: once the primal has converged and the
      // barrier sits at its floor, the dual residual is linear in the row
      // multipliers; recovering them by least squares breaks the limit
      // cycles Newton falls into on degenerate active sets.
      const bool endgame = mu <= 100.0 * mu_min || stagnant >= 10;
      if (n_s == 0 && m > 0 && theta <= 1e-9 && endgame &&
          dual_inf > opt.kkt_tolerance) {
        Eigen::VectorXd b(nf);
        for (int a = 0; a < nf; ++a) {
          const int i = free_idx[a];
          b[a] = -(g[i] - vl[i] + vu[i]);
        }
        std::vector<Eigen::Triplet<double>> at;
        for (int outer = 0; outer < jac.outerSize(); ++outer) {
          for (Eigen::SparseMatrix<double>::InnerIterator it(jac, outer); it;
               ++it) {
            const int a = local[it.col()];
            if (a >= 0) at.emplace_back(a, it.row(), it.value());
          }
        }
        Eigen::SparseMatrix<double> jt(nf, m);
        jt.setFromTriplets(at.begin(), at.end());
        jt.makeCompressed();
        Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>
            qr(jt);
        if (qr.info() == Eigen::Success) {
          const Eigen::VectorXd y_ls = qr.solve(b);
          if (y_ls.allFinite()) {
            Eigen::VectorXd rd_ls = g + jac.transpose() * y_ls - vl + vu;
            double di_ls = 0.0;
            for (int i : free_idx) di_ls = std::max(di_ls, std::abs(rd_ls[i]));
            if (opt.verbose) {
              int worst = -1;
              double wv = 0.0;
              for (int i : free_idx) {
                if (std::abs(rd_ls[i]) > wv) { wv = std::abs(rd_ls[i]); worst = i; }
              }
              std::fprintf(stderr,
                           "     ls dual=%.3e -> %.3e worst i=%d gap_lo=%.3e gap_up=%.3e vl=%.3e vu=%.3e\n",
                           dual_inf, di_ls, worst,
                           worst >= 0 ? x[worst] - nlp.z_lower[worst] : 0.0,
                           worst >= 0 ? nlp.z_upper[worst] - x[worst] : 0.0,
                           worst >= 0 ? vl[worst] : 0.0, worst >= 0 ? vu[worst] : 0.0);
            }
            // Only adopt a decisive improvement; replacing y every
            // iteration with a marginal fix destabilizes the Newton loop.
            if (di_ls < 0.1 * dual_inf) {
              y = y_ls;
              rd = rd_ls;
              dual_inf = di_ls;
            }
          }
        }
      }

      // Rescue pinned bound pairs.  A variable squeezed onto its bound with
      // a bound dual far above the force stationarity asks for traps Newton:
      // the barrier diagonal mu-centered at a vanishing gap dwarfs every
      // sensible step.  Recenter dual and gap to the force actually needed.
      if (endgame && theta <= 1e-7) {
        bool moved = false;
        for (int i : free_idx) {
          const double gjy = rd[i] + vl[i] - vu[i];  // g + J^T y at i
          if (std::isfinite(nlp.z_upper[i])) {
            const double range = std::isfinite(nlp.z_lower[i])
                                     ? nlp.z_upper[i] - nlp.z_lower[i]
                                     : 1.0;
            const double gap = nlp.z_upper[i] - x[i];
            const double want = -(gjy - vl[i]);
            if (gap < 1e-9 * std::max(1.0, range) &&
                vu[i] > 100.0 * std::max(1.0, want)) {
              vu[i] = std::max(want, mu);
              x[i] = nlp.z_upper[i] -
                     std::min(std::max(mu / vu[i], 1e-9), 1e-2 * range);
              moved = true;
            }
          }
          if (std::isfinite(nlp.z_lower[i])) {
            const double range = std::isfinite(nlp.z_upper[i])
                                     ? nlp.z_upper[i] - nlp.z_lower[i]
                                     : 1.0;
            const double gap = x[i] - nlp.z_lower[i];
            const double want = gjy + vu[i];
            if (gap < 1e-9 * std::max(1.0, range) &&
                vl[i] > 100.0 * std::max(1.0, want)) {
              vl[i] = std::max(want, mu);
              x[i] = nlp.z_lower[i] +
                     std::min(std::max(mu / vl[i], 1e-9), 1e-2 * range);
              moved = true;
            }
          }
        }
        if (moved) {
          if (opt.verbose) std::fprintf(stderr, "     rescued pinned bounds\n");
          f = eval_f(x);
          c = eval_c(x);
          for (int j = 0; j < m; ++j) r_pri[j] = c[j] - rhs[j];
          for (int q = 0; q < n_s; ++q) r_pri[slack_row[q]] += sigma(q) * s[q];
          theta = m > 0 ? r_pri.lpNorm<Eigen::Infinity>() : 0.0;
          rd = g;
          if (m > 0) rd += jac.transpose() * y;
          rd -= vl;
          rd += vu;
          dual_inf = 0.0;
          for (int i : free_idx) dual_inf = std::max(dual_inf, std::abs(rd[i]));
        }
      }

      auto comp_err = [&](double mu_target) {
        double e = 0.0;
        for (int q = 0; q < n_s; ++q) e = std::max(e, std::abs(s[q] * w[q] - mu_target));
        for (int i : free_idx) {
          if (std::isfinite(nlp.z_lower[i]))
            e = std::max(e, std::abs((x[i] - nlp.z_lower[i]) * vl[i] - mu_target));
          if (std::isfinite(nlp.z_upper[i]))
            e = std::max(e, std::abs((nlp.z_upper[i] - x[i]) * vu[i] - mu_target));
        }
        return e;
      };

      double mult_sum = y.lpNorm<1>() + w.lpNorm<1>() + vl.lpNorm<1>() + vu.lpNorm<1>();
      int mult_count = m + n_s + 2 * nf;
      const double s_d =
          std::max(100.0, mult_count > 0 ? mult_sum / mult_count : 0.0) / 100.0;

      e0 = std::max({dual_inf / s_d, theta, comp_err(0.0) / s_d});
      if (opt.verbose) {
        std::fprintf(stderr,
                     "ipm %4d f=%.8e theta=%.2e dual=%.2e comp=%.2e mu=%.2e\n",
                     iter, f, theta, dual_inf, comp_err(0.0), mu);
      }
      if (e0 <= opt.kkt_tolerance && theta <= opt.constraint_tolerance) {
        converged = true;
        break;
      }
      // Finite-difference noise floors the attainable residual; stop once
      // progress stalls instead of cycling to the iteration limit.
      if (e0 < best_e0) {
        best_x = x;
        best_y = y;
        best_theta = theta;
      }
      if (e0 < 0.99 * best_e0) {
        best_e0 = e0;
        stagnant = 0;
        dual_damp = 1.0;
      } else {
        ++stagnant;
        if (theta <= 1e-10 && endgame &&
            std::abs(e0 - e0_prev2) < 0.01 * e0) {
          dual_damp = std::max(dual_damp * 0.5, 1.0 / 1024.0);
        } else {
          // Damping is only meant to break exact two-cycles; let it recover
          // as soon as the iterates stop cycling.
          dual_damp = std::min(1.0, 2.0 * dual_damp);
        }
      }
      e0_prev2 = e0_prev;
      e0_prev = e0;
      if (stagnant >= 100) {
        // Soft restart: recenter every dual at a moderate barrier value and
        // descend again from the current primal point.  A fresh trajectory
        // usually avoids the degeneracies the first one accumulated.
        if (restarts < 2) {
          ++restarts;
          stagnant = 0;
          dual_damp = 1.0;
          mu = 1e-4;
          for (int q = 0; q < n_s; ++q) w[q] = mu / s[q];
          for (int q = 0; q < n_s; ++q) y[slack_row[q]] = sigma(q) * w[q];
          for (int i : free_idx) {
            if (std::isfinite(nlp.z_lower[i]))
              vl[i] = std::min(std::max(mu / (x[i] - nlp.z_lower[i]), 1e-8), 1e8);
            if (std::isfinite(nlp.z_upper[i]))
              vu[i] = std::min(std::max(mu / (nlp.z_upper[i] - x[i]), 1e-8), 1e8);
          }
          if (opt.verbose) std::fprintf(stderr, "     soft restart %d\n", restarts);
          continue;
        }
        stalled = true;
        break;
      }

      const double e_mu = std::max({dual_inf / s_d, theta, comp_err(mu) / s_d});
      while (e_mu <= 10.0 * mu && mu > mu_min) {
        mu = std::max(mu_min, std::min(0.2 * mu, std::pow(mu, 1.5)));
      }

      Eigen::SparseMatrix<double> hess =
          fd_hessian(nlp, hess_plan, grad, x, y, hstep);
      if (!Eigen::Map<const Eigen::VectorXd>(hess.valuePtr(), hess.nonZeros())
               .allFinite()) {
        throw EvalFailure("non-finite Lagrangian Hessian");
      }
      (void)hess_step;

      // Newton direction with escalating primal regularization.
      const int dim = nf + m;
      Eigen::VectorXd rhs_vec(dim);
      for (int a = 0; a < nf; ++a) rhs_vec[a] = -rd[free_idx[a]];
      for (int j = 0; j < m; ++j) rhs_vec[nf + j] = -r_pri[j];
      for (int q = 0; q < n_s; ++q) {
        const int j = slack_row[q];
        rhs_vec[nf + j] -= sigma(q) * (mu - s[q] * w[q]) / w[q];
      }

      double delta = 0.0;
      bool step_ok = false;
      Eigen::VectorXd dx_full = Eigen::VectorXd::Zero(n);
      Eigen::VectorXd dy(m), ds(n_s);
      double alpha_pri = 0.0, alpha_dual = 0.0;

      for (int attempt = 0; attempt < 12 && !step_ok; ++attempt) {
        std::vector<Eigen::Triplet<double>> trips;
        for (int outer = 0; outer < hess.outerSize(); ++outer) {
          for (Eigen::SparseMatrix<double>::InnerIterator it(hess, outer); it;
               ++it) {
            const int r = local[it.row()], cc = local[it.col()];
            if (r >= 0 && cc >= 0) trips.emplace_back(r, cc, it.value());
          }
        }
        for (int a = 0; a < nf; ++a) {
          const int i = free_idx[a];
          double diag = delta;
          if (std::isfinite(nlp.z_lower[i])) diag += vl[i] / (x[i] - nlp.z_lower[i]);
          if (std::isfinite(nlp.z_upper[i])) diag += vu[i] / (nlp.z_upper[i] - x[i]);
          trips.emplace_back(a, a, diag);
        }
        for (int outer = 0; outer < jac.outerSize(); ++outer) {
          for (Eigen::SparseMatrix<double>::InnerIterator it(jac, outer); it; ++it) {
            const int a = local[it.col()];
            if (a < 0) continue;
            trips.emplace_back(nf + it.row(), a, it.value());
            trips.emplace_back(a, nf + it.row(), it.value());
          }
        }
        for (int j = 0; j < m; ++j) trips.emplace_back(nf + j, nf + j, -1e-11);
        for (int q = 0; q < n_s; ++q) {
          const int j = slack_row[q];
          trips.emplace_back(nf + j, nf + j, -s[q] / w[q]);
        }

        Eigen::SparseMatrix<double> kkt(dim, dim);
        kkt.setFromTriplets(trips.begin(), trips.end());
        lu.compute(kkt);
        if (lu.info() != Eigen::Success) {
          delta = delta == 0.0 ? 1e-4 : delta * 10.0;
          continue;
        }
        const Eigen::VectorXd sol = lu.solve(rhs_vec);
        if (!sol.allFinite()) {
          delta = delta == 0.0 ? 1e-4 : delta * 10.0;
          continue;
        }

        dx_full.setZero();
        for (int a = 0; a < nf; ++a) dx_full[free_idx[a]] = sol[a];
        dy = sol.tail(m);
        for (int q = 0; q < n_s; ++q) {
          const int j = slack_row[q];
          ds[q] = (mu - s[q] * w[q]) / w[q] - (s[q] / w[q]) * sigma(q) * dy[j];
        }

        // Fraction-to-boundary limits.
        const double tau_fb = std::max(0.99, 1.0 - mu);
        alpha_pri = 1.0;
        int blocker = -1;
        for (int q = 0; q < n_s; ++q) {
          if (ds[q] < 0.0) alpha_pri = std::min(alpha_pri, -tau_fb * s[q] / ds[q]);
        }
        for (int i : free_idx) {
          double cap = 1.0;
          if (dx_full[i] < 0.0 && std::isfinite(nlp.z_lower[i]))
            cap = -tau_fb * (x[i] - nlp.z_lower[i]) / dx_full[i];
          if (dx_full[i] > 0.0 && std::isfinite(nlp.z_upper[i]))
            cap = tau_fb * (nlp.z_upper[i] - x[i]) / dx_full[i];
          if (cap < alpha_pri) {
            alpha_pri = cap;
            blocker = i;
          }
        }
        if (opt.verbose && blocker >= 0) {
          std::fprintf(stderr,
                       "     blocker i=%d x=%.6e dx=%.3e lo=%.3e up=%.3e vl=%.3e vu=%.3e\n",
                       blocker, x[blocker], dx_full[blocker], nlp.z_lower[blocker],
                       nlp.z_upper[blocker], vl[blocker], vu[blocker]);
        }
        alpha_dual = dual_damp;
        for (int q = 0; q < n_s; ++q) {
          const double dw = sigma(q) * dy[slack_row[q]];
          if (dw < 0.0) alpha_dual = std::min(alpha_dual, -tau_fb * w[q] / dw);
        }
        Eigen::VectorXd dvl = Eigen::VectorXd::Zero(n), dvu = Eigen::VectorXd::Zero(n);
        for (int i : free_idx) {
          if (std::isfinite(nlp.z_lower[i])) {
            const double gap = x[i] - nlp.z_lower[i];
            dvl[i] = (mu - gap * vl[i]) / gap - (vl[i] / gap) * dx_full[i];
            if (dvl[i] < 0.0) alpha_dual = std::min(alpha_dual, -tau_fb * vl[i] / dvl[i]);
          }
          if (std::isfinite(nlp.z_upper[i])) {
            const double gap = nlp.z_upper[i] - x[i];
            dvu[i] = (mu - gap * vu[i]) / gap + (vu[i] / gap) * dx_full[i];
            if (dvu[i] < 0.0) alpha_dual = std::min(alpha_dual, -tau_fb * vu[i] / dvu[i]);
          }
        }

        // l1 merit line search along the primal direction.
        auto barrier = [&](const Eigen::VectorXd& xx, const Eigen::VectorXd& ss) {
          double b = 0.0;
          for (int q = 0; q < n_s; ++q) b -= std::log(ss[q]);
          for (int i : free_idx) {
            if (std::isfinite(nlp.z_lower[i])) b -= std::log(xx[i] - nlp.z_lower[i]);
            if (std::isfinite(nlp.z_upper[i])) b -= std::log(nlp.z_upper[i] - xx[i]);
          }
          return mu * b;
        };
        auto theta1 = [&](const Eigen::VectorXd& cc, const Eigen::VectorXd& ss) {
          double t = 0.0;
          for (int j = 0; j < m; ++j) {
            double r = cc[j] - rhs[j];
            t += std::abs(r);
          }
          // add slack part row-wise
          for (int q = 0; q < n_s; ++q) {
            const int j = slack_row[q];
            t -= std::abs(cc[j] - rhs[j]);
            t += std::abs(cc[j] - rhs[j] + sigma(q) * ss[q]);
          }
          return t;
        };

        const double theta0 = theta1(c, s);
        double dir_deriv = 0.0;
        for (int i : free_idx) {
          double gb = g[i];
          if (std::isfinite(nlp.z_lower[i])) gb -= mu / (x[i] - nlp.z_lower[i]);
          if (std::isfinite(nlp.z_upper[i])) gb += mu / (nlp.z_upper[i] - x[i]);
          dir_deriv += gb * dx_full[i];
        }
        for (int q = 0; q < n_s; ++q) dir_deriv -= (mu / s[q]) * ds[q];

        // Penalty weight just large enough to make the step a descent
        // direction for the merit function, with decaying memory so
        // feasibility is not alternately weighted and neglected.
        double nu_required = 1.0;
        if (dir_deriv > 0.0 && theta0 > 1e-14) {
          nu_required = std::min(1e8, 1.1 * dir_deriv / (0.9 * theta0));
        }
        nu = std::max(nu_required, 0.3 * nu);
        const double dphi = dir_deriv - nu * theta0;

        // At a feasible point where no primal step can decrease the merit,
        // the primal is converged and only the duals need correcting; take
        // the multiplier update alone once regularization has shrunk the
        // primal direction to noise.
        bool dual_only = false;
        if (dphi >= 0.0 && theta0 <= opt.constraint_tolerance) {
          if (dx_full.lpNorm<Eigen::Infinity>() >
                  1e-7 * (1.0 + x.lpNorm<Eigen::Infinity>()) &&
              delta < 1e6) {
            delta = delta == 0.0 ? 1e-4 : delta * 10.0;
            continue;
          }
          dual_only = true;
        }

        const double phi0 = f + barrier(x, s) + nu * theta0;
        double alpha = dual_only ? 0.0 : alpha_pri;
        bool accepted = dual_only;
        Eigen::VectorXd x_t = x, s_t = s, c_t = c;
        double f_t = f;
        for (int ls = 0; !accepted && ls < 40 && alpha > 1e-14; ++ls, alpha *= 0.5) {
          x_t = x + alpha * dx_full;
          s_t = s + alpha * ds;
          bool interior = true;
          for (int q = 0; q < n_s && interior; ++q) interior = s_t[q] > 0.0;
          for (int i : free_idx) {
            if (!interior) break;
            if (std::isfinite(nlp.z_lower[i]) && x_t[i] <= nlp.z_lower[i]) interior = false;
            if (std::isfinite(nlp.z_upper[i]) && x_t[i] >= nlp.z_upper[i]) interior = false;
          }
          if (!interior) continue;
          try {
            f_t = eval_f(x_t);
            c_t = eval_c(x_t);
          } catch (const EvalFailure&) {
            continue;
          }
          const double phi_t = f_t + barrier(x_t, s_t) + nu * theta1(c_t, s_t);
          if (phi_t <= phi0 + 1e-4 * alpha * std::min(dphi, 0.0)) {
            accepted = true;
            break;
          }
        }
        if (!accepted) {
          delta = delta == 0.0 ? 1e-4 : delta * 10.0;
          continue;
        }

        x = x_t;
        s = s_t;
        f = f_t;
        c = c_t;
        // Degenerate active sets can produce enormous multiplier steps;
        // cap the row-multiplier update so one bad direction cannot blow
        // the duals up by orders of magnitude.
        double alpha_y = alpha_dual;
        if (m > 0) {
          const double dy_inf = dy.lpNorm<Eigen::Infinity>();
          const double y_cap = 1e3 * (1.0 + y.lpNorm<Eigen::Infinity>());
          if (alpha_y * dy_inf > y_cap) alpha_y = y_cap / dy_inf;
        }
        y += alpha_y * dy;
        for (int q = 0; q < n_s; ++q) w[q] = sigma(q) * y[slack_row[q]];
        for (int i : free_idx) {
          if (std::isfinite(nlp.z_lower[i])) {
            vl[i] += alpha_dual * dvl[i];
            // keep duals within a factor of the barrier value
            const double gap = x[i] - nlp.z_lower[i];
            vl[i] = std::min(std::max(vl[i], mu / (1e6 * gap)), 1e6 * mu / gap);
          }
          if (std::isfinite(nlp.z_upper[i])) {
            vu[i] += alpha_dual * dvu[i];
            const double gap = nlp.z_upper[i] - x[i];
            vu[i] = std::min(std::max(vu[i], mu / (1e6 * gap)), 1e6 * mu / gap);
          }
        }
        step_ok = true;
        if (opt.verbose) {
          std::fprintf(stderr, "     alpha=%.2e alpha_dual=%.2e delta=%.1e nu=%.1e\n",
                       alpha, alpha_dual, delta, nu);
        }
      }

      if (!step_ok) {
        stalled = true;
        break;
      }
    }

    if (!converged && best_e0 < e0) {
      x = best_x;
      y = best_y;
      e0 = best_e0;
      theta = best_theta;
    }
    out.z = x;
    out.multipliers = y;
    out.iterations = iter;
    out.kkt_residual = e0;
    if (converged) {
      out.status = SolveStatus::optimal;
    } else if (e0 <= 100.0 * opt.kkt_tolerance && theta <= opt.constraint_tolerance) {
      out.status = SolveStatus::acceptable;
      out.message = stalled ? "stalled near the solution" : "iteration limit";
    } else if (theta > 1e-4) {
      out.status = SolveStatus::infeasible;
      out.message = "could not attain primal feasibility";
    } else {
      out.status = SolveStatus::max_iter;
      out.message = stalled ? "no acceptable step found" : "iteration limit";
    }
  } catch (const EvalFailure& e) {
    out.status = SolveStatus::error;
    out.message = e.what();
  }
  return out;
}

}  // namespace radauhp
