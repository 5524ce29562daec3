#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "radauhp/basis.hpp"
#include "radauhp/error_estimate.hpp"
#include "radauhp/mesh.hpp"
#include "radauhp/problem.hpp"

using namespace radauhp;

namespace {

// Scalar test problem with no controls.
OcpProblem scalar_problem(std::function<double(double y, double t)> rhs) {
  OcpProblem p;
  p.name = "scalar";
  p.n_y = 1;
  p.n_u = 0;
  p.dynamics = [rhs](const Eigen::VectorXd& y, const Eigen::VectorXd&, double t) {
    return Eigen::VectorXd::Constant(1, rhs(y[0], t));
  };
  p.y_lower = Eigen::VectorXd::Constant(1, -100.0);
  p.y_upper = Eigen::VectorXd::Constant(1, 100.0);
  p.u_lower = Eigen::VectorXd(0);
  p.u_upper = Eigen::VectorXd(0);
  return p;
}

// Collocation solution of y' = y, y(0) = 1 on a single interval [0, 1],
// built from the defining linear system rather than the NLP solver.
CollocationSolution collocate_exponential(int degree) {
  const LgrRule rule = lgr_rule(degree);
  const IntervalGrid grid = interval_grid(rule, -1.0, 1.0);
  const Eigen::MatrixXd d = diff_matrix(grid);
  // D * Y = (h/2) * Y at the collocation points with Y[0] = 1, h = 1.
  Eigen::MatrixXd a = d.rightCols(degree);
  for (int i = 0; i < degree; ++i) {
    if (i > 0) a(i, i - 1) -= 0.5;  // colloc point i is support node i
  }
  Eigen::VectorXd b = -d.col(0);
  b[0] += 0.5;
  const Eigen::VectorXd tail = a.colPivHouseholderQr().solve(b);

  CollocationSolution sol;
  sol.t0 = 0.0;
  sol.tf = 1.0;
  IntervalSolution s;
  s.tau_support = grid.support();
  s.states.resize(degree + 1, 1);
  s.states(0, 0) = 1.0;
  for (int j = 0; j < degree; ++j) s.states(j + 1, 0) = tail[j];
  s.controls.resize(degree, 0);
  sol.intervals.push_back(std::move(s));
  return sol;
}

// Reimplements the error definition with composite-Simpson reintegration of
// the interpolated dynamics, as an independent reference.
double oracle_e_max(const CollocationSolution& sol, int degree) {
  const IntervalSolution& s = sol.intervals[0];
  std::vector<double> support(s.tau_support.data(),
                              s.tau_support.data() + s.tau_support.size());
  std::vector<double> vals(support.size());
  for (size_t j = 0; j < vals.size(); ++j) vals[j] = s.states(j, 0);

  auto interp = [&](double tau) {
    return lagrange_eval_one(support, vals, tau);
  };
  // dy/dtau = (h/2) y with h = tf - t0 = 1.
  auto rhs = [&](double tau) { return 0.5 * interp(tau); };
  auto integral = [&](double a, double b) {
    const int n = 20000;  // even
    const double h = (b - a) / n;
    double acc = rhs(a) + rhs(b);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * rhs(a + i * h);
    return acc * h / 3.0;
  };

  const LgrRule finer = lgr_rule(degree + 1);
  const IntervalGrid fg = interval_grid(finer, -1.0, 1.0);
  const Eigen::VectorXd pts = fg.support();
  const double scale = 1.0 + s.states.col(0).cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (int j = 1; j <= degree + 1; ++j) {
    const double reint = vals[0] + integral(-1.0, pts[j]);
    worst = std::max(worst, std::abs(interp(pts[j]) - reint) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("estimate matches an independent reintegration oracle") {
  const OcpProblem p = scalar_problem([](double y, double) { return y; });
  for (int degree = 3; degree <= 8; ++degree) {
    const Mesh mesh = uniform_mesh(1, degree);
    const CollocationSolution sol = collocate_exponential(degree);
    const ErrorReport rep = estimate_errors(p, mesh, sol);
    REQUIRE(rep.e_max.size() == 1);
    const double want = oracle_e_max(sol, degree);
    CHECK(rep.e_max[0] > 0.0);
    CHECK(std::abs(rep.e_max[0] - want) <= 0.1 * want);
  }
}

TEST_CASE("exactly represented polynomial dynamics give zero error") {
  // y = t^3 has y' = 3 t^2; with degree >= 3 the interpolant and the
  // reintegration agree to rounding.
  const OcpProblem p = scalar_problem([](double, double t) { return 3 * t * t; });
  for (int degree : {3, 5, 8}) {
    const Mesh mesh = uniform_mesh(2, degree);
    const LgrRule rule = lgr_rule(degree);
    CollocationSolution sol;
    sol.t0 = 0.0;
    sol.tf = 1.0;
    for (int k = 0; k < 2; ++k) {
      const IntervalGrid g = interval_grid(rule, mesh.left(k), mesh.right(k));
      IntervalSolution s;
      s.tau_support = g.support();
      s.states.resize(degree + 1, 1);
      for (int j = 0; j <= degree; ++j) {
        const double t = 0.5 * (s.tau_support[j] + 1.0);
        s.states(j, 0) = t * t * t;
      }
      s.controls.resize(degree, 0);
      sol.intervals.push_back(std::move(s));
    }
    const ErrorReport rep = estimate_errors(p, mesh, sol);
    REQUIRE(rep.e_max.size() == 2);
    CHECK(rep.e_max[0] <= 1e-12);
    CHECK(rep.e_max[1] <= 1e-12);
  }
}

TEST_CASE("report shapes") {
  const OcpProblem p = scalar_problem([](double y, double) { return y; });
  const Mesh mesh = uniform_mesh(1, 4);
  const CollocationSolution sol = collocate_exponential(4);
  const ErrorReport rep = estimate_errors(p, mesh, sol);
  REQUIRE(rep.abs_error.size() == 1);
  REQUIRE(rep.rel_error.size() == 1);
  CHECK(rep.abs_error[0].rows() == 5);  // P + 1 comparison points
  CHECK(rep.abs_error[0].cols() == 1);
  CHECK(rep.rel_error[0].maxCoeff() == doctest::Approx(rep.e_max[0]));
}
