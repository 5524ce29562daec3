#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace radauhp {

/// Continuous-time optimal control problem in Bolza form on tau in [-1,1]:
/// minimize  mayer(y(-1), t0, y(+1), tf) + integral of lagrange(y, u, t)
/// subject to dy/dt = dynamics(y, u, t), boundary(...) within its bounds,
/// path(y, u, t) <= 0, and box bounds on states, controls, t0 and tf.
///
/// Evaluators must be pure functions; null mayer/lagrange mean zero.
struct OcpProblem {
  std::string name;
  int n_y = 0;
  int n_u = 0;
  int n_b = 0;
  int n_c = 0;

  std::function<double(const Eigen::VectorXd& y0, double t0,
                       const Eigen::VectorXd& yf, double tf)>
      mayer;
  std::function<double(const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                       double t)>
      lagrange;
  std::function<Eigen::VectorXd(const Eigen::VectorXd& y,
                                const Eigen::VectorXd& u, double t)>
      dynamics;
  std::function<Eigen::VectorXd(const Eigen::VectorXd& y0, double t0,
                                const Eigen::VectorXd& yf, double tf)>
      boundary;
  std::function<Eigen::VectorXd(const Eigen::VectorXd& y,
                                const Eigen::VectorXd& u, double t)>
      path;

  Eigen::VectorXd y_lower, y_upper;
  Eigen::VectorXd u_lower, u_upper;
  double t0_lower = 0.0, t0_upper = 0.0;
  double tf_lower = 0.0, tf_upper = 0.0;

  // Per-row feasible range of the boundary evaluator.  The default is the
  // one-sided form boundary(...) <= 0; equality conditions use lower == upper.
  Eigen::VectorXd boundary_lower, boundary_upper;

  // Optional endpoint state values used by the straight-line initial guess;
  // components fall back to bound midpoints when left empty.
  Eigen::VectorXd y0_guess, yf_guess;
};

/// Minimum-time reorientation of a robotic arm: six states, three bounded
/// controls, free final time, bang-bang optimal control with five switches.
OcpProblem make_robot_arm();

/// Minimum-time double integrator from (0,0) to (d,0) with |u| <= 1.
/// Analytic optimum: tf = 2*sqrt(d) with one control switch at t = sqrt(d)
/// (tau = 0).
OcpProblem make_min_time_double_integrator(double d);

/// Minimum-energy double integrator on t in [0,1] from (0,0) to (1,0),
/// cost integral of u^2/2.  Analytic optimum u(t) = 6 - 12 t, cost 6.
/// The control solution is smooth; used as a no-false-positive benchmark.
OcpProblem make_min_energy_double_integrator();

/// Registry lookup by name: "robot-arm", "min-time-di", "min-energy-di".
/// Throws std::invalid_argument for unknown names.
OcpProblem make_problem(const std::string& name);

std::vector<std::string> problem_names();

}  // namespace radauhp
