#include "radauhp/problem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace radauhp {

namespace {

constexpr double kArmLength = 5.0;

double inertia_phi(double y1) {
  const double a = kArmLength - y1;
  return (a * a * a + y1 * y1 * y1) / 3.0;
}

Eigen::VectorXd constant_vector(int n, double v) {
  return Eigen::VectorXd::Constant(n, v);
}

}  // namespace

OcpProblem make_robot_arm() {
  using std::numbers::pi;
  OcpProblem p;
  p.name = "robot-arm";
  p.n_y = 6;
  p.n_u = 3;
  p.n_b = 12;
  p.n_c = 0;

  p.mayer = [](const Eigen::VectorXd&, double, const Eigen::VectorXd&, double tf) {
    return tf;
  };
  p.dynamics = [](const Eigen::VectorXd& y, const Eigen::VectorXd& u, double) {
    const double i_phi = inertia_phi(y[0]);
    const double s = std::sin(y[4]);
    const double i_theta = i_phi * s * s;
    Eigen::VectorXd dy(6);
    dy[0] = y[1];
    dy[1] = u[0] / kArmLength;
    dy[2] = y[3];
    dy[3] = u[1] / i_theta;
    dy[4] = y[5];
    dy[5] = u[2] / i_phi;
    return dy;
  };

  const Eigen::VectorXd y_start =
      (Eigen::VectorXd(6) << 4.5, 0.0, 0.0, 0.0, pi / 4.0, 0.0).finished();
  const Eigen::VectorXd y_end =
      (Eigen::VectorXd(6) << 4.5, 0.0, 2.0 * pi / 3.0, 0.0, pi / 4.0, 0.0).finished();
  p.boundary = [y_start, y_end](const Eigen::VectorXd& y0, double,
                                const Eigen::VectorXd& yf, double) {
    Eigen::VectorXd r(12);
    r.head(6) = y0 - y_start;
    r.tail(6) = yf - y_end;
    return r;
  };
  p.boundary_lower = Eigen::VectorXd::Zero(12);
  p.boundary_upper = Eigen::VectorXd::Zero(12);
  p.y0_guess = y_start;
  p.yf_guess = y_end;

  p.y_lower = (Eigen::VectorXd(6) << 0.0, -10.0, -10.0, -10.0, 0.1, -10.0).finished();
  p.y_upper = (Eigen::VectorXd(6) << 5.0, 10.0, 10.0, 10.0, pi - 0.1, 10.0).finished();
  p.u_lower = constant_vector(3, -1.0);
  p.u_upper = constant_vector(3, 1.0);
  p.t0_lower = 0.0;
  p.t0_upper = 0.0;
  p.tf_lower = 0.1;
  p.tf_upper = 20.0;
  return p;
}

OcpProblem make_min_time_double_integrator(double d) {
  if (!(d > 0.0)) {
    throw std::invalid_argument("make_min_time_double_integrator: requires d > 0");
  }
  OcpProblem p;
  p.name = "min-time-di";
  p.n_y = 2;
  p.n_u = 1;
  p.n_b = 4;
  p.n_c = 0;

  p.mayer = [](const Eigen::VectorXd&, double, const Eigen::VectorXd&, double tf) {
    return tf;
  };
  p.dynamics = [](const Eigen::VectorXd& y, const Eigen::VectorXd& u, double) {
    Eigen::VectorXd dy(2);
    dy[0] = y[1];
    dy[1] = u[0];
    return dy;
  };
  p.boundary = [d](const Eigen::VectorXd& y0, double, const Eigen::VectorXd& yf,
                   double) {
    Eigen::VectorXd r(4);
    r[0] = y0[0];
    r[1] = y0[1];
    r[2] = yf[0] - d;
    r[3] = yf[1];
    return r;
  };
  p.boundary_lower = Eigen::VectorXd::Zero(4);
  p.boundary_upper = Eigen::VectorXd::Zero(4);
  p.y0_guess = Eigen::VectorXd::Zero(2);
  p.yf_guess = (Eigen::VectorXd(2) << d, 0.0).finished();

  const double scale = std::max(1.0, d);
  p.y_lower = constant_vector(2, -10.0 * scale);
  p.y_upper = constant_vector(2, 10.0 * scale);
  p.u_lower = constant_vector(1, -1.0);
  p.u_upper = constant_vector(1, 1.0);
  p.t0_lower = 0.0;
  p.t0_upper = 0.0;
  p.tf_lower = 0.1;
  p.tf_upper = std::max(10.0, 4.0 * std::sqrt(d));
  return p;
}

OcpProblem make_min_energy_double_integrator() {
  OcpProblem p;
  p.name = "min-energy-di";
  p.n_y = 2;
  p.n_u = 1;
  p.n_b = 4;
  p.n_c = 0;

  p.lagrange = [](const Eigen::VectorXd&, const Eigen::VectorXd& u, double) {
    return 0.5 * u[0] * u[0];
  };
  p.dynamics = [](const Eigen::VectorXd& y, const Eigen::VectorXd& u, double) {
    Eigen::VectorXd dy(2);
    dy[0] = y[1];
    dy[1] = u[0];
    return dy;
  };
  p.boundary = [](const Eigen::VectorXd& y0, double, const Eigen::VectorXd& yf,
                  double) {
    Eigen::VectorXd r(4);
    r[0] = y0[0];
    r[1] = y0[1];
    r[2] = yf[0] - 1.0;
    r[3] = yf[1];
    return r;
  };
  p.boundary_lower = Eigen::VectorXd::Zero(4);
  p.boundary_upper = Eigen::VectorXd::Zero(4);
  p.y0_guess = Eigen::VectorXd::Zero(2);
  p.yf_guess = (Eigen::VectorXd(2) << 1.0, 0.0).finished();

  p.y_lower = constant_vector(2, -10.0);
  p.y_upper = constant_vector(2, 10.0);
  p.u_lower = constant_vector(1, -50.0);
  p.u_upper = constant_vector(1, 50.0);
  p.t0_lower = 0.0;
  p.t0_upper = 0.0;
  p.tf_lower = 1.0;
  p.tf_upper = 1.0;
  return p;
}

OcpProblem make_problem(const std::string& name) {
  if (name == "robot-arm") return make_robot_arm();
  if (name == "min-time-di") return make_min_time_double_integrator(1.0);
  if (name == "min-energy-di") return make_min_energy_double_integrator();
  throw std::invalid_argument("unknown problem: " + name);
}

std::vector<std::string> problem_names() {
  return {"robot-arm", "min-time-di", "min-energy-di"};
}

}  // namespace radauhp
