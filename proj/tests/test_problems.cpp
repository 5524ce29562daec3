#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "radauhp/problem.hpp"

using namespace radauhp;
using std::numbers::pi;

TEST_CASE("robot arm dynamics at a hand-computed point") {
  const OcpProblem p = make_robot_arm();
  REQUIRE(p.n_y == 6);
  REQUIRE(p.n_u == 3);
  REQUIRE(p.n_b == 12);

  Eigen::VectorXd y(6), u(3);
  y << 4.5, 0.2, 1.0, -0.3, pi / 4.0, 0.1;
  u << 1.0, -0.5, 0.25;

  // Length 5 arm held at rho = 4.5: the pivot-to-tip inertia is
  // ((5 - 4.5)^3 + 4.5^3) / 3 and the azimuthal one carries sin^2(phi).
  const double i_phi = (0.5 * 0.5 * 0.5 + 4.5 * 4.5 * 4.5) / 3.0;
  const double i_theta = i_phi * std::sin(pi / 4.0) * std::sin(pi / 4.0);
  CHECK(i_phi == doctest::Approx(91.25 / 3.0).epsilon(1e-15));

  const Eigen::VectorXd dy = p.dynamics(y, u, 0.0);
  REQUIRE(dy.size() == 6);
  CHECK(dy[0] == doctest::Approx(0.2));
  CHECK(dy[1] == doctest::Approx(1.0 / 5.0));
  CHECK(dy[2] == doctest::Approx(-0.3));
  CHECK(dy[3] == doctest::Approx(-0.5 / i_theta));
  CHECK(dy[4] == doctest::Approx(0.1));
  CHECK(dy[5] == doctest::Approx(0.25 / i_phi));

  CHECK(p.mayer(y, 0.0, y, 7.5) == doctest::Approx(7.5));
  CHECK_FALSE(p.lagrange);
}

TEST_CASE("robot arm boundary conditions pin both endpoints") {
  const OcpProblem p = make_robot_arm();
  Eigen::VectorXd y0(6), yf(6);
  y0 << 4.5, 0.0, 0.0, 0.0, pi / 4.0, 0.0;
  yf << 4.5, 0.0, 2.0 * pi / 3.0, 0.0, pi / 4.0, 0.0;
  const Eigen::VectorXd r = p.boundary(y0, 0.0, yf, 9.1);
  REQUIRE(r.size() == 12);
  CHECK(r.cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((p.boundary_lower.array() == 0.0).all());
  CHECK((p.boundary_upper.array() == 0.0).all());

  // Off-target endpoint shows up in the matching residual row.
  yf[2] += 0.5;
  const Eigen::VectorXd r2 = p.boundary(y0, 0.0, yf, 9.1);
  CHECK(r2[8] == doctest::Approx(0.5));
  CHECK(std::abs(r2[0]) <= 1e-15);
}

TEST_CASE("robot arm bounds") {
  const OcpProblem p = make_robot_arm();
  CHECK(p.u_lower[0] == doctest::Approx(-1.0));
  CHECK(p.u_upper[2] == doctest::Approx(1.0));
  CHECK(p.y_lower[0] == doctest::Approx(0.0));
  CHECK(p.y_upper[0] == doctest::Approx(5.0));
  CHECK(p.y_lower[4] == doctest::Approx(0.1));
  CHECK(p.y_upper[4] == doctest::Approx(pi - 0.1));
  CHECK(p.t0_lower == doctest::Approx(0.0));
  CHECK(p.t0_upper == doctest::Approx(0.0));
  CHECK(p.tf_upper > p.tf_lower);
}

TEST_CASE("min time double integrator") {
  const OcpProblem p = make_min_time_double_integrator(2.25);
  Eigen::VectorXd y(2), u(1);
  y << 0.7, -1.3;
  u << 0.4;
  const Eigen::VectorXd dy = p.dynamics(y, u, 0.0);
  CHECK(dy[0] == doctest::Approx(-1.3));
  CHECK(dy[1] == doctest::Approx(0.4));

  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(2), yf(2);
  yf << 2.25, 0.0;
  CHECK(p.boundary(y0, 0.0, yf, 3.0).cwiseAbs().maxCoeff() <= 1e-15);
  yf << 2.0, 0.1;
  const Eigen::VectorXd r = p.boundary(y0, 0.0, yf, 3.0);
  CHECK(r[2] == doctest::Approx(-0.25));
  CHECK(r[3] == doctest::Approx(0.1));

  CHECK(p.mayer(y0, 0.0, yf, 3.0) == doctest::Approx(3.0));
  CHECK(p.u_lower[0] == doctest::Approx(-1.0));
  CHECK(p.u_upper[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_min_time_double_integrator(0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_min_time_double_integrator(-1.0), std::invalid_argument);
}

TEST_CASE("min energy double integrator") {
  const OcpProblem p = make_min_energy_double_integrator();
  Eigen::VectorXd y(2), u(1);
  y << 0.0, 0.0;
  u << 3.0;
  CHECK(p.lagrange(y, u, 0.0) == doctest::Approx(4.5));
  CHECK_FALSE(p.mayer);
  // Fixed horizon [0, 1].
  CHECK(p.t0_lower == doctest::Approx(0.0));
  CHECK(p.t0_upper == doctest::Approx(0.0));
  CHECK(p.tf_lower == doctest::Approx(1.0));
  CHECK(p.tf_upper == doctest::Approx(1.0));

  // The analytic optimum u(t) = 6 - 12 t steers (0,0) to (1,0) at cost 6:
  // y2(t) = 6t - 6t^2 and y1(t) = 3t^2 - 2t^3 satisfy the dynamics and
  // boundary rows, and the integral of u^2/2 over [0,1] is 6.
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(2), yf(2);
  yf << 1.0, 0.0;
  CHECK(p.boundary(y0, 0.0, yf, 1.0).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("registry") {
  for (const auto& name : problem_names()) {
    CHECK(make_problem(name).name == name);
  }
  CHECK_THROWS_AS(make_problem("nope"), std::invalid_argument);
}
