#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "radauhp/basis.hpp"
#include "radauhp/driver.hpp"
#include "radauhp/problem.hpp"
#include "radauhp/transcription.hpp"

using namespace radauhp;

TEST_CASE("straight line initial guess") {
  const OcpProblem p = make_min_energy_double_integrator();
  const Mesh mesh = uniform_mesh(2, 4);
  const DecisionLayout lay = make_layout(p, mesh);
  const Eigen::VectorXd z = initial_guess(p, mesh, lay);
  REQUIRE(z.size() == lay.num_vars);

  // Fixed times at their (equal) bounds.
  CHECK(z[lay.t0_index] == doctest::Approx(0.0));
  CHECK(z[lay.tf_index] == doctest::Approx(1.0));

  // States interpolate the endpoint guesses linearly in tau.
  const CollocationSolution sol = unpack(z, lay, mesh);
  for (int k = 0; k < 2; ++k) {
    const IntervalSolution& s = sol.intervals[k];
    for (int j = 0; j < s.tau_support.size(); ++j) {
      const double a = 0.5 * (s.tau_support[j] + 1.0);
      CHECK(s.states(j, 0) == doctest::Approx(a).epsilon(1e-12));   // 0 -> 1
      CHECK(s.states(j, 1) == doctest::Approx(0.0).epsilon(1e-12));  // 0 -> 0
    }
    // Controls at the bound midpoint.
    CHECK(s.controls.cwiseAbs().maxCoeff() <= 1e-12);  // [-50, 50] -> 0
  }
}

TEST_CASE("free final time guess is the bound midpoint") {
  const OcpProblem p = make_min_time_double_integrator(1.0);
  const Mesh mesh = uniform_mesh(3, 4);
  const DecisionLayout lay = make_layout(p, mesh);
  const Eigen::VectorXd z = initial_guess(p, mesh, lay);
  CHECK(z[lay.tf_index] ==
        doctest::Approx(0.5 * (p.tf_lower + p.tf_upper)).epsilon(1e-12));
}

TEST_CASE("warm start interpolates the previous solution exactly on polynomials") {
  const OcpProblem p = make_min_energy_double_integrator();
  const Mesh old_mesh = uniform_mesh(2, 4);

  auto y1 = [](double tau) { return 0.1 + 0.2 * tau + 0.3 * tau * tau * tau; };
  auto y2 = [](double tau) { return 0.4 - 0.5 * tau * tau; };
  auto uc = [](double tau) { return 2.0 - 3.0 * tau; };

  CollocationSolution prev;
  prev.t0 = 0.0;
  prev.tf = 1.0;
  const LgrRule rule = lgr_rule(4);
  for (int k = 0; k < 2; ++k) {
    const IntervalGrid g = interval_grid(rule, old_mesh.left(k), old_mesh.right(k));
    IntervalSolution s;
    s.tau_support = g.support();
    s.states.resize(5, 2);
    s.controls.resize(4, 1);
    for (int j = 0; j < 5; ++j) {
      s.states(j, 0) = y1(s.tau_support[j]);
      s.states(j, 1) = y2(s.tau_support[j]);
    }
    for (int j = 0; j < 4; ++j) s.controls(j, 0) = uc(g.colloc[j]);
    prev.intervals.push_back(std::move(s));
  }

  Mesh new_mesh;
  new_mesh.fractions = {-1.0, -0.55, 0.15, 1.0};
  new_mesh.degrees = {5, 3, 6};
  new_mesh.segments = {{SegmentKind::smooth, 0, 3}};
  new_mesh.validate();

  const DecisionLayout lay = make_layout(p, new_mesh);
  const Eigen::VectorXd z = warm_start(p, prev, new_mesh, lay);
  const CollocationSolution out = unpack(z, lay, new_mesh);
  CHECK(out.t0 == doctest::Approx(0.0));
  CHECK(out.tf == doctest::Approx(1.0));

  for (int k = 0; k < 3; ++k) {
    const IntervalSolution& s = out.intervals[k];
    const LgrRule r = lgr_rule(new_mesh.degrees[k]);
    const IntervalGrid g = interval_grid(r, new_mesh.left(k), new_mesh.right(k));
    for (int j = 0; j < s.tau_support.size(); ++j) {
      CHECK(s.states(j, 0) == doctest::Approx(y1(s.tau_support[j])).epsilon(1e-11));
      CHECK(s.states(j, 1) == doctest::Approx(y2(s.tau_support[j])).epsilon(1e-11));
    }
    for (int j = 0; j < s.controls.rows(); ++j) {
      CHECK(s.controls(j, 0) == doctest::Approx(uc(g.colloc[j])).epsilon(1e-11));
    }
  }
}

TEST_CASE("warm start clips to the variable bounds") {
  OcpProblem p = make_min_energy_double_integrator();
  p.u_lower[0] = -1.0;
  p.u_upper[0] = 1.0;
  const Mesh mesh = uniform_mesh(1, 4);

  CollocationSolution prev;
  prev.t0 = 0.0;
  prev.tf = 1.0;
  const IntervalGrid g = interval_grid(lgr_rule(4), -1.0, 1.0);
  IntervalSolution s;
  s.tau_support = g.support();
  s.states = Eigen::MatrixXd::Zero(5, 2);
  s.controls = Eigen::MatrixXd::Constant(4, 1, 7.0);  // above the new bound
  prev.intervals.push_back(std::move(s));

  const DecisionLayout lay = make_layout(p, mesh);
  const Eigen::VectorXd z = warm_start(p, prev, mesh, lay);
  for (int j = 0; j < 4; ++j) {
    CHECK(z[lay.control_index(0, j, 0)] <= 1.0);
  }
}

TEST_CASE("smooth problem converges without refinement or detections") {
  const OcpProblem p = make_min_energy_double_integrator();
  RunConfig cfg;
  const RunHistory h = run(p, cfg);
  REQUIRE(h.converged);
  CHECK(h.iterations.size() == 1);
  CHECK(h.iterations[0].detections.detections.empty());
  CHECK(h.iterations[0].cost == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(h.solution.tf == doctest::Approx(1.0));
  for (double e : h.iterations[0].e_max) CHECK(e <= cfg.epsilon);
}

TEST_CASE("bang-bang problem brackets its switch") {
  const OcpProblem p = make_min_time_double_integrator(1.0);
  RunConfig cfg;
  cfg.initial_intervals = 9;
  cfg.initial_degree = 3;
  const RunHistory h = run(p, cfg);
  REQUIRE(h.converged);

  // Detection fires on the very first iteration.
  REQUIRE(!h.iterations.empty());
  CHECK(!h.iterations[0].detections.detections.empty());

  // Exactly one nonsmooth segment, pinning a point near tau = 0.
  int nonsmooth = 0;
  double pin = -2.0, lo = 0.0, hi = 0.0;
  for (const Segment& s : h.final_mesh.segments) {
    if (s.kind != SegmentKind::nonsmooth) continue;
    ++nonsmooth;
    pin = h.final_mesh.fractions[s.first + 1];
    lo = h.final_mesh.fractions[s.first];
    hi = h.final_mesh.fractions[s.first + 2];
  }
  CHECK(nonsmooth == 1);
  CHECK(std::abs(pin - 0.0) <= hi - lo);

  CHECK(h.solution.tf == doctest::Approx(2.0).epsilon(1e-5));

  // Every refinement log replays onto the recorded meshes.
  for (size_t i = 0; i + 1 < h.iterations.size(); ++i) {
    const Mesh replayed = replay(h.iterations[i].mesh, h.iterations[i].refinement);
    CHECK(replayed.fractions == h.iterations[i + 1].mesh.fractions);
    CHECK(replayed.degrees == h.iterations[i + 1].mesh.degrees);
  }
}
