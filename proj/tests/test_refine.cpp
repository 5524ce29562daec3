#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "radauhp/jump.hpp"
#include "radauhp/mesh.hpp"
#include "radauhp/refine.hpp"

using namespace radauhp;

namespace {

bool same_mesh(const Mesh& a, const Mesh& b) {
  if (a.fractions != b.fractions) return false;
  if (a.degrees != b.degrees) return false;
  if (a.segments.size() != b.segments.size()) return false;
  for (size_t i = 0; i < a.segments.size(); ++i) {
    if (a.segments[i].kind != b.segments[i].kind) return false;
    if (a.segments[i].first != b.segments[i].first) return false;
    if (a.segments[i].count != b.segments[i].count) return false;
  }
  return true;
}

Mesh random_mesh(std::mt19937& rng) {
  std::uniform_int_distribution<int> kd(2, 10);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::uniform_int_distribution<int> pd(3, 14);
  const int k = kd(rng);
  Mesh m;
  // Interior fractions with a guaranteed minimum width.
  std::vector<double> cuts;
  while (static_cast<int>(cuts.size()) < k - 1) {
    const double c = -1.0 + 2.0 * ud(rng);
    bool ok = std::abs(c - 1.0) > 0.03 && std::abs(c + 1.0) > 0.03;
    for (double o : cuts) ok = ok && std::abs(c - o) > 0.03;
    if (ok) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  m.fractions.push_back(-1.0);
  m.fractions.insert(m.fractions.end(), cuts.begin(), cuts.end());
  m.fractions.push_back(1.0);
  for (int i = 0; i < k; ++i) m.degrees.push_back(pd(rng));
  // Random smooth/nonsmooth segment partition.
  int at = 0;
  while (at < k) {
    const bool bracket = (k - at >= 2) && ud(rng) < 0.3;
    if (bracket) {
      m.segments.push_back({SegmentKind::nonsmooth, at, 2});
      m.degrees[at] = 4;
      m.degrees[at + 1] = 4;
      at += 2;
    } else {
      std::uniform_int_distribution<int> run(1, k - at);
      const int len = run(rng);
      m.segments.push_back({SegmentKind::smooth, at, len});
      at += len;
    }
  }
  m.validate();
  return m;
}

DetectionReport random_detections(std::mt19937& rng, const Mesh& m) {
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::uniform_int_distribution<int> nd(0, 3);
  DetectionReport rep;
  const int n = nd(rng);
  std::vector<double> locs;
  while (static_cast<int>(locs.size()) < n) {
    const double d = -0.98 + 1.96 * ud(rng);
    bool ok = true;
    for (double f : m.fractions) ok = ok && std::abs(d - f) > 1e-3;
    for (double o : locs) ok = ok && std::abs(d - o) > 5e-3;
    if (ok) locs.push_back(d);
  }
  std::sort(locs.begin(), locs.end());
  for (double d : locs) {
    Detection det;
    det.location = d;
    det.lower = d - (1e-4 + 0.2 * ud(rng));
    det.upper = d + (1e-4 + 0.2 * ud(rng));
    det.magnitude = 0.2 + ud(rng);
    det.minmod = Eigen::VectorXd::Constant(1, det.magnitude);
    rep.detections.push_back(det);
  }
  return rep;
}

ErrorReport random_errors(std::mt19937& rng, const Mesh& m) {
  std::uniform_real_distribution<double> ud(-9.0, -3.0);
  ErrorReport rep;
  std::mt19937& r = rng;
  for (int k = 0; k < m.num_intervals(); ++k) {
    rep.e_max.push_back(std::pow(10.0, ud(r)));
    rep.abs_error.emplace_back(Eigen::MatrixXd::Constant(m.degrees[k] + 1, 1,
                                                         rep.e_max.back()));
    rep.rel_error.push_back(rep.abs_error.back());
  }
  return rep;
}

}  // namespace

TEST_CASE("randomized refinement scenarios hold the documented invariants") {
  std::mt19937 rng(424242);
  const double epsilon = 1e-6;
  for (int scenario = 0; scenario < 1000; ++scenario) {
    CAPTURE(scenario);
    const Mesh mesh = random_mesh(rng);
    const DetectionReport detections = random_detections(rng, mesh);
    const ErrorReport report = random_errors(rng, mesh);

    const RefineResult res = refine_mesh(mesh, detections, report, epsilon);

    // 1. The refined mesh satisfies every structural invariant.
    REQUIRE_NOTHROW(res.mesh.validate());

    // 2. Replaying the action log reproduces the refined mesh bit-exactly.
    const Mesh replayed = replay(mesh, res.log);
    REQUIRE(same_mesh(replayed, res.mesh));

    // 3. Adjusted detections stay ordered, bracket their location, and are
    //    confined to the segment that contains the location.
    REQUIRE(res.adjusted.detections.size() == detections.detections.size());
    for (size_t i = 0; i < res.adjusted.detections.size(); ++i) {
      const Detection& d = res.adjusted.detections[i];
      REQUIRE(d.lower < d.location);
      REQUIRE(d.location < d.upper);
      const int seg = mesh.segment_of(mesh.interval_of(d.location));
      const double seg_lo = mesh.fractions[mesh.segments[seg].first];
      const double seg_hi =
          mesh.fractions[mesh.segments[seg].first + mesh.segments[seg].count];
      REQUIRE(d.lower >= seg_lo - 1e-15);
      REQUIRE(d.upper <= seg_hi + 1e-15);
      if (i > 0) {
        REQUIRE(res.adjusted.detections[i - 1].upper <= d.lower + 1e-15);
      }
    }

    // 4. Every detection location is pinned by a mesh point whose two
    //    flanking intervals form a nonsmooth segment.
    for (const Detection& d : res.adjusted.detections) {
      int pin = -1;
      for (size_t j = 1; j + 1 < res.mesh.fractions.size(); ++j) {
        if (res.mesh.fractions[j] == d.location) pin = static_cast<int>(j);
      }
      REQUIRE(pin >= 0);
      const int seg = res.mesh.segment_of(pin - 1);
      REQUIRE(res.mesh.segments[seg].kind == SegmentKind::nonsmooth);
      REQUIRE(res.mesh.segments[seg].first == pin - 1);
      REQUIRE(res.mesh.segments[seg].count == 2);
      // Bracket intervals carry 4 collocation points.
      REQUIRE(res.mesh.degrees[pin - 1] == 4);
      REQUIRE(res.mesh.degrees[pin] == 4);
    }
  }
}

TEST_CASE("relabel is a structural no-op") {
  std::mt19937 rng(777);
  const double epsilon = 1e-6;
  for (int scenario = 0; scenario < 200; ++scenario) {
    CAPTURE(scenario);
    const Mesh mesh = random_mesh(rng);
    const ErrorReport report = random_errors(rng, mesh);
    DetectionReport empty;
    RefinementLog log;
    const Mesh out = relabel(mesh, empty, report, epsilon, &log);
    CHECK(out.fractions == mesh.fractions);
    CHECK(out.degrees == mesh.degrees);
    CHECK_NOTHROW(out.validate());
    // A stale bracket flips to smooth only when one of its intervals fails.
    for (size_t s = 0; s < mesh.segments.size(); ++s) {
      if (mesh.segments[s].kind != SegmentKind::nonsmooth) continue;
      const int a = mesh.segments[s].first;
      const bool failing =
          report.e_max[a] > epsilon || report.e_max[a + 1] > epsilon;
      const int seg_now = out.segment_of(a);
      if (failing) {
        CHECK(out.segments[seg_now].kind == SegmentKind::smooth);
      } else {
        CHECK(out.segments[seg_now].kind == SegmentKind::nonsmooth);
      }
    }
  }
}

TEST_CASE("adjust bounds clamps to the segment and resolves overlaps") {
  Mesh m;
  m.fractions = {-1.0, -0.2, 0.2, 1.0};
  m.degrees = {4, 4, 4};
  m.segments = {{SegmentKind::smooth, 0, 1},
                {SegmentKind::smooth, 1, 1},
                {SegmentKind::smooth, 2, 1}};
  m.validate();

  DetectionReport rep;
  Detection a;  // bounds spill out of the middle segment on both sides
  a.location = 0.0;
  a.lower = -0.5;
  a.upper = 0.1;
  Detection b;  // overlaps a
  b.location = 0.08;
  b.lower = 0.02;
  b.upper = 0.9;
  rep.detections = {a, b};

  const DetectionReport adj = adjust_bounds(rep, m);
  REQUIRE(adj.detections.size() == 2);
  // Clamped to the containing segment [-0.2, 0.2].
  CHECK(adj.detections[0].lower == doctest::Approx(-0.2));
  // Overlap resolved at the midpoint of the two locations.
  CHECK(adj.detections[0].upper == doctest::Approx(0.04));
  CHECK(adj.detections[1].lower == doctest::Approx(0.04));
  // The second detection's upper bound is clamped to its segment too.
  CHECK(adj.detections[1].upper == doctest::Approx(0.2));
}

TEST_CASE("apply action rejects spans off the mesh") {
  const Mesh m = uniform_mesh(4, 4);
  RefineAction act;
  act.kind = RefineActionKind::smooth_subdivided;
  act.span_left = -0.3;  // not a mesh fraction
  act.span_right = 0.0;
  act.interior = {};
  act.degrees = {4};
  act.kinds = {SegmentKind::smooth};
  act.pair = {-1};
  CHECK_THROWS_AS(apply_action(m, act), std::invalid_argument);
}

TEST_CASE("action names") {
  CHECK(to_string(RefineActionKind::bracket_created) == "bracket_created");
  CHECK(to_string(RefineActionKind::bracket_updated) == "bracket_updated");
  CHECK(to_string(RefineActionKind::bracket_relabeled) == "bracket_relabeled");
  CHECK(to_string(RefineActionKind::smooth_subdivided) == "smooth_subdivided");
  CHECK(to_string(RefineActionKind::degree_raised) == "degree_raised");
}
