#pragma once

#include <string>
#include <vector>

#include "radauhp/error_estimate.hpp"
#include "radauhp/jump.hpp"
#include "radauhp/mesh.hpp"

namespace radauhp {

enum class RefineActionKind {
  bracket_created,
  bracket_updated,
  bracket_relabeled,
  smooth_subdivided,
  degree_raised,
};

/// One replayable mesh edit: the interval run between two existing mesh
/// fractions is replaced by the described intervals.  Applying the recorded
/// actions of a refinement pass to its input mesh reproduces the output
/// mesh exactly.
struct RefineAction {
  RefineActionKind kind = RefineActionKind::degree_raised;
  double span_left = 0.0;            // existing fraction, start of the run
  double span_right = 0.0;           // existing fraction, end of the run
  std::vector<double> interior;      // new boundaries strictly inside the span
  std::vector<int> degrees;          // one per replacement interval
  std::vector<SegmentKind> kinds;    // one per replacement interval
  std::vector<int> pair;             // bracket pairing id, -1 for smooth
};

struct RefinementLog {
  std::vector<RefineAction> actions;
};

std::string to_string(RefineActionKind kind);
std::string to_string(const RefineAction& action);

/// Applies one recorded action.  Throws std::invalid_argument when the span
/// boundaries are not existing mesh fractions.
Mesh apply_action(const Mesh& mesh, const RefineAction& action);

/// Replays a whole log against a starting mesh.
Mesh replay(Mesh mesh, const RefinementLog& log);

/// Confines every detection's bracket bounds to the segment containing its
/// location and resolves overlapping bounds of consecutive detections by
/// moving both to the midpoint of the two locations.
DetectionReport adjust_bounds(const DetectionReport& detections, const Mesh& mesh);

/// Replaces the mesh on [lower, upper] of each detection lying on a smooth
/// segment with a two-interval bracket around the location, both intervals
/// collocated with 4 points.  Partially covered old intervals are trimmed
/// and keep their degree; fully covered old interior boundaries vanish.
Mesh bracket(const Mesh& mesh, const std::vector<Detection>& detections,
             RefinementLog* log);

/// Contracts the nonsmooth segment at segment_index around the detections
/// inside it: one fresh two-interval bracket per detection, 4-point smooth
/// intervals in the connecting gaps, and the freed outer gaps absorbed by
/// extending a smooth neighbor (degree unchanged) or, when the neighbor is
/// absent or nonsmooth, by a new 4-point smooth interval.
Mesh update_bracket(const Mesh& mesh, int segment_index,
                    const std::vector<Detection>& detections, RefinementLog* log);

/// Relabels as smooth every nonsmooth segment that contains no detection
/// and has at least one interval failing the tolerance.  Fractions and
/// degrees are untouched.
Mesh relabel(const Mesh& mesh, const DetectionReport& detections,
             const ErrorReport& report, double epsilon, RefinementLog* log);

/// Smooth ph refinement with the old-to-intermediate interval mapping:
/// an intermediate smooth interval inherits the error of the unique old
/// smooth interval whose open interior it overlaps, or of an identical old
/// nonsmooth interval; unmapped intervals are untouched; old intervals
/// containing a detection count as error-free.  A failing interval of
/// degree P gets degree P + ceil(log10(e_max/epsilon)), or is split into
/// equal minimum-degree subintervals when that exceeds the degree cap.
Mesh smooth_refine(const Mesh& old_mesh, const Mesh& intermediate_mesh,
                   const ErrorReport& report, const DetectionReport& detections,
                   double epsilon, RefinementLog* log);

struct RefineResult {
  Mesh mesh;
  RefinementLog log;
  DetectionReport adjusted;  // detections after bound adjustment
};

/// Full refinement pass: adjust bounds, bracket detections on smooth
/// segments, update brackets around detections in nonsmooth segments,
/// relabel stale brackets, then refine smooth regions.
RefineResult refine_mesh(const Mesh& mesh, const DetectionReport& detections,
                         const ErrorReport& report, double epsilon);

}  // namespace radauhp
