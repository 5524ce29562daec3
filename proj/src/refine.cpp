#include "radauhp/refine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace radauhp {

namespace {

constexpr double kCollisionTol = 1e-12;
constexpr int kBracketDegree = 4;

struct Rec {
  double left = 0.0;
  double right = 0.0;
  int degree = 0;
  SegmentKind kind = SegmentKind::smooth;
  int pair = -1;  // bracket grouping id for nonsmooth intervals
};

std::vector<Rec> to_recs(const Mesh& mesh) {
  std::vector<Rec> recs(mesh.num_intervals());
  for (int k = 0; k < mesh.num_intervals(); ++k) {
    recs[k] = {mesh.left(k), mesh.right(k), mesh.degrees[k], SegmentKind::smooth, -1};
  }
  int pair_id = 0;
  for (const Segment& s : mesh.segments) {
    if (s.kind != SegmentKind::nonsmooth) continue;
    recs[s.first].kind = recs[s.first + 1].kind = SegmentKind::nonsmooth;
    recs[s.first].pair = recs[s.first + 1].pair = pair_id++;
  }
  return recs;
}

Mesh from_recs(const Mesh& like, const std::vector<Rec>& recs) {
  Mesh mesh;
  mesh.min_degree = like.min_degree;
  mesh.max_degree = like.max_degree;
  const int n = static_cast<int>(recs.size());
  mesh.fractions.resize(n + 1);
  mesh.degrees.resize(n);
  for (int k = 0; k < n; ++k) {
    mesh.fractions[k] = recs[k].left;
    mesh.degrees[k] = recs[k].degree;
  }
  mesh.fractions[n] = recs[n - 1].right;

  int k = 0;
  while (k < n) {
    if (recs[k].kind == SegmentKind::nonsmooth) {
      if (k + 1 >= n || recs[k + 1].kind != SegmentKind::nonsmooth ||
          recs[k + 1].pair != recs[k].pair) {
        throw std::logic_error("unpaired nonsmooth interval in refinement");
      }
      mesh.segments.push_back({SegmentKind::nonsmooth, k, 2});
      k += 2;
    } else {
      const int first = k;
      while (k < n && recs[k].kind == SegmentKind::smooth) ++k;
      mesh.segments.push_back({SegmentKind::smooth, first, k - first});
    }
  }
  mesh.validate();
  return mesh;
}

int find_fraction(const Mesh& mesh, double value) {
  for (int i = 0; i < static_cast<int>(mesh.fractions.size()); ++i) {
    if (mesh.fractions[i] == value) return i;
  }
  for (int i = 0; i < static_cast<int>(mesh.fractions.size()); ++i) {
    if (std::abs(mesh.fractions[i] - value) <= kCollisionTol) return i;
  }
  return -1;
}

double min_half_width(double parent_width) {
  return std::max(1e-6, 1e-3 * parent_width);
}

struct SegSpan {
  double left = 0.0;
  double right = 0.0;
};

SegSpan segment_span(const Mesh& mesh, int seg_index) {
  const Segment& s = mesh.segments[seg_index];
  return {mesh.fractions[s.first], mesh.fractions[s.first + s.count]};
}

void push_action(RefinementLog* log, const RefineAction& action) {
  if (log != nullptr) log->actions.push_back(action);
}

}  // namespace

std::string to_string(RefineActionKind kind) {
  switch (kind) {
    case RefineActionKind::bracket_created: return "bracket_created";
    case RefineActionKind::bracket_updated: return "bracket_updated";
    case RefineActionKind::bracket_relabeled: return "bracket_relabeled";
    case RefineActionKind::smooth_subdivided: return "smooth_subdivided";
    case RefineActionKind::degree_raised: return "degree_raised";
  }
  return "unknown";
}

std::string to_string(const RefineAction& action) {
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string s = to_string(action.kind);
  s += " span=[" + num(action.span_left) + "," + num(action.span_right) + "]";
  s += " interior=(";
  for (size_t i = 0; i < action.interior.size(); ++i) {
    if (i) s += ",";
    s += num(action.interior[i]);
  }
  s += ") degrees=(";
  for (size_t i = 0; i < action.degrees.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(action.degrees[i]);
  }
  s += ") kinds=(";
  for (size_t i = 0; i < action.kinds.size(); ++i) {
    if (i) s += ",";
    s += action.kinds[i] == SegmentKind::nonsmooth ? "n" : "s";
  }
  s += ")";
  return s;
}

Mesh apply_action(const Mesh& mesh, const RefineAction& action) {
  const size_t n_new = action.degrees.size();
  if (n_new == 0 || action.kinds.size() != n_new || action.pair.size() != n_new ||
      action.interior.size() + 1 != n_new) {
    throw std::invalid_argument("apply_action: inconsistent replacement");
  }
  const int a = find_fraction(mesh, action.span_left);
  const int b = find_fraction(mesh, action.span_right);
  if (a < 0 || b < 0 || a >= b) {
    throw std::invalid_argument("apply_action: span is not a mesh interval run");
  }

  std::vector<Rec> recs = to_recs(mesh);
  int next_pair = 0;
  for (const Rec& r : recs) next_pair = std::max(next_pair, r.pair + 1);

  std::vector<Rec> repl(n_new);
  for (size_t i = 0; i < n_new; ++i) {
    repl[i].left = i == 0 ? mesh.fractions[a] : action.interior[i - 1];
    repl[i].right = i + 1 == n_new ? mesh.fractions[b] : action.interior[i];
    repl[i].degree = action.degrees[i];
    repl[i].kind = action.kinds[i];
    repl[i].pair = action.pair[i] < 0 ? -1 : next_pair + action.pair[i];
  }

  std::vector<Rec> out(recs.begin(), recs.begin() + a);
  out.insert(out.end(), repl.begin(), repl.end());
  out.insert(out.end(), recs.begin() + b, recs.end());
  return from_recs(mesh, out);
}

Mesh replay(Mesh mesh, const RefinementLog& log) {
  for (const RefineAction& action : log.actions) {
    mesh = apply_action(mesh, action);
  }
  return mesh;
}

DetectionReport adjust_bounds(const DetectionReport& detections, const Mesh& mesh) {
  DetectionReport out = detections;
  std::sort(out.detections.begin(), out.detections.end(),
            [](const Detection& a, const Detection& b) {
              return a.location < b.location;
            });
  for (Detection& d : out.detections) {
    const SegSpan span = segment_span(mesh, mesh.segment_of(mesh.interval_of(d.location)));
    d.lower = std::max(d.lower, span.left);
    d.upper = std::min(d.upper, span.right);
  }
  for (size_t i = 0; i + 1 < out.detections.size(); ++i) {
    Detection& a = out.detections[i];
    Detection& b = out.detections[i + 1];
    if (a.upper > b.lower) {
      const double mid = 0.5 * (a.location + b.location);
      a.upper = mid;
      b.lower = mid;
    }
  }
  return out;
}

Mesh bracket(const Mesh& mesh, const std::vector<Detection>& detections,
             RefinementLog* log) {
  Mesh cur = mesh;
  for (const Detection& det : detections) {
    const int k_loc = cur.interval_of(det.location);
    if (cur.segments[cur.segment_of(k_loc)].kind != SegmentKind::smooth) {
      throw std::invalid_argument("bracket: detection not on a smooth segment");
    }
    const double h_min = min_half_width(cur.width(k_loc));
    const SegSpan span = segment_span(cur, cur.segment_of(k_loc));
    double lo = det.lower, up = det.upper;
    if (det.location - lo < h_min) lo = det.location - h_min;
    if (up - det.location < h_min) up = det.location + h_min;
    lo = std::max(lo, span.left);
    up = std::min(up, span.right);

    // Snap bounds onto coincident or too-close existing boundaries.
    int ia = cur.interval_of(lo);
    if (lo - cur.left(ia) < h_min) lo = cur.left(ia);
    int ib = cur.interval_of(up);
    if (up == cur.left(ib) || std::abs(up - cur.left(ib)) <= kCollisionTol) {
      up = cur.left(ib);
      ib -= 1;
    } else if (cur.right(ib) - up < h_min) {
      up = cur.right(ib);
    }

    RefineAction action;
    action.kind = RefineActionKind::bracket_created;
    action.span_left = cur.left(ia);
    action.span_right = cur.right(ib);
    if (lo > action.span_left) {
      action.interior.push_back(lo);
      action.degrees.push_back(cur.degrees[ia]);
      action.kinds.push_back(SegmentKind::smooth);
      action.pair.push_back(-1);
    }
    action.interior.push_back(det.location);
    action.degrees.push_back(kBracketDegree);
    action.kinds.push_back(SegmentKind::nonsmooth);
    action.pair.push_back(0);
    action.degrees.push_back(kBracketDegree);
    action.kinds.push_back(SegmentKind::nonsmooth);
    action.pair.push_back(0);
    if (up < action.span_right) {
      action.interior.push_back(up);
      action.degrees.push_back(cur.degrees[ib]);
      action.kinds.push_back(SegmentKind::smooth);
      action.pair.push_back(-1);
    }
    push_action(log, action);
    cur = apply_action(cur, action);
  }
  return cur;
}

Mesh update_bracket(const Mesh& mesh, int segment_index,
                    const std::vector<Detection>& detections, RefinementLog* log) {
  const Segment seg = mesh.segments[segment_index];
  if (seg.kind != SegmentKind::nonsmooth || detections.empty()) {
    throw std::invalid_argument("update_bracket: needs a nonsmooth segment and detections");
  }
  const double seg_left = mesh.fractions[seg.first];
  const double seg_right = mesh.fractions[seg.first + seg.count];

  std::vector<Detection> dets = detections;
  std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    return a.location < b.location;
  });
  for (Detection& d : dets) {
    const double h_min = min_half_width(mesh.width(mesh.interval_of(d.location)));
    if (d.location - d.lower < h_min) d.lower = d.location - h_min;
    if (d.upper - d.location < h_min) d.upper = d.location + h_min;
    d.lower = std::max(d.lower, seg_left);
    d.upper = std::min(d.upper, seg_right);
  }
  for (size_t i = 0; i + 1 < dets.size(); ++i) {
    if (dets[i].upper > dets[i + 1].lower) {
      const double mid = 0.5 * (dets[i].location + dets[i + 1].location);
      dets[i].upper = mid;
      dets[i + 1].lower = mid;
    }
  }
  // Degenerate connecting gaps collapse onto a shared boundary.
  if (dets.front().lower - seg_left <= kCollisionTol) dets.front().lower = seg_left;
  if (seg_right - dets.back().upper <= kCollisionTol) dets.back().upper = seg_right;
  for (size_t i = 0; i + 1 < dets.size(); ++i) {
    if (dets[i + 1].lower - dets[i].upper <= 1e-9) dets[i + 1].lower = dets[i].upper;
  }

  RefineAction action;
  action.kind = RefineActionKind::bracket_updated;
  action.span_left = seg_left;
  action.span_right = seg_right;

  const int left_nb = seg.first - 1;
  const bool extend_left =
      dets.front().lower > seg_left && left_nb >= 0 &&
      mesh.segments[mesh.segment_of(left_nb)].kind == SegmentKind::smooth;
  const int right_nb = seg.first + seg.count;
  const bool extend_right =
      dets.back().upper < seg_right && right_nb < mesh.num_intervals() &&
      mesh.segments[mesh.segment_of(right_nb)].kind == SegmentKind::smooth;

  if (extend_left) action.span_left = mesh.left(left_nb);
  if (extend_right) action.span_right = mesh.right(right_nb);

  auto add = [&action](double right_boundary, int degree, SegmentKind kind,
                       int pair, bool last) {
    if (!last) action.interior.push_back(right_boundary);
    action.degrees.push_back(degree);
    action.kinds.push_back(kind);
    action.pair.push_back(pair);
  };

  const double first_lo = dets.front().lower;
  if (first_lo > action.span_left) {
    // Extended neighbor keeps its degree; a fresh leading interval gets 4.
    add(first_lo, extend_left ? mesh.degrees[left_nb] : kBracketDegree,
        SegmentKind::smooth, -1, false);
  }
  for (size_t i = 0; i < dets.size(); ++i) {
    add(dets[i].location, kBracketDegree, SegmentKind::nonsmooth,
        static_cast<int>(i), false);
    const bool last_piece = i + 1 == dets.size() && dets[i].upper >= action.span_right;
    add(dets[i].upper, kBracketDegree, SegmentKind::nonsmooth, static_cast<int>(i),
        last_piece);
    if (i + 1 < dets.size() && dets[i + 1].lower > dets[i].upper) {
      add(dets[i + 1].lower, kBracketDegree, SegmentKind::smooth, -1, false);
    }
  }
  const double last_up = dets.back().upper;
  if (last_up < action.span_right) {
    add(0.0, extend_right ? mesh.degrees[right_nb] : kBracketDegree,
        SegmentKind::smooth, -1, true);
  }

  push_action(log, action);
  return apply_action(mesh, action);
}

Mesh relabel(const Mesh& mesh, const DetectionReport& detections,
             const ErrorReport& report, double epsilon, RefinementLog* log) {
  if (static_cast<int>(report.e_max.size()) != mesh.num_intervals()) {
    throw std::invalid_argument("relabel: report does not match the mesh");
  }
  Mesh cur = mesh;
  for (size_t s = 0; s < mesh.segments.size(); ++s) {
    const Segment& seg = mesh.segments[s];
    if (seg.kind != SegmentKind::nonsmooth) continue;
    const SegSpan span = segment_span(mesh, static_cast<int>(s));
    bool has_detection = false;
    for (const Detection& d : detections.detections) {
      if (d.location >= span.left && d.location <= span.right) {
        has_detection = true;
        break;
      }
    }
    const bool failing = report.e_max[seg.first] > epsilon ||
                         report.e_max[seg.first + 1] > epsilon;
    if (has_detection || !failing) continue;

    RefineAction action;
    action.kind = RefineActionKind::bracket_relabeled;
    action.span_left = span.left;
    action.span_right = span.right;
    action.interior = {mesh.fractions[seg.first + 1]};
    action.degrees = {mesh.degrees[seg.first], mesh.degrees[seg.first + 1]};
    action.kinds = {SegmentKind::smooth, SegmentKind::smooth};
    action.pair = {-1, -1};
    push_action(log, action);
    cur = apply_action(cur, action);
  }
  return cur;
}

Mesh smooth_refine(const Mesh& old_mesh, const Mesh& intermediate_mesh,
                   const ErrorReport& report, const DetectionReport& detections,
                   double epsilon, RefinementLog* log) {
  if (static_cast<int>(report.e_max.size()) != old_mesh.num_intervals()) {
    throw std::invalid_argument("smooth_refine: report does not match old mesh");
  }
  std::vector<double> old_err = report.e_max;
  for (int o = 0; o < old_mesh.num_intervals(); ++o) {
    for (const Detection& d : detections.detections) {
      if (d.location >= old_mesh.left(o) && d.location <= old_mesh.right(o)) {
        old_err[o] = 0.0;
        break;
      }
    }
  }
  std::vector<char> old_nonsmooth(old_mesh.num_intervals(), 0);
  for (const Segment& s : old_mesh.segments) {
    if (s.kind != SegmentKind::nonsmooth) continue;
    old_nonsmooth[s.first] = old_nonsmooth[s.first + 1] = 1;
  }

  std::vector<RefineAction> actions;
  for (int q = 0; q < intermediate_mesh.num_intervals(); ++q) {
    if (intermediate_mesh.segments[intermediate_mesh.segment_of(q)].kind !=
        SegmentKind::smooth) {
      continue;
    }
    const double ql = intermediate_mesh.left(q);
    const double qr = intermediate_mesh.right(q);

    int mapped = -1;
    for (int o = 0; o < old_mesh.num_intervals() && mapped < 0; ++o) {
      if (old_nonsmooth[o] && std::abs(old_mesh.left(o) - ql) <= kCollisionTol &&
          std::abs(old_mesh.right(o) - qr) <= kCollisionTol) {
        mapped = o;
      }
    }
    if (mapped < 0) {
      for (int o = 0; o < old_mesh.num_intervals(); ++o) {
        if (old_nonsmooth[o]) continue;
        const double overlap =
            std::min(qr, old_mesh.right(o)) - std::max(ql, old_mesh.left(o));
        if (overlap > kCollisionTol) {
          if (mapped >= 0) throw std::logic_error("smooth_refine: ambiguous map");
          mapped = o;
        }
      }
    }
    if (mapped < 0 || old_err[mapped] <= epsilon) continue;

    const int p = intermediate_mesh.degrees[q];
    const int bump =
        std::max(1, static_cast<int>(std::ceil(std::log10(old_err[mapped] / epsilon))));
    const int p_new = p + bump;

    RefineAction action;
    action.span_left = ql;
    action.span_right = qr;
    if (p_new <= intermediate_mesh.max_degree) {
      action.kind = RefineActionKind::degree_raised;
      action.degrees = {p_new};
      action.kinds = {SegmentKind::smooth};
      action.pair = {-1};
    } else {
      action.kind = RefineActionKind::smooth_subdivided;
      const int n_sub = (p_new + intermediate_mesh.min_degree - 1) /
                        intermediate_mesh.min_degree;
      for (int i = 1; i < n_sub; ++i) {
        action.interior.push_back(ql + (qr - ql) * i / n_sub);
      }
      action.degrees.assign(n_sub, intermediate_mesh.min_degree);
      action.kinds.assign(n_sub, SegmentKind::smooth);
      action.pair.assign(n_sub, -1);
    }
    actions.push_back(std::move(action));
  }

  Mesh cur = intermediate_mesh;
  for (const RefineAction& action : actions) {
    push_action(log, action);
    cur = apply_action(cur, action);
  }
  return cur;
}

RefineResult refine_mesh(const Mesh& mesh, const DetectionReport& detections,
                         const ErrorReport& report, double epsilon) {
  RefineResult result;
  result.adjusted = adjust_bounds(detections, mesh);

  std::vector<Detection> smooth_dets;
  // Detections grouped by the span of the nonsmooth segment holding them.
  std::vector<std::pair<SegSpan, std::vector<Detection>>> bracket_dets;
  for (const Detection& d : result.adjusted.detections) {
    const int seg = mesh.segment_of(mesh.interval_of(d.location));
    if (mesh.segments[seg].kind == SegmentKind::smooth) {
      smooth_dets.push_back(d);
    } else {
      const SegSpan span = segment_span(mesh, seg);
      bool found = false;
      for (auto& [sp, list] : bracket_dets) {
        if (sp.left == span.left && sp.right == span.right) {
          list.push_back(d);
          found = true;
        }
      }
      if (!found) bracket_dets.push_back({span, {d}});
    }
  }

  Mesh cur = bracket(mesh, smooth_dets, &result.log);
  for (const auto& [span, list] : bracket_dets) {
    const int seg = cur.segment_of(cur.interval_of(list.front().location));
    cur = update_bracket(cur, seg, list, &result.log);
  }

  // Errors of surviving old intervals, carried over by identical span.
  ErrorReport carried;
  carried.e_max.assign(cur.num_intervals(), 0.0);
  for (int k = 0; k < cur.num_intervals(); ++k) {
    for (int o = 0; o < mesh.num_intervals(); ++o) {
      if (std::abs(mesh.left(o) - cur.left(k)) <= kCollisionTol &&
          std::abs(mesh.right(o) - cur.right(k)) <= kCollisionTol) {
        carried.e_max[k] = report.e_max[o];
        break;
      }
    }
  }
  cur = relabel(cur, result.adjusted, carried, epsilon, &result.log);
  result.mesh = smooth_refine(mesh, cur, report, result.adjusted, epsilon, &result.log);
  return result;
}

}  // namespace radauhp
