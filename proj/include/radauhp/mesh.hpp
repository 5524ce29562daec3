#pragma once

#include <string>
#include <vector>

namespace radauhp {

enum class SegmentKind { smooth, nonsmooth };

/// Contiguous run of mesh intervals sharing a smooth/nonsmooth label.
/// A nonsmooth segment always spans exactly two intervals whose shared
/// boundary pins the current discontinuity location estimate.
struct Segment {
  SegmentKind kind = SegmentKind::smooth;
  int first = 0;  // index of the first interval in the run
  int count = 0;
};

inline constexpr int kDefaultMinDegree = 3;
inline constexpr int kDefaultMaxDegree = 14;

/// Partition of the computational domain [-1, 1] into K mesh intervals
/// with per-interval collocation degrees and segment labels.
struct Mesh {
  std::vector<double> fractions;  // K+1 ordered boundaries, first -1, last +1
  std::vector<int> degrees;       // K
  std::vector<Segment> segments;  // partition of intervals 0..K-1, in order
  int min_degree = kDefaultMinDegree;
  int max_degree = kDefaultMaxDegree;

  int num_intervals() const { return static_cast<int>(degrees.size()); }
  double left(int k) const { return fractions[k]; }
  double right(int k) const { return fractions[k + 1]; }
  double width(int k) const { return fractions[k + 1] - fractions[k]; }
  int total_colloc_points() const;

  /// Index of the segment containing interval k.
  int segment_of(int k) const;

  /// Index of the interval whose half-open span [T_k, T_{k+1}) contains tau
  /// (the final interval is closed on the right).
  int interval_of(double tau) const;

  /// Throws std::invalid_argument describing the first violated invariant,
  /// if any: ordered fractions with endpoints -1/+1, degree bounds, segments
  /// partitioning the intervals, nonsmooth segments spanning two intervals.
  void validate() const;
};

/// Uniform K-interval mesh of a single smooth segment, degree p everywhere.
Mesh uniform_mesh(int k, int p);

std::string to_string(SegmentKind kind);

}  // namespace radauhp
