#include "radauhp/mesh.hpp"

#include <algorithm>
#include <stdexcept>

namespace radauhp {

int Mesh::total_colloc_points() const {
  int p = 0;
  for (int d : degrees) p += d;
  return p;
}

int Mesh::segment_of(int k) const {
  for (size_t s = 0; s < segments.size(); ++s) {
    if (k >= segments[s].first && k < segments[s].first + segments[s].count) {
      return static_cast<int>(s);
    }
  }
  throw std::invalid_argument("Mesh::segment_of: interval not covered by any segment");
}

int Mesh::interval_of(double tau) const {
  const auto it = std::upper_bound(fractions.begin(), fractions.end(), tau);
  int k = static_cast<int>(it - fractions.begin()) - 1;
  if (k < 0) k = 0;
  if (k >= num_intervals()) k = num_intervals() - 1;
  return k;
}

void Mesh::validate() const {
  const int k = num_intervals();
  if (k < 1) throw std::invalid_argument("mesh: no intervals");
  if (static_cast<int>(fractions.size()) != k + 1) {
    throw std::invalid_argument("mesh: fraction/degree count mismatch");
  }
  if (fractions.front() != -1.0 || fractions.back() != 1.0) {
    throw std::invalid_argument("mesh: endpoints must be -1 and +1");
  }
  for (int i = 0; i < k; ++i) {
    if (!(fractions[i] < fractions[i + 1])) {
      throw std::invalid_argument("mesh: fractions not strictly increasing");
    }
    if (degrees[i] < 1 || degrees[i] > max_degree) {
      throw std::invalid_argument("mesh: interval degree out of bounds");
    }
  }
  int covered = 0;
  for (const Segment& s : segments) {
    if (s.first != covered || s.count < 1) {
      throw std::invalid_argument("mesh: segments must partition the intervals in order");
    }
    if (s.kind == SegmentKind::nonsmooth && s.count != 2) {
      throw std::invalid_argument("mesh: nonsmooth segment must span exactly two intervals");
    }
    covered += s.count;
  }
  if (covered != k) {
    throw std::invalid_argument("mesh: segments do not cover all intervals");
  }
}

Mesh uniform_mesh(int k, int p) {
  Mesh mesh;
  mesh.fractions.resize(k + 1);
  for (int i = 0; i <= k; ++i) {
    mesh.fractions[i] = -1.0 + 2.0 * i / k;
  }
  mesh.fractions[0] = -1.0;
  mesh.fractions[k] = 1.0;
  mesh.degrees.assign(k, p);
  mesh.segments = {Segment{SegmentKind::smooth, 0, k}};
  return mesh;
}

std::string to_string(SegmentKind kind) {
  return kind == SegmentKind::smooth ? "smooth" : "nonsmooth";
}

}  // namespace radauhp
