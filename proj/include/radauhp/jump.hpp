#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "radauhp/error_estimate.hpp"
#include "radauhp/mesh.hpp"
#include "radauhp/transcription.hpp"

namespace radauhp {

struct JumpConfig {
  std::vector<int> orders = {1, 2, 3, 4, 5, 6};
  double threshold = 0.1;  // detection level on the minmod value
  double safety = 1.0;     // bracket extension factor
};

/// Order-m divided-difference jump function approximation at t from the
/// m+1 grid points nearest to t (ties prefer the lower index).  Returns
/// nothing when the order is unusable: fewer than m+1 grid points, no
/// stencil point above t, or a vanishing upper-coefficient sum.
std::optional<double> divided_diff_jump(std::span<const double> times,
                                        std::span<const double> values,
                                        double t, int order);

/// Minmod limiter over the usable orders: the smallest approximation when
/// all are positive, the largest when all are negative, zero otherwise.
double minmod_jump(std::span<const double> times, std::span<const double> values,
                   double t, std::span<const int> orders);

/// One detected control discontinuity.
struct Detection {
  double location = 0.0;   // gap midpoint with the largest minmod magnitude
  double lower = 0.0;      // bracket bound after safety extension
  double upper = 0.0;
  double magnitude = 0.0;  // largest |minmod| over control components there
  Eigen::VectorXd minmod;  // per-component minmod at the location
};

struct DetectionReport {
  std::vector<Detection> detections;
  std::vector<double> grid;              // global collocation grid
  std::vector<char> gap_flagged;         // per gap between grid neighbors
  std::vector<Eigen::VectorXd> gap_minmod;  // empty when a gap was skipped
};

/// Scans the gaps of the global collocation grid for control jumps.  Each
/// control component is normalized to (u - min) / (1 + max - min) over the
/// grid, the minmod jump value is evaluated at the midpoints of gaps whose
/// interval exceeds the error tolerance (a gap across an interval boundary
/// counts if either neighbor exceeds it), and maximal runs of consecutive
/// flagged gaps merge into one detection at the strongest gap, bracketed by
/// the run's span scaled about the location by the safety factor.
DetectionReport detect_jumps(const Mesh& mesh, const CollocationSolution& solution,
                             const ErrorReport& errors, double epsilon,
                             const JumpConfig& config = {});

}  // namespace radauhp
