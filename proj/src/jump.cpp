#include "radauhp/jump.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace radauhp {

std::optional<double> divided_diff_jump(std::span<const double> times,
                                        std::span<const double> values,
                                        double t, int order) {
  const int n = static_cast<int>(times.size());
  if (order < 1 || order + 1 > n) return std::nullopt;
  if (values.size() != times.size()) {
    throw std::invalid_argument("divided_diff_jump: times/values size mismatch");
  }

  // Expand a window of the order+1 nearest grid points around t, preferring
  // the lower index on distance ties.
  int hi = static_cast<int>(std::upper_bound(times.begin(), times.end(), t) -
                            times.begin());
  int lo = hi - 1;
  for (int picked = 0; picked < order + 1; ++picked) {
    const bool can_lo = lo >= 0;
    const bool can_hi = hi < n;
    if (can_lo && (!can_hi || t - times[lo] <= times[hi] - t)) {
      --lo;
    } else if (can_hi) {
      ++hi;
    } else {
      return std::nullopt;
    }
  }
  const int first = lo + 1;  // stencil is times[first .. hi-1]
  bool has_upper = false;
  for (int j = first; j < hi; ++j) has_upper = has_upper || times[j] > t;
  if (!has_upper) return std::nullopt;

  double factorial = 1.0;
  for (int i = 2; i <= order; ++i) factorial *= i;

  double q = 0.0, numer = 0.0;
  for (int j = first; j < hi; ++j) {
    double denom = 1.0;
    for (int i = first; i < hi; ++i) {
      if (i != j) denom *= times[j] - times[i];
    }
    const double c = factorial / denom;
    numer += c * values[j];
    if (times[j] > t) q += c;
  }
  if (q == 0.0) return std::nullopt;
  return numer / q;
}

double minmod_jump(std::span<const double> times, std::span<const double> values,
                   double t, std::span<const int> orders) {
  bool any = false;
  bool all_pos = true, all_neg = true;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int m : orders) {
    const auto v = divided_diff_jump(times, values, t, m);
    if (!v) continue;
    any = true;
    all_pos = all_pos && *v > 0.0;
    all_neg = all_neg && *v < 0.0;
    lo = std::min(lo, *v);
    hi = std::max(hi, *v);
  }
  if (!any) return 0.0;
  if (all_pos) return lo;
  if (all_neg) return hi;
  return 0.0;
}

DetectionReport detect_jumps(const Mesh& mesh, const CollocationSolution& solution,
                             const ErrorReport& errors, double epsilon,
                             const JumpConfig& config) {
  const int n_k = mesh.num_intervals();
  if (static_cast<int>(solution.intervals.size()) != n_k ||
      static_cast<int>(errors.e_max.size()) != n_k) {
    throw std::invalid_argument("detect_jumps: mesh/solution/errors mismatch");
  }

  DetectionReport report;
  std::vector<int> owner;  // interval of each grid point
  const int n_u = n_k > 0
                      ? static_cast<int>(solution.intervals[0].controls.cols())
                      : 0;
  std::vector<Eigen::VectorXd> control_rows;
  for (int k = 0; k < n_k; ++k) {
    const IntervalSolution& sol = solution.intervals[k];
    const int p = mesh.degrees[k];
    for (int j = 0; j < p; ++j) {
      report.grid.push_back(sol.tau_support[j]);
      owner.push_back(k);
      control_rows.push_back(sol.controls.row(j));
    }
  }
  const int n_pts = static_cast<int>(report.grid.size());
  if (n_pts < 2 || n_u == 0) return report;

  Eigen::MatrixXd u(n_pts, n_u);
  for (int g = 0; g < n_pts; ++g) u.row(g) = control_rows[g];
  for (int i = 0; i < n_u; ++i) {
    const double lo = u.col(i).minCoeff();
    const double hi = u.col(i).maxCoeff();
    u.col(i) = (u.col(i).array() - lo) / (1.0 + hi - lo);
  }

  const int n_gaps = n_pts - 1;
  report.gap_flagged.assign(n_gaps, 0);
  report.gap_minmod.resize(n_gaps);

  const std::span<const double> grid_span(report.grid.data(), report.grid.size());
  const std::span<const int> orders(config.orders.data(), config.orders.size());

  for (int g = 0; g < n_gaps; ++g) {
    const int ka = owner[g], kb = owner[g + 1];
    const bool active = ka == kb ? errors.e_max[ka] > epsilon
                                 : errors.e_max[ka] > epsilon ||
                                       errors.e_max[kb] > epsilon;
    if (!active) continue;
    const double mid = 0.5 * (report.grid[g] + report.grid[g + 1]);
    Eigen::VectorXd mm(n_u);
    for (int i = 0; i < n_u; ++i) {
      const Eigen::VectorXd col = u.col(i);
      mm[i] = minmod_jump(grid_span,
                          std::span<const double>(col.data(), col.size()), mid,
                          orders);
    }
    report.gap_minmod[g] = mm;
    if (mm.cwiseAbs().maxCoeff() >= config.threshold) report.gap_flagged[g] = 1;
  }

  // Merge maximal runs of flagged gaps into single detections.
  int g = 0;
  while (g < n_gaps) {
    if (!report.gap_flagged[g]) {
      ++g;
      continue;
    }
    int ga = g;
    while (g < n_gaps && report.gap_flagged[g]) ++g;
    const int gb = g - 1;

    int best = ga;
    double best_mag = report.gap_minmod[ga].cwiseAbs().maxCoeff();
    for (int gg = ga + 1; gg <= gb; ++gg) {
      const double mag = report.gap_minmod[gg].cwiseAbs().maxCoeff();
      if (mag > best_mag) {
        best = gg;
        best_mag = mag;
      }
    }
    Detection det;
    det.location = 0.5 * (report.grid[best] + report.grid[best + 1]);
    det.magnitude = best_mag;
    det.minmod = report.gap_minmod[best];
    const double run_left = report.grid[ga];
    const double run_right = report.grid[gb + 1];
    det.lower = det.location - config.safety * (det.location - run_left);
    det.upper = det.location + config.safety * (run_right - det.location);
    report.detections.push_back(std::move(det));
  }
  return report;
}

}  // namespace radauhp
