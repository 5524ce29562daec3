#pragma once

#include <Eigen/Dense>
#include <span>

namespace radauhp {

/// Legendre-Gauss-Radau quadrature rule on [-1, 1).  The first node is
/// always -1 and an N-point rule integrates polynomials of degree 2N-2
/// exactly.
struct LgrRule {
  int degree = 0;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

inline constexpr int kMaxLgrDegree = 64;

/// Computes the N-point LGR rule.  Nodes are the roots of P_{N-1} + P_N,
/// found from the Jacobi matrix of the (0,1) Jacobi polynomials and
/// polished with Newton iterations.  Throws std::invalid_argument unless
/// 1 <= n <= kMaxLgrDegree.
LgrRule lgr_rule(int n);

/// Collocation grid of one mesh interval: the LGR nodes affinely mapped
/// onto [left, right) plus the non-collocated right endpoint.
struct IntervalGrid {
  double left = -1.0;
  double right = 1.0;
  Eigen::VectorXd colloc;  // N mapped LGR nodes, colloc[0] == left

  double endpoint() const { return right; }
  int num_colloc() const { return static_cast<int>(colloc.size()); }

  /// Collocation points with the endpoint appended (N+1 support points).
  Eigen::VectorXd support() const;
};

/// Maps an LGR rule onto [left, right].  Requires left < right.
IntervalGrid interval_grid(const LgrRule& rule, double left, double right);

/// N x (N+1) differentiation matrix: entry (i,j) is the derivative of the
/// Lagrange basis polynomial of support point j evaluated at collocation
/// point i.  Built from barycentric weights; every row sums to zero.
Eigen::MatrixXd diff_matrix(const IntervalGrid& grid);

/// M x M LGR integration matrix for an M-point rule on the given interval.
/// Row j maps dynamics samples at the M collocation points to the integral
/// from the interval's left endpoint to support point j+1 (the last row
/// targets the right endpoint).  Equals the inverse of the differentiation
/// matrix with its first column dropped.
Eigen::MatrixXd integ_matrix(const LgrRule& rule, const IntervalGrid& grid);

/// Barycentric weights for a set of distinct support points.
/// Throws std::invalid_argument on duplicate support points.
Eigen::VectorXd barycentric_weights(std::span<const double> support);

/// Barycentric Lagrange interpolation: evaluates the interpolant of
/// (support, values) at each query point.
Eigen::VectorXd lagrange_eval(std::span<const double> support,
                              std::span<const double> values,
                              std::span<const double> queries);

double lagrange_eval_one(std::span<const double> support,
                         std::span<const double> values, double query);

/// Affine map from the computational domain tau in [-1,1] to t in [t0,tf].
/// Throws std::invalid_argument if tf <= t0.
double tau_to_t(double tau, double t0, double tf);

/// Legendre polynomial P_n and its derivative at x.
struct LegendreEval {
  double value;
  double derivative;
};
LegendreEval legendre(int n, double x);

}  // namespace radauhp
