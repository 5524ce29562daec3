#include "radauhp/basis.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace radauhp {

LegendreEval legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double pm1 = 1.0, p = x;
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p - (k - 1.0) * pm1) / k;
    pm1 = p;
    p = pk;
  }
  // P'_n via (1-x^2) P'_n = n (P_{n-1} - x P_n)
  double dp;
  const double denom = 1.0 - x * x;
  if (std::abs(denom) > 1e-10) {
    dp = n * (pm1 - x * p) / denom;
  } else {
    dp = (x > 0 ? 1.0 : (n % 2 == 0 ? -1.0 : 1.0)) * n * (n + 1.0) / 2.0;
  }
  return {p, dp};
}

LgrRule lgr_rule(int n) {
  if (n < 1 || n > kMaxLgrDegree) {
    throw std::invalid_argument("lgr_rule: degree must be in [1, 64]");
  }
  LgrRule rule;
  rule.degree = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.nodes[0] = -1.0;
  rule.weights[0] = 2.0 / (static_cast<double>(n) * n);
  if (n == 1) {
    rule.weights[0] = 2.0;
    return rule;
  }

  // Interior nodes are roots of the Jacobi polynomial P_{n-1}^{(0,1)},
  // obtained as eigenvalues of the symmetric Jacobi matrix.
  const int ni = n - 1;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(ni, ni);
  for (int k = 0; k < ni; ++k) {
    jac(k, k) = 1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
    if (k > 0) {
      const double off = std::sqrt(k * (k + 1.0)) / (2.0 * k + 1.0);
      jac(k, k - 1) = off;
      jac(k - 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  Eigen::VectorXd interior = es.eigenvalues();

  // Newton polish on g = P_{n-1} + P_n.
  for (int i = 0; i < ni; ++i) {
    double x = interior[i];
    for (int it = 0; it < 100; ++it) {
      const auto a = legendre(n - 1, x);
      const auto b = legendre(n, x);
      const double g = a.value + b.value;
      const double dg = a.derivative + b.derivative;
      const double step = g / dg;
      x -= step;
      if (std::abs(g) < 1e-14 && std::abs(step) < 1e-15) break;
    }
    interior[i] = x;
  }
  std::sort(interior.begin(), interior.end());

  for (int i = 0; i < ni; ++i) {
    const double x = interior[i];
    rule.nodes[i + 1] = x;
    const double pnm1 = legendre(n - 1, x).value;
    rule.weights[i + 1] = (1.0 - x) / (static_cast<double>(n) * n * pnm1 * pnm1);
  }
  return rule;
}

IntervalGrid interval_grid(const LgrRule& rule, double left, double right) {
  if (!(left < right)) {
    throw std::invalid_argument("interval_grid: requires left < right");
  }
  IntervalGrid grid;
  grid.left = left;
  grid.right = right;
  const double half = 0.5 * (right - left);
  const double mid = 0.5 * (right + left);
  grid.colloc = (half * rule.nodes.array() + mid).matrix();
  grid.colloc[0] = left;  // exact, unaffected by rounding
  return grid;
}

Eigen::VectorXd IntervalGrid::support() const {
  Eigen::VectorXd s(colloc.size() + 1);
  s.head(colloc.size()) = colloc;
  s[colloc.size()] = right;
  return s;
}

Eigen::VectorXd barycentric_weights(std::span<const double> support) {
  const int n = static_cast<int>(support.size());
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      const double d = support[j] - support[i];
      if (d == 0.0) {
        throw std::invalid_argument("barycentric_weights: duplicate support points");
      }
      w[j] /= d;
    }
  }
  return w;
}

Eigen::MatrixXd diff_matrix(const IntervalGrid& grid) {
  const Eigen::VectorXd s = grid.support();
  const int np = static_cast<int>(s.size());
  const Eigen::VectorXd w =
      barycentric_weights(std::span<const double>(s.data(), np));
  Eigen::MatrixXd full(np, np);
  for (int i = 0; i < np; ++i) {
    double diag = 0.0;
    for (int j = 0; j < np; ++j) {
      if (j == i) continue;
      full(i, j) = (w[j] / w[i]) / (s[i] - s[j]);
      diag -= full(i, j);
    }
    full(i, i) = diag;
  }
  return full.topRows(np - 1);
}

Eigen::MatrixXd integ_matrix(const LgrRule& rule, const IntervalGrid& grid) {
  if (rule.degree != grid.num_colloc()) {
    throw std::invalid_argument("integ_matrix: rule degree must match grid point count");
  }
  const Eigen::MatrixXd d = diff_matrix(grid);
  const int m = rule.degree;
  return d.rightCols(m).partialPivLu().inverse();
}

double lagrange_eval_one(std::span<const double> support,
                         std::span<const double> values, double query) {
  const Eigen::VectorXd w = barycentric_weights(support);
  const int n = static_cast<int>(support.size());
  double num = 0.0, den = 0.0;
  for (int j = 0; j < n; ++j) {
    const double d = query - support[j];
    if (d == 0.0) return values[j];
    const double c = w[j] / d;
    num += c * values[j];
    den += c;
  }
  return num / den;
}

Eigen::VectorXd lagrange_eval(std::span<const double> support,
                              std::span<const double> values,
                              std::span<const double> queries) {
  const Eigen::VectorXd w = barycentric_weights(support);
  const int n = static_cast<int>(support.size());
  Eigen::VectorXd out(queries.size());
  for (size_t q = 0; q < queries.size(); ++q) {
    double num = 0.0, den = 0.0;
    bool hit = false;
    for (int j = 0; j < n; ++j) {
      const double d = queries[q] - support[j];
      if (d == 0.0) {
        out[q] = values[j];
        hit = true;
        break;
      }
      const double c = w[j] / d;
      num += c * values[j];
      den += c;
    }
    if (!hit) out[q] = num / den;
  }
  return out;
}

double tau_to_t(double tau, double t0, double tf) {
  if (!(tf > t0)) {
    throw std::invalid_argument("tau_to_t: requires tf > t0");
  }
  return 0.5 * (tf - t0) * tau + 0.5 * (tf + t0);
}

}  // namespace radauhp
