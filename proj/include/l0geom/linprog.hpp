#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace l0geom {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration limit";
  }
  return "?";
}

/// minimize cost' x  subject to  equality x = rhs,  x >= 0.
struct LinearProgram {
  Eigen::MatrixXd equality;
  Eigen::VectorXd rhs;
  Eigen::VectorXd cost;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int pivots = 0;
};

namespace detail {

// Dense tableau. Row m holds reduced costs; last column holds the rhs.
class SimplexTableau {
 public:
  SimplexTableau(Eigen::Index rows, Eigen::Index cols) : t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)),
                                                         basis_(rows, -1) {}

  Eigen::MatrixXd& table() { return t_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }
  double& rhs(Eigen::Index r) { return t_(r, cols()); }
  double objective() const { return -t_(rows(), t_.cols() - 1); }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i <= rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  // Bland's rule: lowest-index improving column, lowest-index basic variable
  // among ratio-test ties. `allowed` masks columns that may enter.
  LpStatus optimise(const std::vector<bool>& allowed, double eps, int max_pivots, int& pivots) {
    for (;;) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < cols(); ++j) {
        if (allowed[j] && t_(rows(), j) < -eps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows(); ++i) {
        const double a = t_(i, enter);
        if (a <= eps) continue;
        const double ratio = t_(i, cols()) / a;
        if (ratio < best - eps || (std::abs(ratio - best) <= eps && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
      if (++pivots > max_pivots) return LpStatus::IterationLimit;
    }
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace detail

/// Two-phase dense simplex with Bland's anti-cycling rule. Intended for the
/// small programs (a few dozen columns) that arise from distance queries.
inline LpSolution solve_lp(const LinearProgram& lp, double eps = 1e-12) {
  const Eigen::Index m = lp.equality.rows();
  const Eigen::Index n = lp.equality.cols();
  if (lp.rhs.size() != m || lp.cost.size() != n)
    throw std::invalid_argument("solve_lp: inconsistent dimensions");

  detail::SimplexTableau tab(m, n + m);
  auto& t = tab.table();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = lp.rhs[i] < 0.0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * lp.equality.row(i);
    t(i, n + i) = 1.0;
    tab.rhs(i) = sign * lp.rhs[i];
    tab.basis()[i] = n + i;
  }
  // Phase 1: minimise the sum of artificials.
  for (Eigen::Index j = 0; j < n; ++j) t(m, j) = -t.col(j).head(m).sum();
  t(m, n + m) = -t.col(n + m).head(m).sum();

  const double scale = 1.0 + lp.rhs.lpNorm<Eigen::Infinity>();
  const int max_pivots = 50 * static_cast<int>(n + 2 * m) + 1000;
  LpSolution out;
  std::vector<bool> allowed(n + m, true);
  LpStatus status = tab.optimise(allowed, eps, max_pivots, out.pivots);
  if (status == LpStatus::IterationLimit) {
    out.status = status;
    return out;
  }
  if (tab.objective() > 1e-9 * scale) {
    out.status = LpStatus::Infeasible;
    return out;
  }
  // Drive remaining artificials out of the basis where possible. Rows with no
  // usable pivot are redundant and stay inert.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.basis()[i] < n) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(t(i, j)) > 1e-9) {
        tab.pivot(i, j);
        break;
      }
    }
  }
  for (Eigen::Index j = n; j < n + m; ++j) allowed[j] = false;

  // Phase 2: install the real objective and price out the basis.
  t.row(m).setZero();
  t.row(m).head(n) = lp.cost.transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index b = tab.basis()[i];
    if (b < n && t(m, b) != 0.0) t.row(m) -= t(m, b) * t.row(i);
  }
  status = tab.optimise(allowed, eps, max_pivots, out.pivots);
  out.status = status;
  if (status != LpStatus::Optimal) return out;

  out.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index b = tab.basis()[i];
    if (b < n) out.x[b] = std::max(0.0, tab.rhs(i));
  }
  out.objective = lp.cost.dot(out.x);
  return out;
}

}  // namespace l0geom
