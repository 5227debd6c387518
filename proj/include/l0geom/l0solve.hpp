#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "l0geom/linprog.hpp"
#include "l0geom/norms.hpp"
#include "l0geom/subspaces.hpp"

namespace l0geom {

inline constexpr double kDefaultFeasTol = 1e-10;
inline constexpr double kDefaultDistTol = 1e-10;

struct DistanceResult {
  double dist = 0.0;
  Vector minimizer;  // attaining point of the subspace
};

namespace detail {

inline std::string describe_basis(const SubspaceBasis& basis) {
  std::string s = "basis of dim " + std::to_string(basis.dim()) + " (support {";
  for (std::size_t i = 0; i < basis.support.size(); ++i)
    s += (i ? "," : "") + std::to_string(basis.support[i]);
  return s + "})";
}

inline Vector lp_coefficients(const LpSolution& sol, Eigen::Index k) {
  return sol.x.head(k) - sol.x.segment(k, k);
}

// min_c sum_i w_i |d_i - (B c)_i|  with  d - B c = p - q,  p, q >= 0.
inline Vector weighted_l1_coefficients(const Matrix& basis, const Vector& d, const Vector& weights,
                                       const SubspaceBasis& desc) {
  const Eigen::Index n = basis.rows(), k = basis.cols();
  LinearProgram lp;
  lp.equality = Matrix::Zero(n, 2 * k + 2 * n);
  lp.equality.leftCols(k) = basis;
  lp.equality.middleCols(k, k) = -basis;
  lp.equality.middleCols(2 * k, n) = Matrix::Identity(n, n);
  lp.equality.rightCols(n) = -Matrix::Identity(n, n);
  lp.rhs = d;
  lp.cost = Vector::Zero(2 * k + 2 * n);
  lp.cost.segment(2 * k, n) = weights;
  lp.cost.tail(n) = weights;
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error(std::string("l1 distance LP failed (") + to_string(sol.status) +
                             ") for " + describe_basis(desc));
  return lp_coefficients(sol, k);
}

// min t  with  B c + t - a = d,  B c - t + e = d,  a, e >= 0.
inline Vector chebyshev_coefficients(const Matrix& basis, const Vector& d,
                                     const SubspaceBasis& desc) {
  const Eigen::Index n = basis.rows(), k = basis.cols();
  const Eigen::Index cols = 2 * k + 1 + 2 * n;
  LinearProgram lp;
  lp.equality = Matrix::Zero(2 * n, cols);
  lp.equality.block(0, 0, n, k) = basis;
  lp.equality.block(0, k, n, k) = -basis;
  lp.equality.block(0, 2 * k, n, 1).setOnes();
  lp.equality.block(0, 2 * k + 1, n, n) = -Matrix::Identity(n, n);
  lp.equality.block(n, 0, n, k) = basis;
  lp.equality.block(n, k, n, k) = -basis;
  lp.equality.block(n, 2 * k, n, 1).setConstant(-1.0);
  lp.equality.block(n, 2 * k + 1 + n, n, n) = Matrix::Identity(n, n);
  lp.rhs.resize(2 * n);
  lp.rhs << d, d;
  lp.cost = Vector::Zero(cols);
  lp.cost[2 * k] = 1.0;
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error(std::string("linf distance LP failed (") + to_string(sol.status) +
                             ") for " + describe_basis(desc));
  return lp_coefficients(sol, k);
}

// Convex minimisation of c -> ||D (d - B c)||_p for 1 < p < inf: cyclic line
// searches along the coordinate axes and the steepest-descent direction.
inline Vector lp_descent_coefficients(const NormSpec& norm, const Matrix& basis, const Vector& d,
                                      double dist_tol) {
  const Eigen::Index k = basis.cols();
  Vector c = basis.transpose() * d;
  auto objective = [&](const Vector& coef) { return norm_eval(norm, d - basis * coef); };
  double f = objective(c);

  auto line_search = [&](const Vector& dir) {
    const double slope = norm_eval(norm, basis * dir);
    if (slope == 0.0 || f == 0.0) return;
    // Along dir the objective exceeds f outside |t| <= 2 f / slope.
    double lo = -2.0 * f / slope, hi = 2.0 * f / slope;
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
    double f1 = objective(c + x1 * dir), f2 = objective(c + x2 * dir);
    while (hi - lo > 1e-15 * (1.0 + std::abs(lo) + std::abs(hi))) {
      if (f1 < f2) {
        hi = x2; x2 = x1; f2 = f1;
        x1 = hi - kInvPhi * (hi - lo);
        f1 = objective(c + x1 * dir);
      } else {
        lo = x1; x1 = x2; f1 = f2;
        x2 = lo + kInvPhi * (hi - lo);
        f2 = objective(c + x2 * dir);
      }
    }
    const double t = 0.5 * (lo + hi);
    const double ft = objective(c + t * dir);
    if (ft < f) {
      c += t * dir;
      f = ft;
    }
  };

  for (int sweep = 0; sweep < 10000; ++sweep) {
    const double before = f;
    for (Eigen::Index j = 0; j < k; ++j) line_search(Vector::Unit(k, j));
    // Gradient of ||D r||_p in c, r = d - B c.
    const Vector r = d - basis * c;
    Vector g(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double wr = norm.weights[static_cast<std::size_t>(i)] * r[i];
      g[i] = norm.weights[static_cast<std::size_t>(i)] * std::copysign(std::pow(std::abs(wr), norm.p - 1.0), wr);
    }
    const Vector grad = -(basis.transpose() * g);
    if (grad.norm() > 0.0) line_search(-grad / grad.norm());
    if (before - f <= dist_tol * std::max(f, std::numeric_limits<double>::min())) break;
  }
  return c;
}

}  // namespace detail

/// Fidelity-norm distance from d to span(basis) and an attaining point.
/// For d in the orthogonal complement this is the Minkowski gauge h(d) of the
/// projected unit ball.
inline DistanceResult subspace_distance(const NormSpec& norm, const SubspaceBasis& basis,
                                        const Vector& d, double dist_tol = kDefaultDistTol) {
  if (basis.ambient() != d.size())
    throw std::invalid_argument("subspace_distance: dimension mismatch");
  detail::check_dimension(norm, d.size());
  const Matrix& b = basis.columns;
  if (basis.dim() == 0) return {norm_eval(norm, d), Vector::Zero(d.size())};

  Vector coef;
  switch (norm.kind) {
    case NormKind::L2:
      coef = b.transpose() * d;
      break;
    case NormKind::L1:
      coef = detail::weighted_l1_coefficients(b, d, Vector::Ones(d.size()), basis);
      break;
    case NormKind::Linf:
      coef = detail::chebyshev_coefficients(b, d, basis);
      break;
    case NormKind::WeightedLp: {
      const Vector w = Eigen::Map<const Vector>(norm.weights.data(), d.size());
      if (norm.p == 1.0) {
        coef = detail::weighted_l1_coefficients(b, d, w, basis);
      } else if (norm.p == 2.0) {
        coef = (w.asDiagonal() * b).colPivHouseholderQr().solve(w.asDiagonal() * d);
      } else {
        coef = detail::lp_descent_coefficients(norm, b, d, dist_tol);
      }
      break;
    }
  }
  Vector v = b * coef;
  return {norm_eval(norm, d - v), std::move(v)};
}

struct SolveResult {
  int val = 0;
  Support support;
  Vector coefficients;
  double residual = 0.0;
};

struct SolverOptions {
  double span_tol = kDefaultSpanTol;
  double feas_tol = kDefaultFeasTol;
  double dist_tol = kDefaultDistTol;
};

/// Exact solver for: minimise l0(lambda) subject to ||sum lambda_i psi_i - d|| <= tau.
/// Span catalogs for every k are built once and shared by all queries.
class L0Solver {
 public:
  L0Solver(Dictionary dict, NormSpec fidelity, SolverOptions options = {})
      : dict_(std::move(dict)), fidelity_(std::move(fidelity)), options_(options) {
    detail::check_dimension(fidelity_, dict_.dim());
    catalogs_.reserve(static_cast<std::size_t>(dict_.dim()) + 1);
    for (int k = 0; k <= dict_.dim(); ++k)
      catalogs_.push_back(build_span_catalog(dict_, k, options_.span_tol));
  }

  const Dictionary& dictionary() const { return dict_; }
  const NormSpec& fidelity() const { return fidelity_; }
  const SolverOptions& options() const { return options_; }
  int dim() const { return dict_.dim(); }
  const SpanCatalog& catalog(int k) const { return catalogs_.at(static_cast<std::size_t>(k)); }
  const SpanFamily& family(int k) const { return catalog(k).family; }

  bool feasible(double dist, double tau) const { return dist <= tau * (1.0 + options_.feas_tol); }

  SolveResult solve(const Vector& d, double tau) const {
    check_query(d, tau);
    const double norm_d = norm_eval(fidelity_, d);
    if (feasible(norm_d, tau)) return {0, {}, Vector(0), norm_d};

    for (int k = 1; k <= dim(); ++k) {
      const auto& cat = catalog(k);
      std::vector<std::optional<DistanceResult>> cache(cat.family.members.size());
      for (const auto& [subset, member] : cat.subsets) {
        auto& hit = cache[member];
        if (!hit) hit = subspace_distance(fidelity_, cat.family.members[member], d, options_.dist_tol);
        if (!feasible(hit->dist, tau)) continue;
        const Matrix cols = dict_.columns(subset);
        Vector lambda = cols.colPivHouseholderQr().solve(hit->minimizer);
        const double residual = norm_eval(fidelity_, cols * lambda - d);
        return {k, subset, std::move(lambda), residual};
      }
    }
    throw std::logic_error("solve_l0: no feasible support found; dictionary does not span R^N");
  }

  /// val(P_d) only; scans span families rather than subsets.
  int value(const Vector& d, double tau) const {
    check_query(d, tau);
    for (int k = 0; k < dim(); ++k)
      if (within(d, tau, k)) return k;
    return dim();
  }

  /// d in Theta_K^tau, i.e. val(P_d) <= K.
  bool val_leq(const Vector& d, double tau, int K) const {
    check_query(d, tau);
    check_level(K);
    return within(d, tau, K);
  }

  /// d in D_K^tau, i.e. val(P_d) == K.
  bool val_eq(const Vector& d, double tau, int K) const {
    check_query(d, tau);
    check_level(K);
    if (!within(d, tau, K)) return false;
    return K == 0 || !within(d, tau, K - 1);
  }

 private:
  bool within(const Vector& d, double tau, int K) const {
    if (K == dim()) return true;
    for (const auto& member : family(K).members)
      if (feasible(subspace_distance(fidelity_, member, d, options_.dist_tol).dist, tau)) return true;
    return false;
  }

  void check_query(const Vector& d, double tau) const {
    if (d.size() != dim()) throw std::invalid_argument("datum dimension does not match dictionary");
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  }
  void check_level(int K) const {
    if (K < 0 || K > dim()) throw std::invalid_argument("K must lie in [0, N]");
  }

  Dictionary dict_;
  NormSpec fidelity_;
  SolverOptions options_;
  std::vector<SpanCatalog> catalogs_;
};

inline SolveResult solve_l0(const Dictionary& dict, const NormSpec& norm, const Vector& d,
                            double tau, const SolverOptions& options = {}) {
  return L0Solver(dict, norm, options).solve(d, tau);
}

inline bool val_leq(const Dictionary& dict, const NormSpec& norm, const Vector& d, double tau,
                    int K, const SolverOptions& options = {}) {
  return L0Solver(dict, norm, options).val_leq(d, tau, K);
}

inline bool val_eq(const Dictionary& dict, const NormSpec& norm, const Vector& d, double tau,
                   int K, const SolverOptions& options = {}) {
  return L0Solver(dict, norm, options).val_eq(d, tau, K);
}

}  // namespace l0geom
