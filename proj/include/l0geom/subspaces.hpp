#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "l0geom/norms.hpp"

namespace l0geom {

inline constexpr double kDefaultSpanTol = 1e-9;

using Support = std::vector<std::size_t>;

/// Orthonormal basis of a subspace of R^N. A zero-column basis is {0}.
struct SubspaceBasis {
  Matrix columns;   // N x K
  Support support;  // dictionary indices the span came from, if any

  int dim() const { return static_cast<int>(columns.cols()); }
  int ambient() const { return static_cast<int>(columns.rows()); }
  Matrix projector() const { return columns * columns.transpose(); }
};

/// Rank-revealing orthonormalisation of the columns of `vectors` (N x m),
/// two passes of modified Gram-Schmidt. A column whose residual falls below
/// tol * (largest input norm) is dropped.
inline SubspaceBasis orthonormal_basis(const Matrix& vectors, double tol = kDefaultSpanTol) {
  if (!(tol > 0.0)) throw std::invalid_argument("orthonormal_basis: tol must be > 0");
  const Eigen::Index n = vectors.rows();
  double scale = 0.0;
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) scale = std::max(scale, vectors.col(j).norm());

  Matrix q(n, vectors.cols());
  Eigen::Index rank = 0;
  if (scale > 0.0) {
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
      Vector v = vectors.col(j);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index i = 0; i < rank; ++i) v -= q.col(i).dot(v) * q.col(i);
      const double r = v.norm();
      if (r <= tol * scale) continue;
      q.col(rank++) = v / r;
    }
  }
  return {q.leftCols(rank), {}};
}

/// Orthonormal basis of the orthogonal complement of `basis`.
inline Matrix complement_basis(const SubspaceBasis& basis) {
  const Eigen::Index n = basis.ambient();
  const Eigen::Index k = basis.dim();
  if (k == 0) return Matrix::Identity(n, n);
  if (k == n) return Matrix(n, 0);
  Eigen::HouseholderQR<Matrix> qr(basis.columns);
  Matrix full = qr.householderQ() * Matrix::Identity(n, n);
  return full.rightCols(n - k);
}

inline void check_same_ambient(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.ambient() != b.ambient())
    throw std::invalid_argument("subspaces live in different ambient dimensions");
}

/// Span equality through the Frobenius distance between orthogonal projectors.
inline bool spans_equal(const SubspaceBasis& a, const SubspaceBasis& b,
                        double tol = kDefaultSpanTol) {
  check_same_ambient(a, b);
  if (a.dim() != b.dim()) return false;
  return (a.projector() - b.projector()).norm() <= tol;
}

namespace detail {

// Singular value decomposition of [A | -B]; its null space parametrises A ∩ B.
struct JointSvd {
  Eigen::JacobiSVD<Matrix> svd;
  Eigen::Index rank = 0;
};

inline JointSvd joint_svd(const SubspaceBasis& a, const SubspaceBasis& b, double tol) {
  Matrix joint(a.ambient(), a.dim() + b.dim());
  joint << a.columns, -b.columns;
  JointSvd out{Eigen::JacobiSVD<Matrix>(joint, Eigen::ComputeFullV), 0};
  const auto& s = out.svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > tol) ++out.rank;
  return out;
}

}  // namespace detail

/// dim(a ∩ b) = dim a + dim b - rank([a | b]).
inline int intersection_dim(const SubspaceBasis& a, const SubspaceBasis& b,
                            double tol = kDefaultSpanTol) {
  check_same_ambient(a, b);
  if (a.dim() == 0 || b.dim() == 0) return 0;
  const auto js = detail::joint_svd(a, b, tol);
  return a.dim() + b.dim() - static_cast<int>(js.rank);
}

/// Orthonormal basis of a ∩ b. A x = B y for every null vector (x, y) of [A | -B].
inline SubspaceBasis intersection_basis(const SubspaceBasis& a, const SubspaceBasis& b,
                                        double tol = kDefaultSpanTol) {
  check_same_ambient(a, b);
  if (a.dim() == 0 || b.dim() == 0) return {Matrix(a.ambient(), 0), {}};
  const auto js = detail::joint_svd(a, b, tol);
  const Eigen::Index total = a.dim() + b.dim();
  const Eigen::Index null_dim = total - js.rank;
  if (null_dim == 0) return {Matrix(a.ambient(), 0), {}};
  const Matrix null_space = js.svd.matrixV().rightCols(null_dim);
  // Average the two images A x and B y; they agree up to rounding.
  const Matrix images = 0.5 * (a.columns * null_space.topRows(a.dim()) +
                               b.columns * null_space.bottomRows(b.dim()));
  SubspaceBasis w = orthonormal_basis(images, 1e-8);
  return w;
}

/// The finite family (psi_i) spanning R^N, stored column-wise.
class Dictionary {
 public:
  Dictionary() = default;

  /// Validates: at least one atom, no zero atoms, atoms span R^N.
  explicit Dictionary(Matrix atoms, double span_tol = kDefaultSpanTol) : atoms_(std::move(atoms)) {
    if (atoms_.rows() == 0 || atoms_.cols() == 0)
      throw std::invalid_argument("dictionary is empty");
    for (Eigen::Index j = 0; j < atoms_.cols(); ++j)
      if (atoms_.col(j).isZero(0.0))
        throw std::invalid_argument("dictionary atom " + std::to_string(j) + " is the zero vector");
    if (orthonormal_basis(atoms_, span_tol).dim() != atoms_.rows())
      throw std::invalid_argument("dictionary does not span R^N (N = " +
                                  std::to_string(atoms_.rows()) + ")");
  }

  static Dictionary from_atoms(const std::vector<std::vector<double>>& atoms,
                               double span_tol = kDefaultSpanTol) {
    if (atoms.empty()) throw std::invalid_argument("dictionary is empty");
    const auto n = atoms.front().size();
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(atoms.size()));
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if (atoms[j].size() != n)
        throw std::invalid_argument("dictionary atoms have inconsistent dimensions");
      for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = atoms[j][i];
    }
    return Dictionary(std::move(m), span_tol);
  }

  int dim() const { return static_cast<int>(atoms_.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(atoms_.cols()); }
  const Matrix& atoms() const { return atoms_; }

  Matrix columns(const Support& subset) const {
    Matrix out(atoms_.rows(), static_cast<Eigen::Index>(subset.size()));
    for (std::size_t j = 0; j < subset.size(); ++j)
      out.col(static_cast<Eigen::Index>(j)) = atoms_.col(static_cast<Eigen::Index>(subset[j]));
    return out;
  }

 private:
  Matrix atoms_;
};

/// Visit every size-k subset of {0..m-1} in lexicographic order.
inline void for_each_combination(std::size_t m, std::size_t k,
                                 const std::function<void(const Support&)>& visit) {
  if (k > m) return;
  Support idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    visit(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == m - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double out = 1.0;
  for (std::size_t i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

/// The family J(K): pairwise-distinct K-dimensional dictionary spans,
/// maximal over all size-K subsets.
struct SpanFamily {
  int K = 0;
  std::vector<SubspaceBasis> members;
};

/// J(K) plus, for every rank-K subset of size K (lexicographic order), the
/// member that spans the same subspace.
struct SpanCatalog {
  SpanFamily family;
  std::vector<std::pair<Support, std::size_t>> subsets;
};

inline SpanCatalog build_span_catalog(const Dictionary& dict, int K,
                                      double tol = kDefaultSpanTol) {
  if (K < 0 || K > dict.dim())
    throw std::invalid_argument("enumerate_spans: K must lie in [0, N]");
  SpanCatalog out;
  out.family.K = K;
  if (K == 0) {
    out.family.members.push_back({Matrix(dict.dim(), 0), {}});
    out.subsets.push_back({{}, 0});
    return out;
  }
  for_each_combination(dict.size(), static_cast<std::size_t>(K), [&](const Support& subset) {
    SubspaceBasis basis = orthonormal_basis(dict.columns(subset), tol);
    if (basis.dim() != K) return;
    basis.support = subset;
    auto& members = out.family.members;
    std::size_t match = members.size();
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (spans_equal(members[i], basis, tol)) {
        match = i;
        break;
      }
    }
    if (match == members.size()) members.push_back(std::move(basis));
    out.subsets.push_back({subset, match});
  });
  return out;
}

inline SpanFamily enumerate_spans(const Dictionary& dict, int K, double tol = kDefaultSpanTol) {
  return build_span_catalog(dict, K, tol).family;
}

/// k_K = max{0, 2K - N}: no two distinct K-dimensional subspaces of R^N meet
/// in fewer dimensions.
inline int min_intersection_dim(int K, int N) { return std::max(0, 2 * K - N); }

/// Ordered pairs (i, j), i != j, of family members whose spans meet in
/// exactly k dimensions: the set H(K, k).
inline std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(const SpanFamily& family,
                                                                        int k,
                                                                        double tol = kDefaultSpanTol) {
  if (k < 0 || k >= std::max(family.K, 1))
    throw std::invalid_argument("enumerate_pairs: k must lie in [0, K)");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto& m = family.members;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      if (i != j && intersection_dim(m[i], m[j], tol) == k) out.emplace_back(i, j);
  return out;
}

}  // namespace l0geom
