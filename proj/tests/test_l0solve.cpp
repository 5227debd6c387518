#include <gtest/gtest.h>

#include <chrono>

#include "l0geom/l0solve.hpp"
#include "oracles.hpp"

using namespace l0geom;

namespace {

Matrix gaussian(int rows, int cols, CounterStream& rng) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

SubspaceBasis span_of(const Matrix& cols) { return orthonormal_basis(cols); }

const std::vector<NormSpec> kFidelities = {NormSpec::l1(), NormSpec::l2(), NormSpec::linf()};

}  // namespace

TEST(SubspaceDistance, KnownValues) {
  const auto x_axis = span_of(Matrix(vec({1, 0})));
  EXPECT_NEAR(subspace_distance(NormSpec::l2(), x_axis, vec({3, 4})).dist, 4.0, 1e-14);
  EXPECT_NEAR(subspace_distance(NormSpec::l2(), x_axis, vec({-2, 0})).dist, 0.0, 1e-14);
  const auto diag = span_of(Matrix(vec({1, 1})));
  EXPECT_NEAR(subspace_distance(NormSpec::l1(), diag, vec({1, 0})).dist, 1.0, 1e-12);
  EXPECT_NEAR(subspace_distance(NormSpec::linf(), diag, vec({1, 0})).dist, 0.5, 1e-12);
}

TEST(SubspaceDistance, MatchesVertexEnumeration) {
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    CounterStream rng(4242, trial);
    const int n = 2 + static_cast<int>(trial % 3);
    const int k = 1 + static_cast<int>(trial % static_cast<std::uint64_t>(n - 1));
    const Matrix cols = gaussian(n, k, rng);
    const Vector d = gaussian(n, 1, rng).col(0);
    const auto basis = span_of(cols);
    for (const auto& norm : kFidelities) {
      const auto r = subspace_distance(norm, basis, d);
      const double want = oracle::distance(norm, cols, d);
      ASSERT_NEAR(r.dist, want, 1e-9 * (1 + want)) << to_string(norm) << " trial " << trial;
      // The returned point lies in the subspace and attains the distance.
      EXPECT_LT((r.minimizer - basis.projector() * r.minimizer).norm(), 1e-9);
      EXPECT_NEAR(norm_eval(norm, d - r.minimizer), r.dist, 1e-12 * (1 + r.dist));
    }
  }
}

TEST(SubspaceDistance, WeightedNormsMatchTransformedProblems) {
  // ||diag(w)(d - Bc)||_p equals the plain lp distance from diag(w) d to span(diag(w) B).
  for (std::uint64_t trial = 0; trial < 60; ++trial) {
    CounterStream rng(777, trial);
    const int n = 2 + static_cast<int>(trial % 3);
    const Matrix cols = gaussian(n, 1 + static_cast<int>(trial % 2), rng);
    const Vector d = gaussian(n, 1, rng).col(0);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (auto& x : w) x = 0.3 + 2.0 * rng.uniform();
    const Vector wv = Eigen::Map<const Vector>(w.data(), n);
    const Matrix wcols = wv.asDiagonal() * cols;
    const Vector wd = wv.asDiagonal() * d;
    const auto basis = span_of(cols);
    EXPECT_NEAR(subspace_distance(NormSpec::weighted(1.0, w), basis, d).dist,
                oracle::distance(NormSpec::l1(), wcols, wd), 1e-9);
    EXPECT_NEAR(subspace_distance(NormSpec::weighted(2.0, w), basis, d).dist,
                oracle::distance(NormSpec::l2(), wcols, wd), 1e-9);
  }
}

TEST(SubspaceDistance, GeneralExponentAgreesWithLineScan) {
  // A line in R^2: scan the single coefficient finely, then refine.
  const auto norm = NormSpec::weighted(3.0, {1.0, 2.5});
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    CounterStream rng(99, trial);
    const Vector b = vec({rng.normal(), rng.normal()});
    const Vector d = vec({rng.normal(), rng.normal()});
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (norm_eval(norm, d - m1 * b) < norm_eval(norm, d - m2 * b)) hi = m2;
      else lo = m1;
    }
    const double want = norm_eval(norm, d - 0.5 * (lo + hi) * b);
    EXPECT_NEAR(subspace_distance(norm, span_of(Matrix(b)), d).dist, want, 1e-8 * (1 + want));
  }
}

TEST(Solve, KnownValues) {
  const auto dict = Dictionary::from_atoms({{1, 0}, {0, 1}});
  const L0Solver solver(dict, NormSpec::l2());
  const auto zero = solver.solve(vec({0.03, 0.04}), 0.1);
  EXPECT_EQ(zero.val, 0);
  EXPECT_TRUE(zero.support.empty());
  const auto one = solver.solve(vec({1, 0.05}), 0.1);
  EXPECT_EQ(one.val, 1);
  EXPECT_EQ(one.support, (Support{0}));
  EXPECT_NEAR(one.coefficients[0], 1.0, 1e-14);
  EXPECT_NEAR(one.residual, 0.05, 1e-14);
  EXPECT_EQ(solver.solve(vec({1, 1}), 0.1).val, 2);
}

TEST(Solve, RejectsBadQueries) {
  const L0Solver solver(Dictionary::from_atoms({{1, 0}, {0, 1}}), NormSpec::l2());
  EXPECT_THROW(solver.solve(vec({1, 2, 3}), 0.1), std::invalid_argument);
  EXPECT_THROW(solver.solve(vec({1, 2}), 0.0), std::invalid_argument);
  EXPECT_THROW(solver.val_leq(vec({1, 2}), 0.1, 3), std::invalid_argument);
}

TEST(Solve, TieBreakIsLexicographic) {
  // (1,1) and (2,2) span the same line; the lower index wins.
  const L0Solver solver(Dictionary::from_atoms({{1, 0}, {2, 2}, {1, 1}}), NormSpec::l2());
  const auto r = solver.solve(vec({3, 3}), 0.01);
  EXPECT_EQ(r.val, 1);
  EXPECT_EQ(r.support, (Support{1}));
  EXPECT_NEAR(r.coefficients[0], 1.5, 1e-12);
}

TEST(Solve, MatchesBruteForceOverAllSubsets) {
  const std::vector<double> taus = {0.05, 0.2, 1.0};
  for (std::uint64_t trial = 0; trial < 120; ++trial) {
    CounterStream rng(31337, trial);
    const int n = 2 + static_cast<int>(trial % 3);
    const int m = n + static_cast<int>(trial % 3);
    const Matrix atoms = gaussian(n, m, rng);
    const Vector d = gaussian(n, 1, rng).col(0);
    const double tau = taus[trial % 3];
    const auto& norm = kFidelities[(trial / 3) % 3];
    const auto r = solve_l0(Dictionary(atoms), norm, d, tau);
    ASSERT_EQ(r.val, oracle::brute_force_val(atoms, norm, d, tau)) << "trial " << trial;
  }
}

TEST(Solve, SupportIsIndependentAndFeasible) {
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    CounterStream rng(55, trial);
    const int n = 2 + static_cast<int>(trial % 3);
    Matrix atoms = gaussian(n, n + 2, rng);
    atoms.col(n + 1) = 2.0 * atoms.col(0);
    const Dictionary dict(atoms);
    const Vector d = gaussian(n, 1, rng).col(0);
    const auto& norm = kFidelities[trial % 3];
    const auto r = solve_l0(dict, norm, d, 0.3);
    ASSERT_EQ(r.support.size(), static_cast<std::size_t>(r.val));
    ASSERT_EQ(r.coefficients.size(), r.val);
    if (r.val > 0) {
      EXPECT_EQ(orthonormal_basis(dict.columns(r.support)).dim(), r.val);
      EXPECT_NEAR(r.residual, norm_eval(norm, dict.columns(r.support) * r.coefficients - d), 1e-12);
    }
    EXPECT_LE(r.residual, 0.3 * (1 + 1e-9));
  }
}

TEST(Solve, MonotoneInTau) {
  for (std::uint64_t trial = 0; trial < 60; ++trial) {
    CounterStream rng(808, trial);
    const int n = 2 + static_cast<int>(trial % 3);
    const L0Solver solver(Dictionary(gaussian(n, n + 2, rng)), kFidelities[trial % 3]);
    const Vector d = gaussian(n, 1, rng).col(0);
    int prev = n + 1;
    for (double tau : {0.01, 0.05, 0.1, 0.3, 0.7, 1.5, 5.0}) {
      const int v = solver.value(d, tau);
      EXPECT_LE(v, prev);
      prev = v;
    }
  }
}

TEST(Solve, ScaleCovariantForEuclideanFidelity) {
  for (std::uint64_t trial = 0; trial < 60; ++trial) {
    CounterStream rng(909, trial);
    const int n = 2 + static_cast<int>(trial % 3);
    const L0Solver solver(Dictionary(gaussian(n, n + 1, rng)), NormSpec::l2());
    const Vector d = gaussian(n, 1, rng).col(0);
    const double a = 0.1 + 5.0 * rng.uniform();
    EXPECT_EQ(solver.value(a * d, a * 0.3), solver.value(d, 0.3));
  }
}

TEST(ValLevels, AgreeWithSolveAndPartition) {
  CounterStream seed_rng(1, 0);
  const Matrix atoms = gaussian(3, 5, seed_rng);
  for (const auto& norm : kFidelities) {
    const L0Solver solver(Dictionary(atoms), norm);
    for (std::uint64_t i = 0; i < 1000; ++i) {
      const Vector d = sample_levelset(NormSpec::l2(), 1.0, 3, i, 12);
      const double tau = 0.3;
      const int v = solver.solve(d, tau).val;
      EXPECT_EQ(solver.value(d, tau), v);
      int eq_count = 0;
      for (int K = 0; K <= 3; ++K) {
        EXPECT_EQ(solver.val_leq(d, tau, K), v <= K);
        eq_count += solver.val_eq(d, tau, K) ? 1 : 0;
      }
      EXPECT_EQ(eq_count, 1);
      EXPECT_TRUE(solver.val_leq(d, tau, 3));
    }
  }
}

TEST(ValLevels, KnownValues) {
  const L0Solver solver(Dictionary::from_atoms({{1, 0}, {0, 1}}), NormSpec::l2());
  EXPECT_TRUE(solver.val_eq(vec({0, 0}), 0.1, 0));
  EXPECT_FALSE(solver.val_eq(vec({0.05, 0}), 0.1, 1));
  EXPECT_TRUE(solver.val_leq(vec({0.06, 0.08}), 0.1, 0));
  EXPECT_FALSE(solver.val_leq(vec({0.07, 0.08}), 0.1, 0));
  EXPECT_TRUE(solver.val_leq(vec({5, 7}), 0.1, 2));
}

TEST(Solve, FreeFunctionWrappers) {
  const auto dict = Dictionary::from_atoms({{1, 0}, {0, 1}});
  EXPECT_TRUE(val_leq(dict, NormSpec::linf(), vec({1, 0.05}), 0.1, 1));
  EXPECT_TRUE(val_eq(dict, NormSpec::linf(), vec({1, 0.05}), 0.1, 1));
  EXPECT_FALSE(val_eq(dict, NormSpec::linf(), vec({1, 0.5}), 0.1, 1));
}
