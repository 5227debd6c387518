#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "l0geom/constants.hpp"
#include "l0geom/l0solve.hpp"
#include "l0geom/norms.hpp"
#include "l0geom/parallel.hpp"
#include "l0geom/stats.hpp"

namespace l0geom {

enum class ProbMode { Leq, Eq };

struct MCEstimate {
  std::string quantity;
  int K = 0;
  double mean = 0.0;
  double half_width_95 = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;

  double sigma() const { return half_width_95 / kZ95; }
};

/// Counts of val(P_d) over n uniform draws on LS(f_d, theta); counts[v] is
/// the number of samples with val = v.
struct ValHistogram {
  std::vector<std::uint64_t> counts;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  double tau = 0.0;
  double theta = 0.0;

  int dim() const { return static_cast<int>(counts.size()) - 1; }
  std::uint64_t count_leq(int K) const {
    std::uint64_t s = 0;
    for (int v = 0; v <= K && v <= dim(); ++v) s += counts[static_cast<std::size_t>(v)];
    return s;
  }
  std::uint64_t count_eq(int K) const { return counts.at(static_cast<std::size_t>(K)); }
  std::uint64_t val_sum() const {
    std::uint64_t s = 0;
    for (int v = 0; v <= dim(); ++v) s += static_cast<std::uint64_t>(v) * counts[static_cast<std::size_t>(v)];
    return s;
  }
};

/// Data d_i = sample_levelset(data, theta, N, i, seed) are the same for every
/// tau, so histograms at different tau share random numbers.
inline ValHistogram sample_val_histogram(const L0Solver& solver, const NormSpec& data, double tau,
                                         double theta, std::uint64_t n, std::uint64_t seed,
                                         unsigned threads = 1) {
  if (!(tau > 0.0) || !(theta > 0.0)) throw std::invalid_argument("tau and theta must be > 0");
  if (n == 0) throw std::invalid_argument("sample count must be positive");
  const int dim = solver.dim();
  const std::vector<std::uint64_t> zero(static_cast<std::size_t>(dim) + 1, 0);
  auto counts = parallel_reduce(
      n, threads, zero,
      [&](std::vector<std::uint64_t>& acc, std::uint64_t i) {
        const Vector d = sample_levelset(data, theta, dim, i, seed);
        ++acc[static_cast<std::size_t>(solver.value(d, tau))];
      },
      [](std::vector<std::uint64_t>& total, const std::vector<std::uint64_t>& part) {
        for (std::size_t v = 0; v < total.size(); ++v) total[v] += part[v];
      });
  return {std::move(counts), n, seed, tau, theta};
}

inline MCEstimate proportion_estimate(std::string name, int K, std::uint64_t hits,
                                      std::uint64_t n, std::uint64_t seed) {
  const Interval ci = wilson_interval(hits, n);
  MCEstimate e;
  e.quantity = std::move(name);
  e.K = K;
  e.mean = static_cast<double>(hits) / static_cast<double>(n);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  e.half_width_95 = ci.half_width();
  e.n = n;
  e.seed = seed;
  return e;
}

inline MCEstimate prob_from_histogram(const ValHistogram& h, int K, ProbMode mode) {
  if (K < 0 || K > h.dim()) throw std::invalid_argument("K must lie in [0, N]");
  const std::uint64_t hits = mode == ProbMode::Leq ? h.count_leq(K) : h.count_eq(K);
  return proportion_estimate(mode == ProbMode::Leq ? "prob_leq" : "prob_eq", K, hits, h.n, h.seed);
}

inline MCEstimate expect_from_histogram(const ValHistogram& h) {
  const double n = static_cast<double>(h.n);
  const double mean = static_cast<double>(h.val_sum()) / n;
  double m2 = 0.0;
  for (int v = 0; v <= h.dim(); ++v)
    m2 += static_cast<double>(h.counts[static_cast<std::size_t>(v)]) * (v - mean) * (v - mean);
  const double sd = h.n > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
  MCEstimate e;
  e.quantity = "expect";
  e.K = h.dim();
  e.mean = mean;
  e.half_width_95 = kZ95 * sd / std::sqrt(n);
  e.ci_low = mean - e.half_width_95;
  e.ci_high = mean + e.half_width_95;
  e.n = h.n;
  e.seed = h.seed;
  return e;
}

/// N - sum_{K<N} #(val <= K) == sum of val, checked on integer counts.
inline bool expectation_identity_holds(const ValHistogram& h) {
  std::uint64_t leq_total = 0;
  for (int K = 0; K < h.dim(); ++K) leq_total += h.count_leq(K);
  return static_cast<std::uint64_t>(h.dim()) * h.n - leq_total == h.val_sum();
}

/// Rescale a probability estimate into a measure: P * theta^N * Leb(B_{f_d}).
inline MCEstimate measure_from_prob(const MCEstimate& p, double theta, int dim,
                                    const VolumeEstimate& data_ball) {
  const double scale = std::pow(theta, dim);
  MCEstimate m = p;
  m.quantity = p.quantity == "prob_leq" ? "measure_leq" : "measure_eq";
  const Uncertain v = Uncertain{p.mean, p.sigma()} * (scale * data_ball.uncertain());
  m.mean = v.value;
  m.half_width_95 = kZ95 * v.sigma;
  m.ci_low = m.mean - m.half_width_95;
  m.ci_high = m.mean + m.half_width_95;
  return m;
}

inline MCEstimate estimate_prob(const L0Solver& solver, const NormSpec& data, double tau,
                                double theta, int K, ProbMode mode, std::uint64_t n,
                                std::uint64_t seed, unsigned threads = 1) {
  return prob_from_histogram(sample_val_histogram(solver, data, tau, theta, n, seed, threads), K, mode);
}

inline MCEstimate estimate_expect(const L0Solver& solver, const NormSpec& data, double tau,
                                  double theta, std::uint64_t n, std::uint64_t seed,
                                  unsigned threads = 1) {
  return expect_from_histogram(sample_val_histogram(solver, data, tau, theta, n, seed, threads));
}

inline MCEstimate estimate_measure(const L0Solver& solver, const NormSpec& data, double tau,
                                   double theta, int K, ProbMode mode, std::uint64_t n,
                                   std::uint64_t seed, unsigned threads = 1,
                                   const McOptions& volume_mc = {}) {
  const auto p = estimate_prob(solver, data, tau, theta, K, mode, n, seed, threads);
  return measure_from_prob(p, theta, solver.dim(), ball_volume(data, solver.dim(), volume_mc));
}

/// Leb(T_{V1}^tau ∩ T_{V2}^tau ∩ LS(f_d, theta)) by uniform sampling on the level set.
inline MCEstimate estimate_cylinder_intersection(const NormSpec& fidelity, const NormSpec& data,
                                                 const SubspaceBasis& V1, const SubspaceBasis& V2,
                                                 double tau, double theta, std::uint64_t n,
                                                 std::uint64_t seed, unsigned threads = 1,
                                                 const McOptions& volume_mc = {}) {
  check_same_ambient(V1, V2);
  if (!(tau > 0.0) || !(theta > 0.0)) throw std::invalid_argument("tau and theta must be > 0");
  const int dim = V1.ambient();
  const auto hits = parallel_reduce<std::uint64_t>(
      n, threads, 0,
      [&](std::uint64_t& acc, std::uint64_t i) {
        const Vector d = sample_levelset(data, theta, dim, i, seed);
        if (subspace_distance(fidelity, V1, d).dist <= tau && subspace_distance(fidelity, V2, d).dist <= tau)
          ++acc;
      },
      [](std::uint64_t& total, std::uint64_t part) { total += part; });
  MCEstimate p = proportion_estimate("prob_leq", 0, hits, n, seed);
  MCEstimate m = measure_from_prob(p, theta, dim, ball_volume(data, dim, volume_mc));
  m.quantity = "cylinder_intersection";
  return m;
}

struct ValidationCell {
  Quantity quantity = Quantity::ProbLeq;
  int K = 0;
  double tau = 0.0;
  double theta = 0.0;
  MCEstimate estimate;
  BoundReport bound;
  double sigma = 0.0;   // combined slack unit for the containment test
  double ratio = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidationCell> cells;
  bool all_pass() const {
    for (const auto& c : cells)
      if (!c.pass) return false;
    return !cells.empty();
  }
};

struct ValidationPlan {
  std::vector<double> tau_grid;
  double theta = 1.0;
  std::vector<int> K_list;
  std::vector<Quantity> quantities;
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

/// Compare Monte Carlo estimates with the analytic bounds on every
/// (quantity, K, tau) cell: pass iff lower - 3 sigma <= estimate <= upper + 3 sigma,
/// where sigma combines estimate and volume-constant uncertainty. Cells whose
/// (tau, theta) violates the validity condition are reported as failures.
/// One sample set per tau is reused for every K and quantity.
inline ValidationReport validate_bounds(const L0Solver& solver, const NormSpec& data,
                                        const ConstantTable& table, const VolumeEstimate& data_ball,
                                        const ValidationPlan& plan) {
  const int dim = solver.dim();
  ValidationReport report;
  for (double tau : plan.tau_grid) {
    const ValHistogram h = sample_val_histogram(solver, data, tau, plan.theta, plan.samples, plan.seed, plan.threads);
    const double r = tau / plan.theta;
    for (Quantity q : plan.quantities) {
      std::vector<int> ks = plan.K_list;
      if (q == Quantity::Expect) ks = {dim};
      for (int K : ks) {
        ValidationCell cell;
        cell.quantity = q;
        cell.K = K;
        cell.tau = tau;
        cell.theta = plan.theta;
        cell.bound = bounds(q, table, K, tau, plan.theta, data_ball);
        const double scale = std::pow(plan.theta, dim) * data_ball.value;
        switch (q) {
          case Quantity::ProbLeq: cell.estimate = prob_from_histogram(h, K, ProbMode::Leq); break;
          case Quantity::ProbEq: cell.estimate = prob_from_histogram(h, K, ProbMode::Eq); break;
          case Quantity::MeasureLeq:
            cell.estimate = measure_from_prob(prob_from_histogram(h, K, ProbMode::Leq), plan.theta, dim, data_ball);
            break;
          case Quantity::MeasureEq:
            cell.estimate = measure_from_prob(prob_from_histogram(h, K, ProbMode::Eq), plan.theta, dim, data_ball);
            break;
          case Quantity::Expect: cell.estimate = expect_from_histogram(h); break;
        }
        if (q == Quantity::Expect) {
          const double lead = table[static_cast<std::size_t>(dim - 1)].C_K / data_ball.value * r;
          cell.ratio = (dim - cell.estimate.mean) / lead;
        } else {
          double lead = table[static_cast<std::size_t>(K)].C_K / data_ball.value * std::pow(r, dim - K);
          if (q == Quantity::MeasureLeq || q == Quantity::MeasureEq) lead *= scale;
          cell.ratio = cell.estimate.mean / lead;
        }
        if (cell.bound.valid) {
          const double s_lo = std::hypot(cell.estimate.sigma(), cell.bound.lower_sigma);
          const double s_hi = std::hypot(cell.estimate.sigma(), cell.bound.upper_sigma);
          cell.sigma = std::max(s_lo, s_hi);
          cell.pass = cell.bound.lower - 3.0 * s_lo <= cell.estimate.mean &&
                      cell.estimate.mean <= cell.bound.upper + 3.0 * s_hi;
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

struct AsymptoteFit {
  double slope = 0.0;
  double r2 = 0.0;
};

/// Least-squares slope of y against x^exponent through the origin; r2 is the
/// centred coefficient of determination of that fit.
inline AsymptoteFit fit_asymptote(const std::vector<double>& ratio, const std::vector<double>& estimate,
                                  int exponent) {
  if (ratio.size() != estimate.size()) throw std::invalid_argument("fit_asymptote: size mismatch");
  if (ratio.size() < 3) throw std::invalid_argument("fit_asymptote: need at least 3 grid points");
  double sxx = 0.0, sxy = 0.0, mean_y = 0.0;
  std::vector<double> x(ratio.size());
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    x[i] = std::pow(ratio[i], exponent);
    sxx += x[i] * x[i];
    sxy += x[i] * estimate[i];
    mean_y += estimate[i];
  }
  mean_y /= static_cast<double>(ratio.size());
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_asymptote: degenerate grid");
  bool distinct = false;
  for (std::size_t i = 1; i < x.size(); ++i) distinct = distinct || x[i] != x[0];
  if (!distinct) throw std::invalid_argument("fit_asymptote: degenerate grid");

  AsymptoteFit fit;
  fit.slope = sxy / sxx;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ss_res += std::pow(estimate[i] - fit.slope * x[i], 2);
    ss_tot += std::pow(estimate[i] - mean_y, 2);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

}  // namespace l0geom
