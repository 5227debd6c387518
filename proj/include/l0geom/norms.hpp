#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "l0geom/parallel.hpp"
#include "l0geom/rng.hpp"
#include "l0geom/stats.hpp"

namespace l0geom {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class NormKind { L1, L2, Linf, WeightedLp };

/// One of the supported norms on R^n. WeightedLp is x -> ||diag(weights) x||_p.
struct NormSpec {
  NormKind kind = NormKind::L2;
  double p = 2.0;
  std::vector<double> weights;

  static NormSpec l1() { return {NormKind::L1, 1.0, {}}; }
  static NormSpec l2() { return {NormKind::L2, 2.0, {}}; }
  static NormSpec linf() { return {NormKind::Linf, std::numeric_limits<double>::infinity(), {}}; }
  static NormSpec weighted(double p, std::vector<double> weights) {
    if (!(p >= 1.0) || !std::isfinite(p))
      throw std::invalid_argument("weighted norm: p must be a finite real >= 1");
    if (weights.empty()) throw std::invalid_argument("weighted norm: empty weights");
    for (double w : weights)
      if (!(w > 0.0) || !std::isfinite(w))
        throw std::invalid_argument("weighted norm: weights must be strictly positive");
    return {NormKind::WeightedLp, p, std::move(weights)};
  }

  /// Exponent of the underlying lp norm (+inf for Linf).
  double exponent() const {
    switch (kind) {
      case NormKind::L1: return 1.0;
      case NormKind::L2: return 2.0;
      case NormKind::Linf: return std::numeric_limits<double>::infinity();
      case NormKind::WeightedLp: return p;
    }
    return p;
  }
  double weight_max() const {
    return weights.empty() ? 1.0 : *std::max_element(weights.begin(), weights.end());
  }
  double weight_min() const {
    return weights.empty() ? 1.0 : *std::min_element(weights.begin(), weights.end());
  }
  bool is_euclidean() const { return kind == NormKind::L2; }

  friend bool operator==(const NormSpec&, const NormSpec&) = default;
};

inline std::string to_string(const NormSpec& norm) {
  switch (norm.kind) {
    case NormKind::L1: return "l1";
    case NormKind::L2: return "l2";
    case NormKind::Linf: return "linf";
    case NormKind::WeightedLp: return "wlp(p=" + std::to_string(norm.p) + ")";
  }
  return "?";
}

namespace detail {

inline void check_dimension(const NormSpec& norm, Eigen::Index n) {
  if (norm.kind == NormKind::WeightedLp && static_cast<Eigen::Index>(norm.weights.size()) != n)
    throw std::invalid_argument("norm dimension " + std::to_string(norm.weights.size()) +
                                " does not match vector dimension " + std::to_string(n));
}

}  // namespace detail

inline double norm_eval(const NormSpec& norm, const Eigen::Ref<const Vector>& w) {
  detail::check_dimension(norm, w.size());
  switch (norm.kind) {
    case NormKind::L1: return w.lpNorm<1>();
    case NormKind::L2: return w.norm();
    case NormKind::Linf: return w.size() == 0 ? 0.0 : w.lpNorm<Eigen::Infinity>();
    case NormKind::WeightedLp: {
      double peak = 0.0;
      for (Eigen::Index i = 0; i < w.size(); ++i)
        peak = std::max(peak, std::abs(norm.weights[i] * w[i]));
      if (peak == 0.0) return 0.0;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < w.size(); ++i)
        acc += std::pow(std::abs(norm.weights[i] * w[i]) / peak, norm.p);
      return peak * std::pow(acc, 1.0 / norm.p);
    }
  }
  return 0.0;
}

/// Volume of the n-dimensional Euclidean unit ball, pi^(n/2) / Gamma(n/2 + 1),
/// through alpha(n) = (2 pi / n) alpha(n - 2) so that alpha(1) = 2 exactly.
inline double euclid_ball_volume(int n) {
  if (n < 1) throw std::invalid_argument("euclid_ball_volume: n must be >= 1");
  double v = n % 2 == 0 ? 1.0 : 2.0;
  for (int m = n % 2 == 0 ? 2 : 3; m <= n; m += 2) v *= 2.0 * std::numbers::pi / m;
  return v;
}

/// alpha(n) extended with the zero-dimensional convention alpha(0) = 1.
inline double euclid_ball_volume_or_one(int n) { return n == 0 ? 1.0 : euclid_ball_volume(n); }

/// Smallest closed-form delta with norm_a(w) <= delta * norm_b(w) on R^n.
/// Tight for unweighted lp pairs; for weighted norms the bound goes through
/// the weight extremes and may be loose.
inline double equivalence_constant(const NormSpec& norm_a, const NormSpec& norm_b, int n) {
  if (n < 1) throw std::invalid_argument("equivalence_constant: n must be >= 1");
  detail::check_dimension(norm_a, n);
  detail::check_dimension(norm_b, n);
  if (norm_a == norm_b) return 1.0;
  const double inv_a = 1.0 / norm_a.exponent();
  const double inv_b = 1.0 / norm_b.exponent();
  const double lp_factor = std::pow(static_cast<double>(n), std::max(0.0, inv_a - inv_b));
  return norm_a.weight_max() * lp_factor / norm_b.weight_min();
}

struct EquivConstants {
  double delta1 = 1.0;    // f_d(w) <= delta1 ||w||_2
  double delta2 = 1.0;    // ||w||_2 <= delta2 ||w||
  double delta3 = 1.0;    // ||w||_2 <= delta3 f_d(w)
  double delta_bar = 1.0; // delta1 * delta2
};

inline EquivConstants compute_equiv_constants(const NormSpec& fidelity, const NormSpec& data,
                                              int n) {
  EquivConstants out;
  out.delta1 = equivalence_constant(data, NormSpec::l2(), n);
  out.delta2 = equivalence_constant(NormSpec::l2(), fidelity, n);
  out.delta3 = equivalence_constant(NormSpec::l2(), data, n);
  out.delta_bar = out.delta1 * out.delta2;
  return out;
}

struct McOptions {
  std::uint64_t samples = 200'000;
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

/// A volume, exact or Monte Carlo. `half_width_95` is zero for exact values.
struct VolumeEstimate {
  double value = 0.0;
  double half_width_95 = 0.0;
  bool exact = true;

  double sigma() const { return half_width_95 / kZ95; }
  Uncertain uncertain() const { return {value, sigma()}; }
};

/// Hit-or-miss volume of {x in [-half, half]^dim : inside(x)}.
template <typename Inside>
VolumeEstimate hit_or_miss_volume(int dim, double half, const McOptions& mc, Inside inside) {
  if (mc.samples == 0) throw std::invalid_argument("hit_or_miss_volume: zero samples");
  const double box = std::pow(2.0 * half, dim);
  const auto hits = parallel_reduce<std::uint64_t>(
      mc.samples, mc.threads, 0,
      [&](std::uint64_t& acc, std::uint64_t i) {
        CounterStream rng(mc.seed, i);
        Vector x(dim);
        for (int j = 0; j < dim; ++j) x[j] = half * rng.symmetric();
        if (inside(x)) ++acc;
      },
      [](std::uint64_t& total, std::uint64_t part) { total += part; });
  const double n = static_cast<double>(mc.samples);
  const double frac = static_cast<double>(hits) / n;
  const double se = std::sqrt(frac * (1.0 - frac) / n);
  return {box * frac, kZ95 * box * se, false};
}

/// Lebesgue measure of the unit ball of `norm` in R^n. Closed forms for
/// L1 (2^n / n!), L2 (alpha(n)) and Linf (2^n); hit-or-miss for WeightedLp.
inline VolumeEstimate ball_volume(const NormSpec& norm, int n, const McOptions& mc = {}) {
  if (n < 1) throw std::invalid_argument("ball_volume: n must be >= 1");
  detail::check_dimension(norm, n);
  switch (norm.kind) {
    case NormKind::L1: return {std::pow(2.0, n) / std::tgamma(n + 1.0), 0.0, true};
    case NormKind::L2: return {euclid_ball_volume(n), 0.0, true};
    case NormKind::Linf: return {std::pow(2.0, n), 0.0, true};
    case NormKind::WeightedLp: {
      const double half = equivalence_constant(NormSpec::linf(), norm, n);
      return hit_or_miss_volume(n, half, mc, [&](const Vector& x) { return norm_eval(norm, x) <= 1.0; });
    }
  }
  return {};
}

/// Point uniformly distributed on {w : norm(w) <= theta}, a deterministic
/// function of (seed, sample_index).
inline Vector sample_levelset(const NormSpec& norm, double theta, int n,
                              std::uint64_t sample_index, std::uint64_t seed) {
  if (!(theta > 0.0)) throw std::invalid_argument("sample_levelset: theta must be > 0");
  if (n < 1) throw std::invalid_argument("sample_levelset: n must be >= 1");
  detail::check_dimension(norm, n);
  CounterStream rng(seed, sample_index);
  Vector w(n);
  switch (norm.kind) {
    case NormKind::L2: {
      double r2 = 0.0;
      do {
        for (int i = 0; i < n; ++i) w[i] = rng.normal();
        r2 = w.squaredNorm();
      } while (r2 == 0.0);
      const double radius = theta * std::pow(rng.uniform(), 1.0 / n);
      return w * (radius / std::sqrt(r2));
    }
    case NormKind::L1: {
      // Normalised exponential spacings: (E_1..E_n) / (E_1 + .. + E_{n+1})
      // is uniform on the simplex interior; random signs fill the cross-polytope.
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        w[i] = rng.exponential();
        total += w[i];
      }
      total += rng.exponential();
      for (int i = 0; i < n; ++i) w[i] *= (rng.uniform() < 0.5 ? -theta : theta) / total;
      return w;
    }
    case NormKind::Linf: {
      for (int i = 0; i < n; ++i) w[i] = theta * rng.symmetric();
      return w;
    }
    case NormKind::WeightedLp: {
      const double half = theta * equivalence_constant(NormSpec::linf(), norm, n);
      for (;;) {
        for (int i = 0; i < n; ++i) w[i] = half * rng.symmetric();
        if (norm_eval(norm, w) <= theta) return w;
      }
    }
  }
  return w;
}

}  // namespace l0geom
