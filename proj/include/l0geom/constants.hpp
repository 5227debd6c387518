#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "l0geom/l0solve.hpp"
#include "l0geom/norms.hpp"
#include "l0geom/stats.hpp"
#include "l0geom/subspaces.hpp"

namespace l0geom {

enum class VolumeMethod {
  Auto,        // closed form whenever one is known
  MonteCarlo,  // always hit-or-miss (used to cross-check closed forms)
};

/// Leb_{N-K} of P_{V-perp}(unit fidelity ball), measured in an orthonormal
/// frame of V-perp. Membership of u in the projection is h(u) <= 1 with h the
/// fidelity distance to V; samples come from the box [-delta2, delta2]^{N-K}.
/// dim V = N returns 1 (zero-dimensional measure of a point).
inline VolumeEstimate projected_ball_volume(const NormSpec& fidelity, const SubspaceBasis& V,
                                            const McOptions& mc = {},
                                            VolumeMethod method = VolumeMethod::Auto,
                                            double dist_tol = kDefaultDistTol) {
  const int n = V.ambient();
  const int k = V.dim();
  if (k == n) return {1.0, 0.0, true};
  if (method == VolumeMethod::Auto) {
    if (fidelity.is_euclidean()) return {euclid_ball_volume(n - k), 0.0, true};
    if (k == 0) return ball_volume(fidelity, n, mc);
  }
  const Matrix frame = complement_basis(V);
  const double half = equivalence_constant(NormSpec::l2(), fidelity, n);
  return hit_or_miss_volume(n - k, half, mc, [&](const Vector& coords) {
    const Vector u = frame * coords;
    return subspace_distance(fidelity, V, u, dist_tol).dist <= 1.0;
  });
}

/// Leb_K of V ∩ (unit data ball), measured in V coordinates over the box
/// [-delta3, delta3]^K. dim V = 0 returns 1.
inline VolumeEstimate slice_volume(const NormSpec& data, const SubspaceBasis& V,
                                   const McOptions& mc = {},
                                   VolumeMethod method = VolumeMethod::Auto) {
  const int n = V.ambient();
  const int k = V.dim();
  if (k == 0) return {1.0, 0.0, true};
  if (method == VolumeMethod::Auto) {
    if (data.is_euclidean()) return {euclid_ball_volume(k), 0.0, true};
    if (k == n) return ball_volume(data, n, mc);
  }
  const double half = equivalence_constant(NormSpec::l2(), data, n);
  return hit_or_miss_volume(k, half, mc, [&](const Vector& coords) {
    return norm_eval(data, V.columns * coords) <= 1.0;
  });
}

inline VolumeEstimate product(const VolumeEstimate& a, const VolumeEstimate& b) {
  const Uncertain p = a.uncertain() * b.uncertain();
  return {p.value, kZ95 * p.sigma, a.exact && b.exact};
}

/// C_J = Leb_{N-K}(P_{V-perp} B_fidelity) * Leb_K(V ∩ B_data).
inline VolumeEstimate c_J(const NormSpec& fidelity, const NormSpec& data, const SubspaceBasis& V,
                          const McOptions& mc = {}, VolumeMethod method = VolumeMethod::Auto) {
  const McOptions mc_proj{mc.samples, derive_seed(mc.seed, 1), mc.threads};
  const McOptions mc_slice{mc.samples, derive_seed(mc.seed, 2), mc.threads};
  return product(projected_ball_volume(fidelity, V, mc_proj, method),
                 slice_volume(data, V, mc_slice, method));
}

/// Euclidean cylinder constant alpha(K) * alpha(N-K), with alpha(0) = 1 so
/// that K in {0, N} yields alpha(N).
inline double euclid_cK(int K, int N) {
  if (N < 1 || K < 0 || K > N) throw std::invalid_argument("euclid_cK: need 0 <= K <= N, N >= 1");
  return euclid_ball_volume_or_one(K) * euclid_ball_volume_or_one(N - K);
}

/// The same constant through the Gamma-function expression
/// 4 pi^{N/2} / (K (N-K) Gamma((N-K)/2) Gamma(K/2)); undefined for K in {0, N}.
inline double euclid_cK_gamma_form(int K, int N) {
  if (K < 1 || K > N - 1)
    throw std::domain_error("euclid_cK_gamma_form: K must lie in [1, N-1]");
  return 4.0 * std::pow(std::numbers::pi, 0.5 * N) /
         (static_cast<double>(K) * (N - K) * std::tgamma(0.5 * (N - K)) * std::tgamma(0.5 * K));
}

/// Q_{J1,J2} = alpha(N-k) (2 delta2)^{N-k} * Leb_k(W ∩ B_data), W = V1 ∩ V2.
inline VolumeEstimate q_pair(const NormSpec& fidelity, const NormSpec& data,
                             const SubspaceBasis& V1, const SubspaceBasis& V2,
                             const McOptions& mc = {}, double span_tol = kDefaultSpanTol,
                             VolumeMethod method = VolumeMethod::Auto) {
  check_same_ambient(V1, V2);
  if (V1.dim() != V2.dim()) throw std::invalid_argument("q_pair: spans must have equal dimension");
  if (spans_equal(V1, V2, span_tol)) throw std::invalid_argument("q_pair: spans must be distinct");
  const int n = V1.ambient();
  const SubspaceBasis W = intersection_basis(V1, V2, span_tol);
  const int k = W.dim();
  const double delta2 = equivalence_constant(NormSpec::l2(), fidelity, n);
  const double first = euclid_ball_volume_or_one(n - k) * std::pow(2.0 * delta2, n - k);
  const VolumeEstimate slice = slice_volume(data, W, mc, method);
  return {first * slice.value, first * slice.half_width_95, slice.exact};
}

/// Every constant attached to the family J(K).
struct ConstantSet {
  int K = 0;
  int N = 0;
  int k_K = 0;
  std::size_t family_size = 0;
  std::vector<double> C_J;
  double C_K = 0.0;
  double C_K_half_width = 0.0;
  double delta_hat = 0.0;
  std::vector<double> Q;             // Q_{K,k}, indexed by k in [0, K)
  std::vector<double> Q_half_width;  // indexed by k
  std::vector<double> delta_prime;   // delta'_{K,k}, indexed by k
  std::vector<std::size_t> pair_count;  // #H(K,k), indexed by k
  double Delta = 0.0;                // Delta_K

  Uncertain c_k() const { return {C_K, C_K_half_width / kZ95}; }
  Uncertain q(int k) const {
    return {Q.at(static_cast<std::size_t>(k)), Q_half_width.at(static_cast<std::size_t>(k)) / kZ95};
  }
};

using ConstantTable = std::vector<ConstantSet>;  // indexed by K = 0..N

struct ConstantOptions {
  McOptions mc{};
  double span_tol = kDefaultSpanTol;
  double dist_tol = kDefaultDistTol;
};

namespace detail {

struct DeltaChain {
  std::vector<double> delta_hat;                 // by K
  std::vector<std::vector<double>> delta_prime;  // by K, then k
  std::vector<std::vector<std::size_t>> pairs;   // #H(K,k)
  std::vector<double> Delta;                     // by K
};

// delta_J and delta_{J1,J2} take the uniform bounds Delta-bar and
// 3 Delta-bar, or the exact Euclidean values 1 and 2 when both norms are L2.
inline DeltaChain delta_chain(const std::vector<SpanFamily>& families, const NormSpec& fidelity,
                              const NormSpec& data, int upto, double span_tol) {
  const int n = families.front().members.front().ambient();
  const bool euclid = fidelity.is_euclidean() && data.is_euclidean();
  const double bar = compute_equiv_constants(fidelity, data, n).delta_bar;
  const double dj = euclid ? 1.0 : bar;
  const double djj = euclid ? 2.0 : 3.0 * bar;

  DeltaChain out;
  for (int K = 0; K <= upto; ++K) {
    const auto& fam = families[static_cast<std::size_t>(K)];
    out.delta_hat.push_back(fam.members.empty() ? 0.0 : dj);
    std::vector<double> dp(static_cast<std::size_t>(K), 0.0);
    std::vector<std::size_t> count(static_cast<std::size_t>(K), 0);
    for (int k = 0; k < K; ++k) {
      count[static_cast<std::size_t>(k)] = enumerate_pairs(fam, k, span_tol).size();
      if (count[static_cast<std::size_t>(k)] > 0) dp[static_cast<std::size_t>(k)] = djj;
    }
    double Delta;
    if (K == 0) {
      Delta = out.delta_hat[0];
    } else if (K < n) {
      Delta = std::max(out.Delta.back(), out.delta_hat.back());
      for (int k = min_intersection_dim(K, n); k < K; ++k) Delta = std::max(Delta, dp[static_cast<std::size_t>(k)]);
    } else {
      Delta = std::max(out.Delta.back(), out.delta_hat.back());
    }
    out.delta_prime.push_back(std::move(dp));
    out.pairs.push_back(std::move(count));
    out.Delta.push_back(Delta);
  }
  return out;
}

inline ConstantSet assemble_from_families(const std::vector<SpanFamily>& families,
                                          const NormSpec& fidelity, const NormSpec& data, int K,
                                          const DeltaChain& chain, const ConstantOptions& opt) {
  const auto& fam = families[static_cast<std::size_t>(K)];
  const int n = fam.members.front().ambient();
  ConstantSet cs;
  cs.K = K;
  cs.N = n;
  cs.k_K = min_intersection_dim(K, n);
  cs.family_size = fam.members.size();
  cs.delta_hat = chain.delta_hat[static_cast<std::size_t>(K)];
  cs.delta_prime = chain.delta_prime[static_cast<std::size_t>(K)];
  cs.pair_count = chain.pairs[static_cast<std::size_t>(K)];
  cs.Delta = chain.Delta[static_cast<std::size_t>(K)];

  Uncertain total{};
  for (std::size_t i = 0; i < fam.members.size(); ++i) {
    McOptions mc = opt.mc;
    mc.seed = derive_seed(opt.mc.seed, 1000 * static_cast<std::uint64_t>(K) + i);
    // C_N is the data ball itself; share the estimate used for normalisation.
    const VolumeEstimate cj = (K == n) ? ball_volume(data, n, opt.mc) : c_J(fidelity, data, fam.members[i], mc);
    cs.C_J.push_back(cj.value);
    total = total + cj.uncertain();
  }
  cs.C_K = total.value;
  cs.C_K_half_width = kZ95 * total.sigma;

  cs.Q.assign(static_cast<std::size_t>(K), 0.0);
  cs.Q_half_width.assign(static_cast<std::size_t>(K), 0.0);
  for (int k = cs.k_K; k < K; ++k) {
    Uncertain qk{};
    std::uint64_t tag = 0;
    for (const auto& [i, j] : enumerate_pairs(fam, k, opt.span_tol)) {
      McOptions mc = opt.mc;
      mc.seed = derive_seed(opt.mc.seed, 0x5151'0000ull + 4096 * static_cast<std::uint64_t>(K) + tag++);
      const VolumeEstimate q = q_pair(fidelity, data, fam.members[i], fam.members[j], mc, opt.span_tol);
      qk = qk + q.uncertain();
    }
    cs.Q[static_cast<std::size_t>(k)] = qk.value;
    cs.Q_half_width[static_cast<std::size_t>(k)] = kZ95 * qk.sigma;
  }
  return cs;
}

inline std::vector<SpanFamily> families_upto(const Dictionary& dict, int upto, double span_tol) {
  std::vector<SpanFamily> out;
  for (int k = 0; k <= upto; ++k) out.push_back(enumerate_spans(dict, k, span_tol));
  return out;
}

}  // namespace detail

/// C_K, Q_{K,k}, delta-hat_K, delta'_{K,k}, k_K and Delta_K for one K.
inline ConstantSet assemble_constants(const Dictionary& dict, const NormSpec& fidelity,
                                      const NormSpec& data, int K, const ConstantOptions& opt = {}) {
  if (K < 0 || K > dict.dim()) throw std::invalid_argument("assemble_constants: K must lie in [0, N]");
  const auto families = detail::families_upto(dict, K, opt.span_tol);
  const auto chain = detail::delta_chain(families, fidelity, data, K, opt.span_tol);
  return detail::assemble_from_families(families, fidelity, data, K, chain, opt);
}

/// Constants for every K = 0..N.
inline ConstantTable assemble_all_constants(const Dictionary& dict, const NormSpec& fidelity,
                                            const NormSpec& data, const ConstantOptions& opt = {}) {
  const auto families = detail::families_upto(dict, dict.dim(), opt.span_tol);
  const auto chain = detail::delta_chain(families, fidelity, data, dict.dim(), opt.span_tol);
  ConstantTable table;
  for (int K = 0; K <= dict.dim(); ++K)
    table.push_back(detail::assemble_from_families(families, fidelity, data, K, chain, opt));
  return table;
}

/// Intersection error term; zero for K in {0, N}.
inline Uncertain eps0_uncertain(const ConstantSet& cs, double tau, double theta) {
  if (cs.K == 0 || cs.K == cs.N) return {};
  const double r = tau / theta;
  Uncertain sum{};
  for (int k = cs.k_K; k < cs.K; ++k) {
    const double factor = std::pow(r, cs.N - k) * std::pow(1.0 + cs.delta_prime[static_cast<std::size_t>(k)] * r, k);
    sum = sum + factor * cs.q(k);
  }
  return sum;
}

inline double eps0(const ConstantSet& cs, double tau, double theta) {
  if (!(tau > 0.0) || !(theta > 0.0)) throw std::invalid_argument("eps0: tau and theta must be > 0");
  return eps0_uncertain(cs, tau, theta).value;
}

enum class Quantity { MeasureLeq, MeasureEq, ProbLeq, ProbEq, Expect };

inline const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::MeasureLeq: return "measure_leq";
    case Quantity::MeasureEq: return "measure_eq";
    case Quantity::ProbLeq: return "prob_leq";
    case Quantity::ProbEq: return "prob_eq";
    case Quantity::Expect: return "expect";
  }
  return "?";
}

inline Quantity quantity_from_string(const std::string& s) {
  for (auto q : {Quantity::MeasureLeq, Quantity::MeasureEq, Quantity::ProbLeq, Quantity::ProbEq,
                 Quantity::Expect})
    if (s == to_string(q)) return q;
  throw std::invalid_argument("unknown quantity '" + s + "'");
}

struct EpsTerms {
  double eps0 = 0.0;
  double eps0_prime = 0.0;
  double eps1 = 0.0;
};

struct BoundReport {
  Quantity quantity = Quantity::MeasureLeq;
  int K = 0;
  double tau = 0.0;
  double theta = 0.0;
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  double lower_sigma = 0.0;  // from Monte Carlo volume constants
  double upper_sigma = 0.0;
  EpsTerms eps;
  double required_delta = 0.0;
  bool valid = false;
};

namespace detail {

struct MeasurePair {
  Uncertain lower, upper;
};

// Bounds on Leb(Theta_K ∩ LS(f_d, theta)).
inline MeasurePair measure_leq(const ConstantSet& cs, double tau, double theta) {
  const int n = cs.N, K = cs.K;
  const double tk = std::pow(tau, n - K);
  const double lo = tk * std::pow(theta - cs.delta_hat * tau, K);
  const double hi = tk * std::pow(theta + cs.delta_hat * tau, K);
  const Uncertain e = std::pow(theta, n) * eps0_uncertain(cs, tau, theta);
  return {lo * cs.c_k() - e, hi * cs.c_k()};
}

}  // namespace detail

/// Analytic lower/upper bounds for one quantity. `table` holds the constants
/// for every K (Expect needs all of them); `data_ball` is Leb_N(B_{f_d}).
inline BoundReport bounds(Quantity quantity, const ConstantTable& table, int K, double tau,
                          double theta, const VolumeEstimate& data_ball) {
  if (table.empty()) throw std::invalid_argument("bounds: empty constant table");
  const int n = table.front().N;
  if (static_cast<int>(table.size()) != n + 1)
    throw std::invalid_argument("bounds: constant table must cover K = 0..N");
  if (!(tau > 0.0) || !(theta > 0.0)) throw std::invalid_argument("bounds: tau and theta must be > 0");
  if (quantity != Quantity::Expect && (K < 0 || K > n))
    throw std::invalid_argument("bounds: K must lie in [0, N]");

  BoundReport rep;
  rep.quantity = quantity;
  rep.K = quantity == Quantity::Expect ? n : K;
  rep.tau = tau;
  rep.theta = theta;

  auto delta_of = [&](int k) { return table[static_cast<std::size_t>(k)].Delta; };
  switch (quantity) {
    case Quantity::MeasureLeq:
    case Quantity::ProbLeq: rep.required_delta = delta_of(K); break;
    case Quantity::MeasureEq:
    case Quantity::ProbEq: rep.required_delta = std::max(delta_of(K), K > 0 ? delta_of(K - 1) : 0.0); break;
    case Quantity::Expect:
      for (const auto& cs : table) rep.required_delta = std::max(rep.required_delta, cs.Delta);
      break;
  }
  rep.valid = theta >= tau * rep.required_delta;
  if (!rep.valid) return rep;

  const double r = tau / theta;
  const double theta_n = std::pow(theta, n);
  const Uncertain norm_ball = data_ball.uncertain();
  const Uncertain level_set = theta_n * norm_ball;

  Uncertain lower{}, upper{};
  if (quantity == Quantity::Expect) {
    // E[val] = N - sum_{K<N} P(val <= K).
    lower = {static_cast<double>(n), 0.0};
    upper = lower;
    for (int k = 0; k < n; ++k) {
      const auto m = detail::measure_leq(table[static_cast<std::size_t>(k)], tau, theta);
      lower = lower - m.upper / level_set;
      upper = upper - m.lower / level_set;
    }
  } else {
    const ConstantSet& cs = table[static_cast<std::size_t>(K)];
    const auto m = detail::measure_leq(cs, tau, theta);
    rep.eps.eps0 = eps0(cs, tau, theta);
    lower = m.lower;
    upper = m.upper;
    if (K > 0) {
      // D_K = Theta_K \ Theta_{K-1}: subtract the opposite bound of Theta_{K-1}.
      const ConstantSet& prev = table[static_cast<std::size_t>(K - 1)];
      const auto below = detail::measure_leq(prev, tau, theta);
      const double span_term = std::pow(r, n - K + 1);
      rep.eps.eps0_prime =
          rep.eps.eps0 + span_term * std::pow(1.0 + prev.delta_hat * r, K - 1) * prev.C_K;
      rep.eps.eps1 = eps0(prev, tau, theta) -
                     span_term * std::pow(1.0 - prev.delta_hat * r, K - 1) * prev.C_K;
      if (quantity == Quantity::MeasureEq || quantity == Quantity::ProbEq) {
        lower = m.lower - below.upper;
        upper = m.upper - below.lower;
      }
    } else {
      rep.eps.eps0_prime = rep.eps.eps0;
      rep.eps.eps1 = 0.0;
    }
    if (quantity == Quantity::ProbLeq || quantity == Quantity::ProbEq) {
      lower = lower / level_set;
      upper = upper / level_set;
    }
  }
  rep.lower = lower.value;
  rep.upper = upper.value;
  rep.lower_sigma = lower.sigma;
  rep.upper_sigma = upper.sigma;
  return rep;
}

}  // namespace l0geom
