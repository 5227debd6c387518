#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "l0geom/constants.hpp"
#include "l0geom/l0solve.hpp"
#include "l0geom/montecarlo.hpp"
#include "l0geom/subspaces.hpp"

namespace l0geom {

/// Shortest round-trip text for a double; NaN prints as "nan".
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// nlohmann writes NaN as null; keep that explicit.
inline nlohmann::json json_number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json solve_result_json(const SolveResult& r, double tau) {
  std::vector<double> coef(r.coefficients.data(), r.coefficients.data() + r.coefficients.size());
  return {{"val", r.val}, {"support", r.support}, {"coefficients", coef},
          {"residual", json_number(r.residual)}, {"tau", tau}};
}

inline nlohmann::json spans_json(const L0Solver& solver, int K) {
  const SpanFamily& fam = solver.family(K);
  nlohmann::json members = nlohmann::json::array();
  for (std::size_t i = 0; i < fam.members.size(); ++i) {
    const auto& m = fam.members[i];
    nlohmann::json basis = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.columns.cols(); ++c) {
      std::vector<double> col(m.columns.col(c).data(), m.columns.col(c).data() + m.columns.rows());
      basis.push_back(col);
    }
    members.push_back({{"index", i}, {"support", m.support}, {"basis", basis}});
  }
  nlohmann::json pairs = nlohmann::json::array();
  for (int k = 0; k < K; ++k) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& [i, j] : enumerate_pairs(fam, k, solver.options().span_tol)) list.push_back({i, j});
    pairs.push_back({{"k", k}, {"in_k_range", k >= min_intersection_dim(K, solver.dim())}, {"pairs", list}});
  }
  return {{"K", K}, {"N", solver.dim()}, {"family_size", fam.members.size()},
          {"members", members}, {"pairs", pairs}};
}

inline nlohmann::json constant_set_json(const ConstantSet& cs) {
  nlohmann::json q = nlohmann::json::array();
  for (int k = 0; k < cs.K; ++k) {
    const auto i = static_cast<std::size_t>(k);
    q.push_back({{"k", k}, {"Q", cs.Q[i]}, {"Q_half_width", cs.Q_half_width[i]},
                 {"delta_prime", cs.delta_prime[i]}, {"pairs", cs.pair_count[i]}});
  }
  return {{"K", cs.K}, {"N", cs.N}, {"k_K", cs.k_K}, {"family_size", cs.family_size},
          {"C_J", cs.C_J}, {"C_K", cs.C_K}, {"C_K_half_width", cs.C_K_half_width},
          {"delta_hat", cs.delta_hat}, {"Delta", cs.Delta}, {"Q", q}};
}

/// One row per K. Q_k and its half width are 0 for k >= K.
inline std::string constants_csv(const ConstantTable& table, const std::vector<int>& K_list) {
  std::ostringstream os;
  const int n = table.front().N;
  os << "K,k_K,family_size,C_K,C_K_half_width,delta_hat,Delta";
  for (int k = 0; k < n; ++k) os << ",Q_" << k;
  for (int k = 0; k < n; ++k) os << ",Q_" << k << "_half_width";
  os << '\n';
  for (int K : K_list) {
    const auto& cs = table.at(static_cast<std::size_t>(K));
    os << cs.K << ',' << cs.k_K << ',' << cs.family_size << ',' << format_number(cs.C_K) << ','
       << format_number(cs.C_K_half_width) << ',' << format_number(cs.delta_hat) << ','
       << format_number(cs.Delta);
    for (int k = 0; k < n; ++k) os << ',' << format_number(k < K ? cs.Q[static_cast<std::size_t>(k)] : 0.0);
    for (int k = 0; k < n; ++k)
      os << ',' << format_number(k < K ? cs.Q_half_width[static_cast<std::size_t>(k)] : 0.0);
    os << '\n';
  }
  return os.str();
}

struct EstimateRow {
  double tau = 0.0;
  double theta = 0.0;
  MCEstimate estimate;
};

inline std::string estimates_csv(const std::vector<EstimateRow>& rows) {
  std::ostringstream os;
  os << "quantity,K,tau,theta,estimate,half_width_95,ci_low,ci_high,n,seed\n";
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    os << e.quantity << ',' << e.K << ',' << format_number(r.tau) << ',' << format_number(r.theta) << ','
       << format_number(e.mean) << ',' << format_number(e.half_width_95) << ',' << format_number(e.ci_low)
       << ',' << format_number(e.ci_high) << ',' << e.n << ',' << e.seed << '\n';
  }
  return os.str();
}

inline nlohmann::json estimates_json(const std::vector<EstimateRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    out.push_back({{"quantity", e.quantity}, {"K", e.K}, {"tau", r.tau}, {"theta", r.theta},
                   {"estimate", e.mean}, {"half_width_95", e.half_width_95}, {"ci_low", e.ci_low},
                   {"ci_high", e.ci_high}, {"n", e.n}, {"seed", e.seed}});
  }
  return out;
}

/// ci is the 95% half width of the estimate.
inline std::string validation_csv(const ValidationReport& report) {
  std::ostringstream os;
  os << "quantity,K,tau,theta,estimate,ci,lower,upper,pass\n";
  for (const auto& c : report.cells) {
    os << to_string(c.quantity) << ',' << c.K << ',' << format_number(c.tau) << ','
       << format_number(c.theta) << ',' << format_number(c.estimate.mean) << ','
       << format_number(c.estimate.half_width_95) << ',' << format_number(c.bound.lower) << ','
       << format_number(c.bound.upper) << ',' << (c.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

inline nlohmann::json validation_json(const ValidationReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"quantity", to_string(c.quantity)},
                     {"K", c.K},
                     {"tau", c.tau},
                     {"theta", c.theta},
                     {"estimate", c.estimate.mean},
                     {"ci", c.estimate.half_width_95},
                     {"lower", json_number(c.bound.lower)},
                     {"upper", json_number(c.bound.upper)},
                     {"lower_sigma", c.bound.lower_sigma},
                     {"upper_sigma", c.bound.upper_sigma},
                     {"required_delta", c.bound.required_delta},
                     {"valid", c.bound.valid},
                     {"ratio", json_number(c.ratio)},
                     {"pass", c.pass}});
  }
  return {{"cells", cells}, {"all_pass", report.all_pass()}};
}

}  // namespace l0geom
