#pragma once

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "l0geom/config.hpp"
#include "l0geom/constants.hpp"
#include "l0geom/l0solve.hpp"
#include "l0geom/montecarlo.hpp"
#include "l0geom/report.hpp"

namespace l0geom {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitValidationFailed = 2;

/// Command-line overrides layered on top of the config file.
struct RunFlags {
  std::string data;              // solve: comma-separated datum
  std::optional<double> tau;     // replaces tau and tau_grid
  std::optional<int> k;          // replaces K_list
  std::string mode;              // estimate/validate: "leq" or "eq" restricts quantities
  std::string output;            // report path; stdout when empty
  std::string format;            // "csv" or "json"
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
};

inline Vector parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse '" + item + "' as a number");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw std::invalid_argument("cannot parse '" + item + "' as a number");
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("empty datum");
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline void apply_flags(ExperimentConfig& c, const RunFlags& f) {
  if (f.tau) {
    if (!(*f.tau > 0.0)) throw ConfigError("tau must be > 0");
    c.tau = *f.tau;
    c.tau_grid = {*f.tau};
  }
  if (f.k) {
    if (*f.k < 0 || *f.k > c.dim()) throw ConfigError("K must lie in [0, N]");
    c.K = *f.k;
    c.K_list = {*f.k};
  }
  if (!f.mode.empty()) {
    if (f.mode != "leq" && f.mode != "eq") throw ConfigError("--mode must be 'leq' or 'eq'");
    std::vector<Quantity> kept;
    for (Quantity q : c.quantities) {
      const bool leq = q == Quantity::MeasureLeq || q == Quantity::ProbLeq;
      const bool eq = q == Quantity::MeasureEq || q == Quantity::ProbEq;
      if ((f.mode == "leq" && leq) || (f.mode == "eq" && eq)) kept.push_back(q);
    }
    c.quantities = kept;
  }
  if (!f.output.empty()) c.output_path = f.output;
  if (!f.format.empty()) {
    if (f.format != "csv" && f.format != "json") throw ConfigError("--format must be 'csv' or 'json'");
    c.output_format = f.format;
  }
  if (f.threads) c.threads = *f.threads == 0 ? 1u : *f.threads;
  if (f.seed) c.seed = *f.seed;
}

/// (tau, quantity, K) cells that violate theta >= tau * Delta. Only span
/// enumeration is needed, so this runs before any sampling.
inline std::vector<std::string> validity_issues(const ExperimentConfig& c) {
  const int n = c.dim();
  const auto families = detail::families_upto(c.dictionary, n, c.span_tol);
  const auto chain = detail::delta_chain(families, c.fidelity, c.data, n, c.span_tol);
  std::vector<std::string> out;
  for (double tau : c.tau_grid) {
    for (Quantity q : c.quantities) {
      std::vector<int> ks = c.K_list;
      if (q == Quantity::Expect) ks = {n};
      for (int K : ks) {
        double need = chain.Delta[static_cast<std::size_t>(K)];
        if (q == Quantity::MeasureEq || q == Quantity::ProbEq)
          need = std::max(need, K > 0 ? chain.Delta[static_cast<std::size_t>(K - 1)] : 0.0);
        if (q == Quantity::Expect)
          for (double d : chain.Delta) need = std::max(need, d);
        if (c.theta < tau * need)
          out.push_back(std::string(to_string(q)) + " K=" + std::to_string(K) + " tau=" + format_number(tau) +
                        ": theta=" + format_number(c.theta) + " < tau*Delta=" + format_number(tau * need));
      }
    }
  }
  return out;
}

namespace detail {

inline void emit(const ExperimentConfig& c, const std::string& text, std::ostream& out) {
  if (c.output_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(c.output_path);
  if (!file) throw std::runtime_error("cannot write report to '" + c.output_path + "'");
  file << text;
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline ValidationPlan plan_from(const ExperimentConfig& c) {
  return {c.tau_grid, c.theta, c.K_list, c.quantities, c.samples, c.seed, c.threads};
}

inline int run_solve(const ExperimentConfig& c, const RunFlags& f, std::ostream& out) {
  if (f.data.empty()) throw std::invalid_argument("solve needs --data");
  const Vector d = parse_vector(f.data);
  if (d.size() != c.dim())
    throw std::invalid_argument("--data has " + std::to_string(d.size()) + " entries, expected N = " +
                                std::to_string(c.dim()));
  const L0Solver solver(c.dictionary, c.fidelity, c.solver_options());
  emit(c, dump(solve_result_json(solver.solve(d, c.tau), c.tau)), out);
  return kExitOk;
}

inline int run_spans(const ExperimentConfig& c, std::ostream& out) {
  const L0Solver solver(c.dictionary, c.fidelity, c.solver_options());
  nlohmann::json j = nlohmann::json::array();
  for (int K : c.K_list) j.push_back(spans_json(solver, K));
  emit(c, dump(c.K_list.size() == 1 ? j.front() : j), out);
  return kExitOk;
}

inline int run_constants(const ExperimentConfig& c, std::ostream& out) {
  const ConstantTable table = assemble_all_constants(c.dictionary, c.fidelity, c.data, c.constant_options());
  if (c.output_format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (int K : c.K_list) j.push_back(constant_set_json(table[static_cast<std::size_t>(K)]));
    emit(c, dump(j), out);
  } else {
    emit(c, constants_csv(table, c.K_list), out);
  }
  return kExitOk;
}

inline int run_estimate(const ExperimentConfig& c, std::ostream& out) {
  const L0Solver solver(c.dictionary, c.fidelity, c.solver_options());
  const VolumeEstimate data_ball = ball_volume(c.data, c.dim(), c.data_ball_options());
  std::vector<EstimateRow> rows;
  for (double tau : c.tau_grid) {
    const ValHistogram h = sample_val_histogram(solver, c.data, tau, c.theta, c.samples, c.seed, c.threads);
    for (Quantity q : c.quantities) {
      if (q == Quantity::Expect) {
        rows.push_back({tau, c.theta, expect_from_histogram(h)});
        continue;
      }
      for (int K : c.K_list) {
        const bool leq = q == Quantity::MeasureLeq || q == Quantity::ProbLeq;
        MCEstimate e = prob_from_histogram(h, K, leq ? ProbMode::Leq : ProbMode::Eq);
        if (q == Quantity::MeasureLeq || q == Quantity::MeasureEq) e = measure_from_prob(e, c.theta, c.dim(), data_ball);
        rows.push_back({tau, c.theta, e});
      }
    }
  }
  emit(c, c.output_format == "json" ? dump(estimates_json(rows)) : estimates_csv(rows), out);
  return kExitOk;
}

inline int run_validate(const ExperimentConfig& c, std::ostream& out) {
  const L0Solver solver(c.dictionary, c.fidelity, c.solver_options());
  const ConstantTable table = assemble_all_constants(c.dictionary, c.fidelity, c.data, c.constant_options());
  const VolumeEstimate data_ball = ball_volume(c.data, c.dim(), c.data_ball_options());
  const ValidationReport report = validate_bounds(solver, c.data, table, data_ball, plan_from(c));
  emit(c, c.output_format == "json" ? dump(validation_json(report)) : validation_csv(report), out);
  return report.all_pass() ? kExitOk : kExitValidationFailed;
}

}  // namespace detail

/// Dispatch one subcommand. Reports go to `out` (or the configured path);
/// diagnostics go to `err`. Returns the process exit code.
inline int run(const std::string& subcommand, ExperimentConfig config, const RunFlags& flags,
               std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    apply_flags(config, flags);
    if (subcommand == "estimate" || subcommand == "validate") {
      const auto issues = validity_issues(config);
      for (const auto& msg : issues) err << "warning: validity condition fails for " << msg << '\n';
    }
    if (subcommand == "solve") return detail::run_solve(config, flags, out);
    if (subcommand == "spans") return detail::run_spans(config, out);
    if (subcommand == "constants") return detail::run_constants(config, out);
    if (subcommand == "estimate") return detail::run_estimate(config, out);
    if (subcommand == "validate") return detail::run_validate(config, out);
    err << "error: unknown subcommand '" << subcommand << "'\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace l0geom
