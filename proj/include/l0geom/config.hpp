#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "l0geom/constants.hpp"
#include "l0geom/norms.hpp"
#include "l0geom/subspaces.hpp"

namespace l0geom {

/// Raised for malformed or invalid experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  Dictionary dictionary;
  std::vector<std::vector<double>> atoms;
  NormSpec fidelity = NormSpec::l2();
  NormSpec data = NormSpec::l2();
  double tau = 0.0;
  std::vector<double> tau_grid;
  double theta = 1.0;
  std::optional<int> K;
  std::vector<int> K_list;
  std::vector<Quantity> quantities;
  std::uint64_t samples = 100'000;
  std::uint64_t volume_samples = 200'000;
  std::uint64_t seed = 42;
  double span_tol = kDefaultSpanTol;
  double feas_tol = kDefaultFeasTol;
  double dist_tol = kDefaultDistTol;
  unsigned threads = 1;
  std::string output_format = "csv";
  std::string output_path;

  int dim() const { return dictionary.dim(); }
  SolverOptions solver_options() const { return {span_tol, feas_tol, dist_tol}; }
  ConstantOptions constant_options() const {
    return {McOptions{volume_samples, derive_seed(seed, 0xC0257A57ull), threads}, span_tol, dist_tol};
  }
  McOptions data_ball_options() const {
    return {volume_samples, derive_seed(seed, 0xB0Bull), threads};
  }
};

inline NormSpec parse_norm(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("norm must be an object with a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "l1") return NormSpec::l1();
  if (kind == "l2") return NormSpec::l2();
  if (kind == "linf") return NormSpec::linf();
  if (kind == "wlp") {
    if (!j.contains("p") || !j.contains("weights")) throw ConfigError("wlp norm needs 'p' and 'weights'");
    try {
      return NormSpec::weighted(j.at("p").get<double>(), j.at("weights").get<std::vector<double>>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid norm: ") + e.what());
    }
  }
  throw ConfigError("unknown norm kind '" + kind + "'");
}

inline nlohmann::json norm_to_json(const NormSpec& norm) {
  switch (norm.kind) {
    case NormKind::L1: return {{"kind", "l1"}};
    case NormKind::L2: return {{"kind", "l2"}};
    case NormKind::Linf: return {{"kind", "linf"}};
    case NormKind::WeightedLp: return {{"kind", "wlp"}, {"p", norm.p}, {"weights", norm.weights}};
  }
  return {};
}

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline void require_positive(double v, const std::string& what) {
  if (!(v > 0.0)) throw ConfigError(what + " must be > 0");
}

}  // namespace detail

/// Build and validate a config from parsed JSON. Defaults: l2 norms,
/// span_tol 1e-9, feas_tol 1e-10, dist_tol 1e-10, seed 42, 1e5 samples.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
  try {
    ExperimentConfig c;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (!j.contains("dictionary")) throw ConfigError("config is missing 'dictionary'");
    c.atoms = j.at("dictionary").get<std::vector<std::vector<double>>>();

    c.span_tol = detail::get_or(j, "span_tol", kDefaultSpanTol);
    c.feas_tol = detail::get_or(j, "feas_tol", kDefaultFeasTol);
    c.dist_tol = detail::get_or(j, "dist_tol", kDefaultDistTol);
    detail::require_positive(c.span_tol, "span_tol");
    detail::require_positive(c.feas_tol, "feas_tol");
    detail::require_positive(c.dist_tol, "dist_tol");
    try {
      c.dictionary = Dictionary::from_atoms(c.atoms, c.span_tol);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const int n = c.dictionary.dim();

    if (j.contains("fidelity")) c.fidelity = parse_norm(j.at("fidelity"));
    if (j.contains("data")) c.data = parse_norm(j.at("data"));
    for (const NormSpec* norm : {&c.fidelity, &c.data})
      if (norm->kind == NormKind::WeightedLp && static_cast<int>(norm->weights.size()) != n)
        throw ConfigError("wlp weights must have length N = " + std::to_string(n));

    if (!j.contains("tau") && !j.contains("tau_grid")) throw ConfigError("config needs 'tau' or 'tau_grid'");
    if (j.contains("tau_grid")) c.tau_grid = j.at("tau_grid").get<std::vector<double>>();
    if (j.contains("tau")) c.tau = j.at("tau").get<double>();
    else c.tau = c.tau_grid.empty() ? 0.0 : c.tau_grid.front();
    if (c.tau_grid.empty()) c.tau_grid = {c.tau};
    detail::require_positive(c.tau, "tau");
    for (double t : c.tau_grid) detail::require_positive(t, "tau_grid entries");

    if (!j.contains("theta")) throw ConfigError("config is missing 'theta'");
    c.theta = j.at("theta").get<double>();
    detail::require_positive(c.theta, "theta");

    if (j.contains("K")) c.K = j.at("K").get<int>();
    if (j.contains("K_list")) c.K_list = j.at("K_list").get<std::vector<int>>();
    else if (c.K) c.K_list = {*c.K};
    else for (int k = 0; k <= n; ++k) c.K_list.push_back(k);
    for (int k : c.K_list)
      if (k < 0 || k > n) throw ConfigError("K values must lie in [0, N]");
    if (c.K && (*c.K < 0 || *c.K > n)) throw ConfigError("K must lie in [0, N]");

    if (j.contains("quantities")) {
      for (const auto& q : j.at("quantities")) c.quantities.push_back(quantity_from_string(q.get<std::string>()));
    } else {
      c.quantities = {Quantity::MeasureLeq, Quantity::MeasureEq, Quantity::ProbLeq, Quantity::ProbEq,
                      Quantity::Expect};
    }

    c.samples = detail::get_or<std::uint64_t>(j, "samples", c.samples);
    c.volume_samples = detail::get_or<std::uint64_t>(j, "volume_samples", c.volume_samples);
    if (c.samples == 0 || c.volume_samples == 0) throw ConfigError("sample counts must be positive");
    c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed);
    c.threads = detail::get_or<unsigned>(j, "threads", c.threads);
    if (c.threads == 0) c.threads = 1;
    if (j.contains("output")) {
      const auto& o = j.at("output");
      c.output_format = detail::get_or<std::string>(o, "format", c.output_format);
      c.output_path = detail::get_or<std::string>(o, "path", c.output_path);
    }
    if (c.output_format != "csv" && c.output_format != "json")
      throw ConfigError("output.format must be 'csv' or 'json'");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
  return parse_config(j);
}

/// L0GEOM_SEED and L0GEOM_THREADS override the file; nothing else does.
inline void apply_env_overrides(ExperimentConfig& c) {
  if (const char* s = std::getenv("L0GEOM_SEED"); s && *s) c.seed = std::stoull(s);
  if (const char* t = std::getenv("L0GEOM_THREADS"); t && *t) {
    const auto v = std::stoul(t);
    c.threads = v == 0 ? 1u : static_cast<unsigned>(v);
  }
}

}  // namespace l0geom
