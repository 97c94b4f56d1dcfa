// run_config.hpp - JSON run configuration for the sim CLI.
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "tqb/core.hpp"
#include "tqb/couplings.hpp"
#include "tqb/io.hpp"
#include "tqb/solvers.hpp"

namespace tqb::app {

#ifdef TQB_VERSION
inline constexpr const char* kVersion = TQB_VERSION;
#else
inline constexpr const char* kVersion = "0.0.0";
#endif

/// Grid given either as {"start", "stop", "count"} or as an explicit list.
struct GridSpec {
  std::vector<double> values;
  Json source;
};

struct RunConfig {
  ModelParams params;
  std::string initial_state = "e1g2";  // e1g2 | ee | gg | bell | matrix
  std::optional<DensityMatrix> initial_matrix;
  std::optional<double> t;
  std::optional<GridSpec> t_grid, T_grid, F_grid, r12_grid;
  std::string scan = "t";              // concurrence-scan axis: t | r12
  SolverKind solver = SolverKind::Oracle;
  std::optional<double> dt;
  std::uint64_t seed = 0;
  std::size_t n_samples = 1000000;
  int n_bins = 200;
  unsigned threads = 0;                // 0 = hardware concurrency
  Basis output_basis = Basis::Computational;

  /// Initial state in the computational basis.
  DensityMatrix initial() const {
    if (initial_state == "e1g2") return states::eg().projector();
    if (initial_state == "ee") return states::ee().projector();
    if (initial_state == "gg") return states::gg().projector();
    if (initial_state == "bell") return states::bell_symmetric().projector();
    if (initial_state == "matrix" && initial_matrix) {
      return initial_matrix->basis() == Basis::Computational ? *initial_matrix
                                                             : inverse_dressed_transform(*initial_matrix);
    }
    throw UsageError("unknown initial_state '" + initial_state + "'");
  }

  unsigned worker_count() const {
    if (threads > 0) return threads;
    return std::max(1u, std::thread::hardware_concurrency());
  }

  /// Resolved configuration, echoed into every output file.
  Json to_json() const {
    Json j{{"omega0", params.omega0},
           {"gamma", params.gamma},
           {"T", params.temperature},
           {"r", params.squeeze_r},
           {"phi", params.squeeze_phase},
           {"k0r12", params.k0_r12},
           {"mu_dot_r", params.mu_dot_r},
           {"solver", std::string(to_string(solver))},
           {"seed", seed},
           {"n_samples", n_samples},
           {"n_bins", n_bins},
           {"scan", scan},
           {"output_basis", std::string(to_string(output_basis))}};
    if (initial_state == "matrix" && initial_matrix) {
      j["initial_state"] = tqb::to_json(*initial_matrix);
    } else {
      j["initial_state"] = initial_state;
    }
    if (t) j["t"] = *t;
    if (dt) j["dt"] = *dt;
    if (t_grid) j["t_grid"] = t_grid->source;
    if (T_grid) j["T_grid"] = T_grid->source;
    if (F_grid) j["F_grid"] = F_grid->source;
    if (r12_grid) j["r12_grid"] = r12_grid->source;
    return j;
  }
};

namespace detail {

inline double number(const Json& j, const std::string& key) {
  if (!j.is_number()) throw UsageError("config key \"" + key + "\" must be a number");
  return j.get<double>();
}

inline GridSpec grid(const Json& j, const std::string& key) {
  GridSpec g;
  g.source = j;
  if (j.is_array()) {
    for (const auto& v : j) g.values.push_back(number(v, key));
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (k != "start" && k != "stop" && k != "count") {
        throw UsageError("grid \"" + key + "\" has unknown field \"" + k + "\"");
      }
      (void)v;
    }
    if (!j.contains("start") || !j.contains("stop") || !j.contains("count")) {
      throw UsageError("grid \"" + key + "\" needs start, stop and count");
    }
    const Json& c = j.at("count");
    if (!c.is_number_integer() || c.get<long long>() < 1) {
      throw UsageError("grid \"" + key + "\" count must be an integer >= 1");
    }
    g.values = linspace(number(j.at("start"), key), number(j.at("stop"), key), c.get<int>());
  } else {
    throw UsageError("grid \"" + key + "\" must be an array or {start, stop, count}");
  }
  if (g.values.empty()) throw UsageError("grid \"" + key + "\" is empty");
  return g;
}

}  // namespace detail

inline RunConfig parse_config(const Json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  static const std::set<std::string> known = {
      "omega0", "gamma", "T", "r", "phi", "k0r12", "mu_dot_r", "initial_state", "t", "t_grid", "T_grid",
      "F_grid", "r12_grid", "scan", "solver", "dt", "seed", "n_samples", "n_bins", "threads", "output_basis"};
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!known.count(k)) throw UsageError("unknown config key \"" + k + "\"");
  }
  RunConfig c;
  auto num = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = detail::number(j.at(key), key);
  };
  num("omega0", c.params.omega0);
  num("gamma", c.params.gamma);
  num("T", c.params.temperature);
  num("r", c.params.squeeze_r);
  num("phi", c.params.squeeze_phase);
  num("k0r12", c.params.k0_r12);
  num("mu_dot_r", c.params.mu_dot_r);
  c.params.validate();

  if (j.contains("initial_state")) {
    const Json& s = j.at("initial_state");
    if (s.is_string()) {
      c.initial_state = s.get<std::string>();
      if (c.initial_state != "e1g2" && c.initial_state != "ee" && c.initial_state != "gg" &&
          c.initial_state != "bell") {
        throw UsageError("initial_state must be e1g2, ee, gg, bell or a matrix object");
      }
    } else {
      c.initial_state = "matrix";
      try {
        c.initial_matrix = density_matrix_from_json(s);
      } catch (const InvariantViolation& e) {
        throw UsageError(std::string("initial_state matrix: ") + e.what());
      }
    }
  }
  if (j.contains("t")) {
    c.t = detail::number(j.at("t"), "t");
    if (*c.t < 0.0) throw UsageError("t must be >= 0");
  }
  if (j.contains("t_grid")) c.t_grid = detail::grid(j.at("t_grid"), "t_grid");
  if (j.contains("T_grid")) c.T_grid = detail::grid(j.at("T_grid"), "T_grid");
  if (j.contains("F_grid")) c.F_grid = detail::grid(j.at("F_grid"), "F_grid");
  if (j.contains("r12_grid")) c.r12_grid = detail::grid(j.at("r12_grid"), "r12_grid");
  if (j.contains("scan")) {
    if (!j.at("scan").is_string()) throw UsageError("scan must be \"t\" or \"r12\"");
    c.scan = j.at("scan").get<std::string>();
    if (c.scan != "t" && c.scan != "r12") throw UsageError("scan must be \"t\" or \"r12\"");
  }
  if (j.contains("solver")) {
    if (!j.at("solver").is_string()) throw UsageError("solver must be a string");
    c.solver = solver_from_string(j.at("solver").get<std::string>());
  }
  if (j.contains("dt")) {
    c.dt = detail::number(j.at("dt"), "dt");
    if (!(*c.dt > 0.0)) throw UsageError("dt must be > 0");
  }
  auto count = [&](const char* key, long long lo) -> std::optional<long long> {
    if (!j.contains(key)) return std::nullopt;
    const Json& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < lo) {
      throw UsageError(std::string("config key \"") + key + "\" must be an integer >= " + std::to_string(lo));
    }
    return v.get<long long>();
  };
  if (auto v = count("seed", 0)) c.seed = static_cast<std::uint64_t>(*v);
  if (auto v = count("n_samples", 1)) c.n_samples = static_cast<std::size_t>(*v);
  if (auto v = count("n_bins", 1)) c.n_bins = static_cast<int>(*v);
  if (auto v = count("threads", 0)) c.threads = static_cast<unsigned>(*v);
  if (j.contains("output_basis")) {
    if (!j.at("output_basis").is_string()) throw UsageError("output_basis must be a string");
    c.output_basis = basis_from_string(j.at("output_basis").get<std::string>());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw UsageError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

}  // namespace tqb::app
