// commands.hpp - the sim subcommands; each writes CSV/JSON files into an output directory.
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tqb/app/run_config.hpp"
#include "tqb/entanglement.hpp"
#include "tqb/io.hpp"
#include "tqb/pdf.hpp"
#include "tqb/repeater.hpp"
#include "tqb/solvers.hpp"

namespace tqb::app {

namespace fs = std::filesystem;

struct CommandResult {
  std::vector<std::string> files;
  Json summary;  // small machine-readable digest, also printed by the CLI
};

namespace detail {

inline std::vector<std::string> meta(const std::string& command, const RunConfig& c) {
  return {std::string("tqb ") + kVersion + " sim " + command, "config: " + c.to_json().dump()};
}

inline std::string path_in(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

inline void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open output file " + path);
  out << j.dump(2) << '\n';
}

/// Concurrence of the physical state; dressed states go through the Hadamard rotation.
inline double physical_concurrence(const DensityMatrix& rho) {
  return concurrence(rho.basis() == Basis::Dressed ? hadamard_rotation(rho) : rho);
}

inline DensityMatrix in_basis(const DensityMatrix& rho, Basis b) {
  if (rho.basis() == b) return rho;
  return b == Basis::Dressed ? dressed_transform(rho) : inverse_dressed_transform(rho);
}

inline double require_t(const RunConfig& c, double fallback) { return c.t ? *c.t : fallback; }

inline std::vector<double> grid_or(const std::optional<GridSpec>& g, double lo, double hi, int n) {
  return g ? g->values : linspace(lo, hi, n);
}

inline std::vector<std::string> element_labels(Basis b) {
  return b == Basis::Computational ? std::vector<std::string>{"ee", "eg", "ge", "gg"}
                                   : std::vector<std::string>{"e", "s", "a", "g"};
}

}  // namespace detail

/// Trajectory: t, every rho element (re/im), purity, concurrence.
inline CommandResult cmd_evolve(const RunConfig& c, const fs::path& out) {
  const std::vector<double> times = detail::grid_or(c.t_grid, 0.0, 20.0, 201);
  const Evolver ev(c.params, c.solver, c.dt);
  const auto traj = ev.trajectory(c.initial(), times);

  std::vector<std::string> cols{"t"};
  const auto lab = detail::element_labels(c.output_basis);
  for (const char* part : {"re", "im"})
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        cols.push_back(std::string(part) + "_" + lab[static_cast<std::size_t>(i)] + "_" + lab[static_cast<std::size_t>(j)]);
  cols.push_back("purity");
  cols.push_back("concurrence");

  auto m = detail::meta("evolve", c);
  m.push_back(std::string("basis: ") + std::string(to_string(c.output_basis)) +
              ", solver: " + std::string(to_string(ev.kind())) + (ev.fell_back() ? " (blocks ill-conditioned)" : ""));
  const std::string path = detail::path_in(out, "evolve.csv");
  CsvWriter csv(path, m, cols);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const DensityMatrix rho = detail::in_basis(traj[k], c.output_basis);
    std::vector<double> row{times[k]};
    for (int part = 0; part < 2; ++part)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) row.push_back(part == 0 ? rho(i, j).real() : rho(i, j).imag());
    row.push_back(purity(rho));
    row.push_back(detail::physical_concurrence(rho));
    csv.row(row);
  }
  const DensityMatrix last = traj.back();
  return {{path},
          Json{{"command", "evolve"}, {"rows", times.size()}, {"final_t", times.back()},
               {"final_concurrence", detail::physical_concurrence(last)}, {"final_purity", purity(last)}}};
}

/// Purity (and concurrence) at fixed t across a temperature grid.
inline CommandResult cmd_purity_scan(const RunConfig& c, const fs::path& out) {
  const double t = detail::require_t(c, 1.0);
  const std::vector<double> temps = detail::grid_or(c.T_grid, 0.0, 10.0, 21);
  const std::string path = detail::path_in(out, "purity_scan.csv");
  CsvWriter csv(path, detail::meta("purity-scan", c), {"T", "purity", "concurrence"});
  Json rows = Json::array();
  for (double temp : temps) {
    ModelParams p = c.params;
    p.temperature = temp;
    const DensityMatrix rho = Evolver(p, c.solver, c.dt).evolve(c.initial(), t);
    csv.row({temp, purity(rho), detail::physical_concurrence(rho)});
    rows.push_back({temp, purity(rho)});
  }
  return {{path}, Json{{"command", "purity-scan"}, {"t", t}, {"purity", rows}}};
}

/// Concurrence over time at fixed k0 r12, or over k0 r12 at fixed time.
inline CommandResult cmd_concurrence_scan(const RunConfig& c, const fs::path& out) {
  const std::string path = detail::path_in(out, "concurrence_scan.csv");
  Json rows = Json::array();
  if (c.scan == "t") {
    const std::vector<double> times = detail::grid_or(c.t_grid, 0.0, 20.0, 201);
    const auto traj = Evolver(c.params, c.solver, c.dt).trajectory(c.initial(), times);
    CsvWriter csv(path, detail::meta("concurrence-scan", c), {"t", "concurrence"});
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double conc = detail::physical_concurrence(traj[k]);
      csv.row({times[k], conc});
      rows.push_back({times[k], conc});
    }
  } else {
    const double t = detail::require_t(c, 5.0);
    const std::vector<double> xs = detail::grid_or(c.r12_grid, 0.05, 3.0, 60);
    CsvWriter csv(path, detail::meta("concurrence-scan", c), {"k0r12", "concurrence"});
    for (double x : xs) {
      ModelParams p = c.params;
      p.k0_r12 = x;
      const double conc = detail::physical_concurrence(Evolver(p, c.solver, c.dt).evolve(c.initial(), t));
      csv.row({x, conc});
      rows.push_back({x, conc});
    }
  }
  return {{path}, Json{{"command", "concurrence-scan"}, {"scan", c.scan}, {"concurrence", rows}}};
}

/// Nested-projector entanglement PDF of rho(t).
inline CommandResult cmd_pdf(const RunConfig& c, const fs::path& out) {
  const double t = detail::require_t(c, 5.0);
  const DensityMatrix rho = detail::in_basis(Evolver(c.params, c.solver, c.dt).evolve(c.initial(), t),
                                             Basis::Computational);
  const EntanglementPDF pdf = pdf_estimate(rho, c.n_samples, c.n_bins, c.seed, c.worker_count());
  const PdfFeatures feat = pdf_features(pdf);
  const BoundCheck bound = concurrence_bound_check(rho, pdf.spectrum, feat);

  CommandResult res;
  const auto m = detail::meta("pdf", c);
  for (int k = 2; k <= 4; ++k) {
    const Histogram& h = pdf.histogram(k);
    const std::string path = detail::path_in(out, "pdf_P" + std::to_string(k) + ".csv");
    auto mk = m;
    mk.push_back("M = " + std::to_string(k) + ", weight = " + std::to_string(h.weight));
    CsvWriter csv(path, mk, {"bin_left", "bin_right", "density"});
    for (std::size_t b = 0; b < h.bins(); ++b) csv.row({h.edges[b], h.edges[b + 1], h.density[b]});
    res.files.push_back(path);
  }
  {
    const std::string path = detail::path_in(out, "pdf_full.csv");
    auto mf = m;
    mf.push_back("continuous part sum_M omega_M P_M(E); point mass of weight " + std::to_string(pdf.delta_weight) +
                 " at E = " + std::to_string(pdf.delta_location) + " listed in pdf_summary.json");
    CsvWriter csv(path, mf, {"bin_left", "bin_right", "density"});
    const auto d = pdf.continuous_density();
    const Histogram& h = pdf.histogram(2);
    for (std::size_t b = 0; b < d.size(); ++b) csv.row({h.edges[b], h.edges[b + 1], d[b]});
    res.files.push_back(path);
  }

  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json weights = Json::array(), lambdas = Json::array(), integrals = Json::array();
  for (int k = 0; k < 4; ++k) {
    weights.push_back(pdf.spectrum.weights[static_cast<std::size_t>(k)]);
    lambdas.push_back(pdf.spectrum.eigenvalues(k));
  }
  for (int k = 2; k <= 4; ++k) integrals.push_back(pdf.histogram(k).integral());
  Json summary{{"command", "pdf"},
               {"version", kVersion},
               {"config", c.to_json()},
               {"t", t},
               {"eigenvalues", lambdas},
               {"weights", weights},
               {"delta", {{"weight", pdf.delta_weight}, {"location", pdf.delta_location}}},
               {"histogram_integrals", integrals},
               {"features",
                {{"e_max", feat.e_max},
                 {"e_cusp", opt(feat.e_cusp)},
                 {"e_perp", opt(feat.e_perp)},
                 {"c_pi2", feat.c_pi2},
                 {"cusp_significance", feat.cusp_significance},
                 {"perp_significance", feat.perp_significance}}},
               {"concurrence", bound.concurrence},
               {"convexity_bound", {{"bound", bound.bound}, {"slack", bound.slack}, {"holds", bound.holds}}},
               {"state", to_json(rho)}};
  const std::string sp = detail::path_in(out, "pdf_summary.json");
  detail::write_json(sp, summary);
  res.files.push_back(sp);
  res.summary = Json{{"command", "pdf"}, {"weights", weights}, {"e_perp", opt(feat.e_perp)},
                     {"concurrence", bound.concurrence}};
  return res;
}

/// Noisy purification loop F'(F) plus the noiseless reference curve.
inline CommandResult cmd_repeater(const RunConfig& c, const fs::path& out) {
  const double t = detail::require_t(c, 3.0);
  const std::vector<double> grid = detail::grid_or(c.F_grid, 0.5, 1.0, 51);
  const PurificationCurve noisy = noisy_purification_curve(c.params, t, grid, c.solver);
  const PurificationCurve clean = noiseless_purification_curve(grid);

  CommandResult res;
  const auto m = detail::meta("repeater", c);
  {
    const std::string path = detail::path_in(out, "repeater.csv");
    CsvWriter csv(path, m, {"F", "F_noisy", "F_prime"});
    for (std::size_t k = 0; k < grid.size(); ++k) csv.row({grid[k], noisy.f_noisy[k], noisy.f_prime[k]});
    res.files.push_back(path);
  }
  {
    const std::string path = detail::path_in(out, "repeater_noiseless.csv");
    CsvWriter csv(path, m, {"F", "F_prime"});
    for (std::size_t k = 0; k < grid.size(); ++k) csv.row({grid[k], clean.f_prime[k]});
    res.files.push_back(path);
  }
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  const double offset = noisy.channel.f_prime(1.0);
  Json summary{{"command", "repeater"},
               {"version", kVersion},
               {"config", c.to_json()},
               {"t", t},
               {"f_max", opt(noisy.f_max)},
               {"f_min", opt(f_min(noisy))},
               {"offset_F_prime_at_1", offset},
               {"noiseless", {{"f_max", opt(clean.f_max)}, {"f_min", opt(f_min(clean))}}}};
  const std::string sp = detail::path_in(out, "repeater_summary.json");
  detail::write_json(sp, summary);
  res.files.push_back(sp);
  res.summary = Json{{"command", "repeater"}, {"f_max", opt(noisy.f_max)}, {"offset_F_prime_at_1", offset}};
  return res;
}

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"evolve", "purity-scan", "concurrence-scan", "pdf", "repeater"};
  return names;
}

inline CommandResult run_command(const std::string& name, const RunConfig& c, const fs::path& out) {
  fs::create_directories(out);
  if (name == "evolve") return cmd_evolve(c, out);
  if (name == "purity-scan") return cmd_purity_scan(c, out);
  if (name == "concurrence-scan") return cmd_concurrence_scan(c, out);
  if (name == "pdf") return cmd_pdf(c, out);
  if (name == "repeater") return cmd_repeater(c, out);
  throw UsageError("unknown command '" + name + "'");
}

}  // namespace tqb::app
