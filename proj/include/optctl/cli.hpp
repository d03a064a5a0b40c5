#pragma once

/**
 * @file
 * @brief The `solve`, `export` and `check` commands, callable in-process.
 *
 * Exit codes: 0 success (converged), 2 solved but not converged, 1 input or
 * solver error. Messages go to the `err` stream.
 */

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "optctl/errors.hpp"
#include "optctl/model_text.hpp"
#include "optctl/ocp.hpp"
#include "optctl/problem_file.hpp"
#include "optctl/solver.hpp"
#include "optctl/transcribe.hpp"

namespace optctl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;

struct Overrides {
  std::optional<std::size_t> N;
  std::optional<std::string> scheme;
};

/// Problem, transcription settings and program as read from a file.
struct Loaded {
  OCProblem problem;
  Scheme scheme = kDefaultScheme;
  Grid grid;
  DiscreteNLP nlp;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Loaded load(const std::filesystem::path& path, const Overrides& overrides) {
  const ProblemFile pf = parse_problem_file(read_file(path));
  Loaded out;
  out.problem = to_problem(pf);
  out.scheme = pf.scheme;
  if (overrides.scheme) {
    const auto s = parse_scheme(*overrides.scheme);
    if (!s) throw ProblemError("unknown scheme '" + *overrides.scheme + "'");
    out.scheme = *s;
  }
  out.grid = make_grid(pf.t0, pf.tf, overrides.N.value_or(pf.N));
  out.nlp = transcribe(out.problem, out.scheme, out.grid);
  return out;
}

/// Trajectory table: t, states, controls. Controls are empty at nodes where
/// the scheme has no control variable.
inline std::string trajectory_csv(const Solution& s) {
  std::string out = "t";
  const auto nx = s.states.cols();
  const auto nu = s.controls.cols();
  for (Eigen::Index j = 0; j < nx; ++j) out += ",x" + std::to_string(j + 1);
  for (Eigen::Index k = 0; k < nu; ++k) out += ",u" + std::to_string(k + 1);
  out += '\n';
  std::vector<std::optional<Eigen::Index>> control_row(s.grid.num_nodes());
  for (std::size_t r = 0; r < s.control_nodes.size(); ++r) control_row[s.control_nodes[r]] = static_cast<Eigen::Index>(r);
  for (std::size_t i = 0; i <= s.grid.N; ++i) {
    const auto I = static_cast<Eigen::Index>(i);
    out += detail::format_real(s.grid.node(i));
    for (Eigen::Index j = 0; j < nx; ++j) out += "," + detail::format_real(s.states(I, j));
    for (Eigen::Index k = 0; k < nu; ++k) {
      out += ',';
      if (control_row[i]) out += detail::format_real(s.controls(*control_row[i], k));
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json solution_json(const Solution& s, double wall_time_ms) {
  nlohmann::ordered_json j;
  j["objective"] = s.objective;
  j["iterations"] = s.diagnostics.iterations;
  j["kkt_residual_inf"] = s.diagnostics.kkt_residual_inf;
  j["converged"] = s.diagnostics.converged;
  j["scheme"] = std::string(to_string(s.diagnostics.scheme));
  j["problem_class"] = std::string(to_string(s.diagnostics.problem_class));
  j["max_defect"] = s.diagnostics.max_defect;
  j["regularization"] = s.diagnostics.regularization;
  j["wall_time_ms"] = wall_time_ms;
  return j;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
}

inline std::filesystem::path output_path(const std::filesystem::path& input, const std::filesystem::path& out_dir,
                                         const std::string& suffix) {
  return out_dir / (input.stem().string() + suffix);
}

inline int run_solve(const std::filesystem::path& file, const Overrides& overrides, const std::filesystem::path& out_dir,
                     std::ostream& out, std::ostream& err) {
  try {
    const auto start = std::chrono::steady_clock::now();
    const Loaded loaded = load(file, overrides);
    const Solution s = solve(loaded.problem, loaded.scheme, loaded.grid);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    const auto csv = output_path(file, out_dir, ".traj.csv");
    const auto json = output_path(file, out_dir, ".sol.json");
    write_file(csv, trajectory_csv(s));
    write_file(json, solution_json(s, ms).dump(2) + "\n");
    out << (s.diagnostics.converged ? "converged" : "NOT converged") << ": objective "
        << detail::format_real(s.objective) << ", " << s.diagnostics.iterations << " iteration(s), kkt residual "
        << s.diagnostics.kkt_residual_inf << "\n"
        << "wrote " << csv.string() << " and " << json.string() << "\n";
    if (!s.diagnostics.converged) {
      err << "solver did not converge (kkt residual " << s.diagnostics.kkt_residual_inf << ")\n";
      return kExitNotConverged;
    }
    return kExitOk;
  } catch (const SingularKKT& e) {
    err << "SingularKKT: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

inline int run_export(const std::filesystem::path& file, const Overrides& overrides,
                      const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err) {
  try {
    const Loaded loaded = load(file, overrides);
    const auto path = output_path(file, out_dir, ".nlp.txt");
    write_file(path, export_model_text(loaded.nlp));
    out << "wrote " << path.string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

inline int run_check(const std::filesystem::path& file, const Overrides& overrides, std::ostream& out,
                     std::ostream& err) {
  try {
    const Loaded loaded = load(file, overrides);
    const ProblemClass cls = classify(loaded.problem);
    const auto& nlp = loaded.nlp;
    out << "problem_class " << to_string(cls.kind) << "\n"
        << "scheme " << to_string(loaded.scheme) << "\n"
        << "states " << loaded.problem.num_states() << " controls " << loaded.problem.num_controls() << " N "
        << loaded.grid.N << "\n"
        << "variables " << nlp.variables.size() << "\n"
        << "rows " << nlp.constraints.size() + nlp.pins.size() << " (" << nlp.constraints.size() << " defects + "
        << nlp.pins.size() << " pins)\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace optctl::cli
