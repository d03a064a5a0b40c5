#pragma once

/**
 * @file
 * @brief Continuous optimal-control problems.
 *
 *   min  Phi(x(tf)) + integral_{t0}^{tf} L(x, u, t) dt
 *   s.t. dx/dt = f(x, u, t),  x(t0), x(tf) pinned or free per component.
 */

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "optctl/errors.hpp"
#include "optctl/expr.hpp"

namespace optctl {

/// Name reserved for the independent variable.
inline constexpr std::string_view kTimeVariable = "t";

/// Raw construction inputs, as they come from a problem file or user code.
struct ProblemInputs {
  std::vector<std::string> states;
  std::vector<std::string> controls;
  std::vector<Expr> dynamics;
  Expr lagrange;
  std::optional<Expr> mayer;
  std::map<std::string, double> parameters;
  double t0 = 0.0;
  double tf = 1.0;
  std::vector<std::optional<double>> x_initial;
  std::vector<std::optional<double>> x_final;
};

/// A validated problem. Parameters are already substituted into every
/// expression; the map is kept for reporting only.
struct OCProblem {
  std::vector<std::string> states;
  std::vector<std::string> controls;
  std::vector<Expr> dynamics;
  Expr lagrange;
  std::optional<Expr> mayer;
  std::map<std::string, double> parameters;
  double t0 = 0.0;
  double tf = 1.0;
  std::vector<std::optional<double>> x_initial;
  std::vector<std::optional<double>> x_final;

  std::size_t num_states() const { return states.size(); }
  std::size_t num_controls() const { return controls.size(); }

  friend bool operator==(const OCProblem&, const OCProblem&) = default;
};

enum class ProblemKind { LinearQuadratic, Nonlinear };

inline std::string_view to_string(ProblemKind kind) {
  return kind == ProblemKind::LinearQuadratic ? "LinearQuadratic" : "Nonlinear";
}

/// Result of classify(). A, B and offset are only filled for LinearQuadratic:
/// f(x, u) = A x + B u + offset.
struct ProblemClass {
  ProblemKind kind = ProblemKind::Nonlinear;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd offset;
};

namespace detail {

inline void check_identifier_list(const std::vector<std::string>& names, const char* what,
                                  std::set<std::string>& seen) {
  for (const auto& n : names) {
    if (n.empty()) throw ProblemError(std::string("empty ") + what + " name");
    if (n == kTimeVariable) throw ProblemError(std::string(what) + " may not be named 't'");
    if (!seen.insert(n).second) throw ProblemError("duplicate identifier '" + n + "'");
  }
}

inline void check_free_variables(const Expr& e, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& v : free_variables(e)) {
    if (!allowed.contains(v)) throw ProblemError("unknown variable '" + v + "' in " + where);
  }
}

}  // namespace detail

/// Validates the inputs and substitutes parameters. Throws ProblemError.
inline OCProblem build_problem(const ProblemInputs& in) {
  if (in.states.empty()) throw ProblemError("at least one state is required");
  if (in.controls.empty()) throw ProblemError("at least one control is required");
  if (in.dynamics.size() != in.states.size()) {
    throw ProblemError("dimension mismatch: " + std::to_string(in.dynamics.size()) + " dynamics rows for " +
                       std::to_string(in.states.size()) + " states");
  }
  if (in.x_initial.size() != in.states.size() || in.x_final.size() != in.states.size()) {
    throw ProblemError("dimension mismatch: boundary conditions must list one entry per state");
  }
  if (!std::isfinite(in.t0) || !std::isfinite(in.tf) || !(in.tf > in.t0)) {
    throw ProblemError("horizon must satisfy tf > t0");
  }

  std::set<std::string> seen;
  detail::check_identifier_list(in.states, "state", seen);
  detail::check_identifier_list(in.controls, "control", seen);
  Replacements params;
  for (const auto& [name, value] : in.parameters) {
    if (name == kTimeVariable || !seen.insert(name).second) {
      throw ProblemError("parameter '" + name + "' clashes with another identifier");
    }
    params.emplace(name, Expr::constant(value));
  }

  std::set<std::string> running(seen);
  running.insert(std::string(kTimeVariable));
  std::set<std::string> terminal(in.states.begin(), in.states.end());
  for (const auto& [name, value] : in.parameters) terminal.insert(name);

  for (std::size_t j = 0; j < in.dynamics.size(); ++j) {
    detail::check_free_variables(in.dynamics[j], running, "dynamics of '" + in.states[j] + "'");
  }
  detail::check_free_variables(in.lagrange, running, "lagrange term");
  if (in.mayer) detail::check_free_variables(*in.mayer, terminal, "mayer term");

  for (const auto& bc : {in.x_initial, in.x_final}) {
    for (const auto& v : bc) {
      if (v && !std::isfinite(*v)) throw ProblemError("boundary values must be finite");
    }
  }

  OCProblem p;
  p.states = in.states;
  p.controls = in.controls;
  for (const auto& f : in.dynamics) p.dynamics.push_back(substitute(f, params));
  p.lagrange = substitute(in.lagrange, params);
  if (in.mayer) p.mayer = substitute(*in.mayer, params);
  p.parameters = in.parameters;
  p.t0 = in.t0;
  p.tf = in.tf;
  p.x_initial = in.x_initial;
  p.x_final = in.x_final;
  return p;
}

namespace detail {

/// True when every second partial over `vars` is a constant.
inline bool is_quadratic(const Expr& e, const std::vector<std::string>& vars) {
  for (std::size_t a = 0; a < vars.size(); ++a) {
    const Expr da = differentiate(e, vars[a]);
    for (std::size_t b = a; b < vars.size(); ++b) {
      if (!differentiate(da, vars[b]).is_constant()) return false;
    }
  }
  return true;
}

}  // namespace detail

/// LinearQuadratic iff every dynamics row is affine in states and controls
/// with constant coefficients and offset, and the cost terms have constant
/// Hessians. Any dependence on t in the dynamics forces Nonlinear.
inline ProblemClass classify(const OCProblem& p) {
  ProblemClass out;
  std::vector<std::string> vars = p.states;
  vars.insert(vars.end(), p.controls.begin(), p.controls.end());

  const auto nx = static_cast<Eigen::Index>(p.num_states());
  const auto nu = static_cast<Eigen::Index>(p.num_controls());
  Eigen::MatrixXd A(nx, nx);
  Eigen::MatrixXd B(nx, nu);
  Eigen::VectorXd offset(nx);

  for (Eigen::Index j = 0; j < nx; ++j) {
    const auto form = linearize(p.dynamics[static_cast<std::size_t>(j)], vars);
    if (!form || !form->constant_is_numeric()) return out;
    for (Eigen::Index c = 0; c < nx; ++c) A(j, c) = form->coefficients[static_cast<std::size_t>(c)];
    for (Eigen::Index c = 0; c < nu; ++c) B(j, c) = form->coefficients[static_cast<std::size_t>(nx + c)];
    offset(j) = form->constant.value();
  }
  if (!detail::is_quadratic(p.lagrange, vars)) return out;
  if (p.mayer && !detail::is_quadratic(*p.mayer, p.states)) return out;

  out.kind = ProblemKind::LinearQuadratic;
  out.A = std::move(A);
  out.B = std::move(B);
  out.offset = std::move(offset);
  return out;
}

}  // namespace optctl
