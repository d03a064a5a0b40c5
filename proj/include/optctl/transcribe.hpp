#pragma once

/**
 * @file
 * @brief Direct transcription of an OCProblem into a finite NLP.
 *
 * With dt = (tf - t0)/N and f_i = f(x_i, u_i, t_i), the defects are
 *
 *   forward Euler   x_{i+1} - x_i - dt f_i                   = 0
 *   backward Euler  x_{i+1} - x_i - dt f_{i+1}               = 0
 *   trapezoidal     x_{i+1} - x_i - dt/2 (f_i + f_{i+1})      = 0
 *
 * for i = 0..N-1, and the running cost is the matching dt-weighted
 * quadrature of L. Decision variables are named x<j>_<i> and u<k>_<i>
 * (1-based j, k; 0-based node index i).
 */

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "optctl/errors.hpp"
#include "optctl/expr.hpp"
#include "optctl/ocp.hpp"

namespace optctl {

enum class Scheme { ForwardEuler, BackwardEuler, Trapezoidal };

inline constexpr Scheme kDefaultScheme = Scheme::Trapezoidal;

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::ForwardEuler: return "forward_euler";
    case Scheme::BackwardEuler: return "backward_euler";
    case Scheme::Trapezoidal: return "trapezoidal";
  }
  return "";
}

inline std::optional<Scheme> parse_scheme(std::string_view name) {
  if (name == "forward_euler") return Scheme::ForwardEuler;
  if (name == "backward_euler") return Scheme::BackwardEuler;
  if (name == "trapezoidal") return Scheme::Trapezoidal;
  return std::nullopt;
}

/// Uniform grid of N intervals (N + 1 nodes).
struct Grid {
  double t0 = 0.0;
  double tf = 1.0;
  std::size_t N = 2;

  double dt() const { return (tf - t0) / static_cast<double>(N); }
  /// The last node is tf exactly.
  double node(std::size_t i) const { return i == N ? tf : t0 + static_cast<double>(i) * dt(); }
  std::size_t num_nodes() const { return N + 1; }

  std::vector<double> nodes() const {
    std::vector<double> out(num_nodes());
    for (std::size_t i = 0; i <= N; ++i) out[i] = node(i);
    return out;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

inline Grid make_grid(double t0, double tf, std::size_t N) {
  if (N < 2) throw ProblemError("grid needs at least 2 intervals");
  if (!std::isfinite(t0) || !std::isfinite(tf) || !(tf > t0)) throw ProblemError("grid needs tf > t0");
  return Grid{t0, tf, N};
}

/// Node indices at which a scheme allocates control variables.
inline std::vector<std::size_t> control_nodes(Scheme scheme, std::size_t N) {
  std::size_t first = 0;
  std::size_t last = N;
  if (scheme == Scheme::ForwardEuler) last = N - 1;
  if (scheme == Scheme::BackwardEuler) first = 1;
  std::vector<std::size_t> out;
  for (std::size_t i = first; i <= last; ++i) out.push_back(i);
  return out;
}

inline std::string state_var(std::size_t j, std::size_t i) {
  return "x" + std::to_string(j + 1) + "_" + std::to_string(i);
}
inline std::string control_var(std::size_t k, std::size_t i) {
  return "u" + std::to_string(k + 1) + "_" + std::to_string(i);
}

struct VariablePin {
  std::string variable;
  double value = 0.0;

  friend bool operator==(const VariablePin&, const VariablePin&) = default;
};

/// Transcribed program: minimize `objective` subject to every constraint
/// expression being zero and every pinned variable taking its value.
struct DiscreteNLP {
  Scheme scheme = kDefaultScheme;
  Grid grid;
  std::size_t num_states = 0;
  std::size_t num_controls = 0;
  std::vector<std::string> variables;
  Expr objective;
  std::vector<Expr> constraints;
  std::vector<VariablePin> pins;

  std::vector<std::size_t> control_nodes() const { return optctl::control_nodes(scheme, grid.N); }

  /// Position of x<j>_<i> in `variables`.
  std::size_t state_index(std::size_t j, std::size_t i) const { return j * grid.num_nodes() + i; }
  /// Position of u<k>_<i> in `variables`; i must be a control node.
  std::size_t control_index(std::size_t k, std::size_t i) const {
    const std::size_t first = scheme == Scheme::BackwardEuler ? 1 : 0;
    const std::size_t count = control_nodes().size();
    return num_states * grid.num_nodes() + k * count + (i - first);
  }

  friend bool operator==(const DiscreteNLP&, const DiscreteNLP&) = default;
};

namespace detail {

/// Adds terms left to right; a sum of one term is that term.
inline Expr sum(const std::vector<Expr>& terms) {
  if (terms.empty()) return Expr::constant(0.0);
  Expr acc = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) acc = acc + terms[i];
  return acc;
}

}  // namespace detail

inline DiscreteNLP transcribe(const OCProblem& p, Scheme scheme, const Grid& grid) {
  if (grid.N < 2) throw ProblemError("grid needs at least 2 intervals");
  if (std::abs(grid.t0 - p.t0) > 1e-12 * (1.0 + std::abs(p.t0)) ||
      std::abs(grid.tf - p.tf) > 1e-12 * (1.0 + std::abs(p.tf))) {
    throw ProblemError("grid does not match the problem horizon");
  }

  const std::size_t nx = p.num_states();
  const std::size_t nu = p.num_controls();
  const std::size_t N = grid.N;
  const double dt = grid.dt();
  const auto unodes = control_nodes(scheme, N);

  DiscreteNLP nlp;
  nlp.scheme = scheme;
  nlp.grid = grid;
  nlp.num_states = nx;
  nlp.num_controls = nu;
  for (std::size_t j = 0; j < nx; ++j) {
    for (std::size_t i = 0; i <= N; ++i) nlp.variables.push_back(state_var(j, i));
  }
  for (std::size_t k = 0; k < nu; ++k) {
    for (const auto i : unodes) nlp.variables.push_back(control_var(k, i));
  }

  // Replacement map binding the continuous symbols to node i. Controls are
  // bound only where the scheme allocates them.
  auto at_node = [&](std::size_t i, bool with_controls) {
    Replacements r;
    for (std::size_t j = 0; j < nx; ++j) r.emplace(p.states[j], Expr::variable(state_var(j, i)));
    if (with_controls) {
      for (std::size_t k = 0; k < nu; ++k) r.emplace(p.controls[k], Expr::variable(control_var(k, i)));
    }
    r.emplace(std::string(kTimeVariable), Expr::constant(grid.node(i)));
    return r;
  };
  auto f_at = [&](std::size_t j, std::size_t i) { return substitute(p.dynamics[j], at_node(i, true)); };

  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      const Expr step = Expr::variable(state_var(j, i + 1)) - Expr::variable(state_var(j, i));
      Expr increment;
      switch (scheme) {
        case Scheme::ForwardEuler: increment = dt * f_at(j, i); break;
        case Scheme::BackwardEuler: increment = dt * f_at(j, i + 1); break;
        case Scheme::Trapezoidal: increment = (0.5 * dt) * (f_at(j, i) + f_at(j, i + 1)); break;
      }
      nlp.constraints.push_back(step - increment);
    }
  }

  std::vector<Expr> terms;
  if (p.mayer) terms.push_back(substitute(*p.mayer, at_node(N, false)));
  for (const auto i : unodes) {
    double weight = dt;
    if (scheme == Scheme::Trapezoidal && (i == 0 || i == N)) weight = 0.5 * dt;
    const Expr L = substitute(p.lagrange, at_node(i, true));
    terms.push_back(weight * L);
  }
  nlp.objective = detail::sum(terms);

  for (std::size_t j = 0; j < nx; ++j) {
    if (p.x_initial[j]) nlp.pins.push_back({state_var(j, 0), *p.x_initial[j]});
  }
  for (std::size_t j = 0; j < nx; ++j) {
    if (p.x_final[j]) nlp.pins.push_back({state_var(j, N), *p.x_final[j]});
  }
  return nlp;
}

}  // namespace optctl
