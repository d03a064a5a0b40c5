#pragma once

/**
 * @file
 * @brief Solvers for transcribed programs.
 *
 * Pinned variables are eliminated by substitution first. Linear-quadratic
 * programs go through one dense KKT solve; everything else through an SQP
 * loop with exact second derivatives and an l1-merit backtracking line search.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "optctl/errors.hpp"
#include "optctl/expr.hpp"
#include "optctl/linalg.hpp"
#include "optctl/ocp.hpp"
#include "optctl/transcribe.hpp"

namespace optctl {

/// Equality-constrained QP over the unpinned variables:
///   min 0.5 z'Hz + g'z + constant  s.t.  Az = b.
struct QPData {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  double constant = 0.0;
  /// Names of the unpinned variables, in column order.
  std::vector<std::string> variables;
};

struct KktSolution {
  Eigen::VectorXd z;
  Eigen::VectorXd multipliers;
  /// Diagonal shift added to H; 0 when none was needed.
  double regularization = 0.0;
  double residual_inf = 0.0;
};

/// Regularization ladder for the QP path.
inline constexpr std::array<double, 4> kKktRegularization{0.0, 1e-10, 1e-8, 1e-6};

struct SqpOptions {
  double tol = 1e-8;
  std::size_t max_iter = 100;
};

/// One accepted (or final rejected) SQP step.
struct SqpIterate {
  double merit_before = 0.0;
  double merit_after = 0.0;
  double step_length = 0.0;
  double penalty = 0.0;
  double kkt_residual_inf = 0.0;
  double regularization = 0.0;
};

struct Diagnostics {
  std::size_t iterations = 0;
  double kkt_residual_inf = 0.0;
  double max_defect = 0.0;
  bool converged = false;
  Scheme scheme = kDefaultScheme;
  ProblemKind problem_class = ProblemKind::Nonlinear;
  double regularization = 0.0;
  std::vector<SqpIterate> history;
};

struct Solution {
  Grid grid;
  /// (N + 1) x n_x.
  Eigen::MatrixXd states;
  /// One row per entry of control_nodes, n_u columns.
  Eigen::MatrixXd controls;
  std::vector<std::size_t> control_nodes;
  /// Full decision vector in DiscreteNLP::variables order, pins included.
  Eigen::VectorXd decision;
  double objective = 0.0;
  Diagnostics diagnostics;
};

// ---------------------------------------------------------------------------

namespace detail {

inline Replacements pin_replacements(const DiscreteNLP& nlp) {
  Replacements r;
  for (const auto& pin : nlp.pins) r[pin.variable] = Expr::constant(pin.value);
  return r;
}

inline std::vector<std::string> unpinned_variables(const DiscreteNLP& nlp) {
  std::set<std::string> pinned;
  for (const auto& pin : nlp.pins) pinned.insert(pin.variable);
  std::vector<std::string> out;
  for (const auto& v : nlp.variables) {
    if (!pinned.contains(v)) out.push_back(v);
  }
  return out;
}

inline std::unordered_map<std::string, std::size_t> slot_map(const std::vector<std::string>& names) {
  std::unordered_map<std::string, std::size_t> m;
  for (std::size_t i = 0; i < names.size(); ++i) m.emplace(names[i], i);
  return m;
}

/// Splits a top-level chain of +, - and unary minus into signed terms.
inline void split_terms(const Expr& e, double sign, std::vector<std::pair<double, Expr>>& out) {
  if (const auto* b = e.as_binary(); b != nullptr && (b->op == BinaryOp::Add || b->op == BinaryOp::Sub)) {
    // Iterate down the left spine; long sums are left-deep.
    std::vector<std::pair<double, Expr>> rhs_terms;
    Expr cur = e;
    for (;;) {
      const auto* cb = cur.as_binary();
      if (cb == nullptr || (cb->op != BinaryOp::Add && cb->op != BinaryOp::Sub)) break;
      rhs_terms.emplace_back(cb->op == BinaryOp::Add ? sign : -sign, cb->rhs);
      cur = cb->lhs;
    }
    split_terms(cur, sign, out);
    for (auto it = rhs_terms.rbegin(); it != rhs_terms.rend(); ++it) split_terms(it->second, it->first, out);
    return;
  }
  if (const auto* u = e.as_unary(); u != nullptr && u->op == UnaryOp::Neg) {
    split_terms(u->child, -sign, out);
    return;
  }
  out.emplace_back(sign, e);
}

inline double value_at_origin(const Expr& e) {
  Bindings zero;
  for (const auto& v : free_variables(e)) zero.emplace(v, 0.0);
  return evaluate(e, zero);
}

inline void check_declared(const Expr& e, const std::unordered_map<std::string, std::size_t>& slots,
                           const Replacements& pins) {
  for (const auto& v : free_variables(e)) {
    if (!slots.contains(v) && !pins.contains(v)) throw UnboundVariable(v);
  }
}

}  // namespace detail

/// Builds the QP of a linear-quadratic program after eliminating pins.
/// Throws NotLinearQuadratic if the objective is not quadratic or a
/// constraint is not affine.
inline QPData assemble_qp(const DiscreteNLP& nlp) {
  const Replacements pins = detail::pin_replacements(nlp);
  QPData qp;
  qp.variables = detail::unpinned_variables(nlp);
  const auto slots = detail::slot_map(qp.variables);
  const auto n = static_cast<Eigen::Index>(qp.variables.size());
  const auto m = static_cast<Eigen::Index>(nlp.constraints.size());

  qp.H = Eigen::MatrixXd::Zero(n, n);
  qp.g = Eigen::VectorXd::Zero(n);
  qp.A = Eigen::MatrixXd::Zero(m, n);
  qp.b = Eigen::VectorXd::Zero(m);

  detail::check_declared(nlp.objective, slots, pins);
  std::vector<std::pair<double, Expr>> terms;
  detail::split_terms(substitute(nlp.objective, pins), 1.0, terms);
  for (const auto& [sign, term] : terms) {
    const auto vars = free_variables(term);
    const std::vector<std::string> list(vars.begin(), vars.end());
    qp.constant += sign * detail::value_at_origin(term);
    for (std::size_t a = 0; a < list.size(); ++a) {
      const Expr da = differentiate(term, list[a]);
      const auto ia = static_cast<Eigen::Index>(slots.at(list[a]));
      qp.g(ia) += sign * detail::value_at_origin(da);
      for (std::size_t c = a; c < list.size(); ++c) {
        const Expr dac = differentiate(da, list[c]);
        if (!dac.is_constant()) throw NotLinearQuadratic("objective is not quadratic in '" + list[a] + "'");
        const auto ic = static_cast<Eigen::Index>(slots.at(list[c]));
        qp.H(ia, ic) += sign * dac.value();
        if (ic != ia) qp.H(ic, ia) += sign * dac.value();
      }
    }
  }

  for (Eigen::Index r = 0; r < m; ++r) {
    const Expr& raw = nlp.constraints[static_cast<std::size_t>(r)];
    detail::check_declared(raw, slots, pins);
    const Expr c = substitute(raw, pins);
    const auto vars = free_variables(c);
    const std::vector<std::string> list(vars.begin(), vars.end());
    const auto form = linearize(c, list);
    if (!form || !form->constant_is_numeric()) {
      throw NotLinearQuadratic("constraint " + std::to_string(r + 1) + " is not affine");
    }
    for (std::size_t k = 0; k < list.size(); ++k) {
      qp.A(r, static_cast<Eigen::Index>(slots.at(list[k]))) = form->coefficients[k];
    }
    qp.b(r) = -form->constant.value();
  }
  return qp;
}

namespace detail {

inline Eigen::MatrixXd kkt_matrix(const Eigen::MatrixXd& H, const Eigen::MatrixXd& A, double shift) {
  const Eigen::Index n = H.rows();
  const Eigen::Index m = A.rows();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = H;
  K.topLeftCorner(n, n).diagonal().array() += shift;
  K.topRightCorner(n, m) = A.transpose();
  K.bottomLeftCorner(m, n) = A;
  return K;
}

/// Factor and solve K sol = rhs with one step of iterative refinement.
/// Returns nullopt when K is singular or the residual test fails.
inline std::optional<Eigen::VectorXd> solve_checked(const Eigen::MatrixXd& K, const Eigen::VectorXd& rhs,
                                                    double tolerance) {
  const DenseLU lu(K);
  if (lu.singular()) return std::nullopt;
  Eigen::VectorXd sol = lu.solve(rhs);
  sol += lu.solve(rhs - K * sol);
  if (!sol.allFinite()) return std::nullopt;
  if ((K * sol - rhs).lpNorm<Eigen::Infinity>() > tolerance) return std::nullopt;
  return sol;
}

}  // namespace detail

/// Solves [H A'; A 0][z; lambda] = [-g; b]. Retries with H + eps I along
/// kKktRegularization; throws SingularKKT when every attempt fails.
inline KktSolution solve_kkt(const QPData& qp) {
  const Eigen::Index n = qp.H.rows();
  const Eigen::Index m = qp.A.rows();
  if (qp.H.cols() != n || qp.g.size() != n || qp.A.cols() != n || qp.b.size() != m) {
    throw Error("QP dimension mismatch");
  }
  KktSolution out;
  if (n + m == 0) {
    out.z = Eigen::VectorXd::Zero(0);
    out.multipliers = Eigen::VectorXd::Zero(0);
    return out;
  }
  Eigen::VectorXd rhs(n + m);
  rhs << -qp.g, qp.b;
  const double scale = 1.0 + (m > 0 ? qp.b.lpNorm<Eigen::Infinity>() : 0.0) + (n > 0 ? qp.g.lpNorm<Eigen::Infinity>() : 0.0);
  const double tolerance = 1e-9 * scale;

  for (const double eps : kKktRegularization) {
    const Eigen::MatrixXd K = detail::kkt_matrix(qp.H, qp.A, eps);
    if (auto sol = detail::solve_checked(K, rhs, tolerance)) {
      out.z = sol->head(n);
      out.multipliers = sol->tail(m);
      out.regularization = eps;
      out.residual_inf = (K * *sol - rhs).lpNorm<Eigen::Infinity>();
      return out;
    }
  }
  throw SingularKKT("singular KKT system: constraints are rank deficient or contradictory");
}

/// Starting point: states interpolate linearly between pinned end values
/// (a free end takes the other end's value, 0 when both are free); controls 0.
inline Eigen::VectorXd initial_guess(const DiscreteNLP& nlp) {
  const auto n = static_cast<Eigen::Index>(nlp.variables.size());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  const auto slots = detail::slot_map(nlp.variables);
  std::unordered_map<std::string, double> pinned;
  for (const auto& pin : nlp.pins) pinned[pin.variable] = pin.value;

  const std::size_t N = nlp.grid.N;
  if (nlp.num_states > 0 && nlp.variables.size() >= nlp.num_states * (N + 1)) {
    for (std::size_t j = 0; j < nlp.num_states; ++j) {
      const auto first = pinned.find(state_var(j, 0));
      const auto last = pinned.find(state_var(j, N));
      double a = 0.0;
      double b = 0.0;
      if (first != pinned.end() && last != pinned.end()) {
        a = first->second;
        b = last->second;
      } else if (first != pinned.end()) {
        a = b = first->second;
      } else if (last != pinned.end()) {
        a = b = last->second;
      }
      for (std::size_t i = 0; i <= N; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(N);
        z(static_cast<Eigen::Index>(nlp.state_index(j, i))) = i == N ? b : a + s * (b - a);
      }
    }
  }
  for (const auto& [name, value] : pinned) z(static_cast<Eigen::Index>(slots.at(name))) = value;
  return z;
}

// ---------------------------------------------------------------------------
// SQP

namespace detail {

/// Compiled value, gradient and Hessian of one expression over the unpinned
/// variables. Zero derivatives are dropped.
struct CompiledFunction {
  struct Entry {
    std::size_t row;
    std::size_t col;
    CompiledExpr expr;
  };

  CompiledExpr value;
  std::vector<std::pair<std::size_t, CompiledExpr>> gradient;
  std::vector<Entry> hessian;  // row <= col

  CompiledFunction(const Expr& e, const std::unordered_map<std::string, std::size_t>& slots) : value(e, slots) {
    const auto vars = free_variables(e);
    const std::vector<std::string> list(vars.begin(), vars.end());
    for (std::size_t a = 0; a < list.size(); ++a) {
      const Expr da = differentiate(e, list[a]);
      if (da.is_constant(0.0)) continue;
      const std::size_t ia = slots.at(list[a]);
      gradient.emplace_back(ia, CompiledExpr(da, slots));
      for (std::size_t c = a; c < list.size(); ++c) {
        const Expr dac = differentiate(da, list[c]);
        if (dac.is_constant(0.0)) continue;
        const std::size_t ic = slots.at(list[c]);
        hessian.push_back({std::min(ia, ic), std::max(ia, ic), CompiledExpr(dac, slots)});
      }
    }
  }

  void add_hessian(std::span<const double> z, double weight, Eigen::MatrixXd& W) const {
    if (weight == 0.0) return;
    for (const auto& h : hessian) {
      const double v = weight * h.expr(z);
      const auto r = static_cast<Eigen::Index>(h.row);
      const auto c = static_cast<Eigen::Index>(h.col);
      W(r, c) += v;
      if (r != c) W(c, r) += v;
    }
  }
};

class CompiledProgram {
 public:
  CompiledProgram(const DiscreteNLP& nlp, const Replacements& pins, const std::vector<std::string>& free_vars) {
    const auto slots = slot_map(free_vars);
    n_ = free_vars.size();
    check_declared(nlp.objective, slots, pins);
    std::vector<std::pair<double, Expr>> terms;
    split_terms(substitute(nlp.objective, pins), 1.0, terms);
    for (const auto& [sign, term] : terms) {
      objective_.emplace_back(sign, CompiledFunction(term, slots));
    }
    for (const auto& c : nlp.constraints) {
      check_declared(c, slots, pins);
      constraints_.emplace_back(substitute(c, pins), slots);
    }
  }

  std::size_t num_variables() const { return n_; }
  std::size_t num_constraints() const { return constraints_.size(); }

  double objective(std::span<const double> z) const {
    double f = 0.0;
    for (const auto& [sign, term] : objective_) f += sign * term.value(z);
    return f;
  }

  Eigen::VectorXd gradient(std::span<const double> z) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    for (const auto& [sign, term] : objective_) {
      for (const auto& [i, d] : term.gradient) g(static_cast<Eigen::Index>(i)) += sign * d(z);
    }
    return g;
  }

  Eigen::VectorXd constraints(std::span<const double> z) const {
    Eigen::VectorXd c(static_cast<Eigen::Index>(constraints_.size()));
    for (std::size_t r = 0; r < constraints_.size(); ++r) c(static_cast<Eigen::Index>(r)) = constraints_[r].value(z);
    return c;
  }

  Eigen::MatrixXd jacobian(std::span<const double> z) const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(constraints_.size()), static_cast<Eigen::Index>(n_));
    for (std::size_t r = 0; r < constraints_.size(); ++r) {
      for (const auto& [i, d] : constraints_[r].gradient) {
        J(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = d(z);
      }
    }
    return J;
  }

  /// Hessian of f + lambda' c.
  Eigen::MatrixXd lagrangian_hessian(std::span<const double> z, const Eigen::VectorXd& lambda) const {
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (const auto& [sign, term] : objective_) term.add_hessian(z, sign, W);
    for (std::size_t r = 0; r < constraints_.size(); ++r) {
      constraints_[r].add_hessian(z, lambda(static_cast<Eigen::Index>(r)), W);
    }
    return W;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::pair<double, CompiledFunction>> objective_;
  std::vector<CompiledFunction> constraints_;
};

/// Regularization ladder for SQP steps. Extends the QP ladder because
/// non-convex Lagrangian Hessians need larger shifts.
inline constexpr std::array<double, 10> kSqpRegularization{0.0, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6};

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

inline Solution make_solution(const DiscreteNLP& nlp, Eigen::VectorXd full) {
  Solution s;
  s.grid = nlp.grid;
  s.control_nodes = nlp.control_nodes();
  const auto nodes = static_cast<Eigen::Index>(nlp.grid.num_nodes());
  const auto nx = static_cast<Eigen::Index>(nlp.num_states);
  const auto nu = static_cast<Eigen::Index>(nlp.num_controls);
  s.states = Eigen::MatrixXd::Zero(nodes, nx);
  s.controls = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.control_nodes.size()), nu);
  if (nlp.variables.size() == nlp.num_states * nlp.grid.num_nodes() + nlp.num_controls * s.control_nodes.size()) {
    for (std::size_t j = 0; j < nlp.num_states; ++j) {
      for (std::size_t i = 0; i <= nlp.grid.N; ++i) {
        s.states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            full(static_cast<Eigen::Index>(nlp.state_index(j, i)));
      }
    }
    for (std::size_t k = 0; k < nlp.num_controls; ++k) {
      for (std::size_t r = 0; r < s.control_nodes.size(); ++r) {
        s.controls(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
            full(static_cast<Eigen::Index>(nlp.control_index(k, s.control_nodes[r])));
      }
    }
  }
  Bindings b;
  for (std::size_t i = 0; i < nlp.variables.size(); ++i) b[nlp.variables[i]] = full(static_cast<Eigen::Index>(i));
  s.objective = evaluate(nlp.objective, b);
  double defect = 0.0;
  for (const auto& c : nlp.constraints) defect = std::max(defect, std::abs(evaluate(c, b)));
  s.diagnostics.max_defect = defect;
  s.diagnostics.scheme = nlp.scheme;
  s.decision = std::move(full);
  return s;
}

/// Scatters the unpinned values back into the full decision vector.
inline Eigen::VectorXd expand(const DiscreteNLP& nlp, const std::vector<std::string>& free_vars,
                              const Eigen::VectorXd& z) {
  const auto slots = slot_map(nlp.variables);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nlp.variables.size()));
  for (const auto& pin : nlp.pins) full(static_cast<Eigen::Index>(slots.at(pin.variable))) = pin.value;
  for (std::size_t i = 0; i < free_vars.size(); ++i) {
    full(static_cast<Eigen::Index>(slots.at(free_vars[i]))) = z(static_cast<Eigen::Index>(i));
  }
  return full;
}

}  // namespace detail

/// Solves a linear-quadratic program with one KKT solve.
inline Solution solve_qp(const DiscreteNLP& nlp, double tol = 1e-8) {
  const QPData qp = assemble_qp(nlp);
  const KktSolution kkt = solve_kkt(qp);
  Solution s = detail::make_solution(nlp, detail::expand(nlp, qp.variables, kkt.z));
  const Eigen::Index n = qp.H.rows();
  double residual = 0.0;
  if (n > 0) {
    Eigen::VectorXd stationarity = qp.H * kkt.z + qp.g;
    if (qp.A.rows() > 0) stationarity += qp.A.transpose() * kkt.multipliers;
    residual = stationarity.lpNorm<Eigen::Infinity>();
  }
  if (qp.A.rows() > 0) residual = std::max(residual, (qp.A * kkt.z - qp.b).lpNorm<Eigen::Infinity>());
  s.diagnostics.iterations = 1;
  s.diagnostics.kkt_residual_inf = residual;
  s.diagnostics.regularization = kkt.regularization;
  s.diagnostics.problem_class = ProblemKind::LinearQuadratic;
  s.diagnostics.converged = residual <= tol;
  return s;
}

/// SQP with exact Hessians and an l1-merit backtracking line search.
/// Non-convergence is reported through Diagnostics::converged, not thrown.
/// `z0` is a full decision vector (pinned entries are ignored).
inline Solution solve_sqp(const DiscreteNLP& nlp, const Eigen::VectorXd& z0, const SqpOptions& opts = {}) {
  if (static_cast<std::size_t>(z0.size()) != nlp.variables.size()) {
    throw Error("initial point has " + std::to_string(z0.size()) + " entries, program has " +
                std::to_string(nlp.variables.size()) + " variables");
  }
  const Replacements pins = detail::pin_replacements(nlp);
  const auto free_vars = detail::unpinned_variables(nlp);
  const detail::CompiledProgram prog(nlp, pins, free_vars);
  const auto n = static_cast<Eigen::Index>(prog.num_variables());
  const auto m = static_cast<Eigen::Index>(prog.num_constraints());

  const auto all_slots = detail::slot_map(nlp.variables);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = z0(static_cast<Eigen::Index>(all_slots.at(free_vars[static_cast<std::size_t>(i)])));
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);

  Diagnostics diag;
  double last_residual = std::numeric_limits<double>::infinity();

  auto merit = [&](const Eigen::VectorXd& x, double rho) {
    return prog.objective(detail::as_span(x)) + rho * prog.constraints(detail::as_span(x)).lpNorm<1>();
  };

  for (std::size_t iter = 0;; ++iter) {
    const auto zs = detail::as_span(z);
    const Eigen::VectorXd grad = prog.gradient(zs);
    const Eigen::VectorXd c = prog.constraints(zs);
    const Eigen::MatrixXd J = prog.jacobian(zs);
    Eigen::VectorXd stationarity = grad;
    if (m > 0) stationarity += J.transpose() * lambda;
    double residual = n > 0 ? stationarity.lpNorm<Eigen::Infinity>() : 0.0;
    if (m > 0) residual = std::max(residual, c.lpNorm<Eigen::Infinity>());
    last_residual = residual;
    if (!std::isfinite(residual)) break;
    if (residual <= opts.tol) {
      diag.converged = true;
      break;
    }
    if (iter >= opts.max_iter) break;

    const Eigen::MatrixXd W = prog.lagrangian_hessian(zs, lambda);
    Eigen::VectorXd rhs(n + m);
    rhs << -grad, -c;
    std::optional<Eigen::VectorXd> step;
    double shift = 0.0;
    for (const double eps : detail::kSqpRegularization) {
      const Eigen::MatrixXd K = detail::kkt_matrix(W, J, eps);
      auto sol = detail::solve_checked(K, rhs, 1e-9 * (1.0 + rhs.lpNorm<Eigen::Infinity>()));
      if (!sol) continue;
      const Eigen::VectorXd p = sol->head(n);
      // Require positive curvature along the step.
      const double curvature = p.dot(W * p) + eps * p.squaredNorm();
      if (curvature <= 1e-12 * p.squaredNorm() && p.squaredNorm() > 0.0) continue;
      step = std::move(sol);
      shift = eps;
      break;
    }
    if (!step) break;

    const Eigen::VectorXd p = step->head(n);
    const Eigen::VectorXd lambda_new = step->tail(m);
    const double rho = 10.0 * (1.0 + (m > 0 ? lambda_new.lpNorm<Eigen::Infinity>() : 0.0));
    const double phi0 = prog.objective(zs) + rho * c.lpNorm<1>();
    const double slope = grad.dot(p) - rho * c.lpNorm<1>();

    double alpha = 1.0;
    bool accepted = false;
    double phi = phi0;
    for (int halvings = 0; halvings <= 30; ++halvings) {
      const Eigen::VectorXd trial = z + alpha * p;
      phi = merit(trial, rho);
      const bool armijo = slope < 0.0 ? phi <= phi0 + 1e-4 * alpha * slope : phi < phi0;
      if (std::isfinite(phi) && armijo) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    diag.history.push_back({phi0, phi, accepted ? alpha : 0.0, rho, residual, shift});
    diag.regularization = std::max(diag.regularization, shift);
    if (!accepted) break;

    z += alpha * p;
    lambda += alpha * (lambda_new - lambda);
    ++diag.iterations;
  }

  Solution s = detail::make_solution(nlp, detail::expand(nlp, free_vars, z));
  diag.kkt_residual_inf = last_residual;
  diag.max_defect = s.diagnostics.max_defect;
  diag.scheme = nlp.scheme;
  s.diagnostics = std::move(diag);
  return s;
}

/// Routes a transcribed program: KKT solve when it is linear-quadratic,
/// SQP from initial_guess() otherwise.
inline Solution solve(const DiscreteNLP& nlp, const SqpOptions& opts = {}) {
  std::optional<QPData> qp;
  try {
    qp = assemble_qp(nlp);
  } catch (const NotLinearQuadratic&) {
  }
  if (qp) return solve_qp(nlp, opts.tol);
  Solution s = solve_sqp(nlp, initial_guess(nlp), opts);
  s.diagnostics.problem_class = ProblemKind::Nonlinear;
  return s;
}

/// Transcribes and solves, routing on classify().
inline Solution solve(const OCProblem& problem, Scheme scheme, const Grid& grid, const SqpOptions& opts = {}) {
  const DiscreteNLP nlp = transcribe(problem, scheme, grid);
  if (classify(problem).kind == ProblemKind::LinearQuadratic) return solve_qp(nlp, opts.tol);
  Solution s = solve_sqp(nlp, initial_guess(nlp), opts);
  s.diagnostics.problem_class = ProblemKind::Nonlinear;
  return s;
}

}  // namespace optctl
