#pragma once

/**
 * @file
 * @brief Acausal electrical component models reduced to state-space form.
 *
 * Components declare equations over pin potentials (`<owner>.<pin>.v`) and
 * pin flows (`<owner>.<pin>.i`, positive into the component). connect()
 * equates potentials and balances flows. reduce_to_state_space() eliminates
 * every algebraic unknown and returns dx/dt = f(x, u) for the capacitor
 * voltages, with chosen source parameters re-designated as controls.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "optctl/errors.hpp"
#include "optctl/expr.hpp"

namespace optctl::circuit {

struct Pin {
  std::string owner;
  std::string name;

  std::string potential() const { return owner + "." + name + ".v"; }
  std::string flow() const { return owner + "." + name + ".i"; }
  std::string label() const { return owner + "." + name; }

  friend auto operator<=>(const Pin&, const Pin&) = default;
};

enum class ComponentKind { Resistor, Capacitor, ConstantVoltage, Ground };

inline std::optional<ComponentKind> parse_component_kind(std::string_view s) {
  if (s == "Resistor") return ComponentKind::Resistor;
  if (s == "Capacitor") return ComponentKind::Capacitor;
  if (s == "ConstantVoltage") return ComponentKind::ConstantVoltage;
  if (s == "Ground") return ComponentKind::Ground;
  return std::nullopt;
}

/// Name of the derivative marker for `var`.
inline std::string derivative_name(const std::string& var) { return "der(" + var + ")"; }

struct Component {
  std::string name;
  ComponentKind kind;
  /// R (ohm), C (farad) or V (volt); unused for Ground.
  double value = 0.0;

  static Component resistor(std::string name, double R) { return {std::move(name), ComponentKind::Resistor, R}; }
  static Component capacitor(std::string name, double C) { return {std::move(name), ComponentKind::Capacitor, C}; }
  static Component constant_voltage(std::string name, double V) {
    return {std::move(name), ComponentKind::ConstantVoltage, V};
  }
  static Component ground(std::string name) { return {std::move(name), ComponentKind::Ground, 0.0}; }

  std::vector<Pin> pins() const {
    if (kind == ComponentKind::Ground) return {Pin{name, "g"}};
    return {Pin{name, "p"}, Pin{name, "n"}};
  }

  std::optional<Pin> pin(std::string_view pin_name) const {
    for (const auto& p : pins()) {
      if (p.name == pin_name) return p;
    }
    return std::nullopt;
  }

  /// Symbolic parameter that can be re-designated as a control input.
  std::optional<std::string> parameter() const {
    if (kind == ComponentKind::ConstantVoltage) return name + ".V";
    return std::nullopt;
  }

  /// Local equations, each meaning expr = 0.
  std::vector<Expr> equations() const {
    auto var = [](const std::string& s) { return Expr::variable(s); };
    if (kind == ComponentKind::Ground) return {var(Pin{name, "g"}.potential())};
    const Pin p{name, "p"};
    const Pin n{name, "n"};
    const Expr vp = var(p.potential());
    const Expr vn = var(n.potential());
    const Expr ip = var(p.flow());
    const Expr in = var(n.flow());
    switch (kind) {
      case ComponentKind::Resistor: {
        const Expr i = var(name + ".i");
        return {vp - vn - value * i, ip - i, in + i};
      }
      case ComponentKind::Capacitor: {
        const Expr v = var(name + ".v");
        return {v - (vp - vn), value * var(derivative_name(name + ".v")) - ip, ip + in};
      }
      case ComponentKind::ConstantVoltage: {
        const Expr i = var(name + ".i");
        return {vp - vn - var(*parameter()), ip - i, in + i};
      }
      case ComponentKind::Ground: break;
    }
    return {};
  }
};

/// Kirchhoff equations for one connection: v_1 - v_j = 0 for j = 2..k and
/// sum of flows = 0.
inline std::vector<Expr> connect(const std::vector<Pin>& pins) {
  if (pins.size() < 2) throw CircuitError(CircuitError::Kind::InvalidComponent, "connect needs at least two pins");
  std::set<Pin> seen;
  for (const auto& p : pins) {
    if (!seen.insert(p).second) throw CircuitError(CircuitError::Kind::DuplicatePin, "pin " + p.label() + " repeated in connect");
  }
  std::vector<Expr> out;
  const Expr v1 = Expr::variable(pins.front().potential());
  for (std::size_t j = 1; j < pins.size(); ++j) out.push_back(v1 - Expr::variable(pins[j].potential()));
  Expr flow = Expr::variable(pins.front().flow());
  for (std::size_t j = 1; j < pins.size(); ++j) flow = flow + Expr::variable(pins[j].flow());
  out.push_back(flow);
  return out;
}

/// Components plus connection sets. Connect statements that share a pin are
/// merged into one set, so chaining two-pin connects through a common pin
/// is the same as one multi-pin connect.
class ComponentSystem {
 public:
  void add(Component c) {
    if (c.name.empty()) throw CircuitError(CircuitError::Kind::InvalidComponent, "component needs a name");
    if (find(c.name) != nullptr) {
      throw CircuitError(CircuitError::Kind::InvalidComponent, "duplicate component '" + c.name + "'");
    }
    if (c.kind != ComponentKind::Ground && !(std::isfinite(c.value))) {
      throw CircuitError(CircuitError::Kind::InvalidComponent, "component '" + c.name + "' needs a finite value");
    }
    if ((c.kind == ComponentKind::Resistor || c.kind == ComponentKind::Capacitor) && c.value == 0.0) {
      throw CircuitError(CircuitError::Kind::InvalidComponent, "component '" + c.name + "' value must be nonzero");
    }
    components_.push_back(std::move(c));
  }

  const Component* find(std::string_view name) const {
    for (const auto& c : components_) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  /// Resolves "<component>.<pin>".
  Pin pin(std::string_view ref) const {
    const auto dot = ref.rfind('.');
    if (dot == std::string_view::npos) {
      throw CircuitError(CircuitError::Kind::UnknownPin, "pin reference '" + std::string(ref) + "' needs <component>.<pin>");
    }
    const Component* c = find(ref.substr(0, dot));
    if (c == nullptr) {
      throw CircuitError(CircuitError::Kind::UnknownComponent, "unknown component in '" + std::string(ref) + "'");
    }
    const auto p = c->pin(ref.substr(dot + 1));
    if (!p) throw CircuitError(CircuitError::Kind::UnknownPin, "unknown pin '" + std::string(ref) + "'");
    return *p;
  }

  void add_connection(const std::vector<Pin>& pins) {
    connect(pins);  // validates
    for (const auto& p : pins) {
      const Component* c = find(p.owner);
      if (c == nullptr || !c->pin(p.name)) throw CircuitError(CircuitError::Kind::UnknownPin, "unknown pin " + p.label());
    }
    auto append_unique = [](std::vector<Pin>& into, const std::vector<Pin>& from) {
      for (const auto& q : from) {
        if (std::find(into.begin(), into.end(), q) == into.end()) into.push_back(q);
      }
    };
    std::vector<std::vector<Pin>> next;
    std::optional<std::size_t> slot;
    for (const auto& set : connections_) {
      const bool overlaps = std::any_of(set.begin(), set.end(), [&](const Pin& q) {
        return std::find(pins.begin(), pins.end(), q) != pins.end();
      });
      if (!overlaps) {
        next.push_back(set);
        continue;
      }
      if (!slot) {
        slot = next.size();
        next.emplace_back();
      }
      append_unique(next[*slot], set);
    }
    if (!slot) {
      slot = next.size();
      next.emplace_back();
    }
    append_unique(next[*slot], pins);
    connections_ = std::move(next);
  }

  void add_connection(const std::vector<std::string>& refs) {
    std::vector<Pin> pins;
    for (const auto& r : refs) pins.push_back(pin(r));
    add_connection(pins);
  }

  const std::vector<Component>& components() const { return components_; }
  const std::vector<std::vector<Pin>>& connections() const { return connections_; }

 private:
  std::vector<Component> components_;
  std::vector<std::vector<Pin>> connections_;
};

struct FlatSystem {
  /// Each entry means expr = 0.
  std::vector<Expr> equations;
  /// Every non-parameter variable, excluding derivative markers, in order of
  /// first appearance.
  std::vector<std::string> unknowns;
  /// Variables that appear under a derivative marker.
  std::vector<std::string> derivative_vars;
  /// Re-designatable parameters and their nominal values (e.g. source.V).
  std::map<std::string, double> parameters;
};

inline FlatSystem flatten(const ComponentSystem& sys) {
  const auto& comps = sys.components();
  if (comps.empty()) throw CircuitError(CircuitError::Kind::NotConnected, "empty circuit");

  // Connectivity over components.
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < comps.size(); ++i) index[comps[i].name] = i;
  std::vector<std::size_t> parent(comps.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (const auto& set : sys.connections()) {
    const std::size_t first = root(index.at(set.front().owner));
    for (const auto& p : set) parent[root(index.at(p.owner))] = first;
  }
  for (std::size_t i = 1; i < comps.size(); ++i) {
    if (root(i) != root(0)) {
      throw CircuitError(CircuitError::Kind::NotConnected,
                         "circuit is not connected: '" + comps[i].name + "' is isolated from '" + comps[0].name + "'");
    }
  }

  FlatSystem flat;
  std::set<std::string> parameter_names;
  for (const auto& c : comps) {
    if (const auto p = c.parameter()) {
      flat.parameters[*p] = c.value;
      parameter_names.insert(*p);
    }
    for (auto& e : c.equations()) flat.equations.push_back(std::move(e));
  }
  std::set<Pin> connected;
  for (const auto& set : sys.connections()) {
    for (auto& e : connect(set)) flat.equations.push_back(std::move(e));
    connected.insert(set.begin(), set.end());
  }

  std::set<std::string> seen;
  auto visit = [&](const Expr& e) {
    std::vector<std::string> ordered;
    // Left-to-right preorder for a stable first-appearance order.
    std::function<void(const Expr&)> walk = [&](const Expr& x) {
      if (x.is_variable()) {
        ordered.push_back(x.name());
      } else if (const auto* u = x.as_unary()) {
        walk(u->child);
      } else if (const auto* b = x.as_binary()) {
        walk(b->lhs);
        walk(b->rhs);
      }
    };
    walk(e);
    for (const auto& v : ordered) {
      if (!seen.insert(v).second || parameter_names.contains(v)) continue;
      if (v.starts_with("der(")) {
        flat.derivative_vars.push_back(v.substr(4, v.size() - 5));
      } else {
        flat.unknowns.push_back(v);
      }
    }
  };
  for (const auto& e : flat.equations) visit(e);

  // A pin left out of every connection carries no current.
  for (const auto& c : comps) {
    for (const auto& p : c.pins()) {
      if (!connected.contains(p) && seen.contains(p.flow())) flat.equations.push_back(Expr::variable(p.flow()));
    }
  }
  return flat;
}

struct StateSpace {
  std::vector<std::string> states;
  std::vector<std::string> controls;
  /// dx_j/dt as an expression of states and controls.
  std::vector<Expr> dynamics;
};

/// Eliminates the algebraic unknowns by Gaussian elimination with partial
/// pivoting over numeric coefficients and symbolic right-hand sides.
/// Parameters not listed in `controls` are replaced by their values.
inline StateSpace reduce_to_state_space(const ComponentSystem& sys, const std::vector<std::string>& controls) {
  const FlatSystem flat = flatten(sys);
  if (flat.derivative_vars.empty()) {
    throw CircuitError(CircuitError::Kind::StructurallySingular, "circuit has no differentiated variables");
  }
  Replacements fixed;
  for (const auto& [name, value] : flat.parameters) {
    if (std::find(controls.begin(), controls.end(), name) == controls.end()) fixed.emplace(name, Expr::constant(value));
  }
  for (const auto& u : controls) {
    if (!flat.parameters.contains(u)) {
      throw CircuitError(CircuitError::Kind::InvalidComponent, "'" + u + "' is not a designatable parameter");
    }
  }

  // Algebraic unknowns: everything but the states, plus the derivatives.
  std::vector<std::string> unknowns;
  for (const auto& v : flat.unknowns) {
    if (std::find(flat.derivative_vars.begin(), flat.derivative_vars.end(), v) == flat.derivative_vars.end()) {
      unknowns.push_back(v);
    }
  }
  for (const auto& s : flat.derivative_vars) unknowns.push_back(derivative_name(s));

  const std::size_t n = unknowns.size();
  if (flat.equations.size() != n) {
    throw CircuitError(CircuitError::Kind::StructurallySingular,
                       std::to_string(flat.equations.size()) + " equations for " + std::to_string(n) + " unknowns");
  }

  Eigen::MatrixXd M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<Expr> rhs(n);
  for (std::size_t r = 0; r < n; ++r) {
    const Expr eq = substitute(flat.equations[r], fixed);
    const auto form = linearize(eq, unknowns);
    if (!form) {
      throw CircuitError(CircuitError::Kind::NonlinearAlgebraicPart, "equation " + std::to_string(r + 1) + " is not affine");
    }
    for (std::size_t c = 0; c < n; ++c) M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = form->coefficients[c];
    rhs[r] = -form->constant;
  }

  const double scale = M.cwiseAbs().maxCoeff();
  for (std::size_t k = 0; k < n; ++k) {
    const auto K = static_cast<Eigen::Index>(k);
    Eigen::Index p = 0;
    const double pivot = M.col(K).tail(static_cast<Eigen::Index>(n - k)).cwiseAbs().maxCoeff(&p);
    p += K;
    if (!(pivot > 1e-12 * scale)) {
      throw CircuitError(CircuitError::Kind::StructurallySingular,
                         "no pivot for '" + unknowns[k] + "': redundant or missing equations");
    }
    if (p != K) {
      M.row(K).swap(M.row(p));
      std::swap(rhs[k], rhs[static_cast<std::size_t>(p)]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const auto R = static_cast<Eigen::Index>(r);
      if (M(R, K) == 0.0) continue;
      const double f = M(R, K) / M(K, K);
      M.row(R) -= f * M.row(K);
      M(R, K) = 0.0;
      rhs[r] = rhs[r] - f * rhs[k];
    }
  }

  std::vector<Expr> solution(n);
  for (std::size_t k = n; k-- > 0;) {
    const auto K = static_cast<Eigen::Index>(k);
    Expr acc = rhs[k];
    for (std::size_t c = k + 1; c < n; ++c) {
      const double a = M(K, static_cast<Eigen::Index>(c));
      if (a != 0.0) acc = acc - a * solution[c];
    }
    solution[k] = acc / M(K, K);
  }

  StateSpace out;
  out.states = flat.derivative_vars;
  out.controls = controls;
  for (const auto& s : flat.derivative_vars) {
    const auto it = std::find(unknowns.begin(), unknowns.end(), derivative_name(s));
    out.dynamics.push_back(solution[static_cast<std::size_t>(it - unknowns.begin())]);
  }
  return out;
}

}  // namespace optctl::circuit
