#pragma once

/**
 * @file
 * @brief Reader for the sectioned problem-file format used by the CLI.
 *
 *   [variables]   states = [x1, x2]      controls = [u]
 *   [dynamics]    x1 = "x2"              (one entry per state)
 *   [circuit]     component/connect statements, controls = [source.V]
 *   [parameters]  name = value           (optional)
 *   [cost]        lagrange = "<expr>"    mayer = "<expr>" (optional)
 *   [boundary]    x_initial = [1.0, free]   x_final = [...]
 *   [horizon]     t0, tf, N, scheme
 *
 * Exactly one of [dynamics] or [circuit] must be present; [circuit]
 * replaces [variables] too.
 */

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "optctl/circuit.hpp"
#include "optctl/errors.hpp"
#include "optctl/expr.hpp"
#include "optctl/model_text.hpp"
#include "optctl/ocp.hpp"
#include "optctl/transcribe.hpp"

namespace optctl {

struct ProblemFile {
  std::vector<std::string> states;
  std::vector<std::string> controls;
  /// Right-hand sides in `states` order.
  std::vector<Expr> dynamics;
  std::optional<circuit::ComponentSystem> circuit;
  std::map<std::string, double> parameters;
  Expr lagrange;
  std::optional<Expr> mayer;
  std::vector<std::optional<double>> x_initial;
  std::vector<std::optional<double>> x_final;
  double t0 = 0.0;
  double tf = 1.0;
  std::size_t N = 100;
  Scheme scheme = kDefaultScheme;
};

namespace detail {

/// Drops a trailing '#' comment that is not inside quotes.
inline std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

inline std::string unquote(std::string_view v, std::size_t line) {
  v = trim(v);
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') {
    throw ParseError("expected a quoted value, got '" + std::string(v) + "'", 0, line);
  }
  return std::string(v.substr(1, v.size() - 2));
}

inline std::vector<std::string> parse_list(std::string_view v, std::size_t line) {
  v = trim(v);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    throw ParseError("expected a bracketed list, got '" + std::string(v) + "'", 0, line);
  }
  v = trim(v.substr(1, v.size() - 2));
  std::vector<std::string> out;
  if (v.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = v.find(',', start);
    std::string item(trim(v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (item.size() >= 2 && item.front() == '"' && item.back() == '"') item = item.substr(1, item.size() - 2);
    if (item.empty()) throw ParseError("empty list entry", 0, line);
    out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::vector<std::optional<double>> parse_boundary(std::string_view v, std::size_t line) {
  std::vector<std::optional<double>> out;
  for (const auto& item : parse_list(v, line)) {
    if (item == "free") {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(parse_real(item, line));
    }
  }
  return out;
}

inline Expr parse_expr_at(const std::string& text, std::size_t line) {
  try {
    return parse_expr(text);
  } catch (const ParseError& e) {
    throw ParseError(std::string("malformed expression: ") + e.what(), e.position(), line);
  }
}

inline double parse_number_value(std::string_view v, std::size_t line) {
  v = trim(v);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return parse_real(v, line);
}

/// "component <name> <Kind> [K=V ...]"
inline circuit::Component parse_component(std::string_view rest, std::size_t line) {
  std::istringstream in{std::string(rest)};
  std::string name;
  std::string kind_name;
  if (!(in >> name >> kind_name)) throw ParseError("component expects <name> <Kind> [param=value]", 0, line);
  const auto kind = circuit::parse_component_kind(kind_name);
  if (!kind) throw ParseError("unknown component kind '" + kind_name + "'", 0, line);
  std::map<std::string, double> params;
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ParseError("expected <param>=<value>, got '" + tok + "'", 0, line);
    params[tok.substr(0, eq)] = parse_real(std::string_view(tok).substr(eq + 1), line);
  }
  std::string expected;
  switch (*kind) {
    case circuit::ComponentKind::Resistor: expected = "R"; break;
    case circuit::ComponentKind::Capacitor: expected = "C"; break;
    case circuit::ComponentKind::ConstantVoltage: expected = "V"; break;
    case circuit::ComponentKind::Ground: break;
  }
  for (const auto& [key, value] : params) {
    if (key != expected) throw ParseError("unknown parameter '" + key + "' for " + kind_name, 0, line);
  }
  if (!expected.empty() && !params.contains(expected)) {
    throw ParseError(kind_name + " needs " + expected + "=<value>", 0, line);
  }
  return circuit::Component{name, *kind, expected.empty() ? 0.0 : params.at(expected)};
}

}  // namespace detail

/// Parses and structurally validates a problem file. Syntax errors carry the
/// 1-based line number.
inline ProblemFile parse_problem_file(std::string_view text) {
  static const std::set<std::string, std::less<>> kSections{"variables", "dynamics", "circuit", "parameters",
                                                             "cost",      "boundary", "horizon"};
  ProblemFile pf;
  std::set<std::string, std::less<>> seen_sections;
  std::string section;
  std::vector<std::pair<std::string, std::pair<Expr, std::size_t>>> dynamics;
  std::optional<std::vector<std::string>> circuit_controls;
  std::set<std::string> seen_keys;
  bool have_states = false;
  bool have_controls = false;
  bool have_lagrange = false;
  bool have_t0 = false;
  bool have_tf = false;
  bool have_initial = false;
  bool have_final = false;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view l = detail::trim(detail::strip_comment(raw));
    if (l.empty()) continue;

    if (l.front() == '[') {
      if (l.back() != ']') throw ParseError("malformed section header", 0, line);
      section = std::string(detail::trim(l.substr(1, l.size() - 2)));
      if (!kSections.contains(section)) throw ParseError("unknown section [" + section + "]", 0, line);
      if (!seen_sections.insert(section).second) throw ParseError("duplicate section [" + section + "]", 0, line);
      if (section == "circuit") pf.circuit.emplace();
      continue;
    }
    if (section.empty()) throw ParseError("content before the first section", 0, line);

    if (section == "circuit") {
      if (l.starts_with("component ")) {
        try {
          pf.circuit->add(detail::parse_component(l.substr(10), line));
        } catch (const CircuitError& e) {
          throw ParseError(e.what(), 0, line);
        }
        continue;
      }
      if (l.starts_with("connect ")) {
        std::istringstream refs{std::string(l.substr(8))};
        std::vector<std::string> pins;
        std::string r;
        while (refs >> r) pins.push_back(r);
        try {
          pf.circuit->add_connection(pins);
        } catch (const CircuitError& e) {
          throw ParseError(e.what(), 0, line);
        }
        continue;
      }
    }

    const auto eq = l.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", 0, line);
    const std::string key(detail::trim(l.substr(0, eq)));
    const std::string_view value = detail::trim(l.substr(eq + 1));
    if (key.empty()) throw ParseError("missing key", 0, line);
    if (!seen_keys.insert(section + "." + key).second) throw ParseError("duplicate key '" + key + "'", 0, line);

    if (section == "variables") {
      if (key == "states") {
        pf.states = detail::parse_list(value, line);
        have_states = true;
      } else if (key == "controls") {
        pf.controls = detail::parse_list(value, line);
        have_controls = true;
      } else {
        throw ParseError("unknown key '" + key + "' in [variables]", 0, line);
      }
    } else if (section == "dynamics") {
      dynamics.emplace_back(key, std::make_pair(detail::parse_expr_at(detail::unquote(value, line), line), line));
    } else if (section == "circuit") {
      if (key != "controls") throw ParseError("unknown key '" + key + "' in [circuit]", 0, line);
      circuit_controls = detail::parse_list(value, line);
    } else if (section == "parameters") {
      pf.parameters[key] = detail::parse_number_value(value, line);
    } else if (section == "cost") {
      if (key == "lagrange") {
        pf.lagrange = detail::parse_expr_at(detail::unquote(value, line), line);
        have_lagrange = true;
      } else if (key == "mayer") {
        pf.mayer = detail::parse_expr_at(detail::unquote(value, line), line);
      } else {
        throw ParseError("unknown key '" + key + "' in [cost]", 0, line);
      }
    } else if (section == "boundary") {
      if (key == "x_initial") {
        pf.x_initial = detail::parse_boundary(value, line);
        have_initial = true;
      } else if (key == "x_final") {
        pf.x_final = detail::parse_boundary(value, line);
        have_final = true;
      } else {
        throw ParseError("unknown key '" + key + "' in [boundary]", 0, line);
      }
    } else if (section == "horizon") {
      if (key == "t0") {
        pf.t0 = detail::parse_number_value(value, line);
        have_t0 = true;
      } else if (key == "tf") {
        pf.tf = detail::parse_number_value(value, line);
        have_tf = true;
      } else if (key == "N") {
        pf.N = detail::parse_count(detail::trim(value), line);
      } else if (key == "scheme") {
        const std::string name = value.front() == '"' ? detail::unquote(value, line) : std::string(value);
        const auto s = parse_scheme(name);
        if (!s) throw ParseError("unknown scheme '" + name + "'", 0, line);
        pf.scheme = *s;
      } else {
        throw ParseError("unknown key '" + key + "' in [horizon]", 0, line);
      }
    }
  }

  if (line == 0 || seen_sections.empty()) throw ParseError("empty problem file", 0, line);
  const bool has_dynamics = seen_sections.contains("dynamics");
  const bool has_circuit = seen_sections.contains("circuit");
  if (has_dynamics && has_circuit) throw ParseError("file has both [dynamics] and [circuit]", 0, 0);
  if (!has_dynamics && !has_circuit) throw ParseError("missing section [dynamics] or [circuit]", 0, 0);
  for (const char* required : {"cost", "boundary", "horizon"}) {
    if (!seen_sections.contains(required)) throw ParseError(std::string("missing section [") + required + "]", 0, 0);
  }
  if (has_dynamics && !seen_sections.contains("variables")) throw ParseError("missing section [variables]", 0, 0);
  if (has_circuit && seen_sections.contains("variables")) {
    throw ParseError("[variables] is derived from [circuit]; remove it", 0, 0);
  }
  if (!have_lagrange) throw ParseError("missing key 'lagrange' in [cost]", 0, 0);
  if (!have_initial || !have_final) throw ParseError("missing x_initial or x_final in [boundary]", 0, 0);
  if (!have_t0 || !have_tf) throw ParseError("missing t0 or tf in [horizon]", 0, 0);

  if (has_dynamics) {
    if (!have_states || !have_controls) throw ParseError("[variables] needs states and controls", 0, 0);
    for (const auto& s : pf.states) {
      const auto it = std::find_if(dynamics.begin(), dynamics.end(), [&](const auto& d) { return d.first == s; });
      if (it == dynamics.end()) throw ParseError("no dynamics for state '" + s + "'", 0, 0);
      pf.dynamics.push_back(it->second.first);
    }
    for (const auto& [name, body] : dynamics) {
      if (std::find(pf.states.begin(), pf.states.end(), name) == pf.states.end()) {
        throw ParseError("dynamics for undeclared state '" + name + "'", 0, body.second);
      }
    }
  } else {
    if (!circuit_controls) throw ParseError("[circuit] needs controls = [...]", 0, 0);
    try {
      const auto reduced = circuit::reduce_to_state_space(*pf.circuit, *circuit_controls);
      pf.states = reduced.states;
      pf.controls = reduced.controls;
      pf.dynamics = reduced.dynamics;
    } catch (const CircuitError& e) {
      throw ProblemError(std::string("circuit: ") + e.what());
    }
  }
  return pf;
}

inline OCProblem to_problem(const ProblemFile& pf) {
  ProblemInputs in;
  in.states = pf.states;
  in.controls = pf.controls;
  in.dynamics = pf.dynamics;
  in.lagrange = pf.lagrange;
  in.mayer = pf.mayer;
  in.parameters = pf.parameters;
  in.t0 = pf.t0;
  in.tf = pf.tf;
  in.x_initial = pf.x_initial;
  in.x_final = pf.x_final;
  return build_problem(in);
}

}  // namespace optctl
