#pragma once

/**
 * @file
 * @brief Line-oriented text dump of a DiscreteNLP, and its reader.
 *
 *   nlpmodel 1
 *   scheme <forward_euler|backward_euler|trapezoidal>
 *   grid <t0> <tf> <N>
 *   var <name>            (declaration order)
 *   min <expr>
 *   st <expr>             (<expr> = 0)
 *   fix <name> <value>
 *   end
 *
 * Reals are written with 17 significant digits so a dump reads back to
 * bit-identical values.
 */

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "optctl/errors.hpp"
#include "optctl/expr.hpp"
#include "optctl/transcribe.hpp"

namespace optctl {

inline std::string export_model_text(const DiscreteNLP& nlp) {
  std::string out;
  out += "nlpmodel 1\n";
  out += "scheme ";
  out += to_string(nlp.scheme);
  out += '\n';
  out += "grid " + detail::format_real(nlp.grid.t0) + " " + detail::format_real(nlp.grid.tf) + " " +
         std::to_string(nlp.grid.N) + "\n";
  for (const auto& v : nlp.variables) out += "var " + v + "\n";
  out += "min " + to_string(nlp.objective) + "\n";
  for (const auto& c : nlp.constraints) out += "st " + to_string(c) + "\n";
  for (const auto& pin : nlp.pins) out += "fix " + pin.variable + " " + detail::format_real(pin.value) + "\n";
  out += "end\n";
  return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_real(std::string_view s, std::size_t line) {
  const std::string text(trim(s));
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) throw ParseError("malformed number '" + text + "'", 0, line);
  return v;
}

inline std::size_t parse_count(std::string_view s, std::size_t line) {
  s = trim(s);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("malformed integer '" + std::string(s) + "'", 0, line);
  }
  return v;
}

/// Splits "x<j>_<i>" / "u<k>_<i>" into (prefix, 1-based index, node).
inline bool split_layout_name(const std::string& name, char& prefix, std::size_t& index, std::size_t& node) {
  if (name.size() < 4 || (name[0] != 'x' && name[0] != 'u')) return false;
  const auto us = name.find('_');
  if (us == std::string::npos || us < 2 || us + 1 >= name.size()) return false;
  const char* b = name.data();
  auto r1 = std::from_chars(b + 1, b + us, index);
  auto r2 = std::from_chars(b + us + 1, b + name.size(), node);
  if (r1.ec != std::errc() || r1.ptr != b + us || r2.ec != std::errc() || r2.ptr != b + name.size()) return false;
  prefix = name[0];
  return index >= 1;
}

}  // namespace detail

/// Reads a model dump back into a DiscreteNLP. Throws ParseError with the
/// offending line number.
inline DiscreteNLP parse_model_text(std::string_view text) {
  DiscreteNLP nlp;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  bool saw_header = false;
  bool saw_scheme = false;
  bool saw_grid = false;
  bool saw_min = false;
  bool saw_end = false;
  std::set<std::string> declared;

  auto expr_at = [&](std::string_view body) {
    try {
      return parse_expr(body);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), e.position(), line);
    }
  };

  while (std::getline(in, raw)) {
    ++line;
    const std::string_view l = detail::trim(raw);
    if (l.empty()) continue;
    if (saw_end) throw ParseError("content after 'end'", 0, line);
    const auto space = l.find(' ');
    const std::string_view key = l.substr(0, space);
    const std::string_view rest = space == std::string_view::npos ? std::string_view{} : detail::trim(l.substr(space));

    if (!saw_header) {
      if (key != "nlpmodel" || rest != "1") throw ParseError("expected 'nlpmodel 1' header", 0, line);
      saw_header = true;
    } else if (key == "scheme") {
      const auto s = parse_scheme(rest);
      if (!s) throw ParseError("unknown scheme '" + std::string(rest) + "'", 0, line);
      nlp.scheme = *s;
      saw_scheme = true;
    } else if (key == "grid") {
      std::istringstream fields{std::string(rest)};
      std::string a, b, c, extra;
      if (!(fields >> a >> b >> c) || (fields >> extra)) throw ParseError("grid expects <t0> <tf> <N>", 0, line);
      nlp.grid = Grid{detail::parse_real(a, line), detail::parse_real(b, line), detail::parse_count(c, line)};
      saw_grid = true;
    } else if (key == "var") {
      const std::string name(rest);
      if (name.empty() || name.find(' ') != std::string::npos) throw ParseError("var expects one name", 0, line);
      if (!declared.insert(name).second) throw ParseError("duplicate variable '" + name + "'", 0, line);
      nlp.variables.push_back(name);
    } else if (key == "min") {
      if (saw_min) throw ParseError("more than one 'min' line", 0, line);
      nlp.objective = expr_at(rest);
      saw_min = true;
    } else if (key == "st") {
      nlp.constraints.push_back(expr_at(rest));
    } else if (key == "fix") {
      const auto sp = rest.find(' ');
      if (sp == std::string_view::npos) throw ParseError("fix expects <name> <value>", 0, line);
      const std::string name(rest.substr(0, sp));
      if (!declared.contains(name)) throw ParseError("fix of undeclared variable '" + name + "'", 0, line);
      nlp.pins.push_back({name, detail::parse_real(rest.substr(sp + 1), line)});
    } else if (key == "end") {
      saw_end = true;
    } else {
      throw ParseError("unknown keyword '" + std::string(key) + "'", 0, line);
    }
  }
  if (!saw_header) throw ParseError("empty model text", 0, line);
  if (!saw_scheme || !saw_grid || !saw_min || !saw_end) {
    throw ParseError("model text needs scheme, grid, min and end lines", 0, line);
  }
  if (nlp.grid.N < 2 || !(nlp.grid.tf > nlp.grid.t0)) throw ParseError("invalid grid", 0, line);

  // Recover the state/control layout from the variable names. Programs
  // whose names do not follow it are kept as generic NLPs (no layout).
  std::size_t nx = 0;
  std::size_t nu = 0;
  bool layout = !nlp.variables.empty();
  for (const auto& v : nlp.variables) {
    char prefix = 0;
    std::size_t index = 0;
    std::size_t node = 0;
    if (!detail::split_layout_name(v, prefix, index, node)) {
      layout = false;
      break;
    }
    if (prefix == 'x') {
      nx = std::max(nx, index);
    } else {
      nu = std::max(nu, index);
    }
  }
  if (layout) {
    nlp.num_states = nx;
    nlp.num_controls = nu;
    std::vector<std::string> expected;
    for (std::size_t j = 0; j < nx; ++j) {
      for (std::size_t i = 0; i <= nlp.grid.N; ++i) expected.push_back(state_var(j, i));
    }
    for (std::size_t k = 0; k < nu; ++k) {
      for (const auto i : nlp.control_nodes()) expected.push_back(control_var(k, i));
    }
    if (expected != nlp.variables) {
      throw ParseError("variable declarations do not match the " + std::string(to_string(nlp.scheme)) + " layout", 0,
                       line);
    }
  }

  auto check_declared = [&](const Expr& e) {
    for (const auto& v : free_variables(e)) {
      if (!declared.contains(v)) throw ParseError("undeclared variable '" + v + "'", 0, line);
    }
  };
  check_declared(nlp.objective);
  for (const auto& c : nlp.constraints) check_declared(c);
  return nlp;
}

}  // namespace optctl
