#pragma once

// Shared fixtures and independent oracles for the test suite.

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "optctl/cli.hpp"
#include "optctl/optctl.hpp"

namespace testing_support {

using namespace optctl;

inline std::filesystem::path problems_dir() { return OPTCTL_PROBLEMS_DIR; }
inline std::filesystem::path data_dir() { return OPTCTL_TEST_DATA_DIR; }

inline std::vector<std::filesystem::path> corpus() {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(problems_dir())) {
    if (entry.path().extension() == ".ocp") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("optctl_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Double integrator, minimum control energy, x(0) = [1, 1], x(2) = [0, 0].
inline ProblemInputs double_integrator_inputs() {
  ProblemInputs in;
  in.states = {"x1", "x2"};
  in.controls = {"u"};
  in.dynamics = {parse_expr("x2"), parse_expr("u")};
  in.lagrange = parse_expr("0.5*u^2");
  in.t0 = 0.0;
  in.tf = 2.0;
  in.x_initial = {1.0, 1.0};
  in.x_final = {0.0, 0.0};
  return in;
}

inline OCProblem double_integrator() { return build_problem(double_integrator_inputs()); }

/// Closed-form optimal x1 for the double integrator above.
inline double double_integrator_x1(double t) { return 0.5 * t * t * t - 1.75 * t * t + t + 1.0; }

/// Closed-form optimal capacitor voltage for x' = u - x, min 0.5 u^2,
/// x(0) = 1, x(1) = 3.
inline double rc_optimal_voltage(double t) {
  const double e = std::exp(1.0);
  const double s = (3.0 - 1.0 / e) / (1.0 / e - e);
  const double c = 1.0 + s;
  return c * std::exp(-t) - s * std::exp(t);
}

inline circuit::ComponentSystem rc_circuit(double R = 1.0, double C = 1.0, double V = 1.0) {
  circuit::ComponentSystem sys;
  sys.add(circuit::Component::resistor("resistor", R));
  sys.add(circuit::Component::capacitor("capacitor", C));
  sys.add(circuit::Component::constant_voltage("source", V));
  sys.add(circuit::Component::ground("ground"));
  sys.add_connection(std::vector<std::string>{"source.p", "resistor.p"});
  sys.add_connection(std::vector<std::string>{"resistor.n", "capacitor.p"});
  sys.add_connection(std::vector<std::string>{"capacitor.n", "source.n", "ground.g"});
  return sys;
}

/// Mean squared error of column `col` of `states` against f(t_i).
template <class F>
double node_mse(const Solution& s, Eigen::Index col, F&& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i <= s.grid.N; ++i) {
    const double d = s.states(static_cast<Eigen::Index>(i), col) - f(s.grid.node(i));
    acc += d * d;
  }
  return acc / static_cast<double>(s.grid.num_nodes());
}

template <class F>
double node_max_error(const Solution& s, Eigen::Index col, F&& f) {
  double m = 0.0;
  for (std::size_t i = 0; i <= s.grid.N; ++i) {
    m = std::max(m, std::abs(s.states(static_cast<Eigen::Index>(i), col) - f(s.grid.node(i))));
  }
  return m;
}

/// Random expressions over a fixed variable set, built without folding.
/// Denominators are kept away from zero and non-integer powers get a
/// positive base, so every tree is finite on [-2, 2]^n.
class RandomExpr {
 public:
  explicit RandomExpr(unsigned seed, std::vector<std::string> vars = {"a", "b", "c"})
      : rng_(seed), vars_(std::move(vars)) {}

  Expr generate(int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
    switch (pick(rng_)) {
      case 0: return leaf_constant();
      case 1: return leaf_variable();
      case 2: return Expr::raw_binary(BinaryOp::Add, generate(depth - 1), generate(depth - 1));
      case 3: return Expr::raw_binary(BinaryOp::Sub, generate(depth - 1), generate(depth - 1));
      case 4: return Expr::raw_binary(BinaryOp::Mul, generate(depth - 1), generate(depth - 1));
      case 5: {
        // num / (k + d^2), k >= 0.5
        const Expr d = generate(depth - 1);
        const Expr den = Expr::raw_binary(BinaryOp::Add, Expr::constant(0.5 + unit(rng_)),
                                          Expr::raw_binary(BinaryOp::Pow, d, Expr::constant(2.0)));
        return Expr::raw_binary(BinaryOp::Div, generate(depth - 1), den);
      }
      case 6: {
        std::uniform_int_distribution<int> e(0, 3);
        const int k = e(rng_);
        if (k == 3) {
          // positive base for a fractional exponent
          const Expr base = Expr::raw_binary(BinaryOp::Add, Expr::constant(1.0),
                                             Expr::raw_binary(BinaryOp::Pow, generate(depth - 1), Expr::constant(2.0)));
          return Expr::raw_binary(BinaryOp::Pow, base, Expr::constant(1.5));
        }
        return Expr::raw_binary(BinaryOp::Pow, generate(depth - 1), Expr::constant(static_cast<double>(k + 1)));
      }
      case 7: return Expr::raw_unary(UnaryOp::Sin, generate(depth - 1));
      case 8: return Expr::raw_unary(UnaryOp::Cos, generate(depth - 1));
      default: {
        std::bernoulli_distribution neg(0.5);
        if (neg(rng_)) return Expr::raw_unary(UnaryOp::Neg, generate(depth - 1));
        // exp of a bounded argument keeps values moderate
        return Expr::raw_unary(UnaryOp::Exp, Expr::raw_unary(UnaryOp::Sin, generate(depth - 1)));
      }
    }
  }

  Bindings point(double lo = -2.0, double hi = 2.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Bindings b;
    for (const auto& v : vars_) b[v] = d(rng_);
    return b;
  }

  const std::vector<std::string>& variables() const { return vars_; }
  std::mt19937& engine() { return rng_; }

 private:
  Expr leaf_constant() {
    std::uniform_int_distribution<int> d(-4, 4);
    const int n = d(rng_);
    return Expr::constant(static_cast<double>(n) * 0.5);
  }
  Expr leaf_variable() {
    std::uniform_int_distribution<std::size_t> d(0, vars_.size() - 1);
    return Expr::variable(vars_[d(rng_)]);
  }

  std::mt19937 rng_;
  std::vector<std::string> vars_;
  std::uniform_real_distribution<double> unit{0.0, 1.0};
};

/// Central difference of e with respect to v at b.
inline double central_difference(const Expr& e, const std::string& v, Bindings b, double h = 1e-5) {
  const double x = b.at(v);
  b[v] = x + h;
  const double fp = evaluate(e, b);
  b[v] = x - h;
  const double fm = evaluate(e, b);
  return (fp - fm) / (2.0 * h);
}

}  // namespace testing_support
