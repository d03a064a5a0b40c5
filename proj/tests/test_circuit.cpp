#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace optctl;
using namespace optctl::circuit;
using testing_support::rc_circuit;

namespace {

// Coefficients of f = a*x + b*u + c for a one-state reduction.
struct Scalar {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

Scalar scalar_model(const StateSpace& ss) {
  std::vector<std::string> vars = ss.states;
  vars.insert(vars.end(), ss.controls.begin(), ss.controls.end());
  const auto f = linearize(ss.dynamics.at(0), vars);
  EXPECT_TRUE(f);
  EXPECT_TRUE(f->constant_is_numeric());
  Scalar s;
  s.a = f->coefficients[0];
  if (f->coefficients.size() > 1) s.b = f->coefficients[1];
  s.c = f->constant.value();
  return s;
}

}  // namespace

// ---- connect ----------------------------------------------------------------

TEST(Connect, TwoPins) {
  const Pin a{"r", "p"};
  const Pin b{"c", "n"};
  const auto eqs = connect({a, b});
  ASSERT_EQ(eqs.size(), 2u);
  EXPECT_EQ(eqs[0], parse_expr("r.p.v - c.n.v"));
  EXPECT_EQ(eqs[1], parse_expr("r.p.i + c.n.i"));
}

TEST(Connect, ThreePins) {
  const auto eqs = connect({{"a", "p"}, {"b", "p"}, {"c", "g"}});
  ASSERT_EQ(eqs.size(), 3u);
  EXPECT_EQ(eqs[1], parse_expr("a.p.v - c.g.v"));
}

TEST(Connect, DuplicatePin) {
  try {
    connect({{"a", "p"}, {"a", "p"}});
    FAIL();
  } catch (const CircuitError& e) {
    EXPECT_EQ(e.kind(), CircuitError::Kind::DuplicatePin);
  }
}

TEST(Connect, NeedsTwoPins) { EXPECT_THROW(connect({{"a", "p"}}), CircuitError); }

// ---- system construction ------------------------------------------------------

TEST(ComponentSystem, RejectsBadComponentsAndPins) {
  ComponentSystem sys;
  sys.add(Component::resistor("r", 1.0));
  EXPECT_THROW(sys.add(Component::capacitor("r", 1.0)), CircuitError);
  EXPECT_THROW(sys.add(Component::capacitor("c0", 0.0)), CircuitError);
  EXPECT_THROW(sys.add(Component::resistor("rn", std::nan(""))), CircuitError);
  EXPECT_THROW(sys.pin("r.q"), CircuitError);
  EXPECT_THROW(sys.pin("x.p"), CircuitError);
  EXPECT_THROW(sys.pin("rp"), CircuitError);
  EXPECT_EQ(sys.pin("r.n").flow(), "r.n.i");
}

TEST(ComponentSystem, SharedPinsMergeConnectionSets) {
  ComponentSystem sys = rc_circuit();
  EXPECT_EQ(sys.connections().size(), 3u);
  ComponentSystem pairwise;
  pairwise.add(Component::resistor("resistor", 1.0));
  pairwise.add(Component::capacitor("capacitor", 1.0));
  pairwise.add(Component::constant_voltage("source", 1.0));
  pairwise.add(Component::ground("ground"));
  pairwise.add_connection(std::vector<std::string>{"source.p", "resistor.p"});
  pairwise.add_connection(std::vector<std::string>{"resistor.n", "capacitor.p"});
  pairwise.add_connection(std::vector<std::string>{"capacitor.n", "source.n"});
  pairwise.add_connection(std::vector<std::string>{"capacitor.n", "ground.g"});
  ASSERT_EQ(pairwise.connections().size(), 3u);
  EXPECT_EQ(pairwise.connections()[2].size(), 3u);
}

// ---- flatten ----------------------------------------------------------------

TEST(Flatten, RcSystemIsSquare) {
  const FlatSystem flat = flatten(rc_circuit());
  // resistor 3 + capacitor 3 + source 3 + ground 1 + connections (2 + 2 + 3)
  EXPECT_EQ(flat.equations.size(), 17u);
  // 7 pins x (v, i) = 14, resistor.i, capacitor.v, source.i
  EXPECT_EQ(flat.unknowns.size(), 17u);
  EXPECT_EQ(flat.derivative_vars, std::vector<std::string>{"capacitor.v"});
  EXPECT_EQ(flat.parameters.at("source.V"), 1.0);
  EXPECT_EQ(std::count(flat.unknowns.begin(), flat.unknowns.end(), "source.V"), 0);
}

TEST(Flatten, LoneGround) {
  ComponentSystem sys;
  sys.add(Component::ground("g"));
  const FlatSystem flat = flatten(sys);
  EXPECT_EQ(flat.equations.size(), 1u);
  EXPECT_EQ(flat.unknowns, std::vector<std::string>{"g.g.v"});
}

TEST(Flatten, DisconnectedSystem) {
  ComponentSystem sys = rc_circuit();
  sys.add(Component::resistor("stray", 5.0));
  try {
    flatten(sys);
    FAIL();
  } catch (const CircuitError& e) {
    EXPECT_EQ(e.kind(), CircuitError::Kind::NotConnected);
  }
}

TEST(Property, FlowBalancePerConnectionSet) {
  const ComponentSystem sys = rc_circuit(2.0, 0.5, 3.0);
  const FlatSystem flat = flatten(sys);
  for (const auto& set : sys.connections()) {
    std::vector<std::string> flows;
    for (const auto& p : set) flows.push_back(p.flow());
    const Expr balance = connect(set).back();
    EXPECT_TRUE(std::find(flat.equations.begin(), flat.equations.end(), balance) != flat.equations.end());
    const auto vars = free_variables(balance);
    EXPECT_EQ(vars, std::set<std::string>(flows.begin(), flows.end()));
    const auto f = linearize(balance, flows);
    ASSERT_TRUE(f);
    for (const double c : f->coefficients) EXPECT_EQ(c, 1.0);
    EXPECT_EQ(f->constant, Expr::constant(0.0));
  }
}

// ---- reduction --------------------------------------------------------------

TEST(Reduce, UnitRcWithSourceAsControl) {
  const StateSpace ss = reduce_to_state_space(rc_circuit(), {"source.V"});
  EXPECT_EQ(ss.states, std::vector<std::string>{"capacitor.v"});
  EXPECT_EQ(ss.controls, std::vector<std::string>{"source.V"});
  const Scalar m = scalar_model(ss);
  EXPECT_NEAR(m.a, -1.0, 1e-15);
  EXPECT_NEAR(m.b, 1.0, 1e-15);
  EXPECT_EQ(m.c, 0.0);
  EXPECT_EQ(free_variables(ss.dynamics[0]), (std::set<std::string>{"capacitor.v", "source.V"}));
}

TEST(Reduce, TimeConstantSix) {
  const Scalar m = scalar_model(reduce_to_state_space(rc_circuit(2.0, 3.0), {"source.V"}));
  EXPECT_NEAR(m.a, -1.0 / 6.0, 1e-15);
  EXPECT_NEAR(m.b, 1.0 / 6.0, 1e-15);
}

TEST(Reduce, SimulationWithoutControls) {
  const StateSpace ss = reduce_to_state_space(rc_circuit(), {});
  EXPECT_TRUE(ss.controls.empty());
  EXPECT_EQ(free_variables(ss.dynamics[0]), std::set<std::string>{"capacitor.v"});
  const Scalar m = scalar_model(ss);
  EXPECT_NEAR(m.a, -1.0, 1e-15);
  EXPECT_NEAR(m.c, 1.0, 1e-15);
}

TEST(Reduce, UnknownControl) {
  EXPECT_THROW(reduce_to_state_space(rc_circuit(), {"resistor.R"}), CircuitError);
}

TEST(Reduce, NoCapacitor) {
  ComponentSystem sys;
  sys.add(Component::resistor("r", 1.0));
  sys.add(Component::constant_voltage("s", 1.0));
  sys.add(Component::ground("g"));
  sys.add_connection(std::vector<std::string>{"s.p", "r.p"});
  sys.add_connection(std::vector<std::string>{"r.n", "s.n", "g.g"});
  EXPECT_THROW(reduce_to_state_space(sys, {"s.V"}), CircuitError);
}

TEST(Reduce, FloatingCircuitIsStructurallySingular) {
  // No ground: potentials are only determined up to a constant.
  ComponentSystem sys;
  sys.add(Component::resistor("r", 1.0));
  sys.add(Component::capacitor("c", 1.0));
  sys.add(Component::constant_voltage("s", 1.0));
  sys.add_connection(std::vector<std::string>{"s.p", "r.p"});
  sys.add_connection(std::vector<std::string>{"r.n", "c.p"});
  sys.add_connection(std::vector<std::string>{"c.n", "s.n"});
  try {
    reduce_to_state_space(sys, {"s.V"});
    FAIL();
  } catch (const CircuitError& e) {
    EXPECT_EQ(e.kind(), CircuitError::Kind::StructurallySingular);
  }
}

TEST(Reduce, TwoCapacitorLadder) {
  // source - R1 - node a (C1 to ground) - R2 - node b (C2 to ground)
  ComponentSystem sys;
  sys.add(Component::constant_voltage("s", 1.0));
  sys.add(Component::resistor("r1", 1.0));
  sys.add(Component::resistor("r2", 2.0));
  sys.add(Component::capacitor("c1", 1.0));
  sys.add(Component::capacitor("c2", 0.5));
  sys.add(Component::ground("g"));
  sys.add_connection(std::vector<std::string>{"s.p", "r1.p"});
  sys.add_connection(std::vector<std::string>{"r1.n", "c1.p", "r2.p"});
  sys.add_connection(std::vector<std::string>{"r2.n", "c2.p"});
  sys.add_connection(std::vector<std::string>{"s.n", "c1.n", "c2.n", "g.g"});
  const StateSpace ss = reduce_to_state_space(sys, {"s.V"});
  ASSERT_EQ(ss.states, (std::vector<std::string>{"c1.v", "c2.v"}));
  // c1 v1' = (u - v1)/1 - (v1 - v2)/2 ; c2 v2' = (v1 - v2)/2
  const Bindings b{{"c1.v", 0.3}, {"c2.v", -0.8}, {"s.V", 1.7}};
  EXPECT_NEAR(evaluate(ss.dynamics[0], b), (1.7 - 0.3) - (0.3 + 0.8) / 2.0, 1e-14);
  EXPECT_NEAR(evaluate(ss.dynamics[1], b), ((0.3 + 0.8) / 2.0) / 0.5, 1e-14);
}

// Forward Euler simulation of the reduced model against the closed form of
// a first-order linear ODE.
TEST(Property, ReductionReproducesRcPhysics) {
  for (const auto& [R, C, x0] : std::vector<std::tuple<double, double, double>>{{1, 1, 0}, {0.5, 2, 3}, {2, 0.25, -1}}) {
    const StateSpace ss = reduce_to_state_space(rc_circuit(R, C), {"source.V"});
    const int N = 1000;
    const double dt = 1.0 / N;
    double x = x0;
    double worst = 0.0;
    for (int i = 0; i < N; ++i) {
      x += dt * evaluate(ss.dynamics[0], {{"capacitor.v", x}, {"source.V", 1.0}});
      const double t = (i + 1) * dt;
      worst = std::max(worst, std::abs(x - (1.0 + (x0 - 1.0) * std::exp(-t / (R * C)))));
    }
    EXPECT_LE(worst, 5e-3) << R << " " << C;
  }
}

TEST(Property, RedesignationConsistency) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> d(0.1, 5.0);
  for (int k = 0; k < 10; ++k) {
    const double R = d(rng);
    const double C = d(rng);
    const double V = d(rng) - 2.5;
    const StateSpace control = reduce_to_state_space(rc_circuit(R, C, V), {"source.V"});
    const StateSpace simulation = reduce_to_state_space(rc_circuit(R, C, V), {});
    const Expr pinned = substitute(control.dynamics[0], {{"source.V", Expr::constant(V)}});
    EXPECT_EQ(pinned, simulation.dynamics[0]) << R << " " << C << " " << V;
  }
}

TEST(Property, EndToEndPinsExact) {
  const StateSpace ss = reduce_to_state_space(rc_circuit(), {"source.V"});
  ProblemInputs in;
  in.states = ss.states;
  in.controls = ss.controls;
  in.dynamics = ss.dynamics;
  in.lagrange = parse_expr("0.5*source.V^2");
  in.tf = 1.0;
  in.x_initial = {1.0};
  in.x_final = {3.0};
  const OCProblem p = build_problem(in);
  ASSERT_EQ(classify(p).kind, ProblemKind::LinearQuadratic);
  const Solution s = solve(p, Scheme::Trapezoidal, make_grid(0, 1, 50));
  EXPECT_EQ(s.states(0, 0), 1.0);
  EXPECT_EQ(s.states(50, 0), 3.0);
}
