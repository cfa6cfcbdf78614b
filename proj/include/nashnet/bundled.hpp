#ifndef NASHNET_BUNDLED_HPP
#define NASHNET_BUNDLED_HPP

#include <string>
#include <vector>

#include "nashnet/catalog.hpp"
#include "nashnet/digraph.hpp"
#include "nashnet/engine.hpp"
#include "nashnet/scenario.hpp"
#include "nashnet/stepsize.hpp"

namespace nashnet::bundled {

inline constexpr std::size_t kHorizon = 100'000;
inline constexpr const char* kHorizonNote =
    "horizon and acceptance tolerances chosen by pilot runs against the grid oracle, not taken from a source";

/// Unit-weight equilibrium of the five-agent catalog game on [-5,5]^2,
/// from grid_minimax at resolution 2001 followed by polish_saddle.
inline OracleReference catalog_reference() {
  return {{0.61025310749800876}, {0.88440691414668471},
          "grid min-max at resolution 2001, three local refinement levels, Newton polish; "
          "sampled saddle violation non-positive"};
}

inline GammaSchedule default_schedule() { return GammaSchedule::power_law(1.0, 50.0, 0.5); }

inline AgentObjective catalog_agent(const std::string& name) {
  const auto& e = catalog_entry(name);
  return {e.expr, e.selection};
}

/// Cross layer shared by the five-agent examples: even steps pair x1-y1 and
/// x2-y2; odd steps feed x3 the average of y1, y2 and feed y2 from x3.
inline std::vector<CrossEdge> catalog_cross(bool even) {
  if (even)
    return {{Subnet::one, 0, 0, 1.0}, {Subnet::two, 0, 0, 1.0}, {Subnet::one, 1, 1, 1.0}, {Subnet::two, 1, 1, 1.0}};
  return {{Subnet::one, 0, 2, 0.5}, {Subnet::one, 1, 2, 0.5}, {Subnet::two, 2, 1, 1.0}};
}

inline Scenario catalog_base(std::string name, std::string description, StochasticMatrix a1_even,
                             StochasticMatrix a1_odd, StochasticMatrix a2) {
  Scenario s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.m1 = s.m2 = 1;
  s.box_x = BoxSet::cube(1, -5.0, 5.0);
  s.box_y = BoxSet::cube(1, -5.0, 5.0);
  s.agents1 = {catalog_agent("f1"), catalog_agent("f2"), catalog_agent("f3")};
  s.agents2 = {catalog_agent("g1"), catalog_agent("g2")};
  s.graph.n1 = 3;
  s.graph.n2 = 2;
  s.graph.eta = 0.1;
  s.graph.window_t1 = 2;
  s.graph.window_t2 = 1;
  s.graph.window_cross = 2;
  s.graph.phases = {{std::move(a1_even), a2, catalog_cross(true)}, {std::move(a1_odd), a2, catalog_cross(false)}};
  s.rule = rule::Homogeneous{default_schedule()};
  s.x0 = {{2.0}, {-0.5}, {-1.5}};
  s.y0 = {{1.0}, {0.5}};
  s.iterations = kHorizon;
  s.run_note = kHorizonNote;
  s.reference = catalog_reference();
  return s;
}

inline StochasticMatrix unbalanced_a1_even() { return {{0.8, 0.2, 0.0}, {0.7, 0.3, 0.0}, {0.0, 0.6, 0.4}}; }
inline StochasticMatrix unbalanced_a1_odd() { return {{1.0, 0.0, 0.0}, {0.0, 0.3, 0.7}, {0.0, 0.4, 0.6}}; }
inline StochasticMatrix unbalanced_a2() { return {{0.9, 0.1}, {0.8, 0.2}}; }

/// Weight-balanced switching graphs, homogeneous stepsizes.
inline Scenario example1() {
  return catalog_base("example1", "weight-balanced periodic graphs with homogeneous stepsizes gamma_k = 1/(k+50)",
                      {{0.6, 0.4, 0.0}, {0.4, 0.6, 0.0}, {0.0, 0.0, 1.0}},
                      {{1.0, 0.0, 0.0}, {0.0, 0.7, 0.3}, {0.0, 0.3, 0.7}}, {{0.9, 0.1}, {0.1, 0.9}});
}

/// Unbalanced switching graphs with heterogeneous stepsizes from the exact
/// limit vectors.
inline Scenario example2() {
  Scenario s = catalog_base("example2",
                            "weight-unbalanced periodic graphs with heterogeneous stepsizes gamma_k / phi_i(k+1)",
                            unbalanced_a1_even(), unbalanced_a1_odd(), unbalanced_a2());
  s.rule = oracle_heterogeneous_build(s.graph, default_schedule());
  return s;
}

/// Same graphs as example2; stepsizes learned by two banks per subnet.
inline Scenario example3() {
  Scenario s = catalog_base("example3", "weight-unbalanced periodic graphs with adaptive periodic stepsize learners",
                            unbalanced_a1_even(), unbalanced_a1_odd(), unbalanced_a2());
  s.rule = rule::AdaptivePeriodic{default_schedule(), 2, 2};
  return s;
}

/// Perron vector prescribed for the fixed unbalanced cycle of unbalanced_fixed().
inline Vec unbalanced_fixed_mu() { return {0.5336, 0.1525, 0.3139}; }

/// Identical subnetworks on a fixed unbalanced cycle with homogeneous
/// stepsizes: the run settles on the mu-weighted saddle, not on U's.
inline Scenario unbalanced_fixed() {
  IdenticalBase b;
  b.name = "unbalanced_fixed";
  b.objectives = {catalog_agent("f1"), catalog_agent("f2"), catalog_agent("f3")};
  const Vec mu = unbalanced_fixed_mu();
  b.phases = {build_cycle_matrix(mu, 0.5)};
  b.box_x = BoxSet::cube(1, -5.0, 5.0);
  b.box_y = BoxSet::cube(1, -5.0, 5.0);
  b.x0 = {{2.0}, {-0.5}, {-1.5}};
  b.y0 = {{1.0}, {0.5}, {-1.0}};
  b.eta = 0.1;
  b.window = 1;
  b.schedule = default_schedule();
  b.iterations = kHorizon;
  Scenario s = make_identical_scenario(b);
  s.run_note = kHorizonNote;
  s.description = "identical subnetworks on a fixed unbalanced cycle with homogeneous stepsizes";
  s.reference = catalog_reference();
  return s;
}

inline constexpr double kSharedSaddleX = 1.5;
inline constexpr double kSharedSaddleY = -0.75;

/// Identical subnetworks whose objectives c_i (x-a)^2 - d_i (y-b)^2 share
/// the saddle (a, b), on the unbalanced periodic graphs of example2.
inline Scenario shared_saddle() {
  IdenticalBase b;
  b.name = "shared_saddle";
  const double c[] = {1.0, 2.0, 0.5};
  const double d[] = {1.0, 0.5, 2.0};
  for (int i = 0; i < 3; ++i) {
    const Expr e = scale(c[i], power(var_x(0) - kSharedSaddleX, 2)) - scale(d[i], power(var_y(0) - kSharedSaddleY, 2));
    b.objectives.push_back({e, SubgradientSelection{}});
  }
  b.phases = {unbalanced_a1_even(), unbalanced_a1_odd()};
  b.box_x = BoxSet::cube(1, -5.0, 5.0);
  b.box_y = BoxSet::cube(1, -5.0, 5.0);
  b.x0 = {{2.0}, {-0.5}, {-1.5}};
  b.y0 = {{1.0}, {0.5}, {-1.0}};
  b.eta = 0.1;
  b.window = 2;
  b.schedule = default_schedule();
  b.iterations = kHorizon;
  Scenario s = make_identical_scenario(b);
  s.run_note = kHorizonNote;
  s.description = "identical subnetworks sharing the saddle (1.5, -0.75) on unbalanced periodic graphs";
  s.reference = OracleReference{{kSharedSaddleX}, {kSharedSaddleY}, "analytic: every objective has its saddle at (a, b)"};
  return s;
}

inline std::vector<Scenario> all() { return {example1(), example2(), example3(), unbalanced_fixed(), shared_saddle()}; }

inline Scenario by_name(const std::string& name) {
  for (auto& s : all())
    if (s.name == name) return s;
  throw ContractError("unknown bundled scenario '" + name + "'");
}

} // namespace nashnet::bundled

#endif // NASHNET_BUNDLED_HPP
