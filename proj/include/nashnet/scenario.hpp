#ifndef NASHNET_SCENARIO_HPP
#define NASHNET_SCENARIO_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nashnet/convex.hpp"
#include "nashnet/digraph.hpp"
#include "nashnet/error.hpp"
#include "nashnet/expr.hpp"
#include "nashnet/stepsize.hpp"
#include "nashnet/vec.hpp"

namespace nashnet {

struct AgentObjective {
  Expr expr;
  SubgradientSelection selection;
};

struct MetricToggles {
  bool disagreement = true;
  bool nash_error = true;
  bool saddle_residual = true;

  friend bool operator==(const MetricToggles&, const MetricToggles&) = default;
};

/// A precomputed saddle of the unit-weight sum, stored with the scenario.
struct OracleReference {
  Vec x;
  Vec y;
  std::string note;

  friend bool operator==(const OracleReference&, const OracleReference&) = default;
};

struct Scenario {
  std::string name;
  std::string description;
  std::size_t m1 = 1;
  std::size_t m2 = 1;
  BoxSet box_x;
  BoxSet box_y;
  std::vector<AgentObjective> agents1;
  std::vector<AgentObjective> agents2;
  GraphSequenceSpec graph;
  StepsizeRule rule = rule::Homogeneous{};
  std::vector<Vec> x0;
  std::vector<Vec> y0;
  std::size_t iterations = 0;
  std::string run_note;  // provenance of the horizon and tolerances
  MetricToggles metrics;
  std::optional<OracleReference> reference;

  std::size_t n1() const noexcept { return agents1.size(); }
  std::size_t n2() const noexcept { return agents2.size(); }
  const std::vector<AgentObjective>& agents(Subnet s) const { return s == Subnet::one ? agents1 : agents2; }
};

inline bool operator==(const AgentObjective& a, const AgentObjective& b) {
  if (!same_tree(a.expr, b.expr)) return false;
  const std::size_t n = std::max(a.expr.abs_count(), b.expr.abs_count());
  for (std::size_t i = 0; i < n; ++i)
    if (a.selection.at(i) != b.selection.at(i)) return false;
  return true;
}

inline bool operator==(const Scenario& a, const Scenario& b) {
  return a.name == b.name && a.description == b.description && a.m1 == b.m1 && a.m2 == b.m2 &&
         a.box_x == b.box_x && a.box_y == b.box_y && a.agents1 == b.agents1 && a.agents2 == b.agents2 &&
         a.graph == b.graph && a.rule == b.rule && a.x0 == b.x0 && a.y0 == b.y0 && a.iterations == b.iterations &&
         a.run_note == b.run_note &&
         a.metrics == b.metrics && a.reference == b.reference;
}

/// Dimension and index consistency; throws ContractError.
inline void check_structure(const Scenario& s) {
  s.graph.check_well_formed();
  auto fail = [&](const std::string& m) { throw ContractError("scenario '" + s.name + "': " + m); };
  if (s.box_x.dim() != s.m1 || s.box_y.dim() != s.m2) fail("box dimensions differ from (m1, m2)");
  if (s.graph.n1 != s.n1() || s.graph.n2 != s.n2()) fail("agent counts differ from the graph");
  if (s.x0.size() != s.n1() || s.y0.size() != s.n2()) fail("initial state count differs from agent count");
  for (const auto& v : s.x0)
    if (v.size() != s.m1 || !all_finite(v)) fail("initial x states must be finite vectors of length m1");
  for (const auto& v : s.y0)
    if (v.size() != s.m2 || !all_finite(v)) fail("initial y states must be finite vectors of length m2");
  for (Subnet sub : {Subnet::one, Subnet::two})
    for (std::size_t i = 0; i < s.agents(sub).size(); ++i) {
      const auto [ax, ay] = s.agents(sub)[i].expr.arity();
      if (ax > s.m1 || ay > s.m2)
        fail("objective of agent " + std::to_string(i) + " in subnet " + std::to_string(index_of(sub)) +
             " references a variable beyond (m1, m2)");
    }
  if (const auto* o = std::get_if<rule::OracleHeterogeneous>(&s.rule))
    check_oracle_vectors(*o, s.graph.period(), s.n1(), s.n2());
  if (s.reference && (s.reference->x.size() != s.m1 || s.reference->y.size() != s.m2))
    fail("oracle reference has wrong dimensions");
}

struct ValidationReport {
  std::vector<std::string> warnings;
};

/// Structural checks plus the weight rule (errors) and connectivity and
/// convexity sampling (warnings). Throws ValidationError listing every
/// failed clause.
inline ValidationReport validate_scenario(const Scenario& s, std::size_t convexity_trials = 1000) {
  std::vector<std::string> errors;
  try {
    check_structure(s);
  } catch (const ContractError& e) {
    throw ValidationError({std::string("structure: ") + e.what()});
  }
  if (!(s.graph.eta > 0.0 && s.graph.eta < 1.0)) errors.push_back("A3(i): eta must lie in (0,1)");
  for (const auto& v : validate_weight_rule(s.graph, s.graph.eta)) errors.push_back(v.describe());
  if (!errors.empty()) throw ValidationError(std::move(errors));

  ValidationReport r;
  for (Subnet sub : {Subnet::one, Subnet::two})
    if (!check_ujsc(s.graph, sub, s.graph.window(sub)))
      r.warnings.push_back("A2(ii): subnet " + std::to_string(index_of(sub)) + " is not UJSC with window " +
                           std::to_string(s.graph.window(sub)));
  if (!check_jointly_bipartite(s.graph, s.graph.window_cross))
    r.warnings.push_back("A2(i): cross layer is not jointly bipartite with window " +
                         std::to_string(s.graph.window_cross));
  for (Subnet sub : {Subnet::one, Subnet::two})
    for (std::size_t i = 0; i < s.agents(sub).size(); ++i) {
      const auto rep = sample_convex_concave(s.agents(sub)[i].expr, s.box_x, s.box_y, convexity_trials);
      if (!rep.ok())
        r.warnings.push_back("A1: objective of agent " + std::to_string(i) + " in subnet " +
                             std::to_string(index_of(sub)) + " failed " +
                             std::to_string(rep.convex_x_failures) + " convexity and " +
                             std::to_string(rep.concave_y_failures) + " concavity samples of " +
                             std::to_string(rep.trials));
    }
  return r;
}

} // namespace nashnet

#endif // NASHNET_SCENARIO_HPP
