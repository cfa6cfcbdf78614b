#ifndef NASHNET_ENGINE_HPP
#define NASHNET_ENGINE_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nashnet/convex.hpp"
#include "nashnet/digraph.hpp"
#include "nashnet/error.hpp"
#include "nashnet/scenario.hpp"
#include "nashnet/stepsize.hpp"
#include "nashnet/vec.hpp"

namespace nashnet {

/// Last cross observation: time k and the mixed value sum_j a_ij(k) state_j(k).
struct CrossCache {
  std::size_t time = 0;
  Vec value;

  friend bool operator==(const CrossCache&, const CrossCache&) = default;
};

struct AgentState {
  std::size_t id = 0;
  Subnet subnet = Subnet::one;
  Vec state;
  std::optional<CrossCache> cross;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct NetworkState {
  std::size_t k = 0;
  std::vector<AgentState> agents1;
  std::vector<AgentState> agents2;

  std::vector<AgentState>& agents(Subnet s) { return s == Subnet::one ? agents1 : agents2; }
  const std::vector<AgentState>& agents(Subnet s) const { return s == Subnet::one ? agents1 : agents2; }

  friend bool operator==(const NetworkState&, const NetworkState&) = default;
};

inline NetworkState initial_state(const Scenario& s) {
  NetworkState net;
  for (std::size_t i = 0; i < s.n1(); ++i) net.agents1.push_back({i, Subnet::one, s.x0[i], std::nullopt});
  for (std::size_t i = 0; i < s.n2(); ++i) net.agents2.push_back({i, Subnet::two, s.y0[i], std::nullopt});
  return net;
}

/// hat_i = sum_j a_ij state_j
inline std::vector<Vec> mix_within(std::span<const Vec> states, const StochasticMatrix& a) {
  if (states.size() != a.size()) throw ContractError("mix_within: state count differs from matrix size");
  std::vector<Vec> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    Vec v(states.empty() ? 0 : states[0].size(), 0.0);
    for (std::size_t j = 0; j < states.size(); ++j) {
      const double w = a(i, j);
      if (w == 0.0) continue;
      for (std::size_t d = 0; d < v.size(); ++d) v[d] += w * states[j][d];
    }
    out.push_back(std::move(v));
  }
  return out;
}

/// Refreshes agent `to` of subnet `target` from the cross edges of `phase`
/// at time k; the cache is untouched when the agent has no cross in-neighbor.
inline void cross_observe(AgentState& agent, std::size_t k, const GraphPhase& phase,
                          std::span<const Vec> other_states) {
  std::optional<Vec> acc;
  for (const auto& e : phase.cross) {
    if (e.target != agent.subnet || e.to != agent.id) continue;
    const Vec& src = other_states[e.from];
    if (!acc) acc = Vec(src.size(), 0.0);
    for (std::size_t d = 0; d < src.size(); ++d) (*acc)[d] += e.weight * src[d];
  }
  if (acc) agent.cross = CrossCache{k, std::move(*acc)};
}

namespace detail {

inline std::vector<Vec> states_of(const std::vector<AgentState>& agents) {
  std::vector<Vec> out;
  out.reserve(agents.size());
  for (const auto& a : agents) out.push_back(a.state);
  return out;
}

} // namespace detail

/// One synchronous iteration from k to k+1. `alpha` and `beta` are the
/// per-agent stepsizes of subnets one and two at k.
inline NetworkState step(const NetworkState& net, const Scenario& s, std::span<const double> alpha,
                         std::span<const double> beta) {
  if (alpha.size() != s.n1() || beta.size() != s.n2()) throw ContractError("step: stepsize count mismatch");
  for (double a : alpha)
    if (!(a >= 0.0)) throw ContractError("step: stepsizes must be nonnegative");
  for (double b : beta)
    if (!(b >= 0.0)) throw ContractError("step: stepsizes must be nonnegative");

  const std::size_t k = net.k;
  const GraphPhase& phase = s.graph.phase_at(k);
  const auto xs = detail::states_of(net.agents1);
  const auto ys = detail::states_of(net.agents2);
  const auto xhat = mix_within(xs, phase.a1);
  const auto yhat = mix_within(ys, phase.a2);

  NetworkState next = net;
  next.k = k + 1;
  for (auto& a : next.agents1) cross_observe(a, k, phase, ys);
  for (auto& a : next.agents2) cross_observe(a, k, phase, xs);

  auto fail = [&](Subnet sub, std::size_t i) {
    throw NumericError("non-finite state for agent " + std::to_string(i) + " of subnet " +
                           std::to_string(index_of(sub)),
                       k);
  };

  for (std::size_t i = 0; i < s.n1(); ++i) {
    AgentState& a = next.agents1[i];
    Vec z = xhat[i];
    if (a.cross) {
      const auto& obj = s.agents1[i];
      const Vec q = subgradient_x(obj.expr, xhat[i], a.cross->value, obj.selection);
      for (std::size_t d = 0; d < z.size(); ++d) z[d] -= alpha[i] * q[d];
    }
    a.state = project(z, s.box_x);
    if (!all_finite(a.state)) fail(Subnet::one, i);
  }
  for (std::size_t i = 0; i < s.n2(); ++i) {
    AgentState& a = next.agents2[i];
    Vec z = yhat[i];
    if (a.cross) {
      const auto& obj = s.agents2[i];
      const Vec q = subgradient_y(obj.expr, a.cross->value, yhat[i], obj.selection);
      for (std::size_t d = 0; d < z.size(); ++d) z[d] += beta[i] * q[d];
    }
    a.state = project(z, s.box_y);
    if (!all_finite(a.state)) fail(Subnet::two, i);
  }
  return next;
}

/// States of every agent at k = 0..K (flat, agent-major within each k) and
/// the stepsizes applied from k to k+1.
class Trace {
public:
  Trace() = default;
  Trace(std::size_t n1, std::size_t n2, std::size_t m1, std::size_t m2) : n1_(n1), n2_(n2), m1_(m1), m2_(m2) {}

  std::size_t n1() const noexcept { return n1_; }
  std::size_t n2() const noexcept { return n2_; }
  std::size_t m1() const noexcept { return m1_; }
  std::size_t m2() const noexcept { return m2_; }
  std::size_t length() const noexcept { return n1_ * m1_ == 0 ? 0 : x_.size() / (n1_ * m1_); }
  std::size_t iterations() const noexcept { return length() == 0 ? 0 : length() - 1; }

  std::span<const double> x(std::size_t k, std::size_t i) const {
    return {x_.data() + (k * n1_ + i) * m1_, m1_};
  }
  std::span<const double> y(std::size_t k, std::size_t i) const {
    return {y_.data() + (k * n2_ + i) * m2_, m2_};
  }
  std::span<const double> state(std::size_t k, Subnet s, std::size_t i) const {
    return s == Subnet::one ? x(k, i) : y(k, i);
  }
  std::vector<Vec> states(std::size_t k, Subnet s) const {
    std::vector<Vec> out;
    const std::size_t n = s == Subnet::one ? n1_ : n2_;
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = state(k, s, i);
      out.emplace_back(v.begin(), v.end());
    }
    return out;
  }
  double alpha(std::size_t k, std::size_t i) const { return alpha_[k * n1_ + i]; }
  double beta(std::size_t k, std::size_t i) const { return beta_[k * n2_ + i]; }
  double stepsize(std::size_t k, Subnet s, std::size_t i) const {
    return s == Subnet::one ? alpha(k, i) : beta(k, i);
  }

  void push_states(const NetworkState& net) {
    for (const auto& a : net.agents1) x_.insert(x_.end(), a.state.begin(), a.state.end());
    for (const auto& a : net.agents2) y_.insert(y_.end(), a.state.begin(), a.state.end());
  }
  void push_stepsizes(std::span<const double> a, std::span<const double> b) {
    alpha_.insert(alpha_.end(), a.begin(), a.end());
    beta_.insert(beta_.end(), b.begin(), b.end());
  }
  void reserve(std::size_t iters) {
    x_.reserve((iters + 1) * n1_ * m1_);
    y_.reserve((iters + 1) * n2_ * m2_);
    alpha_.reserve(iters * n1_);
    beta_.reserve(iters * n2_);
  }

  friend bool operator==(const Trace&, const Trace&) = default;

private:
  std::size_t n1_ = 0, n2_ = 0, m1_ = 0, m2_ = 0;
  std::vector<double> x_, y_, alpha_, beta_;
};

/// Stepsizes of both subnets at k.
inline std::pair<Vec, Vec> stepsizes_at(const Scenario& s, std::size_t k, const Learners* learners) {
  Vec a(s.n1()), b(s.n2());
  for (std::size_t i = 0; i < s.n1(); ++i) a[i] = stepsize_for(s.rule, i, Subnet::one, k, learners);
  for (std::size_t i = 0; i < s.n2(); ++i) b[i] = stepsize_for(s.rule, i, Subnet::two, k, learners);
  return {std::move(a), std::move(b)};
}

/// Runs K iterations (the scenario's own budget when K is absent).
inline Trace run(const Scenario& s, std::optional<std::size_t> iterations = std::nullopt) {
  check_structure(s);
  const std::size_t K = iterations.value_or(s.iterations);
  Trace trace(s.n1(), s.n2(), s.m1, s.m2);
  trace.reserve(K);
  auto learners = make_learners(s.rule, s.graph);
  NetworkState net = initial_state(s);
  trace.push_states(net);
  for (std::size_t k = 0; k < K; ++k) {
    const auto [a, b] = stepsizes_at(s, k, learners ? &*learners : nullptr);
    net = step(net, s, a, b);
    if (learners) advance_learners(*learners, s.graph, k);
    trace.push_states(net);
    trace.push_stepsizes(a, b);
  }
  return trace;
}

/// One subnetwork's worth of data for the identical-subnetwork reduction.
struct IdenticalBase {
  std::string name;
  std::vector<AgentObjective> objectives;
  std::vector<StochasticMatrix> phases;
  BoxSet box_x;
  BoxSet box_y;
  std::vector<Vec> x0;
  std::vector<Vec> y0;
  double eta = 0.1;
  std::size_t window = 1;
  GammaSchedule schedule;
  std::size_t iterations = 0;
};

/// Two copies of one subnetwork, paired node to node at every step.
inline Scenario make_identical_scenario(const IdenticalBase& b) {
  const std::size_t n = b.objectives.size();
  if (n == 0 || b.phases.empty()) throw ContractError("make_identical_scenario: empty base");
  Scenario s;
  s.name = b.name;
  s.m1 = b.box_x.dim();
  s.m2 = b.box_y.dim();
  s.box_x = b.box_x;
  s.box_y = b.box_y;
  s.agents1 = b.objectives;
  s.agents2 = b.objectives;
  s.graph.n1 = n;
  s.graph.n2 = n;
  s.graph.eta = b.eta;
  s.graph.window_t1 = b.window;
  s.graph.window_t2 = b.window;
  s.graph.window_cross = 1;
  for (const auto& a : b.phases) {
    GraphPhase ph{a, a, {}};
    for (std::size_t i = 0; i < n; ++i) {
      ph.cross.push_back({Subnet::one, i, i, 1.0});
      ph.cross.push_back({Subnet::two, i, i, 1.0});
    }
    s.graph.phases.push_back(std::move(ph));
  }
  s.rule = rule::Homogeneous{b.schedule};
  s.x0 = b.x0;
  s.y0 = b.y0;
  s.iterations = b.iterations;
  return s;
}

} // namespace nashnet

#endif // NASHNET_ENGINE_HPP
