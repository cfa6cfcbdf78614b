#ifndef NASHNET_METRICS_HPP
#define NASHNET_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "nashnet/convex.hpp"
#include "nashnet/digraph.hpp"
#include "nashnet/engine.hpp"
#include "nashnet/error.hpp"
#include "nashnet/saddle.hpp"
#include "nashnet/scenario.hpp"

namespace nashnet {

struct MetricsSeries {
  std::vector<double> h1;
  std::vector<double> h2;
  std::vector<double> nash_error;
  std::vector<double> saddle_residual;
  std::vector<double> stepsize_min;  // NaN on the final row
  std::vector<double> stepsize_max;

  std::size_t size() const noexcept { return h1.size(); }
};

/// U with unit weights over the subnet-one objectives.
inline WeightedObjective unit_objective(const Scenario& s) {
  std::vector<WeightedTerm> terms;
  for (const auto& a : s.agents1) terms.push_back({1.0, a.expr, a.selection});
  return WeightedObjective(std::move(terms));
}

inline WeightedObjective weighted_objective(const Scenario& s, std::span<const double> mu) {
  if (mu.size() != s.n1()) throw ContractError("weighted_objective: one weight per subnet-one agent required");
  std::vector<WeightedTerm> terms;
  for (std::size_t i = 0; i < s.n1(); ++i) terms.push_back({mu[i], s.agents1[i].expr, s.agents1[i].selection});
  return WeightedObjective(std::move(terms));
}

/// Grid min-max, refinement and polish of a weighted objective over the
/// scenario boxes.
inline SaddleReport derive_saddle(const WeightedObjective& w, const Scenario& s, std::size_t resolution,
                                  const GridOptions& opt = {}) {
  return polish_saddle(w, s.box_x, s.box_y, grid_minimax(w, s.box_x, s.box_y, resolution, opt));
}

inline Vec mean_state(const Trace& t, std::size_t k, Subnet s) {
  const std::size_t n = s == Subnet::one ? t.n1() : t.n2();
  const std::size_t m = s == Subnet::one ? t.m1() : t.m2();
  Vec mean(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = t.state(k, s, i);
    for (std::size_t d = 0; d < m; ++d) mean[d] += v[d];
  }
  for (double& v : mean) v /= static_cast<double>(n);
  return mean;
}

inline MetricsSeries compute_metrics(const Trace& trace, const Scenario& s, const CertifiedSaddle& saddle) {
  if (trace.n1() != s.n1() || trace.n2() != s.n2() || trace.m1() != s.m1 || trace.m2() != s.m2)
    throw ContractError("compute_metrics: trace does not match the scenario");
  if (saddle.x().size() != s.m1 || saddle.y().size() != s.m2)
    throw ContractError("compute_metrics: saddle dimension mismatch");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const WeightedObjective u = unit_objective(s);
  const std::size_t len = trace.length();
  MetricsSeries m;
  m.h1.assign(len, nan);
  m.h2.assign(len, nan);
  m.nash_error.assign(len, nan);
  m.saddle_residual.assign(len, nan);
  m.stepsize_min.assign(len, nan);
  m.stepsize_max.assign(len, nan);
  for (std::size_t k = 0; k < len; ++k) {
    if (s.metrics.disagreement) {
      m.h1[k] = disagreement_span(trace.states(k, Subnet::one));
      m.h2[k] = disagreement_span(trace.states(k, Subnet::two));
    }
    if (s.metrics.nash_error) {
      double e = 0.0;
      for (std::size_t i = 0; i < s.n1(); ++i) e += squared_distance(trace.x(k, i), saddle.x());
      for (std::size_t i = 0; i < s.n2(); ++i) e += squared_distance(trace.y(k, i), saddle.y());
      m.nash_error[k] = e;
    }
    if (s.metrics.saddle_residual) {
      m.saddle_residual[k] =
          u(mean_state(trace, k, Subnet::one), saddle.y()) - u(saddle.x(), mean_state(trace, k, Subnet::two));
    }
    if (k + 1 < len) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t i = 0; i < s.n1(); ++i) {
        lo = std::min(lo, trace.alpha(k, i));
        hi = std::max(hi, trace.alpha(k, i));
      }
      for (std::size_t i = 0; i < s.n2(); ++i) {
        lo = std::min(lo, trace.beta(k, i));
        hi = std::max(hi, trace.beta(k, i));
      }
      m.stepsize_min[k] = lo;
      m.stepsize_max[k] = hi;
    }
  }
  return m;
}

/// Sampled subgradient bound over every agent objective of the scenario.
inline double scenario_lipschitz(const Scenario& s, std::size_t grid = 201) {
  double l = 0.0;
  for (Subnet sub : {Subnet::one, Subnet::two})
    for (const auto& a : s.agents(sub)) l = std::max(l, lipschitz_bound(a.expr, s.box_x, s.box_y, grid, a.selection));
  return l;
}

struct RecursionCheck {
  Subnet subnet = Subnet::one;
  std::size_t window = 0;  // (n(n-2)+1) T_l
  std::size_t positions = 0;
  std::size_t violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min of rhs - lhs
  std::size_t worst_k = 0;
};

/// h(tT+q) <= (1 - eta^T) h((t-1)T+q) + 2 L sum_{r=(t-1)T+q}^{tT+q-1} max_i stepsize_i(r)
/// for every admissible window position of one subnet. Subnets with a single
/// agent have h = 0 identically and report zero positions.
inline RecursionCheck check_disagreement_recursion(const Trace& t, const Scenario& s, Subnet sub, double lipschitz) {
  RecursionCheck r;
  r.subnet = sub;
  const std::size_t n = s.graph.size(sub);
  if (n < 2) return r;
  const std::size_t T = (n * (n - 2) + 1) * s.graph.window(sub);
  r.window = T;
  const std::size_t len = t.length();
  if (len <= T) return r;

  std::vector<double> h(len);
  for (std::size_t k = 0; k < len; ++k) h[k] = disagreement_span(t.states(k, sub));
  std::vector<double> lam_prefix(len, 0.0);  // sum of max stepsizes over r < k
  for (std::size_t k = 0; k + 1 < len; ++k) {
    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, t.stepsize(k, sub, i));
    lam_prefix[k + 1] = lam_prefix[k] + mx;
  }
  const double contraction = 1.0 - std::pow(s.graph.eta, static_cast<double>(T));
  for (std::size_t k = T; k < len; ++k) {
    const std::size_t k0 = k - T;
    const double rhs = contraction * h[k0] + 2.0 * lipschitz * (lam_prefix[k] - lam_prefix[k0]);
    const double margin = rhs - h[k];
    ++r.positions;
    if (margin < -1e-12 * (1.0 + std::abs(rhs))) ++r.violations;
    if (margin < r.worst_margin) {
      r.worst_margin = margin;
      r.worst_k = k;
    }
  }
  return r;
}

} // namespace nashnet

#endif // NASHNET_METRICS_HPP
