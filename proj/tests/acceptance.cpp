#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "nashnet/nashnet.hpp"

using namespace nashnet;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct BundledRun {
  Scenario scenario;
  Trace trace;
  double seconds;
};

std::map<std::string, BundledRun>& runs() {
  static std::map<std::string, BundledRun> cache;
  return cache;
}

const BundledRun& bundled_run(const std::string& name) {
  auto& cache = runs();
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  Scenario s = bundled::by_name(name);
  const auto t0 = std::chrono::steady_clock::now();
  Trace t = run(s);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cache.emplace(name, BundledRun{std::move(s), std::move(t), secs}).first->second;
}

double worst_distance(const BundledRun& r, const Vec& x, const Vec& y) {
  const std::size_t K = r.trace.iterations();
  double worst = 0.0;
  for (std::size_t i = 0; i < r.scenario.n1(); ++i) worst = std::max(worst, distance(r.trace.x(K, i), x));
  for (std::size_t i = 0; i < r.scenario.n2(); ++i) worst = std::max(worst, distance(r.trace.y(K, i), y));
  return worst;
}

const Vec kEqX{0.6102}, kEqY{0.8844};

CertifiedSaddle certified_reference(const Scenario& s) {
  return CertifiedSaddle::certify(unit_objective(s), s.reference->x, s.reference->y, s.box_x, s.box_y);
}

Outcome example1() {
  const auto& r = bundled_run("example1");
  const double d = worst_distance(r, kEqX, kEqY);
  return {d <= 5e-2 && r.seconds < 5.0,
          "K=" + std::to_string(r.trace.iterations()) + ", max agent distance " + num(d) + ", runtime " +
              num(r.seconds) + " s"};
}

bool contains_vector(const std::vector<Vec>& set, const Vec& want, double tol) {
  return std::any_of(set.begin(), set.end(), [&](const Vec& v) {
    if (v.size() != want.size()) return false;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (std::abs(v[i] - want[i]) > tol) return false;
    return true;
  });
}

Outcome example2() {
  const auto& r = bundled_run("example2");
  const auto* o = std::get_if<rule::OracleHeterogeneous>(&r.scenario.rule);
  const bool vectors = o != nullptr && contains_vector(o->phi1, {0.5336, 0.1525, 0.3139}, 1e-4) &&
                       contains_vector(o->phi1, {0.5336, 0.3408, 0.1256}, 1e-4) &&
                       contains_vector(o->phi2, {0.8889, 0.1111}, 1e-4);
  const double d = worst_distance(r, kEqX, kEqY);
  return {vectors && d <= 5e-2, std::string("limit vectors ") + (vectors ? "match" : "differ") +
                                    ", max agent distance " + num(d)};
}

Outcome example3() {
  const auto& r = bundled_run("example3");
  const double gap = learner_readout_gap(r.scenario.rule, r.scenario.graph, 200, 201);
  const double d = worst_distance(r, kEqX, kEqY);
  return {gap <= 1e-8 && d <= 5e-2, "readout gap at k=200 " + num(gap) + ", max agent distance " + num(d)};
}

Outcome unbalanced_fixed() {
  const auto& r = bundled_run("unbalanced_fixed");
  const Scenario& s = r.scenario;
  const auto weighted = derive_saddle(weighted_objective(s, bundled::unbalanced_fixed_mu()), s, 2001);
  const auto unit = derive_saddle(unit_objective(s), s, 2001);
  const double sep = std::hypot(weighted.x_star[0] - unit.x_star[0], weighted.y_star[0] - unit.y_star[0]);
  const double to_weighted = worst_distance(r, weighted.x_star, weighted.y_star);
  const std::size_t K = r.trace.iterations();
  double nearest_unit = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.n1(); ++i)
    nearest_unit = std::min(nearest_unit, std::hypot(r.trace.x(K, i)[0] - unit.x_star[0], r.trace.y(K, i)[0] - unit.y_star[0]));
  return {sep > 0.1 && to_weighted <= 5e-2 && nearest_unit > 0.5 * sep,
          "separation " + num(sep) + ", distance to weighted saddle " + num(to_weighted) +
              ", distance to unit saddle " + num(nearest_unit)};
}

Outcome shared_saddle() {
  const auto& r = bundled_run("shared_saddle");
  const double d = worst_distance(r, {bundled::kSharedSaddleX}, {bundled::kSharedSaddleY});
  return {d <= 1e-2, "max agent distance to (" + num(bundled::kSharedSaddleX) + ", " + num(bundled::kSharedSaddleY) +
                         ") " + num(d)};
}

// ---------------------------------------------------------------------------
// Randomized property checks, 1000 trials each.

constexpr int kTrials = 1000;

double uni(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

StochasticMatrix random_stochastic(std::mt19937_64& rng, std::size_t n) {
  StochasticMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || uni(rng, 0, 1) < 0.4) a(i, j) = uni(rng, 0.2, 1.0);
      total += a(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) a(i, j) /= total;
  }
  return a;
}

GraphSequenceSpec random_ujsc(std::mt19937_64& rng, std::size_t n, std::size_t period) {
  GraphSequenceSpec g;
  g.n1 = n;
  g.n2 = 1;
  for (std::size_t p = 0; p < period; ++p) {
    StochasticMatrix a(n);
    for (std::size_t i = 0; i < n; ++i) {
      a(i, i) = uni(rng, 0.2, 1.0);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && uni(rng, 0, 1) < 0.25) a(i, j) = uni(rng, 0.2, 1.0);
    }
    for (std::size_t j = p; j < n; j += period) a((j + 1) % n, j) = uni(rng, 0.2, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = a.row_sum(i);
      for (std::size_t j = 0; j < n; ++j) a(i, j) /= s;
    }
    g.phases.push_back({std::move(a), StochasticMatrix::identity(1), {}});
  }
  g.window_t1 = period;
  g.eta = infer_eta(g);
  return g;
}

std::size_t prop_projection(std::mt19937_64& rng) {
  std::size_t fails = 0;
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t d = pick(rng, 1, 4);
    Vec lo(d), hi(d), p(d);
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = uni(rng, -5, 0);
      hi[k] = lo[k] + uni(rng, 0, 5);
      p[k] = uni(rng, -20, 20);
    }
    const BoxSet box(lo, hi);
    const Vec z = uniform_in(box, rng);
    if (distance(project(p, box), z) > distance(p, z) + 1e-12) ++fails;
  }
  return fails;
}

std::size_t prop_ergodicity(std::mt19937_64& rng) {
  std::size_t fails = 0;
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t n = pick(rng, 2, 6);
    const auto a = random_stochastic(rng, n);
    std::vector<Vec> pts(n);
    for (auto& p : pts) p = {uni(rng, -10, 10), uni(rng, -10, 10)};
    if (disagreement_span(mix_within(pts, a)) > ergodicity_coefficient(a) * disagreement_span(pts) + 1e-12) ++fails;
  }
  return fails;
}

std::size_t prop_perron_round_trip(std::mt19937_64& rng) {
  std::size_t fails = 0;
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t n = pick(rng, 2, 6);
    Vec mu(n);
    double s = 0.0;
    for (double& v : mu) s += (v = uni(rng, 0.05, 1.0));
    for (double& v : mu) v /= s;
    const auto phi = perron_vector(build_cycle_matrix(mu, uni(rng, 0.05, 0.95))).phi;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(phi[i] - mu[i]) > 1e-9) {
        ++fails;
        break;
      }
  }
  return fails;
}

std::size_t prop_geometric_envelope(std::mt19937_64& rng) {
  std::size_t fails = 0;
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t n = pick(rng, 2, 4), period = pick(rng, 1, 3);
    const auto g = random_ujsc(rng, n, period);
    const std::size_t s = pick(rng, 0, 2 * period);
    const auto phi = limiting_stochastic_vector(g, Subnet::one, s, 1e-13).phi;
    const auto bound = GeometricRateBound::from(g.eta, n, period);
    const std::size_t k = s + pick(rng, 0, 60);
    const auto p = transition_product(g, Subnet::one, k, s);
    const std::size_t i = pick(rng, 0, n - 1), j = pick(rng, 0, n - 1);
    if (std::abs(p(i, j) - phi[j]) > bound.c * std::pow(bound.rho, static_cast<double>(k - s)) + 1e-12) ++fails;
  }
  return fails;
}

/// Row identity against the transition product and row-stochasticity of the learner state.
std::pair<std::size_t, std::size_t> prop_learner(std::mt19937_64& rng) {
  std::size_t identity_fails = 0, stochastic_fails = 0;
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t n = pick(rng, 1, 5);
    const auto g = random_ujsc(rng, n, pick(rng, 1, 3));
    auto learner = learner_init_common(n);
    const std::size_t steps = pick(rng, 1, 40);
    bool stochastic = true;
    for (std::size_t k = 0; k < steps; ++k) {
      learner_step_common(learner, g.matrix(Subnet::one, k));
      stochastic = stochastic && learner.banks[0]->is_stochastic(1e-12);
    }
    if (!stochastic) ++stochastic_fails;
    const auto phi = transition_product(g, Subnet::one, steps - 1, 0);
    bool same = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) same = same && std::abs((*learner.banks[0])(i, j) - phi(i, j)) <= 1e-12;
    if (!same) ++identity_fails;
  }
  return {identity_fails, stochastic_fails};
}

std::size_t prop_subgradient(std::mt19937_64& rng) {
  std::size_t fails = 0;
  const BoxSet full = BoxSet::cube(1, -5, 5);
  const BoxSet concave_x = BoxSet::cube(1, -4.4, 4.4);
  for (const auto& e : objective_catalog()) {
    for (int t = 0; t < kTrials; ++t) {
      const Vec y = uniform_in(full, rng), x0 = uniform_in(full, rng), x1 = uniform_in(full, rng);
      const double fx0 = evaluate(e.expr, x0, y), fx1 = evaluate(e.expr, x1, y);
      if (fx1 < fx0 + (x1[0] - x0[0]) * subgradient_x(e.expr, x0, y, e.selection)[0] - 1e-9 * (1 + std::abs(fx1))) ++fails;
      const Vec x = uniform_in(concave_x, rng), y0 = uniform_in(full, rng), y1 = uniform_in(full, rng);
      const double fy0 = evaluate(e.expr, x, y0), fy1 = evaluate(e.expr, x, y1);
      if (fy1 > fy0 + (y1[0] - y0[0]) * subgradient_y(e.expr, x, y0, e.selection)[0] + 1e-9 * (1 + std::abs(fy1))) ++fails;
    }
  }
  return fails;
}

std::size_t prop_finite_difference(std::mt19937_64& rng) {
  std::size_t fails = 0;
  const double h = 1e-5;
  for (const auto& e : objective_catalog()) {
    for (int done = 0; done < kTrials;) {
      const double x = uni(rng, -5, 5), y = uni(rng, -5, 5);
      if (std::abs(x - 1) < 1e-3 || std::abs(y) < 1e-3) continue;
      ++done;
      const double fdx = (evaluate(e.expr, Vec{x + h}, Vec{y}) - evaluate(e.expr, Vec{x - h}, Vec{y})) / (2 * h);
      const double fdy = (evaluate(e.expr, Vec{x}, Vec{y + h}) - evaluate(e.expr, Vec{x}, Vec{y - h})) / (2 * h);
      const double qx = subgradient_x(e.expr, Vec{x}, Vec{y}, e.selection)[0];
      const double qy = subgradient_y(e.expr, Vec{x}, Vec{y}, e.selection)[0];
      if (std::abs(fdx - qx) > 1e-6 * (1 + std::abs(qx)) || std::abs(fdy - qy) > 1e-6 * (1 + std::abs(qy))) ++fails;
    }
  }
  return fails;
}

Outcome properties() {
  std::mt19937_64 rng(20240601);
  std::ostringstream detail;
  std::size_t total = 0;
  auto note = [&](const char* name, std::size_t fails) {
    detail << (detail.tellp() == 0 ? "" : ", ") << name << " " << fails;
    total += fails;
  };
  note("projection", prop_projection(rng));
  note("ergodicity", prop_ergodicity(rng));
  note("perron", prop_perron_round_trip(rng));
  note("envelope", prop_geometric_envelope(rng));
  const auto [ident, stoch] = prop_learner(rng);
  note("learner-identity", ident);
  note("learner-stochastic", stoch);
  note("subgradient", prop_subgradient(rng));
  note("finite-difference", prop_finite_difference(rng));
  return {total == 0, "failures per suite: " + detail.str()};
}

// ---------------------------------------------------------------------------

Outcome recursion() {
  std::size_t positions = 0, violations = 0;
  for (const auto& s : bundled::all()) {
    const auto& r = bundled_run(s.name);
    const double L = scenario_lipschitz(r.scenario);
    for (Subnet sub : {Subnet::one, Subnet::two}) {
      const auto c = check_disagreement_recursion(r.trace, r.scenario, sub, L);
      positions += c.positions;
      violations += c.violations;
    }
  }
  return {violations == 0 && positions > 0,
          std::to_string(positions) + " window positions, " + std::to_string(violations) + " violations"};
}

Outcome residual() {
  double worst = std::numeric_limits<double>::infinity();
  std::string where;
  for (const auto& s : bundled::all()) {
    const auto& r = bundled_run(s.name);
    const auto m = compute_metrics(r.trace, r.scenario, certified_reference(r.scenario));
    for (double v : m.saddle_residual)
      if (v < worst) {
        worst = v;
        where = s.name;
      }
  }
  return {worst >= -1e-9, "minimum residual " + num(worst) + " (" + where + ")"};
}

std::pair<std::string, std::string> artifacts(const Scenario& s, const Trace& t) {
  std::ostringstream trace, metrics;
  write_trace_csv(trace, t);
  write_metrics_csv(metrics, compute_metrics(t, s, certified_reference(s)));
  return {trace.str(), metrics.str()};
}

Outcome determinism() {
  std::size_t identical = 0, total = 0;
  for (const auto& s : bundled::all()) {
    const auto& first = bundled_run(s.name);
    const auto a = artifacts(first.scenario, first.trace);
    const auto b = artifacts(s, run(s));
    ++total;
    if (a == b) ++identical;
  }
  return {identical == total, std::to_string(identical) + "/" + std::to_string(total) +
                                  " scenarios byte-identical across repeated runs"};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"example 1 balanced homogeneous run reaches the equilibrium", example1},
      {"example 2 oracle heterogeneous stepsizes reach the equilibrium", example2},
      {"example 3 periodic learners converge and reach the equilibrium", example3},
      {"unbalanced homogeneous run settles on the weighted saddle", unbalanced_fixed},
      {"shared-saddle objectives converge on unbalanced graphs", shared_saddle},
      {"randomized property suites", properties},
      {"disagreement recursion on every bundled trace", recursion},
      {"saddle residual non-negative on every bundled trace", residual},
      {"bundled runs are deterministic", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
