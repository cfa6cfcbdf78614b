#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nashnet/bundled.hpp"
#include "nashnet/digraph.hpp"

using namespace nashnet;

namespace {

GraphSequenceSpec single_subnet(std::vector<StochasticMatrix> phases, std::size_t window = 1) {
  GraphSequenceSpec g;
  g.n1 = phases.front().size();
  g.n2 = 1;
  for (auto& a : phases) g.phases.push_back({std::move(a), StochasticMatrix::identity(1), {}});
  g.window_t1 = window;
  return g;
}

void expect_vec_near(const Vec& a, const Vec& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "component " << i;
}

} // namespace

TEST(StochasticMatrix, RowsAndProducts) {
  const StochasticMatrix a{{0.9, 0.1}, {0.1, 0.9}};
  EXPECT_TRUE(a.is_stochastic());
  const auto p = a * a;
  EXPECT_NEAR(p(0, 0), 0.82, 1e-15);
  EXPECT_NEAR(p(0, 1), 0.18, 1e-15);
  EXPECT_NEAR(p(1, 0), 0.18, 1e-15);
  EXPECT_NEAR(p(1, 1), 0.82, 1e-15);
  EXPECT_FALSE((StochasticMatrix{{0.5, 0.4}, {0.0, 1.0}}).is_stochastic());
}

TEST(WeightRule, BalancedExampleMatricesPass) {
  EXPECT_TRUE(validate_weight_rule(bundled::example1().graph, 0.1).empty());
  EXPECT_TRUE(validate_weight_rule(bundled::example2().graph, 0.1).empty());
}

TEST(WeightRule, ShortRowViolatesRowSumClause) {
  auto g = bundled::example1().graph;
  g.phases[0].a1(0, 1) = 0.3;  // row sums to 0.9
  const auto v = validate_weight_rule(g, 0.1);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].clause, WeightClause::row_sum);
  EXPECT_EQ(v[0].phase, 0u);
  EXPECT_EQ(v[0].node, 0u);
  EXPECT_NE(v[0].describe().find("A3(ii)"), std::string::npos);
}

TEST(WeightRule, CrossWeightsMustSumToOne) {
  auto g = bundled::example1().graph;
  g.phases[1].cross[1].weight = 0.4;  // x2 hears y0 at 0.5 and y1 at 0.4
  const auto v = validate_weight_rule(g, 0.1);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].clause, WeightClause::cross_sum);
  EXPECT_STREQ(clause_name(v[0].clause), "A3(iii)");
}

TEST(WeightRule, SmallWeightViolatesLowerBound) {
  auto g = bundled::example1().graph;
  g.phases[0].a2 = StochasticMatrix{{0.95, 0.05}, {0.1, 0.9}};
  const auto v = validate_weight_rule(g, 0.1);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].clause, WeightClause::lower_bound);
  EXPECT_EQ(v[0].subnet, Subnet::two);
}

TEST(WeightBalance, Examples) {
  EXPECT_TRUE(is_weight_balanced(StochasticMatrix{{0.6, 0.4, 0}, {0.4, 0.6, 0}, {0, 0, 1}}));
  EXPECT_FALSE(is_weight_balanced(StochasticMatrix{{0.8, 0.2, 0}, {0.7, 0.3, 0}, {0, 0.6, 0.4}}));
  EXPECT_TRUE(is_weight_balanced(StochasticMatrix::identity(4)));
}

TEST(Connectivity, UjscExamples) {
  const auto g = bundled::example1().graph;
  EXPECT_TRUE(check_ujsc(g, Subnet::one, 2));
  EXPECT_FALSE(check_ujsc(g, Subnet::one, 1));
  const StochasticMatrix cycle{{0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}};
  EXPECT_TRUE(check_ujsc(single_subnet({cycle}), Subnet::one, 1));
  const StochasticMatrix split{{1, 0, 0}, {0, 0.5, 0.5}, {0, 0.5, 0.5}};
  EXPECT_FALSE(check_ujsc(single_subnet({split, split}), Subnet::one, 5));
}

TEST(Connectivity, JointBipartite) {
  auto g = bundled::unbalanced_fixed().graph;  // full pairing each step
  EXPECT_TRUE(check_jointly_bipartite(g, 1));

  auto ex = bundled::example1().graph;
  EXPECT_TRUE(check_jointly_bipartite(ex, 2));
  EXPECT_FALSE(check_jointly_bipartite(ex, 1));

  // cross edges only in the even phase
  ex.phases[1].cross.clear();
  ex.phases[0].cross.push_back({Subnet::one, 0, 2, 1.0});
  EXPECT_TRUE(check_jointly_bipartite(ex, 2));

  // node x2 never hears the other subnet
  ex.phases[0].cross.pop_back();
  EXPECT_FALSE(check_jointly_bipartite(ex, 2));
}

TEST(TransitionProduct, SingleFactorAndHandProduct) {
  const auto g = bundled::example1().graph;
  EXPECT_EQ(transition_product(g, Subnet::one, 3, 3), g.matrix(Subnet::one, 3));
  const auto p = transition_product(g, Subnet::two, 1, 0);
  EXPECT_NEAR(p(0, 0), 0.82, 1e-15);
  EXPECT_NEAR(p(1, 0), 0.18, 1e-15);
  EXPECT_THROW(transition_product(g, Subnet::one, 0, 1), ContractError);
}

TEST(TransitionProduct, DoublyStochasticClosure) {
  const auto g = bundled::example1().graph;
  const auto p = transition_product(g, Subnet::one, 9, 0);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(p.column_sum(j), 1.0, 1e-12);
  EXPECT_TRUE(p.is_stochastic(1e-10));
}

TEST(LimitVector, UniformForDoublyStochastic) {
  const auto lv = limiting_stochastic_vector(bundled::example1().graph, Subnet::one, 0);
  expect_vec_near(lv.phi, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-9);
}

TEST(LimitVector, ExampleTwoValues) {
  const auto g = bundled::example2().graph;
  expect_vec_near(limiting_stochastic_vector(g, Subnet::two, 0).phi, {8.0 / 9, 1.0 / 9}, 1e-9);
  // products started in the odd phase converge to the vector used at even times
  expect_vec_near(limiting_stochastic_vector(g, Subnet::one, 1).phi, {0.5336, 0.1525, 0.3139}, 5e-5);
  expect_vec_near(limiting_stochastic_vector(g, Subnet::one, 0).phi, {0.5336, 0.3408, 0.1256}, 5e-5);
  // frozen from an independent power iteration of the period product
  expect_vec_near(limiting_stochastic_vector(g, Subnet::one, 1).phi, {0.53363228699551568, 0.15246636771300448, 0.31390134529147984}, 1e-8);
}

TEST(LimitVector, NotUjscIsDomainError) {
  const StochasticMatrix split{{1, 0, 0}, {0, 0.5, 0.5}, {0, 0.5, 0.5}};
  EXPECT_THROW(limiting_stochastic_vector(single_subnet({split}), Subnet::one, 0), DomainError);
}

TEST(LimitVector, CapExceededIsNonConvergence) {
  const StochasticMatrix slow{{0.999999, 0.000001}, {0.000001, 0.999999}};
  EXPECT_THROW(limit_of_products([&](std::size_t) -> const StochasticMatrix& { return slow; }, 0, 1e-12, 100, "slow"),
               NonConvergenceError);
}

TEST(Perron, Examples) {
  expect_vec_near(perron_vector(StochasticMatrix{{0.9, 0.1}, {0.8, 0.2}}).phi, {8.0 / 9, 1.0 / 9}, 1e-9);
  expect_vec_near(perron_vector(StochasticMatrix{{0.6, 0.4, 0}, {0.2, 0.6, 0.2}, {0.2, 0, 0.8}}).phi,
                  {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-9);
  const Vec mu{0.2, 0.3, 0.5};
  expect_vec_near(perron_vector(build_cycle_matrix(mu, 0.4)).phi, mu, 1e-9);
  EXPECT_THROW(perron_vector(StochasticMatrix::identity(2)), DomainError);
  EXPECT_THROW(perron_vector(StochasticMatrix{{0.5, 0.4}, {0.5, 0.5}}), ContractError);
}

TEST(Ergodicity, Examples) {
  EXPECT_DOUBLE_EQ(ergodicity_coefficient(StochasticMatrix{{0.3, 0.7}, {0.3, 0.7}}), 0.0);
  EXPECT_DOUBLE_EQ(ergodicity_coefficient(StochasticMatrix::identity(2)), 1.0);
  EXPECT_NEAR(ergodicity_coefficient(StochasticMatrix{{0.9, 0.1}, {0.8, 0.2}}), 0.1, 1e-15);
}

TEST(CycleMatrix, UniformCase) {
  const Vec mu{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto b = build_cycle_matrix(mu, 0.5);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_NEAR(b(r, r), 0.5, 1e-15);
    EXPECT_NEAR(b(r, (r + 1) % 3), 0.5, 1e-15);
  }
}

TEST(CycleMatrix, HandSolvedCase) {
  const Vec mu{0.25, 0.25, 0.5};
  const auto b = build_cycle_matrix(mu, 0.5);
  EXPECT_NEAR(b(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(b(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(b(2, 2), 0.75, 1e-15);
  EXPECT_NEAR(b(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(b(1, 2), 0.5, 1e-15);
  EXPECT_NEAR(b(2, 0), 0.25, 1e-15);
  const Vec left = b.left_multiply(mu);
  expect_vec_near(left, mu, 1e-15);
}

TEST(CycleMatrix, MinimumNotFirst) {
  const Vec mu{0.5, 0.2, 0.3};
  const auto b = build_cycle_matrix(mu, 0.5);
  EXPECT_NEAR(b(1, 1), 0.5, 1e-15);
  expect_vec_near(b.left_multiply(mu), mu, 1e-15);
  EXPECT_TRUE(is_strongly_connected(b));
}

TEST(CycleMatrix, Errors) {
  EXPECT_THROW(build_cycle_matrix(Vec{0.5, 0.6}, 0.5), DomainError);
  EXPECT_THROW(build_cycle_matrix(Vec{1.0, 0.0}, 0.5), DomainError);
  EXPECT_THROW(build_cycle_matrix(Vec{0.5, 0.5}, 1.0), DomainError);
  EXPECT_EQ(build_cycle_matrix(Vec{1.0}, 0.5), StochasticMatrix::identity(1));
}

TEST(Disagreement, Examples) {
  EXPECT_DOUBLE_EQ(disagreement_span(std::vector<Vec>{{1}, {-1}, {0.5}}), 2.0);
  EXPECT_DOUBLE_EQ(disagreement_span(std::vector<Vec>{{0.3, 1}, {0.3, 1}}), 0.0);
  EXPECT_DOUBLE_EQ(disagreement_span(std::vector<Vec>{{0, 0}, {3, 4}}), 5.0);
  EXPECT_THROW(disagreement_span(std::vector<Vec>{}), ContractError);
}

TEST(GeometricBound, Constants) {
  const auto b = GeometricRateBound::from(0.1, 3, 2);
  EXPECT_EQ(b.m, 4u);
  const double em = 1e-4;
  EXPECT_NEAR(b.c, 2 * (1 + 1 / em) / (1 - em), 1e-6);
  EXPECT_NEAR(b.rho, std::pow(1 - em, 0.25), 1e-15);
}

TEST(LimitVector, LowerBoundOnExamples) {
  for (const auto& s : {bundled::example1(), bundled::example2()})
    for (Subnet sub : {Subnet::one, Subnet::two})
      for (std::size_t p = 0; p < 2; ++p) {
        const auto lv = limiting_stochastic_vector(s.graph, sub, p);
        const double floor = std::pow(s.graph.eta, static_cast<double>((s.graph.size(sub) - 1) * s.graph.window(sub)));
        for (double v : lv.phi) EXPECT_GE(v, floor);
      }
}

TEST(InferEta, SmallestPositiveWeight) {
  EXPECT_DOUBLE_EQ(infer_eta(bundled::example2().graph), 0.1);
}
