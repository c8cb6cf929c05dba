#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cbd/contextuality.hpp"
#include "cbd/cyclic.hpp"
#include "cbd/error.hpp"
#include "cbd/ingestion.hpp"
#include "oracles.hpp"

using cbd::Distribution;
using cbd::Rational;

namespace {

std::vector<cbd::CyclicView> cycles_of(const cbd::CCSystem& s) {
  auto d = cbd::detect_cycles(s);
  EXPECT_TRUE(std::holds_alternative<std::vector<cbd::CyclicView>>(d));
  return std::get<std::vector<cbd::CyclicView>>(d);
}

std::vector<Rational> rs(std::initializer_list<long> xs) { return {xs.begin(), xs.end()}; }

}  // namespace

TEST(SOdd, TextbookExamples) {
  EXPECT_EQ(cbd::s_odd(rs({5, 6})), Rational(1));
  EXPECT_EQ(cbd::s_odd(rs({5, -6})), Rational(11));
  EXPECT_EQ(cbd::s_odd(rs({1, 2, -3, -10, 100})), Rational(114));
  EXPECT_EQ(cbd::s_odd(rs({-1, -1, -1, -1})), Rational(2));
  EXPECT_EQ(cbd::s_odd(rs({0, 0, 0})), Rational(0));
  EXPECT_EQ(cbd::s_odd(rs({0, 3})), Rational(3));
  EXPECT_EQ(cbd::s_odd(rs({7})), Rational(-7));
  EXPECT_THROW(cbd::s_odd(std::vector<Rational>{}), cbd::Error);
}

TEST(SOdd, ClosedFormMatchesEnumeration) {
  std::mt19937_64 rng(47);
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_int_distribution<long> num(-20, 20);
  std::uniform_int_distribution<long> den(1, 7);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Rational> xs(len(rng));
    for (auto& x : xs) x = Rational(num(rng), den(rng));
    EXPECT_EQ(cbd::s_odd(xs), oracle::s_odd(xs));
  }
}

TEST(SOdd, SymmetricInItsArguments) {
  std::mt19937_64 rng(53);
  std::uniform_int_distribution<long> num(-9, 9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Rational> xs(5);
    for (auto& x : xs) x = num(rng);
    const auto base = cbd::s_odd(xs);
    std::shuffle(xs.begin(), xs.end(), rng);
    EXPECT_EQ(cbd::s_odd(xs), base);
  }
}

TEST(Expectation, BinaryExamples) {
  EXPECT_EQ(cbd::expectation(Distribution({2}, {Rational(1, 2), Rational(1, 2)})), Rational(0));
  EXPECT_EQ(cbd::expectation(Distribution({2}, {Rational(7, 10), Rational(3, 10)})), Rational(2, 5));
  EXPECT_EQ(cbd::expectation(Distribution({2}, {Rational(1), Rational(0)})), Rational(1));
  EXPECT_EQ(cbd::expectation(Distribution({2}, {Rational(7, 10), Rational(3, 10)}), 1), Rational(-2, 5));
  EXPECT_THROW(cbd::expectation(Distribution({3}, {Rational(1), Rational(0), Rational(0)})), cbd::Error);
}

TEST(ProductExpectation, Examples) {
  const Rational h(1, 2);
  const Rational q(1, 4);
  EXPECT_EQ(cbd::product_expectation(Distribution({2, 2}, {h, 0, 0, h})), Rational(1));
  EXPECT_EQ(cbd::product_expectation(Distribution({2, 2}, {0, h, h, 0})), Rational(-1));
  EXPECT_EQ(cbd::product_expectation(Distribution({2, 2}, {q, q, q, q})), Rational(0));
  EXPECT_THROW(cbd::product_expectation(Distribution({2}, {h, h})), cbd::Error);
}

TEST(DetectCycles, BundledSystems) {
  const auto a = cycles_of(cbd::example_system("fig1"));
  ASSERT_EQ(a.size(), 1U);
  EXPECT_EQ(a[0].rank, 2U);

  const auto z = cycles_of(cbd::example_system("szlg"));
  ASSERT_EQ(z.size(), 1U);
  EXPECT_EQ(z[0].rank, 3U);
  EXPECT_EQ(z[0].contents, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(z[0].contexts, (std::vector<std::size_t>{0, 1, 2}));

  const auto b = cbd::detect_cycles(cbd::example_system("figB"));
  ASSERT_TRUE(std::holds_alternative<cbd::NotCyclic>(b));
  EXPECT_EQ(std::get<cbd::NotCyclic>(b).violation, cbd::CyclicViolation::ContextNotPair);
}

TEST(DetectCycles, OtherViolations) {
  cbd::RawSystem raw;
  raw.contents = {oracle::binary("q1"), oracle::binary("q2"), oracle::binary("q3")};
  const std::vector<std::pair<cbd::ValueTuple, Rational>> point{{{0, 0}, Rational(1)}};
  raw.contexts = {{"c1", {"q1", "q2"}, point}, {"c2", {"q2", "q3"}, point}};
  const auto open = cbd::detect_cycles(cbd::validate_system(raw));
  EXPECT_EQ(std::get<cbd::NotCyclic>(open).violation, cbd::CyclicViolation::ContentNotInTwo);

  cbd::RawSystem ternary;
  ternary.contents = {{"q1", {"a", "b", "c"}, std::nullopt}, oracle::binary("q2")};
  ternary.contexts = {{"c1", {"q1", "q2"}, point}, {"c2", {"q1", "q2"}, point}};
  const auto t = cbd::detect_cycles(cbd::validate_system(ternary));
  EXPECT_EQ(std::get<cbd::NotCyclic>(t).violation, cbd::CyclicViolation::NotBinary);
}

TEST(DetectCycles, DisjointCyclesAndOrientation) {
  // Two rank-2 cycles, contents listed so that the smallest neighbour decides
  // the direction of travel.
  cbd::RawSystem raw;
  for (const char* q : {"a", "b", "c", "d", "e"}) raw.contents.push_back(oracle::binary(q));
  const std::vector<std::pair<cbd::ValueTuple, Rational>> u{
      {{0, 0}, Rational(1, 4)}, {{0, 1}, Rational(1, 4)}, {{1, 0}, Rational(1, 4)}, {{1, 1}, Rational(1, 4)}};
  raw.contexts = {{"x1", {"a", "d"}, u}, {"x2", {"d", "e"}, u}, {"x3", {"e", "a"}, u},
                  {"y1", {"b", "c"}, u}, {"y2", {"b", "c"}, u}};
  const auto views = cycles_of(cbd::validate_system(raw));
  ASSERT_EQ(views.size(), 2U);
  EXPECT_EQ(views[0].contents, (std::vector<std::size_t>{0, 3, 4}));  // a -> d -> e
  EXPECT_EQ(views[0].contexts, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(views[1].contents, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(views[1].contexts, (std::vector<std::size_t>{3, 4}));
}

TEST(DetectCycles, PlusValueDefaultsToTheLargerLabel) {
  EXPECT_EQ(cbd::plus_value_of({"q", {"no", "yes"}, std::nullopt}), 1U);
  EXPECT_EQ(cbd::plus_value_of({"q", {"no", "yes"}, 0U}), 0U);
}

TEST(Criterion, OppositeCorrelationsByHand) {
  const auto s = cbd::example_system("fig9");
  const auto r = cbd::evaluate_criterion(cycles_of(s)[0], s);
  // s_odd(1, -1) = 1 - (-1) = 2; all marginals are 1/2, so rhs = n - 2 = 0.
  EXPECT_EQ(r.lhs, Rational(2));
  EXPECT_EQ(r.rhs, Rational(0));
  EXPECT_EQ(r.delta, Rational(2));
  EXPECT_TRUE(r.contextual);
}

TEST(Criterion, Szlg) {
  const auto s = cbd::example_system("szlg");
  const auto r = cbd::evaluate_criterion(cycles_of(s)[0], s);
  EXPECT_EQ(r.product_expectations, (std::vector<Rational>{Rational(1), Rational(1), Rational(-1, 5)}));
  EXPECT_EQ(r.lhs, Rational(11, 5));
  EXPECT_EQ(r.rhs, Rational(1));
  EXPECT_TRUE(r.contextual);
}

TEST(Criterion, ApproximatedSingletExpectations) {
  const double c = std::numbers::sqrt2 / 2;
  std::vector<Rational> products;
  for (double x : {-c, -c, c, -c}) products.push_back(Rational::approximate(x, 1'000'000));
  const std::vector<Rational> zero(4);
  const auto r = cbd::evaluate_criterion(products, zero);
  EXPECT_NEAR(r.lhs.to_double(), 2 * std::numbers::sqrt2, 1e-5);
  EXPECT_EQ(r.rhs, Rational(2));
  EXPECT_TRUE(r.contextual);
}

TEST(Criterion, EqualProductsInRankTwoNeverContextual) {
  std::mt19937_64 rng(59);
  std::uniform_int_distribution<long> k(0, 64);
  for (int trial = 0; trial < 100; ++trial) {
    // Tables [[a, b], [c, d]] with a + d fixed share the product a - b - c + d.
    const long den = 64;
    const long diag = k(rng);
    const long a1 = std::uniform_int_distribution<long>(0, diag)(rng);
    const long a2 = std::uniform_int_distribution<long>(0, diag)(rng);
    const long b1 = std::uniform_int_distribution<long>(0, den - diag)(rng);
    const long b2 = std::uniform_int_distribution<long>(0, den - diag)(rng);
    const auto s = oracle::cyclic_system({
        {Rational(a1, den), Rational(b1, den), Rational(den - diag - b1, den), Rational(diag - a1, den)},
        {Rational(a2, den), Rational(b2, den), Rational(den - diag - b2, den), Rational(diag - a2, den)},
    });
    const auto r = cbd::evaluate_criterion(cycles_of(s)[0], s);
    EXPECT_EQ(r.product_expectations[0], r.product_expectations[1]);
    EXPECT_EQ(r.lhs, Rational(0));
    EXPECT_FALSE(r.contextual);
    EXPECT_FALSE(cbd::decide_contextuality(s).contextual);
  }
}

TEST(Criterion, AgreesWithTheLinearProgram) {
  std::mt19937_64 rng(61);
  int contextual = 0;
  int total = 0;
  for (std::size_t rank = 2; rank <= 5; ++rank) {
    for (int trial = 0; trial < 30; ++trial) {
      const auto s = oracle::random_cyclic_system(rng, rank, 64);
      const auto r = cbd::evaluate_criterion(cycles_of(s)[0], s);
      const auto v = cbd::decide_contextuality(s);
      EXPECT_EQ(r.contextual, v.contextual) << "rank " << rank << " trial " << trial;
      contextual += v.contextual ? 1 : 0;
      ++total;
    }
  }
  EXPECT_GT(contextual, total / 10);
  EXPECT_LT(contextual, total);
}

TEST(Criterion, ConsistentSystemsHaveRhsNMinusTwo) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 4;
    std::vector<std::vector<Rational>> tables;
    for (std::size_t i = 0; i < n; ++i) tables.push_back(oracle::random_uniform_table(rng, 64));
    const auto s = oracle::cyclic_system(tables);
    const auto r = cbd::evaluate_criterion(cycles_of(s)[0], s);
    EXPECT_EQ(r.rhs, Rational(static_cast<long>(n) - 2));
    std::vector<Rational> products;
    for (const auto& t : tables) products.push_back(oracle::product(t));
    EXPECT_EQ(r.lhs, oracle::s_odd(products));
  }
}

TEST(Criterion, OrientationDoesNotChangeTheValue) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = oracle::random_cyclic_system(rng, 3 + trial % 3, 64);
    auto view = cycles_of(s)[0];
    const auto forward = cbd::evaluate_criterion(view, s);
    // Reverse the cycle: content i stays, contexts shift by one.
    cbd::CyclicView reversed = view;
    const std::size_t n = view.rank;
    for (std::size_t i = 0; i < n; ++i) {
      reversed.contents[i] = view.contents[(n - i) % n];
      reversed.plus_values[i] = view.plus_values[(n - i) % n];
      reversed.contexts[i] = view.contexts[(2 * n - i - 1) % n];
    }
    const auto backward = cbd::evaluate_criterion(reversed, s);
    EXPECT_EQ(forward.lhs, backward.lhs);
    EXPECT_EQ(forward.rhs, backward.rhs);
  }
}

TEST(Criterion, MismatchedSpans) {
  EXPECT_THROW(cbd::evaluate_criterion(rs({1, 2}), rs({0})), cbd::Error);
}
