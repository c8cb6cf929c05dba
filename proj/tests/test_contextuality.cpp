#include <gtest/gtest.h>

#include <random>

#include "cbd/contextuality.hpp"
#include "cbd/error.hpp"
#include "cbd/ingestion.hpp"
#include "oracles.hpp"

using cbd::Rational;

namespace {

using Ones = std::vector<std::size_t>;

std::vector<Rational> indicator(const Ones& ones, std::size_t n) {
  std::vector<Rational> row(n);
  for (auto j : ones) row[j] = 1;
  return row;
}

std::vector<Rational> row_of(const cbd::LinearSystem& m, std::size_t i) {
  const auto r = m.row(i);
  return {r.begin(), r.end()};
}

// Columns of the 12 x 16 matrix for the rank-2 system.
const std::vector<Ones> kFigEightM{
    {0, 1, 2, 3},   {4, 5, 6, 7},   {8, 9, 10, 11}, {12, 13, 14, 15},
    {0, 4, 8, 12},  {1, 5, 9, 13},  {2, 6, 10, 14}, {3, 7, 11, 15},
    {0, 1, 4, 5},   {10, 11, 14, 15}, {0, 2, 8, 10}, {5, 7, 13, 15},
};

std::vector<Rational> half_mass_q() {
  const Rational h(1, 2);
  return {0, 0, 0, h, 0, h, 0, -h, 0, 0, h, -h, 0, 0, 0, h};
}

std::vector<Rational> minimal_tv_q() {
  return {Rational(35, 256), Rational(69, 256), Rational(11, 32), Rational(-1, 4),
          Rational(-1, 8),   Rational(7, 32),   Rational(-1, 16), Rational(-1, 32),
          Rational(-1, 128), Rational(-1, 64),  Rational(7, 256), Rational(-1, 256),
          Rational(-1, 256), Rational(7, 256),  Rational(49, 256), Rational(73, 256)};
}

// Digit d (0 = most significant) of a 4-bit hidden outcome index.
std::uint32_t digit(std::size_t index, std::size_t d) { return (index >> (3 - d)) & 1U; }

Ones where(const std::function<bool(std::size_t)>& pred) {
  Ones out;
  for (std::size_t j = 0; j < 16; ++j) {
    if (pred(j)) out.push_back(j);
  }
  return out;
}

std::vector<Ones> expected_m_star() {
  // Cells in order: (c1,q1), (c1,q2), (c2,q1), (c2,q2); value 0 codes +1.
  std::vector<Ones> rows;
  rows.push_back(where([](std::size_t) { return true; }));
  for (std::size_t d = 0; d < 4; ++d) rows.push_back(where([d](std::size_t j) { return digit(j, d) == 0; }));
  rows.push_back(where([](std::size_t j) { return digit(j, 0) == 0 && digit(j, 1) == 0; }));
  rows.push_back(where([](std::size_t j) { return digit(j, 2) == 0 && digit(j, 3) == 0; }));
  rows.push_back(where([](std::size_t j) { return digit(j, 0) == 0 && digit(j, 2) == 0; }));
  rows.push_back(where([](std::size_t j) { return digit(j, 1) == 0 && digit(j, 3) == 0; }));
  return rows;
}

cbd::ExpandedSystem expanded(const cbd::CCSystem& s) {
  const auto completions = cbd::connection_completions(s);
  return cbd::build_expanded_system(s, completions);
}

bool farkas_holds(const cbd::LinearSystem& sys, const std::vector<Rational>& y) {
  for (std::size_t j = 0; j < sys.cols(); ++j) {
    Rational t;
    for (std::size_t i = 0; i < sys.rows(); ++i) t += y[i] * sys.at(i, j);
    if (t.sign() > 0) return false;
  }
  Rational p;
  for (std::size_t i = 0; i < sys.rows(); ++i) p += y[i] * sys.rhs()[i];
  return p.sign() > 0;
}

}  // namespace

TEST(AssociatedSystem, RankTwoMatrixRowForRow) {
  const auto a = cbd::build_associated_system(cbd::example_system("fig9"));
  ASSERT_EQ(a.system.rows(), 12U);
  ASSERT_EQ(a.system.cols(), 16U);
  EXPECT_EQ(a.bunch_rows, 8U);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(row_of(a.system, i), indicator(kFigEightM[i], 16)) << "row " << i;
  const Rational h(1, 2);
  EXPECT_EQ(a.system.rhs(), (std::vector<Rational>{h, 0, 0, h, 0, h, h, 0, h, h, h, h}));
}

TEST(AssociatedSystem, SingleBinaryVariable) {
  cbd::RawSystem raw;
  raw.contents = {oracle::binary("q")};
  raw.contexts = {{"c", {"q"}, {{{0}, Rational(1, 3)}, {{1}, Rational(2, 3)}}}};
  const auto s = cbd::validate_system(raw);
  const auto a = cbd::build_associated_system(s);
  EXPECT_EQ(a.system.rows(), 4U);
  EXPECT_EQ(a.system.cols(), 2U);
  EXPECT_FALSE(cbd::decide_contextuality(s).contextual);
}

TEST(AssociatedSystem, SzlgShape) {
  const auto a = cbd::build_associated_system(cbd::example_system("szlg"));
  EXPECT_EQ(a.bunch_rows, 3U * 4U);
  EXPECT_EQ(a.system.rows(), 3U * 4U + 3U * 2U);
  EXPECT_EQ(a.system.cols(), 64U);
}

TEST(AssociatedSystem, BunchRowsOfOneContextSumToOnes) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = oracle::random_cyclic_system(rng, 2 + trial % 3, 64);
    const auto a = cbd::build_associated_system(s);
    std::size_t row = 0;
    for (const auto& ctx : s.contexts()) {
      std::vector<Rational> sum(a.system.cols());
      Rational rhs;
      for (std::size_t k = 0; k < ctx.bunch.space().size(); ++k, ++row) {
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += a.system.at(row, j);
        rhs += a.system.rhs()[row];
      }
      EXPECT_EQ(sum, std::vector<Rational>(a.system.cols(), Rational(1)));
      EXPECT_EQ(rhs, Rational(1));
    }
  }
}

TEST(AssociatedSystem, OutcomeCap) {
  cbd::AnalysisOptions tiny;
  tiny.max_columns = 8;
  try {
    cbd::build_associated_system(cbd::example_system("fig9"), tiny);
    FAIL();
  } catch (const cbd::Error& e) {
    EXPECT_EQ(e.code(), cbd::ErrorCode::OutcomeSpaceTooLarge);
  }
}

TEST(Decide, BundledExamples) {
  const auto fig9 = cbd::decide_contextuality(cbd::example_system("fig9"));
  EXPECT_TRUE(fig9.contextual);
  ASSERT_TRUE(fig9.certificate.has_value());
  EXPECT_TRUE(farkas_holds(fig9.associated.system, *fig9.certificate));
  EXPECT_FALSE(fig9.coupling.has_value());

  EXPECT_TRUE(cbd::decide_contextuality(cbd::example_system("szlg")).contextual);

  const auto flat = cbd::decide_contextuality(cbd::example_system("fig14", Rational(1, 2)));
  EXPECT_FALSE(flat.contextual);
  ASSERT_TRUE(flat.coupling.has_value());
  EXPECT_FALSE(flat.certificate.has_value());
}

TEST(Decide, CouplingReproducesBunchesAndDiagonals) {
  std::mt19937_64 rng(37);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto s = oracle::random_cyclic_system(rng, 2 + trial % 3, 32);
    const auto v = cbd::decide_contextuality(s);
    if (v.contextual) {
      EXPECT_TRUE(farkas_holds(v.associated.system, *v.certificate));
      continue;
    }
    ++checked;
    const auto& q = *v.coupling;
    for (std::size_t c = 0; c < s.contexts().size(); ++c) {
      std::vector<std::size_t> cells;
      for (std::size_t p = 0; p < s.contexts()[c].contents.size(); ++p) cells.push_back(s.cell_index(c, p));
      const auto& bunch = s.contexts()[c].bunch;
      EXPECT_EQ(oracle::marginal(q, cells), std::vector<Rational>(bunch.masses().begin(), bunch.masses().end()));
    }
    const auto specs = cbd::connection_couplings(s);
    for (const auto& conn : s.connections()) {
      std::vector<std::size_t> cells;
      for (const auto& m : conn.members) cells.push_back(s.cell_index(m.context, m.position));
      const auto joint = oracle::marginal(q, cells);
      const cbd::TupleSpace space(std::vector<std::uint32_t>(cells.size(), 2));
      for (std::uint32_t l = 0; l < 2; ++l) {
        EXPECT_EQ(joint[space.index_of(cbd::ValueTuple(cells.size(), l))], specs[conn.content].diagonal_masses[l]);
      }
    }
    const cbd::QuasiCoupling as_quasi(q.space(), {q.masses().begin(), q.masses().end()});
    const auto check = cbd::verify_quasi_coupling(s, as_quasi);
    EXPECT_TRUE(check.ok());
    EXPECT_EQ(check.total_variation, Rational(1));
  }
  EXPECT_GT(checked, 5);
}

TEST(ExpandedSystem, RankTwoMatrixShapeAndRows) {
  const auto s = cbd::example_system("fig9");
  const auto e = expanded(s);
  ASSERT_EQ(e.system.rows(), 9U);
  ASSERT_EQ(e.system.cols(), 16U);
  EXPECT_EQ(e.bunch_marginal_rows, 6U);
  EXPECT_EQ(e.connection_marginal_rows, 2U);
  const auto rows = expected_m_star();
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(row_of(e.system, i), indicator(rows[i], 16)) << "row " << i;
  const Rational h(1, 2);
  EXPECT_EQ(e.system.rhs(), (std::vector<Rational>{1, h, h, h, h, h, 0, h, h}));
  EXPECT_EQ(oracle::rank(oracle::dense(e.system)), 9U);
}

TEST(ExpandedSystem, RowsIndependentOfTheCompletion) {
  // Rows 0, 1 and 4-8 as 0-based column lists.
  const std::vector<std::pair<std::size_t, Ones>> known{
      {0, where([](std::size_t) { return true; })},
      {1, {0, 1, 2, 3, 4, 5, 6, 7}},
      {4, {0, 2, 4, 6, 8, 10, 12, 14}},
      {5, {0, 1, 2, 3}},
      {6, {0, 4, 8, 12}},
      {7, {0, 1, 4, 5}},
      {8, {0, 2, 8, 10}},
  };
  const auto e = expanded(cbd::example_system("fig1"));
  for (const auto& [i, ones] : known) EXPECT_EQ(row_of(e.system, i), indicator(ones, 16)) << "row " << i;
}

TEST(ExpandedSystem, KnownQuasiCouplingsSolveBothSystems) {
  const auto s = cbd::example_system("fig9");
  const auto e = expanded(s);
  const auto a = cbd::build_associated_system(s);
  for (const auto& q : {half_mass_q(), minimal_tv_q()}) {
    EXPECT_EQ(e.system.multiply(q), e.system.rhs());
    EXPECT_EQ(a.system.multiply(q), a.system.rhs());
    const auto check = cbd::verify_quasi_coupling(s, cbd::QuasiCoupling(a.outcomes, q));
    EXPECT_TRUE(check.ok());
    EXPECT_EQ(check.total, Rational(1));
  }
  EXPECT_EQ(cbd::QuasiCoupling(a.outcomes, minimal_tv_q()).total_variation(), Rational(2));
}

TEST(ExpandedSystem, RowsAreIndependentAndSolutionsCarryOver) {
  std::mt19937_64 rng(41);
  std::vector<cbd::CCSystem> corpus;
  for (const auto& name : cbd::example_names()) corpus.push_back(cbd::example_system(name));
  for (int trial = 0; trial < 40; ++trial) corpus.push_back(oracle::random_cyclic_system(rng, 2 + trial % 3, 16));
  for (const auto& s : corpus) {
    const auto e = expanded(s);
    const auto m_star = oracle::dense(e.system);
    EXPECT_EQ(oracle::rank(m_star), e.system.rows());
    const auto q = oracle::particular_solution(m_star, e.system.rhs());
    ASSERT_TRUE(q.has_value());
    const auto a = cbd::build_associated_system(s);
    EXPECT_EQ(a.system.multiply(*q), a.system.rhs());
  }
}

TEST(Measure, OppositeCorrelations) {
  const auto m = cbd::contextuality_measure(cbd::example_system("fig9"));
  EXPECT_EQ(m.total_variation, Rational(2));
  EXPECT_EQ(m.measure, Rational(1));
  EXPECT_EQ(m.witness.sum(), Rational(1));
  EXPECT_TRUE(cbd::verify_quasi_coupling(cbd::example_system("fig9"), m.witness).ok());
}

TEST(Measure, LinearInP) {
  for (const auto& p : {Rational(0), Rational(1, 8), Rational(1, 4), Rational(3, 8), Rational(1, 2)}) {
    const auto s = cbd::example_system("fig14", p);
    const auto m = cbd::contextuality_measure(s);
    EXPECT_EQ(m.total_variation, Rational(2) * (Rational(1) - p)) << p;
    EXPECT_EQ(cbd::decide_contextuality(s).contextual, p != Rational(1, 2));
  }
}

TEST(Measure, ZeroExactlyWhenNoncontextual) {
  std::mt19937_64 rng(43);
  int contextual = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const auto s = oracle::random_cyclic_system(rng, 2 + trial % 3, 24);
    const auto v = cbd::decide_contextuality(s);
    const auto m = cbd::contextuality_measure(s);
    EXPECT_EQ(m.measure.is_zero(), !v.contextual);
    EXPECT_GE(m.total_variation, Rational(1));
    EXPECT_TRUE(cbd::verify_quasi_coupling(s, m.witness).ok());
    contextual += v.contextual ? 1 : 0;
  }
  EXPECT_GT(contextual, 5);
}

TEST(Measure, TrivialShapesHaveMeasureZero) {
  for (const char* name : {"a-prime", "a-double-prime", "a-triple-prime", "fig1"}) {
    EXPECT_EQ(cbd::contextuality_measure(cbd::example_system(name)).measure, Rational(0)) << name;
  }
}

TEST(VerifyQuasiCoupling, ZeroMassesFailTheSum) {
  const auto s = cbd::example_system("fig9");
  const auto a = cbd::build_associated_system(s);
  const auto check = cbd::verify_quasi_coupling(s, cbd::QuasiCoupling(a.outcomes, std::vector<Rational>(16)));
  EXPECT_FALSE(check.sums_to_one);
  EXPECT_FALSE(check.ok());
  EXPECT_FALSE(check.failures.empty());
}

TEST(VerifyQuasiCoupling, WrongSpace) {
  const auto s = cbd::example_system("fig9");
  const cbd::QuasiCoupling q(cbd::TupleSpace({2, 2}), std::vector<Rational>(4));
  EXPECT_THROW(cbd::verify_quasi_coupling(s, q), cbd::Error);
}

TEST(DescribeOutcome, NamesEveryCell) {
  const auto s = cbd::example_system("fig9");
  EXPECT_EQ(cbd::describe_outcome(s, std::vector<std::uint32_t>{0, 1, 1, 0}), "c1[q1=+1 q2=-1] c2[q1=-1 q2=+1]");
}
