#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cbd/coupling.hpp"
#include "cbd/lp.hpp"
#include "cbd/model.hpp"

namespace cbd {

inline constexpr std::size_t kDefaultMaxColumns = std::size_t{1} << 20;

struct AnalysisOptions {
  std::size_t max_columns = kDefaultMaxColumns;
  const ConnectionCouplingRule* rule = nullptr;  // null means maximal couplings
  SolverOptions solver;

  const ConnectionCouplingRule& coupling_rule() const { return rule ? *rule : default_coupling_rule(); }
};

/// Space of hidden outcomes: one digit per cell in canonical cell order, the
/// first cell most significant. Throws OutcomeSpaceTooLarge above the cap.
TupleSpace hidden_outcome_space(const CCSystem& s, std::size_t max_columns = kDefaultMaxColumns);

/// Human-readable form of one hidden outcome, e.g. "c1[q1=+1 q2=-1] c2[...]".
std::string describe_outcome(const CCSystem& s, std::span<const std::uint32_t> outcome);

struct AssociatedSystem {
  LinearSystem system;
  TupleSpace outcomes;
  std::size_t bunch_rows = 0;  // rows [0, bunch_rows) come from bunches
  std::vector<MaximalCouplingSpec> couplings;
};

/// M Q = P: one row per (context, bunch value) followed by one row per
/// (content, all-equal value) with the coupling's diagonal mass.
AssociatedSystem build_associated_system(const CCSystem& s, const AnalysisOptions& options = {});

struct Verdict {
  bool contextual = false;
  std::optional<Distribution> coupling;             // over hidden outcomes, when noncontextual
  std::optional<std::vector<Rational>> certificate;  // Farkas vector, when contextual
  AssociatedSystem associated;
  std::size_t pivots = 0;
};

Verdict decide_contextuality(const CCSystem& s, const AnalysisOptions& options = {});

struct ExpandedSystem {
  LinearSystem system;
  TupleSpace outcomes;
  std::size_t bunch_marginal_rows = 0;       // rows after the all-ones row
  std::size_t connection_marginal_rows = 0;  // trailing rows
};

/// M* Q = P*: the all-ones row, then bunch r-marginals (r >= 1), then
/// connection r-marginals (r >= 2) of the supplied full couplings, always
/// leaving out the top value index of each variable.
ExpandedSystem build_expanded_system(const CCSystem& s, std::span<const Distribution> completions,
                                     const AnalysisOptions& options = {});

/// Signed masses over hidden outcomes.
class QuasiCoupling {
 public:
  QuasiCoupling() = default;
  QuasiCoupling(TupleSpace outcomes, std::vector<Rational> masses);

  const TupleSpace& outcomes() const noexcept { return outcomes_; }
  const std::vector<Rational>& masses() const noexcept { return masses_; }
  const Rational& total_variation() const noexcept { return total_variation_; }
  Rational sum() const;

 private:
  TupleSpace outcomes_;
  std::vector<Rational> masses_;
  Rational total_variation_;
};

struct MeasureResult {
  Rational total_variation;
  Rational measure;  // total_variation - 1
  QuasiCoupling witness;
  std::size_t pivots = 0;
};

/// Minimum total variation over maximally connected quasi-couplings, found by
/// minimizing sum(Q2) subject to (M | -M)(Q1; Q2) = P, Q1, Q2 >= 0.
MeasureResult contextuality_measure(const CCSystem& s, const AnalysisOptions& options = {});

struct QuasiCouplingCheck {
  bool sums_to_one = false;
  bool bunches_match = false;
  bool connections_match = false;
  Rational total;
  Rational total_variation;
  std::vector<std::string> failures;  // labels of violated rows

  bool ok() const noexcept { return sums_to_one && bunches_match && connections_match; }
};

/// Checks a signed assignment against the system's bunch and connection
/// equations. Throws DimensionMismatch if `q` is not over s's outcome space.
QuasiCouplingCheck verify_quasi_coupling(const CCSystem& s, const QuasiCoupling& q,
                                         const AnalysisOptions& options = {});

}  // namespace cbd
