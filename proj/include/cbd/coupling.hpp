#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cbd/model.hpp"

namespace cbd {

/// Diagonal of a maximal coupling of one connection. `diagonal_masses[v]` is
/// the largest probability any coupling can put on "every member equals v",
/// which is the minimum over members of Pr[member = v].
struct MaximalCouplingSpec {
  std::optional<std::size_t> content;
  std::vector<Distribution> member_marginals;
  std::vector<Rational> diagonal_masses;
  Rational coincidence_probability;
};

/// Throws EmptyInput for no marginals, AlphabetMismatch when arities or
/// alphabet sizes differ.
MaximalCouplingSpec maximal_coupling_diagonal(std::span<const Distribution> marginals);

/// Full joint distribution completing the diagonal: off-diagonal tuples get
/// prod_i r_i(v_i) / (1 - m)^(n-1) with residuals r_i = p_i - diag.
Distribution maximal_coupling_full(const MaximalCouplingSpec& spec);

/// Constraint placed on how each connection, taken separately, is coupled.
/// The analysis only needs the all-equal probabilities and, for the expanded
/// system, one full joint that honours them.
class ConnectionCouplingRule {
 public:
  virtual ~ConnectionCouplingRule() = default;
  virtual std::string_view name() const = 0;
  virtual MaximalCouplingSpec constrain(std::span<const Distribution> marginals) const = 0;
  virtual Distribution complete(const MaximalCouplingSpec& spec) const = 0;
};

class MaximalCouplingRule final : public ConnectionCouplingRule {
 public:
  std::string_view name() const override { return "maximal"; }
  MaximalCouplingSpec constrain(std::span<const Distribution> marginals) const override {
    return maximal_coupling_diagonal(marginals);
  }
  Distribution complete(const MaximalCouplingSpec& spec) const override { return maximal_coupling_full(spec); }
};

const ConnectionCouplingRule& default_coupling_rule();

/// Coupling specs for every connection of `s`, in content order.
std::vector<MaximalCouplingSpec> connection_couplings(const CCSystem& s,
                                                      const ConnectionCouplingRule& rule = default_coupling_rule());

/// Full couplings for every connection of `s`, in content order.
std::vector<Distribution> connection_completions(const CCSystem& s,
                                                 const ConnectionCouplingRule& rule = default_coupling_rule());

}  // namespace cbd
