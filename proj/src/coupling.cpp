#include "cbd/coupling.hpp"

#include "cbd/error.hpp"

namespace cbd {

MaximalCouplingSpec maximal_coupling_diagonal(std::span<const Distribution> marginals) {
  if (marginals.empty()) {
    throw Error(ErrorCode::EmptyInput, "a connection needs at least one member");
  }
  const auto& first = marginals.front();
  if (first.arity() != 1) {
    throw Error(ErrorCode::AlphabetMismatch, "member marginals must have arity 1");
  }
  const std::uint32_t k = first.alphabet_sizes()[0];
  for (const auto& m : marginals) {
    if (m.arity() != 1 || m.alphabet_sizes()[0] != k) {
      throw Error(ErrorCode::AlphabetMismatch, "connection members do not share one alphabet");
    }
  }

  MaximalCouplingSpec spec;
  spec.member_marginals.assign(marginals.begin(), marginals.end());
  spec.diagonal_masses.resize(k);
  for (std::uint32_t v = 0; v < k; ++v) {
    Rational lowest = first.mass_at(v);
    for (const auto& m : marginals) lowest = min(lowest, m.mass_at(v));
    spec.diagonal_masses[v] = lowest;
    spec.coincidence_probability += lowest;
  }
  return spec;
}

Distribution maximal_coupling_full(const MaximalCouplingSpec& spec) {
  const std::size_t n = spec.member_marginals.size();
  const auto k = static_cast<std::uint32_t>(spec.diagonal_masses.size());
  std::vector<std::uint32_t> sizes(n, k);
  TupleSpace space(sizes);
  std::vector<Rational> masses(space.size());

  // Diagonal cells.
  for (std::uint32_t v = 0; v < k; ++v) {
    ValueTuple diag(n, v);
    masses[space.index_of(diag)] = spec.diagonal_masses[v];
  }

  const Rational slack = Rational(1) - spec.coincidence_probability;
  if (!slack.is_zero() && n > 1) {
    std::vector<std::vector<Rational>> residual(n, std::vector<Rational>(k));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::uint32_t v = 0; v < k; ++v) {
        residual[i][v] = spec.member_marginals[i].mass_at(v) - spec.diagonal_masses[v];
      }
    }
    Rational scale(1);
    for (std::size_t i = 1; i < n; ++i) scale *= slack;

    ValueTuple t(n, 0);
    std::size_t index = 0;
    do {
      Rational product(1);
      for (std::size_t i = 0; i < n && !product.is_zero(); ++i) product *= residual[i][t[i]];
      // All-equal tuples always have a zero residual factor.
      if (!product.is_zero()) masses[index] += product / scale;
      ++index;
    } while (space.next(t));
  }
  return Distribution(std::move(sizes), std::move(masses));
}

const ConnectionCouplingRule& default_coupling_rule() {
  static const MaximalCouplingRule rule;
  return rule;
}

std::vector<MaximalCouplingSpec> connection_couplings(const CCSystem& s, const ConnectionCouplingRule& rule) {
  std::vector<MaximalCouplingSpec> out;
  out.reserve(s.connections().size());
  for (const auto& conn : s.connections()) {
    std::vector<Distribution> marginals;
    for (const auto& m : conn.members) marginals.push_back(s.variable_marginal(m));
    auto spec = rule.constrain(marginals);
    spec.content = conn.content;
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<Distribution> connection_completions(const CCSystem& s, const ConnectionCouplingRule& rule) {
  std::vector<Distribution> out;
  for (const auto& spec : connection_couplings(s, rule)) out.push_back(rule.complete(spec));
  return out;
}

}  // namespace cbd
