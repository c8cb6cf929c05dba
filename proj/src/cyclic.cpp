#include "cbd/cyclic.hpp"

#include <algorithm>

#include "cbd/error.hpp"

namespace cbd {

std::uint32_t plus_value_of(const ContentInfo& content) {
  if (content.plus_value) return *content.plus_value;
  const auto& labels = content.value_labels;
  return static_cast<std::uint32_t>(std::max_element(labels.begin(), labels.end()) - labels.begin());
}

CycleDetection detect_cycles(const CCSystem& s) {
  for (const auto& ctx : s.contexts()) {
    if (ctx.contents.size() != 2) {
      return NotCyclic{CyclicViolation::ContextNotPair, "context '" + ctx.label + "' holds " +
                                                            std::to_string(ctx.contents.size()) + " contents"};
    }
  }
  for (const auto& conn : s.connections()) {
    if (conn.members.size() != 2) {
      return NotCyclic{CyclicViolation::ContentNotInTwo, "content '" + s.contents()[conn.content].label +
                                                             "' appears in " + std::to_string(conn.members.size()) +
                                                             " contexts"};
    }
  }
  for (const auto& c : s.contents()) {
    if (c.alphabet_size() != 2) {
      return NotCyclic{CyclicViolation::NotBinary, "content '" + c.label + "' has " +
                                                       std::to_string(c.alphabet_size()) + " values"};
    }
  }

  const auto other_content = [&](std::size_t context, std::size_t content) {
    const auto& cs = s.contexts()[context].contents;
    return cs[0] == content ? cs[1] : cs[0];
  };

  std::vector<CyclicView> cycles;
  std::vector<bool> visited(s.contents().size(), false);
  for (std::size_t start = 0; start < s.contents().size(); ++start) {
    if (visited[start]) continue;
    const auto& members = s.connections()[start].members;
    std::size_t first_context = members[0].context;
    std::size_t second_context = members[1].context;
    const auto n0 = other_content(first_context, start);
    const auto n1 = other_content(second_context, start);
    if (n1 < n0) std::swap(first_context, second_context);

    CyclicView view;
    std::size_t content = start;
    std::size_t context = first_context;
    do {
      visited[content] = true;
      view.contents.push_back(content);
      view.contexts.push_back(context);
      view.plus_values.push_back(plus_value_of(s.contents()[content]));
      const auto next = other_content(context, content);
      const auto& next_members = s.connections()[next].members;
      context = next_members[0].context == context ? next_members[1].context : next_members[0].context;
      content = next;
    } while (content != start);
    view.rank = view.contents.size();
    cycles.push_back(std::move(view));
  }
  return cycles;
}

namespace {

void require_binary(const Distribution& d, std::size_t arity) {
  if (d.arity() != arity) {
    throw Error(ErrorCode::NotBinary, "expected a distribution of arity " + std::to_string(arity));
  }
  for (auto k : d.alphabet_sizes()) {
    if (k != 2) throw Error(ErrorCode::NotBinary, "expected binary variables");
  }
}

int coded(std::uint32_t value, std::uint32_t plus) { return value == plus ? 1 : -1; }

}  // namespace

Rational expectation(const Distribution& d, std::uint32_t plus_value) {
  require_binary(d, 1);
  if (plus_value > 1) throw Error(ErrorCode::NotBinary, "plus value must be 0 or 1");
  return d.mass_at(plus_value) - d.mass_at(1 - plus_value);
}

Rational product_expectation(const Distribution& d, std::uint32_t plus_first, std::uint32_t plus_second) {
  require_binary(d, 2);
  if (plus_first > 1 || plus_second > 1) throw Error(ErrorCode::NotBinary, "plus value must be 0 or 1");
  Rational total;
  for (std::uint32_t a = 0; a < 2; ++a) {
    for (std::uint32_t b = 0; b < 2; ++b) {
      const ValueTuple t{a, b};
      const auto& m = d.mass(t);
      if (coded(a, plus_first) * coded(b, plus_second) > 0) {
        total += m;
      } else {
        total -= m;
      }
    }
  }
  return total;
}

Rational s_odd(std::span<const Rational> xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptyInput, "s_odd needs at least one argument");
  Rational total;
  Rational smallest = abs(xs[0]);
  std::size_t negatives = 0;
  for (const auto& x : xs) {
    const Rational a = abs(x);
    total += a;
    smallest = min(smallest, a);
    if (x.sign() < 0) ++negatives;
  }
  // Signs matching each argument give |x| everywhere; if that leaves an even
  // number of minuses, the cheapest fix flips the smallest magnitude.
  if (negatives % 2 == 0) total -= Rational(2) * smallest;
  return total;
}

CriterionReport evaluate_criterion(std::span<const Rational> products, std::span<const Rational> marginal_differences) {
  if (products.size() != marginal_differences.size()) {
    throw Error(ErrorCode::DimensionMismatch, "need one marginal difference per product expectation");
  }
  CriterionReport r;
  r.rank = products.size();
  r.product_expectations.assign(products.begin(), products.end());
  r.marginal_differences.assign(marginal_differences.begin(), marginal_differences.end());
  r.lhs = s_odd(products);
  r.rhs = Rational(static_cast<long>(r.rank)) - Rational(2);
  for (const auto& d : marginal_differences) r.rhs += d;
  r.delta = r.lhs - r.rhs;
  r.contextual = r.delta.sign() > 0;
  return r;
}

CriterionReport evaluate_criterion(const CyclicView& view, const CCSystem& s) {
  const std::size_t n = view.rank;
  std::vector<Rational> products(n);
  std::vector<Rational> differences(n);
  const auto plus_of = [&](std::size_t content) {
    const auto it = std::find(view.contents.begin(), view.contents.end(), content);
    return view.plus_values[static_cast<std::size_t>(it - view.contents.begin())];
  };
  const auto variable_expectation = [&](std::size_t context, std::size_t content) {
    const auto pos = s.position_of(context, content);
    if (!pos) throw Error(ErrorCode::DimensionMismatch, "cyclic view does not match the system");
    return expectation(s.variable_marginal(CellRef{context, *pos}), plus_of(content));
  };

  for (std::size_t i = 0; i < n; ++i) {
    const auto& ctx = s.contexts().at(view.contexts[i]);
    products[i] = product_expectation(ctx.bunch, plus_of(ctx.contents[0]), plus_of(ctx.contents[1]));
    const std::size_t previous = view.contexts[(i + n - 1) % n];
    differences[i] = abs(variable_expectation(view.contexts[i], view.contents[i]) -
                         variable_expectation(previous, view.contents[i]));
  }
  return evaluate_criterion(products, differences);
}

}  // namespace cbd
