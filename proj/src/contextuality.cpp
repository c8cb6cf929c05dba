#include "cbd/contextuality.hpp"

#include <sstream>
#include <stdexcept>

#include "cbd/error.hpp"

namespace cbd {

namespace {

struct Fixed {
  std::size_t cell;
  std::uint32_t value;
};

// Columns of `space` whose digits at the fixed cells take the given values.
std::vector<std::size_t> matching_columns(const TupleSpace& space, std::span<const Fixed> fixed) {
  const auto radices = space.radices();
  const std::size_t n = radices.size();
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = n; i-- > 1;) stride[i - 1] = stride[i] * radices[i];

  std::vector<bool> is_fixed(n, false);
  std::size_t base = 0;
  for (const auto& f : fixed) {
    is_fixed[f.cell] = true;
    base += f.value * stride[f.cell];
  }
  std::vector<std::size_t> free;
  std::size_t count = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_fixed[i]) {
      free.push_back(i);
      count *= radices[i];
    }
  }

  std::vector<std::size_t> out;
  out.reserve(count);
  std::vector<std::uint32_t> digit(free.size(), 0);
  std::size_t index = base;
  while (true) {
    out.push_back(index);
    bool advanced = false;
    for (std::size_t k = free.size(); k-- > 0;) {
      const auto pos = free[k];
      if (++digit[k] < radices[pos]) {
        index += stride[pos];
        advanced = true;
        break;
      }
      index -= (radices[pos] - 1) * stride[pos];
      digit[k] = 0;
    }
    if (!advanced) return out;
  }
}

std::string value_label(const CCSystem& s, std::size_t content, std::uint32_t value) {
  return s.contents()[content].value_labels[value];
}

// Calls fn(tuple) for every tuple in prod_i [0, bound_i).
template <class Fn>
void for_each_tuple(std::span<const std::uint32_t> bounds, Fn&& fn) {
  for (auto b : bounds) {
    if (b == 0) return;
  }
  ValueTuple t(bounds.size(), 0);
  TupleSpace space(std::vector<std::uint32_t>(bounds.begin(), bounds.end()));
  do {
    fn(static_cast<const ValueTuple&>(t));
  } while (space.next(t));
}

// Calls fn(subset) for every r-subset of {0..n-1} in lexicographic order.
template <class Fn>
void for_each_subset(std::size_t n, std::size_t r, Fn&& fn) {
  if (r > n || r == 0) return;
  std::vector<std::size_t> idx(r);
  for (std::size_t i = 0; i < r; ++i) idx[i] = i;
  while (true) {
    fn(static_cast<const std::vector<std::size_t>&>(idx));
    std::size_t i = r;
    while (i > 0 && idx[i - 1] == n - r + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

TupleSpace hidden_outcome_space(const CCSystem& s, std::size_t max_columns) {
  std::vector<std::uint32_t> radices;
  std::size_t total = 1;
  for (const auto& cell : s.cells()) {
    const auto k = s.alphabet_size(cell.content);
    if (total > max_columns / k) {
      throw Error(ErrorCode::OutcomeSpaceTooLarge,
                  "hidden-outcome space exceeds the cap of " + std::to_string(max_columns) + " columns");
    }
    total *= k;
    radices.push_back(k);
  }
  return TupleSpace(std::move(radices));
}

std::string describe_outcome(const CCSystem& s, std::span<const std::uint32_t> outcome) {
  std::ostringstream os;
  for (std::size_t i = 0; i < s.contexts().size(); ++i) {
    if (i) os << ' ';
    os << s.contexts()[i].label << '[';
    const auto& cs = s.contexts()[i].contents;
    for (std::size_t p = 0; p < cs.size(); ++p) {
      if (p) os << ' ';
      os << s.contents()[cs[p]].label << '=' << value_label(s, cs[p], outcome[s.cell_index(i, p)]);
    }
    os << ']';
  }
  return os.str();
}

AssociatedSystem build_associated_system(const CCSystem& s, const AnalysisOptions& options) {
  AssociatedSystem out;
  out.outcomes = hidden_outcome_space(s, options.max_columns);
  out.system = LinearSystem(0, out.outcomes.size());

  for (std::size_t i = 0; i < s.contexts().size(); ++i) {
    const auto& ctx = s.contexts()[i];
    const auto& space = ctx.bunch.space();
    ValueTuple w(space.arity(), 0);
    std::size_t index = 0;
    do {
      std::vector<Fixed> fixed;
      std::string label = "bunch " + ctx.label + " (";
      for (std::size_t p = 0; p < w.size(); ++p) {
        fixed.push_back({s.cell_index(i, p), w[p]});
        if (p) label += ", ";
        label += s.contents()[ctx.contents[p]].label + "=" + value_label(s, ctx.contents[p], w[p]);
      }
      label += ")";
      out.system.append_indicator_row(matching_columns(out.outcomes, fixed), ctx.bunch.mass_at(index++),
                                      std::move(label));
    } while (space.next(w));
  }
  out.bunch_rows = out.system.rows();

  out.couplings = connection_couplings(s, options.coupling_rule());
  for (const auto& conn : s.connections()) {
    const auto& spec = out.couplings[conn.content];
    for (std::uint32_t l = 0; l < spec.diagonal_masses.size(); ++l) {
      std::vector<Fixed> fixed;
      for (const auto& m : conn.members) fixed.push_back({s.cell_index(m.context, m.position), l});
      out.system.append_indicator_row(
          matching_columns(out.outcomes, fixed), spec.diagonal_masses[l],
          "connection " + s.contents()[conn.content].label + " (all=" + value_label(s, conn.content, l) + ")");
    }
  }
  return out;
}

Verdict decide_contextuality(const CCSystem& s, const AnalysisOptions& options) {
  Verdict v;
  v.associated = build_associated_system(s, options);
  auto result = solve_feasibility(v.associated.system, options.solver);
  v.pivots = result.pivots;
  v.contextual = !result.feasible();
  if (result.feasible()) {
    v.coupling = Distribution(std::vector<std::uint32_t>(v.associated.outcomes.radices().begin(),
                                                         v.associated.outcomes.radices().end()),
                              std::move(result.solution));
  } else {
    v.certificate = std::move(result.certificate);
  }
  return v;
}

ExpandedSystem build_expanded_system(const CCSystem& s, std::span<const Distribution> completions,
                                     const AnalysisOptions& options) {
  if (completions.size() != s.connections().size()) {
    throw Error(ErrorCode::DimensionMismatch, "expected one completion per connection");
  }
  for (const auto& conn : s.connections()) {
    const auto& c = completions[conn.content];
    if (c.arity() != conn.members.size()) {
      throw Error(ErrorCode::DimensionMismatch, "completion for '" + s.contents()[conn.content].label +
                                                    "' has the wrong arity");
    }
    for (auto k : c.alphabet_sizes()) {
      if (k != s.alphabet_size(conn.content)) {
        throw Error(ErrorCode::AlphabetMismatch, "completion for '" + s.contents()[conn.content].label +
                                                     "' has the wrong alphabet");
      }
    }
  }

  ExpandedSystem out;
  out.outcomes = hidden_outcome_space(s, options.max_columns);
  out.system = LinearSystem(0, out.outcomes.size());
  {
    std::vector<std::size_t> all(out.outcomes.size());
    for (std::size_t c = 0; c < all.size(); ++c) all[c] = c;
    out.system.append_indicator_row(all, Rational(1), "total");
  }

  std::size_t max_bunch = 0;
  for (const auto& ctx : s.contexts()) max_bunch = std::max(max_bunch, ctx.contents.size());
  for (std::size_t r = 1; r <= max_bunch; ++r) {
    for (std::size_t i = 0; i < s.contexts().size(); ++i) {
      const auto& ctx = s.contexts()[i];
      for_each_subset(ctx.contents.size(), r, [&](const std::vector<std::size_t>& subset) {
        std::vector<std::uint32_t> bounds;
        for (auto p : subset) bounds.push_back(s.alphabet_size(ctx.contents[p]) - 1);
        const Distribution sub = marginal(ctx.bunch, subset);
        for_each_tuple(bounds, [&](const ValueTuple& l) {
          std::vector<Fixed> fixed;
          std::string label = "bunch " + ctx.label + " (";
          for (std::size_t t = 0; t < subset.size(); ++t) {
            fixed.push_back({s.cell_index(i, subset[t]), l[t]});
            if (t) label += ", ";
            label += s.contents()[ctx.contents[subset[t]]].label + "=" +
                     value_label(s, ctx.contents[subset[t]], l[t]);
          }
          label += ")";
          out.system.append_indicator_row(matching_columns(out.outcomes, fixed), sub.mass(l), std::move(label));
        });
      });
    }
  }
  out.bunch_marginal_rows = out.system.rows() - 1;

  std::size_t max_connection = 0;
  for (const auto& conn : s.connections()) max_connection = std::max(max_connection, conn.members.size());
  for (std::size_t r = 2; r <= max_connection; ++r) {
    for (const auto& conn : s.connections()) {
      const auto k = s.alphabet_size(conn.content);
      for_each_subset(conn.members.size(), r, [&](const std::vector<std::size_t>& subset) {
        std::vector<std::uint32_t> bounds(subset.size(), k - 1);
        const Distribution sub = marginal(completions[conn.content], subset);
        for_each_tuple(bounds, [&](const ValueTuple& l) {
          std::vector<Fixed> fixed;
          std::string label = "connection " + s.contents()[conn.content].label + " (";
          for (std::size_t t = 0; t < subset.size(); ++t) {
            const auto& m = conn.members[subset[t]];
            fixed.push_back({s.cell_index(m.context, m.position), l[t]});
            if (t) label += ", ";
            label += s.contexts()[m.context].label + "=" + value_label(s, conn.content, l[t]);
          }
          label += ")";
          out.system.append_indicator_row(matching_columns(out.outcomes, fixed), sub.mass(l), std::move(label));
        });
      });
    }
  }
  out.connection_marginal_rows = out.system.rows() - 1 - out.bunch_marginal_rows;
  return out;
}

QuasiCoupling::QuasiCoupling(TupleSpace outcomes, std::vector<Rational> masses)
    : outcomes_(std::move(outcomes)), masses_(std::move(masses)) {
  if (masses_.size() != outcomes_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "quasi-coupling has " + std::to_string(masses_.size()) +
                                                  " masses for " + std::to_string(outcomes_.size()) + " outcomes");
  }
  for (const auto& m : masses_) total_variation_ += abs(m);
}

Rational QuasiCoupling::sum() const {
  Rational total;
  for (const auto& m : masses_) total += m;
  return total;
}

MeasureResult contextuality_measure(const CCSystem& s, const AnalysisOptions& options) {
  const auto associated = build_associated_system(s, options);
  const LinearSystem wide = associated.system.widened();
  const std::size_t n = associated.system.cols();
  std::vector<Rational> objective(2 * n);
  for (std::size_t j = n; j < 2 * n; ++j) objective[j] = 1;

  const auto opt = minimize(wide, objective, options.solver);
  std::vector<Rational> gamma(n);
  for (std::size_t j = 0; j < n; ++j) gamma[j] = opt.solution[j] - opt.solution[n + j];

  MeasureResult out;
  out.witness = QuasiCoupling(associated.outcomes, std::move(gamma));
  out.total_variation = out.witness.total_variation();
  out.measure = out.total_variation - Rational(1);
  out.pivots = opt.pivots;
  if (out.total_variation != Rational(1) + Rational(2) * opt.value) {
    throw std::logic_error("total variation disagrees with 1 + 2 * sum(Q2)");
  }
  return out;
}

QuasiCouplingCheck verify_quasi_coupling(const CCSystem& s, const QuasiCoupling& q, const AnalysisOptions& options) {
  const auto associated = build_associated_system(s, options);
  if (!(q.outcomes() == associated.outcomes)) {
    throw Error(ErrorCode::DimensionMismatch, "quasi-coupling is not indexed by the system's hidden outcomes");
  }
  QuasiCouplingCheck check;
  check.total = q.sum();
  check.total_variation = q.total_variation();
  check.sums_to_one = check.total == Rational(1);
  if (!check.sums_to_one) check.failures.push_back("total (sum is " + check.total.to_string() + ")");

  const auto lhs = associated.system.multiply(q.masses());
  check.bunches_match = true;
  check.connections_match = true;
  for (std::size_t r = 0; r < lhs.size(); ++r) {
    if (lhs[r] == associated.system.rhs()[r]) continue;
    (r < associated.bunch_rows ? check.bunches_match : check.connections_match) = false;
    check.failures.push_back(associated.system.row_labels()[r] + " (got " + lhs[r].to_string() + ", expected " +
                             associated.system.rhs()[r].to_string() + ")");
  }
  return check;
}

}  // namespace cbd
