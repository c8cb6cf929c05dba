#include "cbd/model.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "cbd/error.hpp"

namespace cbd {

TupleSpace::TupleSpace(std::vector<std::uint32_t> radices) : radices_(std::move(radices)) {
  size_ = 1;
  for (auto r : radices_) {
    if (r == 0) throw Error(ErrorCode::AlphabetMismatch, "alphabet size must be at least 1");
    if (size_ > std::numeric_limits<std::size_t>::max() / r) {
      throw Error(ErrorCode::OutcomeSpaceTooLarge, "tuple space overflows size_t");
    }
    size_ *= r;
  }
}

std::size_t TupleSpace::index_of(std::span<const std::uint32_t> tuple) const {
  if (tuple.size() != radices_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "tuple arity " + std::to_string(tuple.size()) +
                                                  " does not match " + std::to_string(radices_.size()));
  }
  std::size_t index = 0;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (tuple[i] >= radices_[i]) {
      throw Error(ErrorCode::IndexOutOfRange, "value index " + std::to_string(tuple[i]) +
                                                  " outside alphabet of size " + std::to_string(radices_[i]));
    }
    index = index * radices_[i] + tuple[i];
  }
  return index;
}

ValueTuple TupleSpace::tuple_at(std::size_t index) const {
  ValueTuple t(radices_.size());
  for (std::size_t i = radices_.size(); i-- > 0;) {
    t[i] = static_cast<std::uint32_t>(index % radices_[i]);
    index /= radices_[i];
  }
  return t;
}

bool TupleSpace::contains(std::span<const std::uint32_t> tuple) const noexcept {
  if (tuple.size() != radices_.size()) return false;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (tuple[i] >= radices_[i]) return false;
  }
  return true;
}

bool TupleSpace::next(ValueTuple& tuple) const noexcept {
  for (std::size_t i = radices_.size(); i-- > 0;) {
    if (++tuple[i] < radices_[i]) return true;
    tuple[i] = 0;
  }
  return false;
}

Distribution::Distribution(std::vector<std::uint32_t> alphabet_sizes, std::vector<Rational> masses)
    : space_(std::move(alphabet_sizes)), masses_(std::move(masses)) {
  if (masses_.size() != space_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(space_.size()) +
                                                  " masses, got " + std::to_string(masses_.size()));
  }
  Rational total;
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    if (masses_[i].sign() < 0) {
      throw Error(ErrorCode::NegativeMass, "negative mass " + masses_[i].to_string() + " at tuple #" +
                                               std::to_string(i));
    }
    total += masses_[i];
  }
  if (total != Rational(1)) {
    throw Error(ErrorCode::MassSumNotOne, "masses sum to " + total.to_string());
  }
}

Distribution Distribution::from_entries(std::vector<std::uint32_t> alphabet_sizes,
                                        std::span<const std::pair<ValueTuple, Rational>> entries) {
  TupleSpace space(alphabet_sizes);
  std::vector<Rational> dense(space.size());
  for (const auto& [tuple, mass] : entries) {
    dense[space.index_of(tuple)] += mass;
  }
  return Distribution(std::move(alphabet_sizes), std::move(dense));
}

Distribution Distribution::point_mass(std::vector<std::uint32_t> alphabet_sizes, const ValueTuple& at) {
  TupleSpace space(alphabet_sizes);
  std::vector<Rational> dense(space.size());
  dense[space.index_of(at)] = 1;
  return Distribution(std::move(alphabet_sizes), std::move(dense));
}

const Rational& Distribution::mass(std::span<const std::uint32_t> tuple) const {
  return masses_[space_.index_of(tuple)];
}

Distribution marginal(const Distribution& d, std::span<const std::size_t> components) {
  if (components.empty()) {
    throw Error(ErrorCode::IndexOutOfRange, "marginal needs at least one component");
  }
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i] >= d.arity() || (i > 0 && components[i] <= components[i - 1])) {
      throw Error(ErrorCode::IndexOutOfRange, "marginal components must be strictly increasing and below arity " +
                                                  std::to_string(d.arity()));
    }
  }
  std::vector<std::uint32_t> sizes;
  sizes.reserve(components.size());
  for (auto c : components) sizes.push_back(d.alphabet_sizes()[c]);
  TupleSpace target(sizes);

  std::vector<Rational> out(target.size());
  ValueTuple full(d.arity(), 0);
  ValueTuple sub(components.size(), 0);
  std::size_t index = 0;
  do {
    const auto& m = d.mass_at(index++);
    if (!m.is_zero()) {
      for (std::size_t i = 0; i < components.size(); ++i) sub[i] = full[components[i]];
      out[target.index_of(sub)] += m;
    }
  } while (d.space().next(full));
  return Distribution(std::move(sizes), std::move(out));
}

std::optional<std::size_t> CCSystem::position_of(std::size_t context, std::size_t content) const {
  const auto& cs = contexts_.at(context).contents;
  auto it = std::lower_bound(cs.begin(), cs.end(), content);
  if (it == cs.end() || *it != content) return std::nullopt;
  return static_cast<std::size_t>(it - cs.begin());
}

std::size_t CCSystem::cell_index(std::size_t context, std::size_t position) const {
  if (context >= contexts_.size() || position >= contexts_[context].contents.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "no such cell");
  }
  return context_cell_offset_[context] + position;
}

std::optional<std::size_t> CCSystem::find_content(std::string_view label) const {
  auto it = std::lower_bound(contents_.begin(), contents_.end(), label,
                             [](const ContentInfo& c, std::string_view l) { return c.label < l; });
  if (it == contents_.end() || it->label != label) return std::nullopt;
  return static_cast<std::size_t>(it - contents_.begin());
}

std::optional<std::size_t> CCSystem::find_context(std::string_view label) const {
  auto it = std::lower_bound(contexts_.begin(), contexts_.end(), label,
                             [](const ContextInfo& c, std::string_view l) { return c.label < l; });
  if (it == contexts_.end() || it->label != label) return std::nullopt;
  return static_cast<std::size_t>(it - contexts_.begin());
}

Distribution CCSystem::variable_marginal(const CellRef& ref) const {
  const std::size_t component[] = {ref.position};
  return marginal(contexts_.at(ref.context).bunch, component);
}

CCSystem validate_system(const RawSystem& raw) {
  if (raw.contents.empty() || raw.contexts.empty()) {
    throw Error(ErrorCode::EmptySystem, "a system needs at least one context and one content");
  }

  CCSystem s;

  // Contents, sorted by label.
  std::vector<std::size_t> content_order(raw.contents.size());
  std::iota(content_order.begin(), content_order.end(), 0);
  std::sort(content_order.begin(), content_order.end(),
            [&](auto a, auto b) { return raw.contents[a].label < raw.contents[b].label; });
  std::map<std::string, std::size_t, std::less<>> content_index;
  for (std::size_t rank = 0; rank < content_order.size(); ++rank) {
    const auto& rc = raw.contents[content_order[rank]];
    if (!content_index.emplace(rc.label, rank).second) {
      throw Error(ErrorCode::SchemaError, "content label '" + rc.label + "' declared twice");
    }
    if (rc.value_labels.empty()) {
      throw Error(ErrorCode::AlphabetMismatch, "content '" + rc.label + "' has an empty alphabet");
    }
    std::set<std::string> seen(rc.value_labels.begin(), rc.value_labels.end());
    if (seen.size() != rc.value_labels.size()) {
      throw Error(ErrorCode::AlphabetMismatch, "content '" + rc.label + "' repeats a value label");
    }
    ContentInfo info{rc.label, rc.value_labels, std::nullopt};
    if (rc.plus_value) {
      auto it = std::find(rc.value_labels.begin(), rc.value_labels.end(), *rc.plus_value);
      if (it == rc.value_labels.end()) {
        throw Error(ErrorCode::UnknownLabel, "plus value '" + *rc.plus_value + "' is not a value of content '" +
                                                 rc.label + "'");
      }
      info.plus_value = static_cast<std::uint32_t>(it - rc.value_labels.begin());
    }
    s.contents_.push_back(std::move(info));
  }

  // Contexts, sorted by label.
  std::vector<std::size_t> context_order(raw.contexts.size());
  std::iota(context_order.begin(), context_order.end(), 0);
  std::sort(context_order.begin(), context_order.end(),
            [&](auto a, auto b) { return raw.contexts[a].label < raw.contexts[b].label; });
  std::vector<bool> content_used(s.contents_.size(), false);
  for (std::size_t rank = 0; rank < context_order.size(); ++rank) {
    const auto& rc = raw.contexts[context_order[rank]];
    if (rank > 0 && s.contexts_.back().label == rc.label) {
      throw Error(ErrorCode::SchemaError, "context label '" + rc.label + "' declared twice");
    }
    if (rc.contents.empty()) {
      throw Error(ErrorCode::EmptyContext, "context '" + rc.label + "' has no filled cells");
    }
    // Map listed order -> canonical order.
    std::vector<std::size_t> listed;
    for (const auto& label : rc.contents) {
      auto it = content_index.find(label);
      if (it == content_index.end()) {
        throw Error(ErrorCode::UnknownLabel, "context '" + rc.label + "' refers to unknown content '" + label + "'");
      }
      listed.push_back(it->second);
    }
    std::vector<std::size_t> perm(listed.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](auto a, auto b) { return listed[a] < listed[b]; });
    for (std::size_t i = 1; i < perm.size(); ++i) {
      if (listed[perm[i]] == listed[perm[i - 1]]) {
        throw Error(ErrorCode::DuplicateCell, "cell (" + rc.label + ", " + rc.contents[perm[i]] +
                                                  ") appears more than once");
      }
    }

    ContextInfo info;
    info.label = rc.label;
    std::vector<std::uint32_t> sizes;
    for (auto p : perm) {
      info.contents.push_back(listed[p]);
      sizes.push_back(s.contents_[listed[p]].alphabet_size());
      content_used[listed[p]] = true;
    }

    std::vector<std::pair<ValueTuple, Rational>> entries;
    entries.reserve(rc.masses.size());
    for (const auto& [tuple, mass] : rc.masses) {
      if (tuple.size() != listed.size()) {
        throw Error(ErrorCode::DimensionMismatch, "bunch of context '" + rc.label + "' has a tuple of arity " +
                                                      std::to_string(tuple.size()) + ", expected " +
                                                      std::to_string(listed.size()));
      }
      ValueTuple canon(tuple.size());
      for (std::size_t i = 0; i < perm.size(); ++i) {
        canon[i] = tuple[perm[i]];
        if (canon[i] >= sizes[i]) {
          throw Error(ErrorCode::AlphabetMismatch, "bunch of context '" + rc.label + "' uses value index " +
                                                       std::to_string(canon[i]) + " outside the alphabet of '" +
                                                       s.contents_[info.contents[i]].label + "'");
        }
      }
      entries.emplace_back(std::move(canon), mass);
    }
    try {
      info.bunch = Distribution::from_entries(sizes, entries);
    } catch (const Error& e) {
      throw Error(e.code(), "context '" + rc.label + "': " + e.what());
    }
    s.contexts_.push_back(std::move(info));
  }

  for (std::size_t j = 0; j < content_used.size(); ++j) {
    if (!content_used[j]) {
      throw Error(ErrorCode::UnusedContent, "content '" + s.contents_[j].label + "' appears in no context");
    }
  }

  // Cells and connections.
  s.connections_.resize(s.contents_.size());
  for (std::size_t j = 0; j < s.contents_.size(); ++j) s.connections_[j].content = j;
  for (std::size_t i = 0; i < s.contexts_.size(); ++i) {
    s.context_cell_offset_.push_back(s.cells_.size());
    const auto& cs = s.contexts_[i].contents;
    for (std::size_t p = 0; p < cs.size(); ++p) {
      s.cells_.push_back(Cell{i, cs[p], p});
      s.connections_[cs[p]].members.push_back(CellRef{i, p});
    }
  }
  return s;
}

ConsistencyReport is_consistently_connected(const CCSystem& s) {
  ConsistencyReport report;
  for (const auto& conn : s.connections()) {
    ConnectionConsistency cc;
    cc.content = conn.content;
    for (const auto& m : conn.members) {
      cc.member_marginals.push_back(s.variable_marginal(m));
      if (cc.member_marginals.back() != cc.member_marginals.front()) cc.consistent = false;
    }
    report.consistent = report.consistent && cc.consistent;
    report.connections.push_back(std::move(cc));
  }
  return report;
}

}  // namespace cbd
