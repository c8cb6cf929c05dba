#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbd/rational.hpp"

namespace cbd {

using ValueTuple = std::vector<std::uint32_t>;

/// Mixed-radix enumeration of value tuples. The first component is the most
/// significant digit, so tuples are visited in lexicographic order.
class TupleSpace {
 public:
  TupleSpace() = default;
  explicit TupleSpace(std::vector<std::uint32_t> radices);

  std::size_t arity() const noexcept { return radices_.size(); }
  std::span<const std::uint32_t> radices() const noexcept { return radices_; }
  std::size_t size() const noexcept { return size_; }

  std::size_t index_of(std::span<const std::uint32_t> tuple) const;
  ValueTuple tuple_at(std::size_t index) const;
  bool contains(std::span<const std::uint32_t> tuple) const noexcept;

  /// Advances `tuple` to its lexicographic successor; false after the last one.
  bool next(ValueTuple& tuple) const noexcept;

  friend bool operator==(const TupleSpace&, const TupleSpace&) = default;

 private:
  std::vector<std::uint32_t> radices_;
  std::size_t size_ = 1;
};

/// Categorical joint distribution with exact rational masses. Masses are
/// nonnegative and sum to exactly one.
class Distribution {
 public:
  Distribution() = default;

  /// Dense constructor: `masses` lists one mass per tuple in lexicographic
  /// order. Throws DimensionMismatch, NegativeMass or MassSumNotOne.
  Distribution(std::vector<std::uint32_t> alphabet_sizes, std::vector<Rational> masses);

  /// Sparse constructor: unlisted tuples get mass zero; repeated tuples add.
  static Distribution from_entries(std::vector<std::uint32_t> alphabet_sizes,
                                   std::span<const std::pair<ValueTuple, Rational>> entries);

  static Distribution point_mass(std::vector<std::uint32_t> alphabet_sizes, const ValueTuple& at);

  std::size_t arity() const noexcept { return space_.arity(); }
  std::span<const std::uint32_t> alphabet_sizes() const noexcept { return space_.radices(); }
  const TupleSpace& space() const noexcept { return space_; }
  std::span<const Rational> masses() const noexcept { return masses_; }

  const Rational& mass(std::span<const std::uint32_t> tuple) const;
  const Rational& mass_at(std::size_t index) const { return masses_.at(index); }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  TupleSpace space_;
  std::vector<Rational> masses_;
};

/// Marginal over `components` (nonempty, strictly increasing, within arity).
/// Throws IndexOutOfRange otherwise.
Distribution marginal(const Distribution& d, std::span<const std::size_t> components);

struct ContentInfo {
  std::string label;
  std::vector<std::string> value_labels;  // index = value index
  std::optional<std::uint32_t> plus_value;

  std::uint32_t alphabet_size() const noexcept {
    return static_cast<std::uint32_t>(value_labels.size());
  }
  friend bool operator==(const ContentInfo&, const ContentInfo&) = default;
};

struct ContextInfo {
  std::string label;
  std::vector<std::size_t> contents;  // strictly increasing content indices
  Distribution bunch;                 // components follow `contents`
  friend bool operator==(const ContextInfo&, const ContextInfo&) = default;
};

/// Position of one random variable: the context it belongs to and its
/// component position inside that context's bunch.
struct CellRef {
  std::size_t context = 0;
  std::size_t position = 0;
  friend bool operator==(const CellRef&, const CellRef&) = default;
};

struct Connection {
  std::size_t content = 0;
  std::vector<CellRef> members;  // ordered by context index
};

/// A variable of the system in canonical order: contexts by index, then the
/// context's contents by index.
struct Cell {
  std::size_t context = 0;
  std::size_t content = 0;
  std::size_t position = 0;
};

/// Unvalidated input accepted by validate_system. Labels are free-form;
/// the bunch tuples follow the order of `contents` as listed for the context.
struct RawContent {
  std::string label;
  std::vector<std::string> value_labels;
  std::optional<std::string> plus_value;
};

struct RawContext {
  std::string label;
  std::vector<std::string> contents;
  std::vector<std::pair<ValueTuple, Rational>> masses;
};

struct RawSystem {
  std::vector<RawContent> contents;
  std::vector<RawContext> contexts;
};

/// Validated context-content system. Immutable once built.
class CCSystem {
 public:
  const std::vector<ContentInfo>& contents() const noexcept { return contents_; }
  const std::vector<ContextInfo>& contexts() const noexcept { return contexts_; }
  const std::vector<Connection>& connections() const noexcept { return connections_; }
  const std::vector<Cell>& cells() const noexcept { return cells_; }

  std::uint32_t alphabet_size(std::size_t content) const { return contents_.at(content).alphabet_size(); }

  /// Bunch component position of `content` in `context`, if the cell is filled.
  std::optional<std::size_t> position_of(std::size_t context, std::size_t content) const;
  /// Index into cells() of the given variable.
  std::size_t cell_index(std::size_t context, std::size_t position) const;

  std::optional<std::size_t> find_content(std::string_view label) const;
  std::optional<std::size_t> find_context(std::string_view label) const;

  /// 1-marginal of a single variable.
  Distribution variable_marginal(const CellRef& ref) const;

  friend bool operator==(const CCSystem& a, const CCSystem& b) {
    return a.contents_ == b.contents_ && a.contexts_ == b.contexts_;
  }

 private:
  friend CCSystem validate_system(const RawSystem& raw);

  std::vector<ContentInfo> contents_;
  std::vector<ContextInfo> contexts_;
  std::vector<Connection> connections_;
  std::vector<Cell> cells_;
  std::vector<std::size_t> context_cell_offset_;
};

/// Canonicalizes and validates a raw system description. Throws Error with
/// DuplicateCell, AlphabetMismatch, MassSumNotOne, NegativeMass, EmptySystem,
/// EmptyContext, UnusedContent or UnknownLabel.
CCSystem validate_system(const RawSystem& raw);

struct ConnectionConsistency {
  std::size_t content = 0;
  std::vector<Distribution> member_marginals;
  bool consistent = true;
};

struct ConsistencyReport {
  bool consistent = true;
  std::vector<ConnectionConsistency> connections;
};

ConsistencyReport is_consistently_connected(const CCSystem& s);

}  // namespace cbd
