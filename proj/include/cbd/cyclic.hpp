#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cbd/model.hpp"

namespace cbd {

/// One cycle of a cyclic system. Context contexts[i] holds contents[i] and
/// contents[(i + 1) % rank]. plus_values[i] is the value index coded +1 for
/// contents[i].
struct CyclicView {
  std::size_t rank = 0;
  std::vector<std::size_t> contents;
  std::vector<std::size_t> contexts;
  std::vector<std::uint32_t> plus_values;
};

enum class CyclicViolation {
  ContextNotPair,      // a context does not hold exactly two contents
  ContentNotInTwo,     // a content does not appear in exactly two contexts
  NotBinary,           // some alphabet is not of size two
};

struct NotCyclic {
  CyclicViolation violation;
  std::string detail;
};

using CycleDetection = std::variant<std::vector<CyclicView>, NotCyclic>;

CycleDetection detect_cycles(const CCSystem& s);

/// Index of the value coded +1: the declared one, else the lexicographically
/// larger label.
std::uint32_t plus_value_of(const ContentInfo& content);

/// Pr[+1] - Pr[-1] for a binary arity-1 distribution. Throws NotBinary.
Rational expectation(const Distribution& d, std::uint32_t plus_value = 0);

/// Expected product of two +-1 coded components. Throws NotBinary.
Rational product_expectation(const Distribution& d, std::uint32_t plus_first = 0, std::uint32_t plus_second = 0);

/// max over sign vectors with an odd number of -1 of sum(sign_i * x_i).
/// Throws EmptyInput.
Rational s_odd(std::span<const Rational> xs);

struct CriterionReport {
  std::size_t rank = 0;
  std::vector<Rational> product_expectations;   // per context, in cycle order
  std::vector<Rational> marginal_differences;   // per content, |<R_i^i> - <R_i^{i-1}>|
  Rational lhs;
  Rational rhs;
  Rational delta;
  bool contextual = false;
};

/// Criterion from already-computed expectations. `products[i]` belongs to the
/// i-th context; `marginal_differences[i]` to the i-th connection.
CriterionReport evaluate_criterion(std::span<const Rational> products, std::span<const Rational> marginal_differences);

CriterionReport evaluate_criterion(const CyclicView& view, const CCSystem& s);

}  // namespace cbd
