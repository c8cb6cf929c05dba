#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbd/rational.hpp"

namespace cbd {

/// Equality-constrained system M x = P over nonnegative x. Rows carry
/// optional labels used in reports; columns are addressed by index.
class LinearSystem {
 public:
  LinearSystem() = default;
  LinearSystem(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Rational& at(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const Rational& at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
  std::span<const Rational> row(std::size_t r) const { return {entries_.data() + r * cols_, cols_}; }

  std::vector<Rational>& rhs() noexcept { return rhs_; }
  const std::vector<Rational>& rhs() const noexcept { return rhs_; }

  std::vector<std::string>& row_labels() noexcept { return row_labels_; }
  const std::vector<std::string>& row_labels() const noexcept { return row_labels_; }

  /// Appends a row; `ones` lists the columns holding 1, all others are 0.
  void append_indicator_row(std::span<const std::size_t> ones, Rational rhs, std::string label = {});
  void append_row(std::span<const Rational> coefficients, Rational rhs, std::string label = {});

  /// (M | -M): every column duplicated with its sign flipped.
  LinearSystem widened() const;

  /// M x for a vector of length cols().
  std::vector<Rational> multiply(std::span<const Rational> x) const;
  /// y^T M for a vector of length rows().
  std::vector<Rational> left_multiply(std::span<const Rational> y) const;

  /// Throws DimensionMismatch if the rhs length differs from the row count
  /// or some row is entirely zero.
  void validate() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> entries_;
  std::vector<Rational> rhs_;
  std::vector<std::string> row_labels_;
};

enum class FeasibilityStatus { Feasible, Infeasible };

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::Infeasible;
  std::vector<Rational> solution;     // set when Feasible
  std::vector<Rational> certificate;  // Farkas vector y, set when Infeasible
  std::size_t pivots = 0;

  bool feasible() const noexcept { return status == FeasibilityStatus::Feasible; }
};

struct OptimizationResult {
  Rational value;
  std::vector<Rational> solution;
  std::size_t pivots = 0;
};

struct SolverOptions {
  /// Hard pivot cap per phase. Defaults to C(rows + cols, rows), saturated.
  std::optional<std::size_t> pivot_limit;
};

/// Decides {M x = P, x >= 0} by two-phase simplex in exact arithmetic with
/// Bland's rule. An infeasible answer carries y with y^T M <= 0, y^T P > 0.
FeasibilityResult solve_feasibility(const LinearSystem& sys, const SolverOptions& options = {});

/// Minimizes objective^T x over {M x = P, x >= 0}. Throws Infeasible,
/// Unbounded or DimensionMismatch.
OptimizationResult minimize(const LinearSystem& sys, std::span<const Rational> objective,
                            const SolverOptions& options = {});

bool is_solution(const LinearSystem& sys, std::span<const Rational> x);
bool is_farkas_certificate(const LinearSystem& sys, std::span<const Rational> y);

/// Saturating binomial coefficient used for the default pivot cap.
std::size_t saturating_binomial(std::size_t n, std::size_t k) noexcept;

}  // namespace cbd
