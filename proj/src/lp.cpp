#include "cbd/lp.hpp"

#include <limits>
#include <stdexcept>

#include "cbd/error.hpp"

namespace cbd {

LinearSystem::LinearSystem(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols), rhs_(rows), row_labels_(rows) {}

void LinearSystem::append_indicator_row(std::span<const std::size_t> ones, Rational rhs, std::string label) {
  entries_.resize(entries_.size() + cols_);
  Rational* row = entries_.data() + rows_ * cols_;
  for (auto c : ones) {
    if (c >= cols_) throw Error(ErrorCode::IndexOutOfRange, "indicator column out of range");
    row[c] = 1;
  }
  rhs_.push_back(std::move(rhs));
  row_labels_.push_back(std::move(label));
  ++rows_;
}

void LinearSystem::append_row(std::span<const Rational> coefficients, Rational rhs, std::string label) {
  if (coefficients.size() != cols_) {
    throw Error(ErrorCode::DimensionMismatch, "row has " + std::to_string(coefficients.size()) +
                                                  " coefficients, system has " + std::to_string(cols_) + " columns");
  }
  entries_.insert(entries_.end(), coefficients.begin(), coefficients.end());
  rhs_.push_back(std::move(rhs));
  row_labels_.push_back(std::move(label));
  ++rows_;
}

LinearSystem LinearSystem::widened() const {
  LinearSystem out(rows_, 2 * cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      const auto& v = at(r, c);
      if (v.is_zero()) continue;
      out.at(r, c) = v;
      out.at(r, cols_ + c) = -v;
    }
  }
  out.rhs_ = rhs_;
  out.row_labels_ = row_labels_;
  return out;
}

std::vector<Rational> LinearSystem::multiply(std::span<const Rational> x) const {
  if (x.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "vector length does not match column count");
  std::vector<Rational> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    mpq_class acc;
    const Rational* row = entries_.data() + r * cols_;
    for (std::size_t c = 0; c < cols_; ++c) {
      if (!row[c].is_zero() && !x[c].is_zero()) acc += row[c].raw() * x[c].raw();
    }
    out[r] = Rational(acc);
  }
  return out;
}

std::vector<Rational> LinearSystem::left_multiply(std::span<const Rational> y) const {
  if (y.size() != rows_) throw Error(ErrorCode::DimensionMismatch, "vector length does not match row count");
  std::vector<mpq_class> acc(cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    if (y[r].is_zero()) continue;
    const Rational* row = entries_.data() + r * cols_;
    for (std::size_t c = 0; c < cols_; ++c) {
      if (!row[c].is_zero()) acc[c] += row[c].raw() * y[r].raw();
    }
  }
  std::vector<Rational> out;
  out.reserve(cols_);
  for (auto& a : acc) out.emplace_back(std::move(a));
  return out;
}

void LinearSystem::validate() const {
  if (rhs_.size() != rows_) {
    throw Error(ErrorCode::DimensionMismatch, "rhs length " + std::to_string(rhs_.size()) + " differs from " +
                                                  std::to_string(rows_) + " rows");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    bool nonzero = false;
    for (const auto& v : row(r)) {
      if (!v.is_zero()) {
        nonzero = true;
        break;
      }
    }
    if (!nonzero) throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(r) + " is entirely zero");
  }
}

bool is_solution(const LinearSystem& sys, std::span<const Rational> x) {
  if (x.size() != sys.cols()) return false;
  for (const auto& v : x) {
    if (v.sign() < 0) return false;
  }
  return sys.multiply(x) == sys.rhs();
}

bool is_farkas_certificate(const LinearSystem& sys, std::span<const Rational> y) {
  if (y.size() != sys.rows()) return false;
  for (const auto& v : sys.left_multiply(y)) {
    if (v.sign() > 0) return false;
  }
  Rational yp;
  for (std::size_t r = 0; r < sys.rows(); ++r) yp += y[r] * sys.rhs()[r];
  return yp.sign() > 0;
}

std::size_t saturating_binomial(std::size_t n, std::size_t k) noexcept {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  unsigned __int128 result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > kMax) return kMax;
  }
  return static_cast<std::size_t>(result);
}

namespace {

// Dense simplex tableau with artificial columns n..n+m-1 and the right-hand
// side in the last column. Each row, and the objective row stored separately
// as [reduced costs | -objective value], holds integers over a shared positive
// denominator that is reduced to lowest terms after every pivot.
class Tableau {
 public:
  Tableau(const LinearSystem& sys, const SolverOptions& options)
      : m_(sys.rows()), n_(sys.cols()), width_(n_ + m_ + 1), rows_(m_), basis_(m_), sign_(m_, 1), active_(m_, true) {
    std::vector<mpq_class> values(width_);
    for (std::size_t i = 0; i < m_; ++i) {
      sign_[i] = sys.rhs()[i].sign() < 0 ? -1 : 1;
      for (auto& v : values) v = 0;
      for (std::size_t j = 0; j < n_; ++j) {
        const auto& v = sys.at(i, j);
        if (!v.is_zero()) values[j] = sign_[i] < 0 ? mpq_class(-v.raw()) : v.raw();
      }
      values[n_ + i] = 1;
      values[width_ - 1] = sign_[i] < 0 ? mpq_class(-sys.rhs()[i].raw()) : sys.rhs()[i].raw();
      load(rows_[i], values);
      basis_[i] = n_ + i;
    }
    pivot_limit_ = options.pivot_limit.value_or(saturating_binomial(m_ + n_ + m_, m_));
  }

  // Phase 1: minimize the sum of artificials. Returns the optimum.
  mpq_class phase_one() {
    std::vector<mpq_class> values(width_);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) values[j] -= value(rows_[i], j);
      values[width_ - 1] -= value(rows_[i], width_ - 1);
    }
    load(cost_, values);
    run(n_ + m_);
    return objective_value();
  }

  // Dual values of the phase-1 optimum mapped back to the caller's row signs.
  std::vector<Rational> certificate() const {
    std::vector<Rational> y;
    y.reserve(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      mpq_class v = 1 - value(cost_, n_ + i);
      if (sign_[i] < 0) v = -v;
      y.emplace_back(std::move(v));
    }
    return y;
  }

  std::vector<Rational> primal() const {
    std::vector<Rational> x(n_);
    for (std::size_t i = 0; i < m_; ++i) {
      if (active_[i] && basis_[i] < n_) x[basis_[i]] = Rational(value(rows_[i], width_ - 1));
    }
    return x;
  }

  // Pivots zero-level artificials out of the basis; rows that cannot be
  // cleared are linearly dependent on the others and are deactivated.
  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      std::size_t entering = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (sgn(rows_[i].a[j]) != 0) {
          entering = j;
          break;
        }
      }
      if (entering == n_) {
        active_[i] = false;
      } else {
        pivot(i, entering);
      }
    }
  }

  void phase_two(std::span<const Rational> objective) {
    std::vector<mpq_class> values(width_);
    for (std::size_t j = 0; j < n_; ++j) values[j] = objective[j].raw();
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      const mpq_class& cb = objective[basis_[i]].raw();
      if (sgn(cb) == 0) continue;
      for (std::size_t j = 0; j < width_; ++j) {
        if (j >= n_ && j < n_ + m_) continue;
        if (sgn(rows_[i].a[j]) != 0) values[j] -= cb * value(rows_[i], j);
      }
    }
    load(cost_, values);
    run(n_);
  }

  mpq_class objective_value() const { return -value(cost_, width_ - 1); }
  std::size_t pivots() const noexcept { return pivots_; }

 private:
  struct Row {
    std::vector<mpz_class> a;
    mpz_class d = 1;
  };

  static mpq_class value(const Row& row, std::size_t j) {
    mpq_class v(row.a[j], row.d);
    v.canonicalize();
    return v;
  }

  void load(Row& row, const std::vector<mpq_class>& values) const {
    row.a.assign(width_, mpz_class(0));
    row.d = 1;
    for (const auto& v : values) {
      if (sgn(v) != 0) mpz_lcm(row.d.get_mpz_t(), row.d.get_mpz_t(), v.get_den_mpz_t());
    }
    for (std::size_t j = 0; j < width_; ++j) {
      const auto& v = values[j];
      if (sgn(v) == 0) continue;
      mpz_divexact(row.a[j].get_mpz_t(), row.d.get_mpz_t(), v.get_den_mpz_t());
      row.a[j] *= v.get_num();
    }
  }

  static void normalize(Row& row) {
    mpz_class g = row.d;
    for (const auto& x : row.a) {
      if (g == 1) return;
      if (sgn(x) != 0) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    }
    if (g == 1) return;
    for (auto& x : row.a) {
      if (sgn(x) != 0) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), g.get_mpz_t());
    }
    mpz_divexact(row.d.get_mpz_t(), row.d.get_mpz_t(), g.get_mpz_t());
  }

  // Bland's rule over columns [0, limit).
  void run(std::size_t limit) {
    std::size_t phase_pivots = 0;
    mpz_class lhs;
    mpz_class rhs;
    while (true) {
      std::size_t entering = limit;
      for (std::size_t j = 0; j < limit; ++j) {
        if (sgn(cost_.a[j]) < 0) {
          entering = j;
          break;
        }
      }
      if (entering == limit) return;

      // Row denominators cancel in the ratio b_i / a_ie.
      std::size_t leaving = m_;
      for (std::size_t i = 0; i < m_; ++i) {
        const auto& row = rows_[i];
        if (!active_[i] || sgn(row.a[entering]) <= 0) continue;
        if (leaving == m_) {
          leaving = i;
          continue;
        }
        const auto& best = rows_[leaving];
        mpz_mul(lhs.get_mpz_t(), row.a[width_ - 1].get_mpz_t(), best.a[entering].get_mpz_t());
        mpz_mul(rhs.get_mpz_t(), best.a[width_ - 1].get_mpz_t(), row.a[entering].get_mpz_t());
        const int c = cmp(lhs, rhs);
        if (c < 0 || (c == 0 && basis_[i] < basis_[leaving])) leaving = i;
      }
      if (leaving == m_) throw Error(ErrorCode::Unbounded, "objective is unbounded below");

      if (++phase_pivots > pivot_limit_) {
        throw Error(ErrorCode::PivotLimitExceeded, "simplex exceeded " + std::to_string(pivot_limit_) + " pivots");
      }
      pivot(leaving, entering);
    }
  }

  void pivot(std::size_t r, std::size_t e) {
    ++pivots_;
    Row& prow = rows_[r];
    // Row r becomes a_r / a_re: keep the integers, move a_re into the denominator.
    prow.d = prow.a[e];
    if (sgn(prow.d) < 0) {
      prow.d = -prow.d;
      for (auto& x : prow.a) mpz_neg(x.get_mpz_t(), x.get_mpz_t());
    }
    normalize(prow);
    nonzero_.clear();
    for (std::size_t j = 0; j < width_; ++j) {
      if (sgn(prow.a[j]) != 0) nonzero_.push_back(j);
    }
    const bool unit = prow.d == 1;
    mpz_class factor;
    // row <- (row * d_r - a_ie * a_r) / (d_i * d_r)
    const auto eliminate = [&](Row& row) {
      if (sgn(row.a[e]) == 0) return;
      factor = row.a[e];
      if (!unit) {
        for (auto& x : row.a) {
          if (sgn(x) != 0) mpz_mul(x.get_mpz_t(), x.get_mpz_t(), prow.d.get_mpz_t());
        }
        row.d *= prow.d;
      }
      for (auto j : nonzero_) mpz_submul(row.a[j].get_mpz_t(), factor.get_mpz_t(), prow.a[j].get_mpz_t());
      normalize(row);
    };
    for (std::size_t i = 0; i < m_; ++i) {
      if (i != r) eliminate(rows_[i]);
    }
    eliminate(cost_);
    basis_[r] = e;
  }

  std::size_t m_;
  std::size_t n_;
  std::size_t width_;
  std::vector<Row> rows_;
  Row cost_;
  std::vector<std::size_t> basis_;
  std::vector<int> sign_;
  std::vector<bool> active_;
  std::vector<std::size_t> nonzero_;
  std::size_t pivots_ = 0;
  std::size_t pivot_limit_ = 0;
};

void check_dimensions(const LinearSystem& sys) { sys.validate(); }

}  // namespace

FeasibilityResult solve_feasibility(const LinearSystem& sys, const SolverOptions& options) {
  check_dimensions(sys);
  Tableau t(sys, options);
  FeasibilityResult result;
  const mpq_class infeasibility = t.phase_one();
  result.pivots = t.pivots();
  if (sgn(infeasibility) == 0) {
    result.status = FeasibilityStatus::Feasible;
    result.solution = t.primal();
    if (!is_solution(sys, result.solution)) {
      throw std::logic_error("simplex produced a point that does not satisfy the system");
    }
  } else {
    result.status = FeasibilityStatus::Infeasible;
    result.certificate = t.certificate();
    if (!is_farkas_certificate(sys, result.certificate)) {
      throw std::logic_error("simplex produced an invalid Farkas certificate");
    }
  }
  return result;
}

OptimizationResult minimize(const LinearSystem& sys, std::span<const Rational> objective,
                            const SolverOptions& options) {
  check_dimensions(sys);
  if (objective.size() != sys.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "objective has " + std::to_string(objective.size()) +
                                                  " entries, system has " + std::to_string(sys.cols()) + " columns");
  }
  Tableau t(sys, options);
  if (sgn(t.phase_one()) != 0) {
    throw Error(ErrorCode::Infeasible, "constraint system has no nonnegative solution");
  }
  t.drive_out_artificials();
  t.phase_two(objective);

  OptimizationResult result;
  result.value = Rational(t.objective_value());
  result.solution = t.primal();
  result.pivots = t.pivots();
  if (!is_solution(sys, result.solution)) {
    throw std::logic_error("simplex produced a point that does not satisfy the system");
  }
  Rational check;
  for (std::size_t j = 0; j < objective.size(); ++j) check += objective[j] * result.solution[j];
  if (check != result.value) throw std::logic_error("simplex objective bookkeeping diverged");
  return result;
}

}  // namespace cbd
