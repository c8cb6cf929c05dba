#include "cbd/rational.hpp"

#include <cctype>
#include <cmath>
#include <ostream>

#include "cbd/error.hpp"

namespace cbd {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::AlphabetMismatch: return "AlphabetMismatch";
    case ErrorCode::MassSumNotOne: return "MassSumNotOne";
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::EmptySystem: return "EmptySystem";
    case ErrorCode::EmptyContext: return "EmptyContext";
    case ErrorCode::UnusedContent: return "UnusedContent";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OutcomeSpaceTooLarge: return "OutcomeSpaceTooLarge";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::PivotLimitExceeded: return "PivotLimitExceeded";
    case ErrorCode::NotBinary: return "NotBinary";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidNumber: return "InvalidNumber";
    case ErrorCode::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

Rational::Rational(long numerator, long denominator) {
  if (denominator == 0) {
    throw Error(ErrorCode::InvalidNumber, "zero denominator");
  }
  value_ = mpq_class(numerator, denominator);
  value_.canonicalize();
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) {
    throw Error(ErrorCode::InvalidNumber, "division by zero");
  }
  value_ /= o.value_;
  return *this;
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rational Rational::parse(std::string_view text) {
  const auto fail = [&]() -> Error {
    return Error(ErrorCode::InvalidNumber, "cannot parse '" + std::string(text) + "' as a rational");
  };
  std::string_view s = text;
  if (s.empty()) throw fail();

  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  mpq_class value;
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const auto num = s.substr(0, slash);
    const auto den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) throw fail();
    mpz_class d(std::string(den), 10);
    if (d == 0) throw Error(ErrorCode::InvalidNumber, "zero denominator in '" + std::string(text) + "'");
    value = mpq_class(mpz_class(std::string(num), 10), d);
  } else {
    const auto dot = s.find('.');
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (whole.empty() && frac.empty()) throw fail();
    if (!whole.empty() && !all_digits(whole)) throw fail();
    if (dot != std::string_view::npos && !frac.empty() && !all_digits(frac)) throw fail();
    if (dot != std::string_view::npos && whole.empty() && frac.empty()) throw fail();
    std::string digits = std::string(whole) + std::string(frac);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    value = mpq_class(mpz_class(digits, 10), scale);
  }
  value.canonicalize();
  if (negative) value = -value;
  return Rational(value);
}

Rational Rational::approximate(double x, std::uint64_t max_denominator) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::InvalidNumber, "cannot approximate a non-finite value");
  }
  if (max_denominator == 0) {
    throw Error(ErrorCode::InvalidNumber, "denominator bound must be positive");
  }
  // The double is itself an exact dyadic rational; run the continued-fraction
  // best-approximation on it exactly.
  const mpq_class target(x);
  const mpz_class bound(static_cast<unsigned long>(max_denominator));
  if (target.get_den() <= bound) return Rational(target);

  mpz_class p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  mpz_class n = target.get_num(), d = target.get_den();
  while (true) {
    mpz_class a;
    mpz_fdiv_q(a.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    mpz_class q2 = q0 + a * q1;
    if (q2 > bound) break;
    mpz_class p2 = p0 + a * p1;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    mpz_class r = n - a * d;
    n = d;
    d = r;
    if (d == 0) break;
  }
  // Semiconvergent candidate versus last convergent.
  mpz_class k = (bound - q0) / q1;
  mpq_class lower(p0 + k * p1, q0 + k * q1);
  mpq_class upper(p1, q1);
  lower.canonicalize();
  upper.canonicalize();
  mpq_class dl = abs(lower - target);
  mpq_class du = abs(upper - target);
  return Rational(du <= dl ? upper : lower);
}

std::string Rational::to_string() const {
  if (value_.get_den() == 1) return value_.get_num().get_str();
  return value_.get_num().get_str() + "/" + value_.get_den().get_str();
}

Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }
const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }
const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

}  // namespace cbd
