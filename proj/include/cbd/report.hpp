#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbd/contextuality.hpp"
#include "cbd/cyclic.hpp"
#include "cbd/model.hpp"

namespace cbd {

inline constexpr int kReportSchemaVersion = 1;

struct SystemSummary {
  std::vector<std::string> contexts;
  std::vector<std::string> contents;
  std::size_t variables = 0;
  bool consistently_connected = false;
  std::vector<std::string> inconsistent_contents;
  // Every bunch has one variable, or every connection has one member.
  bool trivially_noncontextual = false;

  friend bool operator==(const SystemSummary&, const SystemSummary&) = default;
};

struct LabeledMass {
  std::string label;
  Rational mass;

  friend bool operator==(const LabeledMass&, const LabeledMass&) = default;
};

struct VerdictSummary {
  bool contextual = false;
  std::string witness_kind;  // "coupling" or "farkas-certificate"
  std::size_t pivots = 0;
  std::vector<LabeledMass> coupling;     // nonzero masses, with --witness
  std::vector<LabeledMass> certificate;  // one entry per row of M, with --witness

  friend bool operator==(const VerdictSummary&, const VerdictSummary&) = default;
};

struct CycleSummary {
  std::size_t rank = 0;
  std::vector<std::string> contents;
  std::vector<std::string> contexts;
  std::vector<Rational> product_expectations;
  std::vector<Rational> marginal_differences;
  Rational lhs;
  Rational rhs;
  Rational delta;
  bool contextual = false;

  friend bool operator==(const CycleSummary&, const CycleSummary&) = default;
};

struct CyclicSummary {
  bool cyclic = false;
  std::string not_cyclic_reason;
  std::vector<CycleSummary> cycles;

  bool contextual() const;
  friend bool operator==(const CyclicSummary&, const CyclicSummary&) = default;
};

struct MeasureSummary {
  Rational total_variation;
  Rational measure;
  std::size_t pivots = 0;
  std::vector<LabeledMass> quasi_coupling;  // nonzero masses, with --witness

  friend bool operator==(const MeasureSummary&, const MeasureSummary&) = default;
};

struct Report {
  std::string source;
  SystemSummary system;
  std::optional<VerdictSummary> verdict;
  std::optional<CyclicSummary> cyclic;
  std::optional<MeasureSummary> measure;
  std::vector<std::pair<std::string, double>> timings_ms;

  friend bool operator==(const Report&, const Report&) = default;
};

struct ReportOptions {
  bool verdict = true;
  bool cyclic = true;
  bool measure = false;
  bool witness = false;
  AnalysisOptions analysis;
};

SystemSummary summarize(const CCSystem& s);
CyclicSummary summarize_cycles(const CCSystem& s);

/// Runs the requested analyses. Throws std::logic_error if the LP verdict and
/// the cyclic criterion disagree.
Report build_report(const CCSystem& s, const ReportOptions& options = {}, std::string source = {});

std::string report_to_json(const Report& r, int indent = 2);
/// Throws SchemaError.
Report report_from_json(std::string_view text);
std::string report_to_text(const Report& r);

}  // namespace cbd
