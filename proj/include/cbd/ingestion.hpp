#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbd/model.hpp"

namespace cbd {

inline constexpr int kSchemaVersion = 1;

/// Reads a system document (JSON). Masses must be strings holding a decimal
/// ("0.3") or a fraction ("3/10"). Throws SchemaError naming the offending
/// line or JSON pointer, and the validate_system errors for semantic problems.
CCSystem parse_system(std::string_view text);

/// Canonical document: contents and contexts in label order, nonzero masses
/// only, each as a reduced fraction string.
std::string serialize_system(const CCSystem& s);

/// A system document without "bunches". The returned contexts carry no masses.
RawSystem parse_layout(std::string_view text);

struct TrialRow {
  std::size_t line = 0;  // 1-based line in the source text
  std::string context;
  std::vector<std::optional<std::string>> values;  // one per column, empty cell = nullopt
};

struct TrialTable {
  std::vector<std::string> columns;  // content labels, in header order
  std::vector<TrialRow> rows;
};

/// CSV with header "context,<content>,<content>,...". A header cell may also be
/// written "content:<label>". Throws SchemaError on ragged rows.
TrialTable parse_trials(std::string_view csv);

/// Bunch masses are count fractions per context. Throws EmptyContext when a
/// declared context has no rows and UnknownLabel for labels the layout lacks.
CCSystem estimate_system(const TrialTable& trials, const RawSystem& layout);

struct EprBSystem {
  CCSystem system;
  std::uint64_t denominator_bound = 0;
  std::array<double, 4> target_products{};  // -cos of each axis difference
  double max_mass_error = 0;                // largest |approximate - exact| over bunch masses
  double max_product_error = 0;             // same for product expectations
};

/// Rank-4 cyclic system of spin measurements on a singlet pair. Context ci
/// pairs qi with q(i+1); the mass on equal signs is (1 - cos(theta))/4 rounded
/// to the nearest fraction with denominator at most `denominator_bound`.
EprBSystem generate_epr_b(const std::array<double, 4>& angles, std::uint64_t denominator_bound = 1'000'000);

struct PolarObservation {
  double radius = 0;
  double angle = 0;
};

struct MatchingThresholds {
  double rad1 = 0;
  double rad3 = 0;
  double ang2 = 0;
  double ang4 = 0;
};

/// Rank-4 cyclic system from per-context (radius, angle) responses. In odd
/// contexts the radius codes q_i and the angle codes q_{i+1}; in even contexts
/// the roles swap. A response codes +1 only when strictly above its threshold.
/// Throws EmptyContext.
CCSystem dichotomize_matching(const std::array<std::vector<PolarObservation>, 4>& observations,
                              const MatchingThresholds& thresholds);

/// Names accepted by example_system.
std::vector<std::string> example_names();

/// Bundled systems. "fig14" takes `p` in [0, 1/2]. Throws UnknownLabel.
CCSystem example_system(std::string_view name, const Rational& p = Rational(1, 2));

}  // namespace cbd
