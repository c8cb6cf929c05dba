#include "cbd/report.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "cbd/error.hpp"

namespace cbd {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string violation_name(CyclicViolation v) {
  switch (v) {
    case CyclicViolation::ContextNotPair:
      return "CYC1";
    case CyclicViolation::ContentNotInTwo:
      return "CYC2";
    case CyclicViolation::NotBinary:
      return "CYC3";
  }
  return "unknown";
}

json rationals(const std::vector<Rational>& xs) {
  json out = json::array();
  for (const auto& x : xs) out.push_back(x.to_string());
  return out;
}

json masses(const std::vector<LabeledMass>& xs) {
  json out = json::array();
  for (const auto& x : xs) out.push_back(json{{"label", x.label}, {"mass", x.mass.to_string()}});
  return out;
}

template <class T>
T get(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::SchemaError, std::string("report is missing \"") + key + "\"");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::SchemaError, std::string("report field \"") + key + "\" has the wrong type");
  }
}

Rational get_rational(const json& j, const char* key) { return Rational::parse(get<std::string>(j, key)); }

std::vector<Rational> get_rationals(const json& j, const char* key) {
  std::vector<Rational> out;
  for (const auto& s : get<std::vector<std::string>>(j, key)) out.push_back(Rational::parse(s));
  return out;
}

std::vector<LabeledMass> get_masses(const json& j, const char* key) {
  std::vector<LabeledMass> out;
  const auto it = j.find(key);
  if (it == j.end()) return out;
  for (const auto& e : *it) out.push_back({get<std::string>(e, "label"), get_rational(e, "mass")});
  return out;
}

std::vector<LabeledMass> nonzero(const CCSystem& s, const TupleSpace& space, std::span<const Rational> xs) {
  std::vector<LabeledMass> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!xs[i].is_zero()) out.push_back({describe_outcome(s, space.tuple_at(i)), xs[i]});
  }
  return out;
}

}  // namespace

bool CyclicSummary::contextual() const {
  for (const auto& c : cycles) {
    if (c.contextual) return true;
  }
  return false;
}

SystemSummary summarize(const CCSystem& s) {
  SystemSummary out;
  for (const auto& c : s.contexts()) out.contexts.push_back(c.label);
  for (const auto& c : s.contents()) out.contents.push_back(c.label);
  out.variables = s.cells().size();
  const auto consistency = is_consistently_connected(s);
  out.consistently_connected = consistency.consistent;
  for (const auto& c : consistency.connections) {
    if (!c.consistent) out.inconsistent_contents.push_back(s.contents()[c.content].label);
  }
  bool singleton_bunches = true;
  for (const auto& c : s.contexts()) singleton_bunches = singleton_bunches && c.contents.size() == 1;
  bool singleton_connections = true;
  for (const auto& c : s.connections()) singleton_connections = singleton_connections && c.members.size() == 1;
  out.trivially_noncontextual = singleton_bunches || singleton_connections;
  return out;
}

CyclicSummary summarize_cycles(const CCSystem& s) {
  CyclicSummary out;
  auto detection = detect_cycles(s);
  if (const auto* nc = std::get_if<NotCyclic>(&detection)) {
    out.not_cyclic_reason = violation_name(nc->violation) + ": " + nc->detail;
    return out;
  }
  out.cyclic = true;
  for (const auto& view : std::get<std::vector<CyclicView>>(detection)) {
    const auto r = evaluate_criterion(view, s);
    CycleSummary c;
    c.rank = r.rank;
    for (auto q : view.contents) c.contents.push_back(s.contents()[q].label);
    for (auto x : view.contexts) c.contexts.push_back(s.contexts()[x].label);
    c.product_expectations = r.product_expectations;
    c.marginal_differences = r.marginal_differences;
    c.lhs = r.lhs;
    c.rhs = r.rhs;
    c.delta = r.delta;
    c.contextual = r.contextual;
    out.cycles.push_back(std::move(c));
  }
  return out;
}

Report build_report(const CCSystem& s, const ReportOptions& options, std::string source) {
  Report r;
  r.source = std::move(source);
  auto start = Clock::now();
  r.system = summarize(s);
  r.timings_ms.emplace_back("summary", elapsed_ms(start));

  if (options.verdict) {
    start = Clock::now();
    const auto v = decide_contextuality(s, options.analysis);
    VerdictSummary vs;
    vs.contextual = v.contextual;
    vs.witness_kind = v.contextual ? "farkas-certificate" : "coupling";
    vs.pivots = v.pivots;
    if (options.witness) {
      if (v.coupling) vs.coupling = nonzero(s, v.associated.outcomes, v.coupling->masses());
      if (v.certificate) {
        const auto& labels = v.associated.system.row_labels();
        for (std::size_t i = 0; i < v.certificate->size(); ++i) {
          vs.certificate.push_back({i < labels.size() ? labels[i] : "row " + std::to_string(i), (*v.certificate)[i]});
        }
      }
    }
    r.verdict = std::move(vs);
    r.timings_ms.emplace_back("verdict", elapsed_ms(start));
  }

  if (options.cyclic) {
    start = Clock::now();
    r.cyclic = summarize_cycles(s);
    r.timings_ms.emplace_back("cyclic", elapsed_ms(start));
    if (r.verdict && r.cyclic->cyclic && r.cyclic->contextual() != r.verdict->contextual) {
      throw std::logic_error("cyclic criterion disagrees with the linear-programming verdict");
    }
  }

  if (options.measure) {
    start = Clock::now();
    const auto m = contextuality_measure(s, options.analysis);
    MeasureSummary ms;
    ms.total_variation = m.total_variation;
    ms.measure = m.measure;
    ms.pivots = m.pivots;
    if (options.witness) ms.quasi_coupling = nonzero(s, m.witness.outcomes(), m.witness.masses());
    r.measure = std::move(ms);
    r.timings_ms.emplace_back("measure", elapsed_ms(start));
    if (r.verdict && (r.measure->measure.sign() > 0) != r.verdict->contextual) {
      throw std::logic_error("contextuality measure disagrees with the verdict");
    }
  }
  return r;
}

std::string report_to_json(const Report& r, int indent) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["source"] = r.source;
  j["system"] = json{{"contexts", r.system.contexts},
                     {"contents", r.system.contents},
                     {"variables", r.system.variables},
                     {"consistently_connected", r.system.consistently_connected},
                     {"inconsistent_contents", r.system.inconsistent_contents},
                     {"trivially_noncontextual", r.system.trivially_noncontextual}};
  if (r.verdict) {
    json v{{"contextual", r.verdict->contextual},
           {"witness_kind", r.verdict->witness_kind},
           {"pivots", r.verdict->pivots}};
    if (!r.verdict->coupling.empty()) v["coupling"] = masses(r.verdict->coupling);
    if (!r.verdict->certificate.empty()) v["certificate"] = masses(r.verdict->certificate);
    j["verdict"] = std::move(v);
  }
  if (r.cyclic) {
    json c{{"cyclic", r.cyclic->cyclic}};
    if (!r.cyclic->cyclic) c["reason"] = r.cyclic->not_cyclic_reason;
    json cycles = json::array();
    for (const auto& cy : r.cyclic->cycles) {
      cycles.push_back(json{{"rank", cy.rank},
                            {"contents", cy.contents},
                            {"contexts", cy.contexts},
                            {"product_expectations", rationals(cy.product_expectations)},
                            {"marginal_differences", rationals(cy.marginal_differences)},
                            {"lhs", cy.lhs.to_string()},
                            {"rhs", cy.rhs.to_string()},
                            {"delta", cy.delta.to_string()},
                            {"contextual", cy.contextual}});
    }
    c["cycles"] = std::move(cycles);
    j["cyclic"] = std::move(c);
  }
  if (r.measure) {
    json m{{"total_variation", r.measure->total_variation.to_string()},
           {"measure", r.measure->measure.to_string()},
           {"pivots", r.measure->pivots}};
    if (!r.measure->quasi_coupling.empty()) m["quasi_coupling"] = masses(r.measure->quasi_coupling);
    j["measure"] = std::move(m);
  }
  json t = json::object();
  json order = json::array();
  for (const auto& [name, ms] : r.timings_ms) {
    t[name] = ms;
    order.push_back(name);
  }
  j["timings_ms"] = std::move(t);
  j["timing_order"] = std::move(order);
  return j.dump(indent);
}

Report report_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("report is not valid JSON: ") + e.what());
  }
  if (get<int>(j, "schema_version") != kReportSchemaVersion) {
    throw Error(ErrorCode::SchemaError, "unsupported report schema version");
  }
  Report r;
  r.source = get<std::string>(j, "source");
  const auto& sys = get<json>(j, "system");
  r.system.contexts = get<std::vector<std::string>>(sys, "contexts");
  r.system.contents = get<std::vector<std::string>>(sys, "contents");
  r.system.variables = get<std::size_t>(sys, "variables");
  r.system.consistently_connected = get<bool>(sys, "consistently_connected");
  r.system.inconsistent_contents = get<std::vector<std::string>>(sys, "inconsistent_contents");
  r.system.trivially_noncontextual = get<bool>(sys, "trivially_noncontextual");
  if (const auto it = j.find("verdict"); it != j.end()) {
    VerdictSummary v;
    v.contextual = get<bool>(*it, "contextual");
    v.witness_kind = get<std::string>(*it, "witness_kind");
    v.pivots = get<std::size_t>(*it, "pivots");
    v.coupling = get_masses(*it, "coupling");
    v.certificate = get_masses(*it, "certificate");
    r.verdict = std::move(v);
  }
  if (const auto it = j.find("cyclic"); it != j.end()) {
    CyclicSummary c;
    c.cyclic = get<bool>(*it, "cyclic");
    if (!c.cyclic) c.not_cyclic_reason = get<std::string>(*it, "reason");
    for (const auto& cy : get<json>(*it, "cycles")) {
      CycleSummary s;
      s.rank = get<std::size_t>(cy, "rank");
      s.contents = get<std::vector<std::string>>(cy, "contents");
      s.contexts = get<std::vector<std::string>>(cy, "contexts");
      s.product_expectations = get_rationals(cy, "product_expectations");
      s.marginal_differences = get_rationals(cy, "marginal_differences");
      s.lhs = get_rational(cy, "lhs");
      s.rhs = get_rational(cy, "rhs");
      s.delta = get_rational(cy, "delta");
      s.contextual = get<bool>(cy, "contextual");
      c.cycles.push_back(std::move(s));
    }
    r.cyclic = std::move(c);
  }
  if (const auto it = j.find("measure"); it != j.end()) {
    MeasureSummary m;
    m.total_variation = get_rational(*it, "total_variation");
    m.measure = get_rational(*it, "measure");
    m.pivots = get<std::size_t>(*it, "pivots");
    m.quasi_coupling = get_masses(*it, "quasi_coupling");
    r.measure = std::move(m);
  }
  const auto& timings = get<json>(j, "timings_ms");
  for (const auto& name : get<std::vector<std::string>>(j, "timing_order")) {
    r.timings_ms.emplace_back(name, get<double>(timings, name.c_str()));
  }
  return r;
}

std::string report_to_text(const Report& r) {
  std::ostringstream os;
  const auto join = [](const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + xs[i];
    return out;
  };
  if (!r.source.empty()) os << "source: " << r.source << '\n';
  os << "contexts: " << join(r.system.contexts) << '\n';
  os << "contents: " << join(r.system.contents) << '\n';
  os << "variables: " << r.system.variables << '\n';
  os << "consistently connected: " << (r.system.consistently_connected ? "yes" : "no");
  if (!r.system.inconsistent_contents.empty()) os << " (differs at " << join(r.system.inconsistent_contents) << ')';
  os << '\n';
  if (r.system.trivially_noncontextual) os << "note: trivially noncontextual shape\n";
  if (r.verdict) {
    os << "verdict: " << (r.verdict->contextual ? "contextual" : "noncontextual") << " (witness: "
       << r.verdict->witness_kind << ", " << r.verdict->pivots << " pivots)\n";
    if (!r.verdict->coupling.empty()) {
      os << "coupling:\n";
      for (const auto& m : r.verdict->coupling) os << "  " << m.mass << "  " << m.label << '\n';
    }
    if (!r.verdict->certificate.empty()) {
      os << "certificate:\n";
      for (const auto& m : r.verdict->certificate) os << "  " << m.mass << "  " << m.label << '\n';
    }
  }
  if (r.cyclic) {
    if (!r.cyclic->cyclic) {
      os << "cyclic: no (" << r.cyclic->not_cyclic_reason << ")\n";
    }
    for (const auto& c : r.cyclic->cycles) {
      os << "cycle of rank " << c.rank << " over " << join(c.contents) << ": lhs " << c.lhs << " (~"
         << c.lhs.to_double() << "), rhs " << c.rhs << ", delta " << c.delta << " (~" << c.delta.to_double()
         << ") -> " << (c.contextual ? "contextual" : "noncontextual") << '\n';
    }
  }
  if (r.measure) {
    os << "total variation: " << r.measure->total_variation << '\n';
    os << "measure: " << r.measure->measure << '\n';
    if (!r.measure->quasi_coupling.empty()) {
      os << "quasi-coupling:\n";
      for (const auto& m : r.measure->quasi_coupling) os << "  " << m.mass << "  " << m.label << '\n';
    }
  }
  for (const auto& [name, ms] : r.timings_ms) os << "time " << name << ": " << ms << " ms\n";
  return os.str();
}

}  // namespace cbd
