#include "cbd/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "cbd/error.hpp"

namespace cbd {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::SchemaError, where + ": " + what);
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    schema_error("line " + std::to_string(line) + " column " + std::to_string(column), "malformed JSON");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& pointer) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(pointer, "missing field \"" + key + "\"");
  return *it;
}

std::string require_string(const json& v, const std::string& pointer) {
  if (!v.is_string()) schema_error(pointer, "expected a string");
  return v.get<std::string>();
}

void require_kind(const json& v, json::value_t kind, const std::string& pointer, const char* name) {
  if (v.type() != kind) schema_error(pointer, std::string("expected ") + name);
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& pointer) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      schema_error(pointer + "/" + key, "unknown field");
    }
  }
}

RawSystem parse_document(std::string_view text, bool with_bunches) {
  const json doc = parse_json(text);
  require_kind(doc, json::value_t::object, "", "an object");
  if (with_bunches) {
    reject_unknown_keys(doc, {"schema_version", "contents", "contexts", "bunches", "description"}, "");
  } else {
    reject_unknown_keys(doc, {"schema_version", "contents", "contexts", "description"}, "");
  }

  const json& version = require(doc, "schema_version", "");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    schema_error("/schema_version", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
  }

  RawSystem raw;
  const json& contents = require(doc, "contents", "");
  require_kind(contents, json::value_t::array, "/contents", "an array");
  for (std::size_t i = 0; i < contents.size(); ++i) {
    const std::string p = "/contents/" + std::to_string(i);
    const json& c = contents[i];
    require_kind(c, json::value_t::object, p, "an object");
    reject_unknown_keys(c, {"label", "values", "plus"}, p);
    RawContent rc;
    rc.label = require_string(require(c, "label", p), p + "/label");
    const json& values = require(c, "values", p);
    require_kind(values, json::value_t::array, p + "/values", "an array");
    for (std::size_t v = 0; v < values.size(); ++v) {
      rc.value_labels.push_back(require_string(values[v], p + "/values/" + std::to_string(v)));
    }
    if (const auto it = c.find("plus"); it != c.end()) rc.plus_value = require_string(*it, p + "/plus");
    raw.contents.push_back(std::move(rc));
  }

  const json& contexts = require(doc, "contexts", "");
  require_kind(contexts, json::value_t::array, "/contexts", "an array");
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const std::string p = "/contexts/" + std::to_string(i);
    const json& c = contexts[i];
    require_kind(c, json::value_t::object, p, "an object");
    reject_unknown_keys(c, {"label", "contents"}, p);
    RawContext rc;
    rc.label = require_string(require(c, "label", p), p + "/label");
    const json& members = require(c, "contents", p);
    require_kind(members, json::value_t::array, p + "/contents", "an array");
    for (std::size_t m = 0; m < members.size(); ++m) {
      rc.contents.push_back(require_string(members[m], p + "/contents/" + std::to_string(m)));
    }
    raw.contexts.push_back(std::move(rc));
  }

  if (!with_bunches) return raw;

  const json& bunches = require(doc, "bunches", "");
  require_kind(bunches, json::value_t::object, "/bunches", "an object");
  std::map<std::string, const RawContent*> content_by_label;
  for (const auto& c : raw.contents) content_by_label.emplace(c.label, &c);

  for (const auto& [label, entries] : bunches.items()) {
    const std::string p = "/bunches/" + label;
    auto ctx = std::find_if(raw.contexts.begin(), raw.contexts.end(),
                            [&](const RawContext& c) { return c.label == label; });
    if (ctx == raw.contexts.end()) schema_error(p, "no context with this label");
    require_kind(entries, json::value_t::array, p, "an array");
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const std::string ep = p + "/" + std::to_string(e);
      const json& entry = entries[e];
      require_kind(entry, json::value_t::object, ep, "an object");
      reject_unknown_keys(entry, {"values", "mass"}, ep);
      const json& values = require(entry, "values", ep);
      require_kind(values, json::value_t::array, ep + "/values", "an array");
      if (values.size() != ctx->contents.size()) {
        schema_error(ep + "/values", "expected " + std::to_string(ctx->contents.size()) + " values");
      }
      ValueTuple tuple;
      for (std::size_t v = 0; v < values.size(); ++v) {
        const std::string vp = ep + "/values/" + std::to_string(v);
        const std::string value = require_string(values[v], vp);
        const auto content = content_by_label.find(ctx->contents[v]);
        if (content == content_by_label.end()) {
          throw Error(ErrorCode::UnknownLabel, p + ": content '" + ctx->contents[v] + "' is not declared");
        }
        const auto& labels = content->second->value_labels;
        const auto it = std::find(labels.begin(), labels.end(), value);
        if (it == labels.end()) {
          throw Error(ErrorCode::UnknownLabel,
                      vp + ": '" + value + "' is not a value of content '" + content->second->label + "'");
        }
        tuple.push_back(static_cast<std::uint32_t>(it - labels.begin()));
      }
      const json& mass = require(entry, "mass", ep);
      if (!mass.is_string()) schema_error(ep + "/mass", "masses must be decimal or fraction strings");
      Rational m;
      try {
        m = Rational::parse(mass.get<std::string>());
      } catch (const Error& err) {
        schema_error(ep + "/mass", err.what());
      }
      ctx->masses.emplace_back(std::move(tuple), std::move(m));
    }
  }
  return raw;
}

json document_skeleton(const CCSystem& s) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  json contents = json::array();
  for (const auto& c : s.contents()) {
    json jc{{"label", c.label}, {"values", c.value_labels}};
    if (c.plus_value) jc["plus"] = c.value_labels[*c.plus_value];
    contents.push_back(std::move(jc));
  }
  doc["contents"] = std::move(contents);
  json contexts = json::array();
  for (const auto& ctx : s.contexts()) {
    json members = json::array();
    for (auto q : ctx.contents) members.push_back(s.contents()[q].label);
    contexts.push_back(json{{"label", ctx.label}, {"contents", std::move(members)}});
  }
  doc["contexts"] = std::move(contexts);
  return doc;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      cells.push_back(was_quoted ? cell : trim(cell));
      cell.clear();
      was_quoted = false;
    } else {
      cell.push_back(ch);
    }
  }
  if (quoted) schema_error("line " + std::to_string(line_no), "unterminated quote");
  cells.push_back(was_quoted ? cell : trim(cell));
  return cells;
}

const std::vector<std::string>& binary_values() {
  static const std::vector<std::string> values{"+1", "-1"};
  return values;
}

RawContent binary_content(std::string label) {
  return RawContent{std::move(label), binary_values(), std::string("+1")};
}

std::string indexed(std::string_view prefix, std::size_t i) { return std::string(prefix) + std::to_string(i); }

RawContext context_of(std::string label, std::vector<std::string> contents,
                      std::vector<std::pair<ValueTuple, Rational>> masses) {
  return RawContext{std::move(label), std::move(contents), std::move(masses)};
}

std::vector<std::pair<ValueTuple, Rational>> table2(const Rational& a, const Rational& b, const Rational& c,
                                                     const Rational& d) {
  return {{{0, 0}, a}, {{0, 1}, b}, {{1, 0}, c}, {{1, 1}, d}};
}

std::vector<std::pair<ValueTuple, Rational>> table1(const Rational& a, const Rational& b) {
  return {{{0}, a}, {{1}, b}};
}

// Rank-2 system with contents q1, q2 and +1/-1 values.
RawSystem rank2(std::vector<std::pair<ValueTuple, Rational>> first, std::vector<std::pair<ValueTuple, Rational>> second) {
  RawSystem raw;
  raw.contents = {binary_content("q1"), binary_content("q2")};
  raw.contexts = {context_of("c1", {"q1", "q2"}, std::move(first)), context_of("c2", {"q1", "q2"}, std::move(second))};
  return raw;
}

RawSystem szlg() {
  RawSystem raw;
  for (int i = 1; i <= 3; ++i) raw.contents.push_back(RawContent{indexed("q", i), {"1", "2"}, std::string("1")});
  const Rational z(0);
  raw.contexts = {
      context_of("c1", {"q1", "q2"}, table2(Rational(7, 10), z, z, Rational(3, 10))),
      context_of("c2", {"q2", "q3"}, table2(Rational(7, 10), z, z, Rational(3, 10))),
      context_of("c3", {"q1", "q3"}, table2(Rational(2, 5), Rational(3, 10), Rational(3, 10), z)),
  };
  return raw;
}

RawSystem example_raw(std::string_view name, const Rational& p) {
  const Rational z(0);
  const Rational h(1, 2);
  const Rational u(1, 4);
  if (name == "fig1") return rank2(table2(u, u, u, u), table2(u, u, u, u));
  if (name == "fig9") return rank2(table2(h, z, z, h), table2(z, h, h, z));
  if (name == "fig10" || name == "szlg") return szlg();
  if (name == "fig14") {
    if (p < z || p > h) throw Error(ErrorCode::IndexOutOfRange, "fig14 needs 0 <= p <= 1/2");
    return rank2(table2(h, z, z, h), table2(p, h - p, h - p, p));
  }
  if (name == "figB") {
    RawSystem raw;
    for (int i = 1; i <= 3; ++i) raw.contents.push_back(binary_content(indexed("q", i)));
    std::vector<std::pair<ValueTuple, Rational>> triple;
    for (std::uint32_t t = 0; t < 8; ++t) triple.push_back({{t >> 2, (t >> 1) & 1U, t & 1U}, Rational(1, 8)});
    raw.contexts = {
        context_of("c1", {"q1", "q2"}, table2(u, u, u, u)),
        context_of("c2", {"q1", "q2", "q3"}, std::move(triple)),
        context_of("c3", {"q1", "q3"}, table2(Rational(3, 8), Rational(1, 8), Rational(1, 8), Rational(3, 8))),
    };
    return raw;
  }
  if (name == "a-prime") {
    RawSystem raw;
    for (int i = 1; i <= 4; ++i) raw.contents.push_back(binary_content(indexed("q", i)));
    raw.contexts = {
        context_of("c1", {"q1", "q2"}, table2(h, z, z, h)),
        context_of("c2", {"q3", "q4"}, table2(z, Rational(2, 5), Rational(3, 5), z)),
    };
    return raw;
  }
  if (name == "a-double-prime") {
    RawSystem raw;
    raw.contents = {binary_content("q"), binary_content("q'")};
    raw.contexts = {
        context_of("c1", {"q"}, table1(Rational(1, 3), Rational(2, 3))),
        context_of("c2", {"q"}, table1(h, h)),
        context_of("c3", {"q'"}, table1(u, Rational(3, 4))),
        context_of("c4", {"q'"}, table1(Rational(1), z)),
    };
    return raw;
  }
  if (name == "a-triple-prime") {
    RawSystem raw;
    for (int i = 1; i <= 4; ++i) {
      raw.contents.push_back(binary_content(indexed("q", i)));
      raw.contexts.push_back(context_of(indexed("c", i), {indexed("q", i)}, table1(Rational(i, 5), Rational(5 - i, 5))));
    }
    return raw;
  }
  throw Error(ErrorCode::UnknownLabel, "no bundled example named '" + std::string(name) + "'");
}

}  // namespace

CCSystem parse_system(std::string_view text) { return validate_system(parse_document(text, true)); }

RawSystem parse_layout(std::string_view text) { return parse_document(text, false); }

std::string serialize_system(const CCSystem& s) {
  json doc = document_skeleton(s);
  json bunches = json::object();
  for (const auto& ctx : s.contexts()) {
    json entries = json::array();
    const auto& space = ctx.bunch.space();
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto& m = ctx.bunch.mass_at(i);
      if (m.is_zero()) continue;
      const auto tuple = space.tuple_at(i);
      json values = json::array();
      for (std::size_t k = 0; k < tuple.size(); ++k) {
        values.push_back(s.contents()[ctx.contents[k]].value_labels[tuple[k]]);
      }
      entries.push_back(json{{"values", std::move(values)}, {"mass", m.to_string()}});
    }
    bunches[ctx.label] = std::move(entries);
  }
  doc["bunches"] = std::move(bunches);
  return doc.dump(2) + "\n";
}

TrialTable parse_trials(std::string_view csv) {
  TrialTable table;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    auto end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line, line_no);
    const std::string where = "line " + std::to_string(line_no);
    if (!header_seen) {
      if (cells.empty() || cells[0] != "context") schema_error(where, "first header column must be \"context\"");
      for (std::size_t i = 1; i < cells.size(); ++i) {
        std::string label = cells[i];
        if (label.starts_with("content:")) label = trim(label.substr(8));
        if (label.empty()) schema_error(where, "empty content label in header");
        if (std::find(table.columns.begin(), table.columns.end(), label) != table.columns.end()) {
          schema_error(where, "content '" + label + "' appears twice in the header");
        }
        table.columns.push_back(std::move(label));
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != table.columns.size() + 1) {
      schema_error(where, "expected " + std::to_string(table.columns.size() + 1) + " cells, found " +
                              std::to_string(cells.size()));
    }
    TrialRow row;
    row.line = line_no;
    row.context = cells[0];
    if (row.context.empty()) schema_error(where, "missing context label");
    for (std::size_t i = 1; i < cells.size(); ++i) {
      if (cells[i].empty()) {
        row.values.emplace_back();
      } else {
        row.values.emplace_back(std::move(cells[i]));
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (!header_seen) throw Error(ErrorCode::EmptyInput, "trial table has no header");
  return table;
}

CCSystem estimate_system(const TrialTable& trials, const RawSystem& layout) {
  std::map<std::string, std::size_t> column_of;
  for (std::size_t i = 0; i < trials.columns.size(); ++i) {
    const auto& label = trials.columns[i];
    if (std::none_of(layout.contents.begin(), layout.contents.end(),
                     [&](const RawContent& c) { return c.label == label; })) {
      throw Error(ErrorCode::UnknownLabel, "trial column '" + label + "' is not a content of the layout");
    }
    column_of.emplace(label, i);
  }

  RawSystem raw = layout;
  std::map<std::string, std::size_t> context_index;
  for (std::size_t i = 0; i < raw.contexts.size(); ++i) {
    raw.contexts[i].masses.clear();
    context_index.emplace(raw.contexts[i].label, i);
  }
  std::vector<std::map<ValueTuple, long>> counts(raw.contexts.size());
  std::vector<long> totals(raw.contexts.size(), 0);

  for (const auto& row : trials.rows) {
    const std::string where = "line " + std::to_string(row.line);
    const auto ctx_it = context_index.find(row.context);
    if (ctx_it == context_index.end()) {
      throw Error(ErrorCode::UnknownLabel, where + ": context '" + row.context + "' is not in the layout");
    }
    const RawContext& ctx = raw.contexts[ctx_it->second];
    std::vector<bool> used(trials.columns.size(), false);
    ValueTuple tuple;
    for (const auto& content_label : ctx.contents) {
      const auto col = column_of.find(content_label);
      if (col == column_of.end() || !row.values[col->second]) {
        schema_error(where, "no value for content '" + content_label + "' of context '" + ctx.label + "'");
      }
      used[col->second] = true;
      const auto& value = *row.values[col->second];
      const auto content = std::find_if(layout.contents.begin(), layout.contents.end(),
                                        [&](const RawContent& c) { return c.label == content_label; });
      if (content == layout.contents.end()) {
        throw Error(ErrorCode::UnknownLabel, "content '" + content_label + "' is not declared");
      }
      const auto it = std::find(content->value_labels.begin(), content->value_labels.end(), value);
      if (it == content->value_labels.end()) {
        throw Error(ErrorCode::UnknownLabel,
                    where + ": '" + value + "' is not a value of content '" + content_label + "'");
      }
      tuple.push_back(static_cast<std::uint32_t>(it - content->value_labels.begin()));
    }
    for (std::size_t i = 0; i < used.size(); ++i) {
      if (!used[i] && row.values[i]) {
        schema_error(where, "content '" + trials.columns[i] + "' is not part of context '" + ctx.label + "'");
      }
    }
    ++counts[ctx_it->second][tuple];
    ++totals[ctx_it->second];
  }

  for (std::size_t i = 0; i < raw.contexts.size(); ++i) {
    if (totals[i] == 0) {
      throw Error(ErrorCode::EmptyContext, "context '" + raw.contexts[i].label + "' has no trials");
    }
    for (const auto& [tuple, n] : counts[i]) raw.contexts[i].masses.emplace_back(tuple, Rational(n, totals[i]));
  }
  return validate_system(raw);
}

EprBSystem generate_epr_b(const std::array<double, 4>& angles, std::uint64_t denominator_bound) {
  EprBSystem out;
  out.denominator_bound = denominator_bound;
  RawSystem raw;
  for (int i = 1; i <= 4; ++i) raw.contents.push_back(binary_content(indexed("q", i)));
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t j = (i + 1) % 4;
    const double c = std::cos(angles[j] - angles[i]);
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidNumber, "angles must be finite");
    const double same = (1.0 - c) / 4.0;
    const Rational r = Rational::approximate(same, denominator_bound);
    const Rational opposite = Rational(1, 2) - r;
    out.target_products[i] = -c;
    out.max_mass_error = std::max(out.max_mass_error, std::abs(r.to_double() - same));
    const double product = (Rational(4) * r - Rational(1)).to_double();
    out.max_product_error = std::max(out.max_product_error, std::abs(product + c));
    raw.contexts.push_back(context_of(indexed("c", i + 1), {indexed("q", i + 1), indexed("q", j + 1)},
                                      table2(r, opposite, opposite, r)));
  }
  out.system = validate_system(raw);
  return out;
}

CCSystem dichotomize_matching(const std::array<std::vector<PolarObservation>, 4>& observations,
                              const MatchingThresholds& t) {
  const std::array<double, 4> rad{t.rad1, 0, t.rad3, 0};
  const std::array<double, 4> ang{0, t.ang2, 0, t.ang4};
  for (double x : {t.rad1, t.rad3, t.ang2, t.ang4}) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidNumber, "thresholds must be finite");
  }
  RawSystem raw;
  for (int i = 1; i <= 4; ++i) raw.contents.push_back(binary_content(indexed("q", i)));
  const auto code = [](double x, double threshold) -> std::uint32_t { return x > threshold ? 0 : 1; };
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t j = (i + 1) % 4;
    const auto& obs = observations[i];
    if (obs.empty()) throw Error(ErrorCode::EmptyContext, "context " + indexed("c", i + 1) + " has no observations");
    std::map<ValueTuple, long> counts;
    for (const auto& o : obs) {
      // Index i even here means an odd-numbered context.
      const ValueTuple tuple = i % 2 == 0 ? ValueTuple{code(o.radius, rad[i]), code(o.angle, ang[j])}
                                          : ValueTuple{code(o.angle, ang[i]), code(o.radius, rad[j])};
      ++counts[tuple];
    }
    std::vector<std::pair<ValueTuple, Rational>> masses;
    const long total = static_cast<long>(obs.size());
    for (const auto& [tuple, n] : counts) masses.emplace_back(tuple, Rational(n, total));
    raw.contexts.push_back(context_of(indexed("c", i + 1), {indexed("q", i + 1), indexed("q", j + 1)}, std::move(masses)));
  }
  return validate_system(raw);
}

std::vector<std::string> example_names() {
  return {"fig1", "fig9", "fig10", "szlg", "fig14", "figB", "a-prime", "a-double-prime", "a-triple-prime"};
}

CCSystem example_system(std::string_view name, const Rational& p) { return validate_system(example_raw(name, p)); }

}  // namespace cbd
