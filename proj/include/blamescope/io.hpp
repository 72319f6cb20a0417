#pragma once

// Model files (JSON), case logs and rating files (CSV), and canonical JSON
// report serialization.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "blamescope/blame.hpp"
#include "blamescope/error.hpp"
#include "blamescope/hitl.hpp"
#include "blamescope/metrics.hpp"
#include "blamescope/scm.hpp"

namespace blamescope::io {

using nlohmann::json;

inline constexpr std::string_view kScmSchema = "blamescope/scm/1";
inline constexpr std::string_view kReportSchema = "blamescope/report/1";
inline constexpr std::string_view kAttributionSchema = "blamescope/attr/1";

/// Everything a model file can declare besides the SCM itself.
struct ModelFile {
  ScmDescription scm;
  std::map<std::string, OutcomeSpec> outcomes;
  std::map<std::string, Action> actions;
  std::map<std::string, CostModel> costs;
  std::optional<DiscountSpec> discount;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, path, "cannot open file for writing");
  out << content;
}

// ---------------------------------------------------------------------------
// Model JSON

namespace detail {

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, where, what);
}

inline const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing key '") + key + "'");
  return *it;
}

inline std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) schema_error(where, "expected a string");
  return v.get<std::string>();
}

inline double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where, "expected a number");
  return v.get<double>();
}

inline std::vector<std::string> as_strings(const json& v, const std::string& where) {
  if (!v.is_array()) schema_error(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_string(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::map<std::string, std::string> as_table(const json& v, const std::string& where) {
  if (!v.is_object()) schema_error(where, "expected an object mapping parent tuples to values");
  std::map<std::string, std::string> out;
  for (const auto& [key, val] : v.items()) out[key] = as_string(val, where + "." + key);
  return out;
}

inline Literal parse_literal(const json& v, const std::string& where) {
  Literal lit;
  lit.var = as_string(member(v, "var", where), where + ".var");
  std::string op = "eq";
  if (v.contains("op")) op = as_string(v["op"], where + ".op");
  if (op == "eq") lit.cmp = Comparator::Eq;
  else if (op == "neq") lit.cmp = Comparator::Neq;
  else schema_error(where + ".op", "comparator must be 'eq' or 'neq'");
  lit.value = as_string(member(v, "value", where), where + ".value");
  return lit;
}

inline Conjunction parse_conjunction(const json& v, const std::string& where) {
  if (!v.is_array()) schema_error(where, "expected an array of literals");
  Conjunction c;
  for (std::size_t i = 0; i < v.size(); ++i)
    c.push_back(parse_literal(v[i], where + "[" + std::to_string(i) + "]"));
  return c;
}

inline json literal_json(const Literal& l) {
  return {{"var", l.var}, {"op", l.cmp == Comparator::Eq ? "eq" : "neq"}, {"value", l.value}};
}

}  // namespace detail

inline OutcomeSpec parse_outcome(const json& v, const std::string& where) {
  if (!v.is_array()) detail::schema_error(where, "expected a list of clauses");
  OutcomeSpec spec;
  for (std::size_t i = 0; i < v.size(); ++i)
    spec.clauses.push_back(detail::parse_conjunction(v[i], where + "[" + std::to_string(i) + "]"));
  return spec;
}

inline ModelFile parse_model(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) schema_error("$", "model file must be a JSON object");
  if (as_string(member(doc, "schema", "$"), "$.schema") != kScmSchema)
    schema_error("$.schema", "expected '" + std::string(kScmSchema) + "'");

  ModelFile mf;
  const json& exo = member(doc, "exogenous", "$");
  if (!exo.is_array()) schema_error("$.exogenous", "expected an array");
  for (std::size_t i = 0; i < exo.size(); ++i) {
    std::string w = "$.exogenous[" + std::to_string(i) + "]";
    ExogenousVar v;
    v.id = as_string(member(exo[i], "id", w), w + ".id");
    v.values = as_strings(member(exo[i], "values", w), w + ".values");
    const json& probs = member(exo[i], "probs", w);
    if (!probs.is_array()) schema_error(w + ".probs", "expected an array of numbers");
    for (std::size_t j = 0; j < probs.size(); ++j)
      v.probs.push_back(as_number(probs[j], w + ".probs[" + std::to_string(j) + "]"));
    mf.scm.exogenous.push_back(std::move(v));
  }

  const json& endo = member(doc, "endogenous", "$");
  if (!endo.is_array()) schema_error("$.endogenous", "expected an array");
  for (std::size_t i = 0; i < endo.size(); ++i) {
    std::string w = "$.endogenous[" + std::to_string(i) + "]";
    EndogenousVar v;
    v.id = as_string(member(endo[i], "id", w), w + ".id");
    v.values = as_strings(member(endo[i], "values", w), w + ".values");
    v.parents = as_strings(member(endo[i], "parents", w), w + ".parents");
    v.table = as_table(member(endo[i], "table", w), w + ".table");
    mf.scm.endogenous.push_back(std::move(v));
  }

  if (doc.contains("outcomes")) {
    const json& o = doc["outcomes"];
    if (!o.is_object()) schema_error("$.outcomes", "expected an object");
    for (const auto& [name, clauses] : o.items())
      mf.outcomes[name] = parse_outcome(clauses, "$.outcomes." + name);
  }

  if (doc.contains("actions")) {
    const json& a = doc["actions"];
    if (!a.is_object()) schema_error("$.actions", "expected an object");
    for (const auto& [name, list] : a.items()) {
      std::string w = "$.actions." + name;
      if (!list.is_array()) schema_error(w, "expected a list of overrides");
      Action act{name, {}};
      for (std::size_t i = 0; i < list.size(); ++i) {
        std::string wi = w + "[" + std::to_string(i) + "]";
        MechanismOverride ov;
        ov.var = as_string(member(list[i], "var", wi), wi + ".var");
        ov.parents = as_strings(member(list[i], "parents", wi), wi + ".parents");
        ov.table = as_table(member(list[i], "table", wi), wi + ".table");
        act.overrides.push_back(std::move(ov));
      }
      mf.actions[name] = std::move(act);
    }
  }

  if (doc.contains("costs")) {
    const json& c = doc["costs"];
    if (!c.is_object()) schema_error("$.costs", "expected an object");
    for (const auto& [name, list] : c.items()) {
      std::string w = "$.costs." + name;
      if (!list.is_array()) schema_error(w, "expected a list of cost terms");
      CostModel cm;
      for (std::size_t i = 0; i < list.size(); ++i) {
        std::string wi = w + "[" + std::to_string(i) + "]";
        CostTerm t;
        if (list[i].contains("when")) t.when = parse_conjunction(list[i]["when"], wi + ".when");
        t.cost = as_number(member(list[i], "cost", wi), wi + ".cost");
        if (!(t.cost >= 0.0) || !std::isfinite(t.cost)) schema_error(wi + ".cost", "cost must be finite and >= 0");
        cm.terms.push_back(std::move(t));
      }
      mf.costs[name] = std::move(cm);
    }
  }

  if (doc.contains("discount")) {
    const json& d = doc["discount"];
    DiscountSpec spec;
    std::string kind = as_string(member(d, "kind", "$.discount"), "$.discount.kind");
    if (kind == "unit") spec.kind = DiscountKind::Unit;
    else if (kind == "cost_ratio") spec.kind = DiscountKind::CostRatio;
    else schema_error("$.discount.kind", "expected 'unit' or 'cost_ratio'");
    if (d.contains("epsilon")) spec.epsilon = as_number(d["epsilon"], "$.discount.epsilon");
    if (!(spec.epsilon > 0.0 && spec.epsilon <= 1.0))
      schema_error("$.discount.epsilon", "epsilon must lie in (0,1]");
    mf.discount = spec;
  }
  return mf;
}

inline ModelFile load_model(const std::string& path) {
  std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path, e.what());
  }
  return parse_model(doc);
}

inline json to_json(const ScmDescription& d) {
  json exo = json::array();
  for (const auto& v : d.exogenous) exo.push_back({{"id", v.id}, {"values", v.values}, {"probs", v.probs}});
  json endo = json::array();
  for (const auto& v : d.endogenous)
    endo.push_back({{"id", v.id}, {"values", v.values}, {"parents", v.parents}, {"table", v.table}});
  return {{"schema", kScmSchema}, {"exogenous", exo}, {"endogenous", endo}};
}

inline json to_json(const OutcomeSpec& spec) {
  json clauses = json::array();
  for (const auto& c : spec.clauses) {
    json lits = json::array();
    for (const auto& l : c) lits.push_back(detail::literal_json(l));
    clauses.push_back(lits);
  }
  return clauses;
}

// ---------------------------------------------------------------------------
// Canonical serialization: sorted keys, 12 significant digits.

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace detail {

inline void dump_canonical(const json& v, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, val] : v.items()) {  // std::map order: sorted
        if (!first) out += ",\n";
        first = false;
        out += inner + json(key).dump() + ": ";
        dump_canonical(val, out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump_canonical(v[i], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float:
      out += format_number(v.get<double>());
      return;
    default:
      out += v.dump();
  }
}

}  // namespace detail

/// Byte-stable rendering used for every report.
inline std::string canonical_dump(const json& v) {
  std::string out;
  detail::dump_canonical(v, out, 0);
  out += "\n";
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no), "unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

/// Rows of a headed CSV, with the column positions of `required` resolved.
struct CsvTable {
  std::vector<std::size_t> columns;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)
};

inline CsvTable read_csv(std::string_view text, const std::vector<std::string>& required,
                         const std::string& source) {
  CsvTable table;
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string line(text.substr(start, end - start));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
      start = end + 1;
    }
  }
  std::size_t first = 0;
  while (first < lines.size() && lines[first].empty()) ++first;
  if (first == lines.size()) throw Error(ErrorCode::SchemaViolation, source, "missing header row");
  std::string header_line = lines[first];
  if (header_line.rfind("\xEF\xBB\xBF", 0) == 0) header_line.erase(0, 3);
  auto header = split_csv_line(header_line, first + 1);
  for (const auto& col : required) {
    auto it = std::find(header.begin(), header.end(), col);
    if (it == header.end())
      throw Error(ErrorCode::SchemaViolation, source, "missing column '" + col + "'");
    table.columns.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split_csv_line(lines[i], i + 1);
    if (fields.size() != header.size())
      throw Error(ErrorCode::ParseError, source + ":" + std::to_string(i + 1),
                  "expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    table.rows.emplace_back(i + 1, std::move(fields));
  }
  return table;
}

inline double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || s.empty())
    throw Error(ErrorCode::ParseError, where, "'" + s + "' is not a decimal number");
  return v;
}

inline long long parse_int(const std::string& s, const std::string& where) {
  long long v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || s.empty())
    throw Error(ErrorCode::ParseError, where, "'" + s + "' is not an integer");
  return v;
}

inline std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace detail

inline const std::vector<std::string> kCaseColumns = {"case_id", "ai_confidence", "ai_decision",
                                                      "human_decision", "truth"};

inline std::vector<Case> parse_cases(std::string_view text, const std::string& source = "cases") {
  auto table = detail::read_csv(text, kCaseColumns, source);
  std::vector<Case> cases;
  cases.reserve(table.rows.size());
  std::unordered_set<std::string> seen;
  for (const auto& [line, f] : table.rows) {
    const std::string where = source + ":" + std::to_string(line);
    Case c;
    c.id = f[table.columns[0]];
    if (c.id.empty()) throw Error(ErrorCode::ParseError, where, "empty case_id");
    c.ai_confidence = detail::parse_double(f[table.columns[1]], where);
    if (!(c.ai_confidence >= 0.0 && c.ai_confidence <= 1.0))
      throw Error(ErrorCode::ParseError, where, "ai_confidence outside [0,1]");
    c.ai_decision = f[table.columns[2]];
    c.human_decision = f[table.columns[3]];
    c.truth = f[table.columns[4]];
    if (!seen.insert(c.id).second) throw Error(ErrorCode::DuplicateCaseId, where, "duplicate case_id '" + c.id + "'");
    cases.push_back(std::move(c));
  }
  return cases;
}

inline std::vector<Case> load_cases(const std::string& path) { return parse_cases(read_file(path), path); }

/// Confidences use the shortest representation that parses back exactly.
inline std::string write_cases(const std::vector<Case>& cases) {
  std::string out = "case_id,ai_confidence,ai_decision,human_decision,truth\n";
  char buf[64];
  for (const auto& c : cases) {
    auto res = std::to_chars(buf, buf + sizeof buf, c.ai_confidence);
    out += detail::quote_csv(c.id) + "," + std::string(buf, res.ptr) + "," +
           detail::quote_csv(c.ai_decision) + "," + detail::quote_csv(c.human_decision) + "," +
           detail::quote_csv(c.truth) + "\n";
  }
  return out;
}

inline std::vector<RatingPair> parse_ratings(std::string_view text, const std::string& source = "ratings") {
  auto table = detail::read_csv(text, {"case_id", "rater_a", "rater_b"}, source);
  std::vector<RatingPair> pairs;
  for (const auto& [line, f] : table.rows) {
    const std::string where = source + ":" + std::to_string(line);
    RatingPair p;
    p.case_id = f[table.columns[0]];
    auto a = detail::parse_int(f[table.columns[1]], where);
    auto b = detail::parse_int(f[table.columns[2]], where);
    if (a < 1 || b < 1 || a > 1000000 || b > 1000000)
      throw Error(ErrorCode::ParseError, where, "categories must be positive integers");
    p.rater_a = static_cast<int>(a);
    p.rater_b = static_cast<int>(b);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

inline std::vector<RatingPair> load_ratings(const std::string& path) {
  return parse_ratings(read_file(path), path);
}

}  // namespace blamescope::io
