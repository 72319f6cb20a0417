#pragma once

// Subcommand implementations behind the blamescope CLI. Each returns a JSON
// report; rendering and exit codes live in the executable.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "blamescope/attribution.hpp"
#include "blamescope/blame.hpp"
#include "blamescope/error.hpp"
#include "blamescope/hitl.hpp"
#include "blamescope/io.hpp"
#include "blamescope/metrics.hpp"
#include "blamescope/scm.hpp"
#include "blamescope/synthetic.hpp"

namespace blamescope::cli {

using nlohmann::json;

struct RunConfig {
  std::string subcommand;
  std::optional<std::string> scm_path;
  std::optional<std::string> cases_path;
  std::optional<std::string> ratings_path;
  std::optional<std::string> outcome;
  std::optional<std::string> action;
  std::optional<std::string> baseline;
  std::optional<std::string> cost;
  std::optional<std::string> discount;  // "unit" | "cost_ratio"
  std::optional<double> l;
  std::optional<double> u;
  std::optional<std::uint64_t> samples;
  std::uint64_t seed = 0;
  bool exact = false;
  std::vector<std::string> observe;   // "VAR=value", comma lists allowed
  std::vector<std::string> do_;       // "VAR=value", comma lists allowed
  double ai_cost = 1.0;
  double human_cost = 1.0;
  std::string positive = "1";
  std::optional<std::size_t> k;
  std::optional<double> kappa;
  std::optional<double> f1_hitl;
  std::optional<double> f1_human;
  // gen
  std::size_t n_cases = 200;
  double ai_accuracy = 0.85;
  double human_accuracy = 0.9;
  std::string profile = "calibrated";
  std::optional<std::string> out;
};

/// Echo of the options that were actually given.
inline json echo(const RunConfig& c) {
  json j = json::object();
  auto put = [&](const char* key, const auto& opt) {
    if (opt) j[key] = *opt;
  };
  put("scm", c.scm_path);
  put("cases", c.cases_path);
  put("ratings", c.ratings_path);
  put("outcome", c.outcome);
  put("action", c.action);
  put("baseline", c.baseline);
  put("cost", c.cost);
  put("discount", c.discount);
  put("l", c.l);
  put("u", c.u);
  put("samples", c.samples);
  put("k", c.k);
  put("kappa", c.kappa);
  put("f1_hitl", c.f1_hitl);
  put("f1_human", c.f1_human);
  if (!c.observe.empty()) j["observe"] = c.observe;
  if (!c.do_.empty()) j["do"] = c.do_;
  j["seed"] = c.seed;
  j["exact"] = c.exact;
  return j;
}

inline json report(const RunConfig& c, json result) {
  return {{"schema", io::kReportSchema}, {"command", c.subcommand}, {"config", echo(c)},
          {"result", std::move(result)}};
}

inline json error_json(const Error& e) {
  const char* cat = e.category() == ErrorCategory::Config ? "config"
                    : e.category() == ErrorCategory::Data ? "data"
                                                          : "model";
  return {{"error",
           {{"code", to_string(e.code())},
            {"category", cat},
            {"subject", e.subject()},
            {"message", e.what()},
            {"exit_code", exit_code(e.category())}}}};
}

namespace detail {

inline const std::string& require(const std::optional<std::string>& v, const char* flag) {
  if (!v) throw Error(ErrorCode::ConfigError, flag, std::string("option ") + flag + " is required");
  return *v;
}

/// Parses "A=1,B=0" items into ordered (var, value) pairs.
inline std::vector<std::pair<std::string, std::string>> parse_bindings(const std::vector<std::string>& items,
                                                                       const char* flag) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& item : items) {
    std::size_t start = 0;
    while (start <= item.size()) {
      std::size_t end = item.find(',', start);
      if (end == std::string::npos) end = item.size();
      std::string part = item.substr(start, end - start);
      auto eq = part.find('=');
      if (eq == std::string::npos || eq == 0)
        throw Error(ErrorCode::ConfigError, flag, "expected VAR=value, got '" + part + "'");
      out.emplace_back(part.substr(0, eq), part.substr(eq + 1));
      start = end + 1;
    }
  }
  return out;
}

inline const OutcomeSpec& find_outcome(const io::ModelFile& mf, const std::string& name) {
  auto it = mf.outcomes.find(name);
  if (it == mf.outcomes.end()) throw Error(ErrorCode::UnknownOutcome, name, "no such outcome in model file");
  return it->second;
}

inline const Action& find_action(const io::ModelFile& mf, const std::string& name) {
  auto it = mf.actions.find(name);
  if (it == mf.actions.end()) throw Error(ErrorCode::UnknownAction, name, "no such action in model file");
  return it->second;
}

inline const CostModel& find_cost(const io::ModelFile& mf, const std::string& name) {
  auto it = mf.costs.find(name);
  if (it == mf.costs.end()) throw Error(ErrorCode::UnknownCost, name, "no such cost model in model file");
  return it->second;
}

inline Estimator estimator(const RunConfig& c) {
  if (c.samples && *c.samples < 1) throw Error(ErrorCode::ConfigError, "--samples", "must be at least 1");
  if (c.samples && !c.exact) return Estimator::monte_carlo(*c.samples, c.seed);
  return Estimator::exact();
}

inline json estimator_json(const Estimator& est) {
  json j = {{"mode", est.name()}};
  if (est.mode == Estimator::Mode::MonteCarlo) {
    j["samples"] = est.samples;
    j["seed"] = est.seed;
  }
  return j;
}

inline FlagPolicy policy(const RunConfig& c) {
  if (!c.l || !c.u) throw Error(ErrorCode::ConfigError, "--l,--u", "both thresholds are required");
  FlagPolicy p{*c.l, *c.u};
  p.check();
  return p;
}

inline DiscountSpec discount_spec(const RunConfig& c, const std::optional<DiscountSpec>& from_file) {
  DiscountSpec spec = from_file.value_or(DiscountSpec{});
  if (c.discount) {
    if (*c.discount == "unit") spec.kind = DiscountKind::Unit;
    else if (*c.discount == "cost_ratio") spec.kind = DiscountKind::CostRatio;
    else throw Error(ErrorCode::ConfigError, "--discount", "expected 'unit' or 'cost_ratio'");
  }
  return spec;
}

inline json blame_json(const BlameReport& r) {
  return {{"p_a", r.p_a},       {"p_aprime", r.p_aprime}, {"delta", r.delta},
          {"cost_a", r.cost_a}, {"cost_aprime", r.cost_aprime},
          {"gamma", r.gamma},   {"db", r.db},             {"estimator", r.estimator},
          {"measure", r.measure}};
}

inline json summary_json(const AttributionSummary& s) {
  return {{"avoidable", s.avoidable},
          {"inevitable_flagged", s.inevitable_flagged},
          {"inevitable_unflagged", s.inevitable_unflagged},
          {"party_counts", {{"human", s.human}, {"ai", s.ai}, {"flag_designer", s.flag_designer}}},
          {"total_errors", s.total_errors},
          {"total_cases", s.total_cases}};
}

inline json prf_json(const BinaryCounts& c, const PrecisionRecallF1& m) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn},
          {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

}  // namespace detail

/// Attribution report in its own schema, embeddable in other reports.
inline json attribution_json(const std::vector<AttributionRecord>& records, const AttributionSummary& s) {
  json per_case = json::array();
  for (const auto& r : records) {
    json parties = json::array();
    for (Party p : r.parties) parties.push_back(to_string(p));
    per_case.push_back({{"id", r.case_id}, {"class", to_string(r.outcome)}, {"parties", parties}});
  }
  return {{"schema", io::kAttributionSchema}, {"per_case", per_case}, {"summary", detail::summary_json(s)}};
}

inline json cmd_validate(const RunConfig& c) {
  if (!c.scm_path && !c.cases_path && !c.ratings_path)
    throw Error(ErrorCode::ConfigError, "validate", "give at least one of --scm, --cases, --ratings");
  json files = json::object();
  if (c.scm_path) {
    auto mf = io::load_model(*c.scm_path);
    Scm scm(mf.scm);
    for (const auto& [name, o] : mf.outcomes) (void)CompiledOutcome{scm, o};
    for (const auto& [name, a] : mf.actions) apply_action(scm, a);
    for (const auto& [name, cm] : mf.costs) (void)blamescope::detail::CompiledCost{scm, cm};
    json order = json::array();
    for (auto s : scm.topological_order()) order.push_back(scm.id(s));
    files["scm"] = {{"path", *c.scm_path},
                    {"status", "ok"},
                    {"exogenous", scm.num_exogenous()},
                    {"endogenous", scm.num_endogenous()},
                    {"joint_states", scm.joint_space_size()},
                    {"topological_order", order},
                    {"outcomes", mf.outcomes.size()},
                    {"actions", mf.actions.size()},
                    {"costs", mf.costs.size()}};
  }
  if (c.cases_path) {
    auto cases = io::load_cases(*c.cases_path);
    files["cases"] = {{"path", *c.cases_path}, {"status", "ok"}, {"rows", cases.size()}};
  }
  if (c.ratings_path) {
    auto pairs = io::load_ratings(*c.ratings_path);
    files["ratings"] = {{"path", *c.ratings_path}, {"status", "ok"}, {"rows", pairs.size()}};
  }
  return report(c, {{"files", files}});
}

inline json cmd_prob(const RunConfig& c) {
  auto mf = io::load_model(detail::require(c.scm_path, "--scm"));
  const auto& phi = detail::find_outcome(mf, detail::require(c.outcome, "--outcome"));
  Scm scm(mf.scm);
  if (c.action) scm = apply_action(scm, detail::find_action(mf, *c.action));
  auto interventions = detail::parse_bindings(c.do_, "--do");
  scm = intervene(scm, interventions);
  auto est = detail::estimator(c);
  double p = blamescope::detail::probability(scm, phi, est);
  return report(c, {{"probability", p}, {"estimator", detail::estimator_json(est)}});
}

inline json cmd_counterfactual(const RunConfig& c) {
  auto mf = io::load_model(detail::require(c.scm_path, "--scm"));
  const auto& phi = detail::find_outcome(mf, detail::require(c.outcome, "--outcome"));
  Scm scm(mf.scm);
  if (c.action) scm = apply_action(scm, detail::find_action(mf, *c.action));
  Assignment observation;
  for (const auto& [var, value] : detail::parse_bindings(c.observe, "--observe")) {
    auto [it, fresh] = observation.emplace(var, value);
    if (!fresh && it->second != value)
      throw Error(ErrorCode::ConfigError, var, "observed with two different values");
  }
  auto interventions = detail::parse_bindings(c.do_, "--do");
  auto posterior = abduct(scm, observation);
  double p = counterfactual_probability(scm, observation, interventions, phi);
  json obs = json::object();
  for (const auto& [var, value] : observation) obs[var] = value;
  json dos = json::array();
  for (const auto& [var, value] : interventions) dos.push_back({{"var", var}, {"value", value}});
  return report(c, {{"probability", p},
                    {"posterior_support_size", posterior.support.size()},
                    {"observation", obs},
                    {"interventions", dos}});
}

inline json cmd_blame(const RunConfig& c) {
  auto mf = io::load_model(detail::require(c.scm_path, "--scm"));
  const auto& phi = detail::find_outcome(mf, detail::require(c.outcome, "--outcome"));
  const auto& a = detail::find_action(mf, detail::require(c.action, "--action"));
  const auto& b = detail::find_action(mf, detail::require(c.baseline, "--baseline"));
  auto spec = detail::discount_spec(c, mf.discount);
  CostModel cost;
  if (c.cost) cost = detail::find_cost(mf, *c.cost);
  else if (spec.kind == DiscountKind::CostRatio)
    throw Error(ErrorCode::ConfigError, "--cost", "cost_ratio discount needs a cost model (--cost NAME)");
  Scm scm(mf.scm);
  auto est = detail::estimator(c);
  auto r = discounted_blame(scm, a, b, phi, cost, spec, est);
  json result = detail::blame_json(r);
  result["estimator"] = detail::estimator_json(est);
  result["discount"] = {{"kind", spec.kind == DiscountKind::Unit ? "unit" : "cost_ratio"},
                        {"epsilon", spec.epsilon}};
  return report(c, result);
}

inline json cmd_hitl(const RunConfig& c) {
  FlagPolicy pol = detail::policy(c);
  auto spec = detail::discount_spec(c, std::nullopt);
  auto cases = io::load_cases(detail::require(c.cases_path, "--cases"));
  HitlBlameInput in{cases, pol, c.ai_cost, c.human_cost, spec};
  auto hb = hitl_blame(in);
  auto exact = hitl_blame_exact(empirical_joint(cases, pol), pol, c.ai_cost, c.human_cost, spec);
  auto traces = run(cases, pol);
  auto records = attribute_log(cases, traces);
  auto summary = summarize(records, cases.size());
  json blame = detail::blame_json(hb.blame);
  blame["flagged_fraction"] = hb.flagged_fraction;
  blame["flagged_cases"] = hb.flagged_cases;
  blame["hitl_errors"] = hb.hitl_errors;
  blame["human_only_errors"] = hb.human_only_errors;
  blame["total_cases"] = hb.total_cases;
  return report(c, {{"blame", blame},
                    {"scm_route", detail::blame_json(exact)},
                    {"costs", {{"ai", c.ai_cost}, {"human", c.human_cost}}},
                    {"attribution", attribution_json(records, summary)}});
}

inline json cmd_metrics(const RunConfig& c) {
  json result = json::object();
  if (c.ratings_path) {
    auto pairs = io::load_ratings(*c.ratings_path);
    std::size_t k = 0;
    if (c.k) k = *c.k;
    else
      for (const auto& p : pairs) k = std::max<std::size_t>(k, static_cast<std::size_t>(std::max(p.rater_a, p.rater_b)));
    k = std::max<std::size_t>(k, 2);
    double kappa = qwk(confusion_from_ratings(pairs, k));
    result["agreement"] = {{"k", k}, {"qwk", kappa}, {"raw_one_minus_qwk", 1.0 - kappa},
                           {"blame", blame_from_agreement(kappa)}, {"pairs", pairs.size()}};
  }
  if (c.kappa) {
    result["agreement_from_kappa"] = {{"qwk", *c.kappa}, {"raw_one_minus_qwk", 1.0 - *c.kappa},
                                      {"blame", blame_from_agreement(*c.kappa)}};
  }
  if (c.cases_path) {
    FlagPolicy pol = detail::policy(c);
    auto cases = io::load_cases(*c.cases_path);
    auto hitl = run(cases, pol);
    auto human = run(cases, HumanOnly{});
    auto ch = binary_counts(hitl, cases, c.positive);
    auto co = binary_counts(human, cases, c.positive);
    auto mh = precision_recall_f1(ch);
    auto mo = precision_recall_f1(co);
    result["classification"] = {{"positive", c.positive},
                                {"hitl", detail::prf_json(ch, mh)},
                                {"human_only", detail::prf_json(co, mo)},
                                {"f1_drop_blame", blame_from_f1_drop(mh.f1, mo.f1)}};
  }
  if (c.f1_hitl || c.f1_human) {
    if (!c.f1_hitl || !c.f1_human)
      throw Error(ErrorCode::ConfigError, "--f1-hitl,--f1-human", "give both F1 scores");
    result["f1_drop"] = {{"f1_hitl", *c.f1_hitl}, {"f1_human_only", *c.f1_human},
                         {"blame", blame_from_f1_drop(*c.f1_hitl, *c.f1_human)}};
  }
  if (result.empty())
    throw Error(ErrorCode::ConfigError, "metrics",
                "give --ratings, --kappa, --cases with --l/--u, or --f1-hitl with --f1-human");
  return report(c, result);
}

/// Returns the generated case log as CSV text.
inline std::string cmd_gen(const RunConfig& c) {
  SyntheticParams p;
  p.seed = c.seed;
  p.n_cases = c.n_cases;
  p.ai_accuracy = c.ai_accuracy;
  p.human_accuracy = c.human_accuracy;
  p.profile = parse_profile(c.profile);
  return io::write_cases(generate_cases(p));
}

}  // namespace blamescope::cli
