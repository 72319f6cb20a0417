#pragma once

// Human-in-the-loop pipeline: the AI decides when it is confident and defers
// to a human when its confidence falls inside [l, u]. Works on recorded case
// logs, and can also lift a log's empirical joint into an exact SCM.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <unordered_set>
#include <variant>
#include <vector>

#include "blamescope/blame.hpp"
#include "blamescope/error.hpp"
#include "blamescope/scm.hpp"

namespace blamescope {

/// One recorded decision. `ai_confidence` is the probability the AI assigns
/// to the positive class.
struct Case {
  std::string id;
  double ai_confidence = 0.0;
  std::string ai_decision;
  std::string human_decision;
  std::string truth;

  friend bool operator==(const Case&, const Case&) = default;
};

struct FlagPolicy {
  double l = 0.0;
  double u = 1.0;

  /// Throws ConfigError unless 0 <= l < u <= 1.
  void check() const {
    if (!(l >= 0.0 && l < u && u <= 1.0))
      throw Error(ErrorCode::ConfigError, "l,u",
                  "thresholds must satisfy 0 <= l < u <= 1 (got l=" + std::to_string(l) +
                      ", u=" + std::to_string(u) + ")");
  }
};

struct Trace {
  std::string case_id;
  bool flagged = false;
  std::string final_decision;
  bool error = false;

  friend bool operator==(const Trace&, const Trace&) = default;
};

inline void check_confidence(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "ai_confidence", "confidence must lie in [0,1]");
}

/// Closed band: flag iff l <= p <= u.
inline bool flag(const FlagPolicy& policy, double p) {
  check_confidence(p);
  return policy.l <= p && p <= policy.u;
}

inline Trace decide_hitl(const Case& c, const FlagPolicy& policy) {
  Trace t;
  t.case_id = c.id;
  t.flagged = flag(policy, c.ai_confidence);
  t.final_decision = t.flagged ? c.human_decision : c.ai_decision;
  t.error = t.final_decision != c.truth;
  return t;
}

/// The human always decides; recorded as flagged.
inline Trace decide_human_only(const Case& c) {
  return {c.id, true, c.human_decision, c.human_decision != c.truth};
}

struct HumanOnly {};
using RunMode = std::variant<FlagPolicy, HumanOnly>;

inline void check_unique_ids(const std::vector<Case>& cases) {
  std::unordered_set<std::string> seen;
  for (const auto& c : cases)
    if (!seen.insert(c.id).second)
      throw Error(ErrorCode::DuplicateCaseId, c.id, "case id appears more than once");
}

inline std::vector<Trace> run(const std::vector<Case>& cases, const RunMode& mode) {
  check_unique_ids(cases);
  if (const auto* policy = std::get_if<FlagPolicy>(&mode)) policy->check();
  std::vector<Trace> traces;
  traces.reserve(cases.size());
  for (const auto& c : cases) {
    if (const auto* policy = std::get_if<FlagPolicy>(&mode))
      traces.push_back(decide_hitl(c, *policy));
    else
      traces.push_back(decide_human_only(c));
  }
  return traces;
}

inline std::size_t count_errors(const std::vector<Trace>& traces) {
  return static_cast<std::size_t>(
      std::count_if(traces.begin(), traces.end(), [](const Trace& t) { return t.error; }));
}

inline double error_rate(const std::vector<Trace>& traces) {
  if (traces.empty()) throw Error(ErrorCode::EmptyTraceList, "", "error rate of zero traces");
  return static_cast<double>(count_errors(traces)) / static_cast<double>(traces.size());
}

struct HitlBlameInput {
  std::vector<Case> cases;
  FlagPolicy policy;
  double ai_cost = 0.0;     // per decision the AI makes alone
  double human_cost = 0.0;  // per decision a human reviews
  DiscountSpec discount;
};

struct HitlBlameReport {
  BlameReport blame;
  std::size_t total_cases = 0;
  std::size_t flagged_cases = 0;
  double flagged_fraction = 0.0;
  std::size_t hitl_errors = 0;
  std::size_t human_only_errors = 0;
};

/// a = deploy HITL, a' = deploy human-only; phi = wrong final decision.
inline HitlBlameReport hitl_blame(const HitlBlameInput& in) {
  if (in.cases.empty()) throw Error(ErrorCode::EmptyCaseList, "", "no cases to evaluate");
  if (!(in.ai_cost >= 0.0) || !(in.human_cost >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "cost", "decision costs must be non-negative");
  auto hitl = run(in.cases, in.policy);
  auto human = run(in.cases, HumanOnly{});

  HitlBlameReport r;
  r.total_cases = in.cases.size();
  r.flagged_cases = static_cast<std::size_t>(
      std::count_if(hitl.begin(), hitl.end(), [](const Trace& t) { return t.flagged; }));
  r.flagged_fraction = static_cast<double>(r.flagged_cases) / static_cast<double>(r.total_cases);
  r.hitl_errors = count_errors(hitl);
  r.human_only_errors = count_errors(human);
  double cost_a = r.flagged_fraction * in.human_cost + (1.0 - r.flagged_fraction) * in.ai_cost;
  r.blame = make_report(error_rate(hitl), error_rate(human), cost_a, in.human_cost, in.discount);
  r.blame.estimator = "empirical";
  return r;
}

// ---------------------------------------------------------------------------
// Exact route: the HITL decision graph as an SCM.

/// Bin i covers [edges[i], edges[i+1]); the last bin is closed on the right.
struct ConfidenceBins {
  std::vector<double> edges;

  static ConfidenceBins equal_width(std::size_t n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "bins", "need at least one bin");
    ConfidenceBins b;
    for (std::size_t i = 0; i <= n; ++i) b.edges.push_back(static_cast<double>(i) / static_cast<double>(n));
    return b;
  }

  /// Bins whose boundaries sit on the thresholds, so the midpoint rule flags
  /// a bin exactly when every confidence in it would be flagged.
  static ConfidenceBins aligned(const FlagPolicy& policy) {
    policy.check();
    ConfidenceBins b;
    b.edges.push_back(0.0);
    if (policy.l > 0.0) b.edges.push_back(policy.l);
    if (policy.u < 1.0) b.edges.push_back(std::nextafter(policy.u, 2.0));
    b.edges.push_back(1.0);
    return b;
  }

  std::size_t size() const { return edges.size() - 1; }

  void check() const {
    if (edges.size() < 2 || edges.front() != 0.0 || edges.back() != 1.0)
      throw Error(ErrorCode::InvalidArgument, "bins", "edges must start at 0 and end at 1");
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (!(edges[i] > edges[i - 1]))
        throw Error(ErrorCode::InvalidArgument, "bins", "edges must be strictly increasing");
  }

  std::size_t bin_of(double p) const {
    check_confidence(p);
    auto it = std::upper_bound(edges.begin(), edges.end(), p);
    std::size_t i = static_cast<std::size_t>(it - edges.begin()) - 1;
    return std::min(i, size() - 1);
  }

  double midpoint(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }

  bool flagged(std::size_t i, const FlagPolicy& policy) const {
    double m = midpoint(i);
    return policy.l <= m && m <= policy.u;
  }
};

struct JointAtom {
  std::string truth;
  std::string ai_decision;
  std::size_t bin = 0;
  std::string human_decision;
  double probability = 0.0;
};

/// Joint distribution over (truth, AI decision, confidence bin, human decision).
struct HitlJoint {
  Domain labels;
  ConfidenceBins bins;
  std::vector<JointAtom> atoms;
};

namespace hitl_vars {
inline constexpr const char* kNoise = "U";
inline constexpr const char* kTruth = "Truth";
inline constexpr const char* kAiDecision = "AIDecision";
inline constexpr const char* kConfidence = "Confidence";
inline constexpr const char* kFlag = "Flag";
inline constexpr const char* kHuman = "Human";
inline constexpr const char* kDecision = "Y";
inline constexpr const char* kError = "Error";
}  // namespace hitl_vars

/// Builds U -> {Truth, AIDecision, Confidence, Human}; Confidence -> Flag;
/// (Flag, AIDecision, Human) -> Y; (Y, Truth) -> Error.
inline Scm build_hitl_scm(const HitlJoint& joint, const FlagPolicy& policy) {
  using namespace hitl_vars;
  policy.check();
  joint.bins.check();
  if (joint.atoms.empty())
    throw Error(ErrorCode::NonNormalizedDistribution, kNoise, "joint distribution has no atoms");
  double total = 0.0;
  for (const auto& a : joint.atoms) total += a.probability;
  if (std::abs(total - 1.0) > kValidationTolerance)
    throw Error(ErrorCode::NonNormalizedDistribution, kNoise,
                "joint distribution sums to " + std::to_string(total));
  auto in_labels = [&](const std::string& v) {
    if (std::find(joint.labels.begin(), joint.labels.end(), v) == joint.labels.end())
      throw Error(ErrorCode::ValueOutOfDomain, v, "label not in the label domain");
  };

  ScmDescription d;
  ExogenousVar u{kNoise, {}, {}};
  for (std::size_t i = 0; i < joint.atoms.size(); ++i) {
    u.values.push_back("a" + std::to_string(i));
    u.probs.push_back(joint.atoms[i].probability);
  }
  d.exogenous.push_back(u);

  Domain bin_values;
  for (std::size_t b = 0; b < joint.bins.size(); ++b) bin_values.push_back("b" + std::to_string(b));

  EndogenousVar truth{kTruth, joint.labels, {kNoise}, {}};
  EndogenousVar ai{kAiDecision, joint.labels, {kNoise}, {}};
  EndogenousVar conf{kConfidence, bin_values, {kNoise}, {}};
  EndogenousVar human{kHuman, joint.labels, {kNoise}, {}};
  for (std::size_t i = 0; i < joint.atoms.size(); ++i) {
    const auto& a = joint.atoms[i];
    in_labels(a.truth);
    in_labels(a.ai_decision);
    in_labels(a.human_decision);
    if (a.bin >= joint.bins.size())
      throw Error(ErrorCode::ValueOutOfDomain, kConfidence, "bin index out of range");
    truth.table[u.values[i]] = a.truth;
    ai.table[u.values[i]] = a.ai_decision;
    conf.table[u.values[i]] = bin_values[a.bin];
    human.table[u.values[i]] = a.human_decision;
  }

  EndogenousVar flag_var{kFlag, {"0", "1"}, {kConfidence}, {}};
  for (std::size_t b = 0; b < joint.bins.size(); ++b)
    flag_var.table[bin_values[b]] = joint.bins.flagged(b, policy) ? "1" : "0";

  EndogenousVar y{kDecision, joint.labels, {kFlag, kAiDecision, kHuman}, {}};
  for (const auto& f : {std::string("0"), std::string("1")})
    for (const auto& m : joint.labels)
      for (const auto& h : joint.labels) y.table[f + "|" + m + "|" + h] = f == "1" ? h : m;

  EndogenousVar err{kError, {"0", "1"}, {kDecision, kTruth}, {}};
  for (const auto& yv : joint.labels)
    for (const auto& t : joint.labels) err.table[yv + "|" + t] = yv == t ? "0" : "1";

  d.endogenous = {truth, ai, conf, flag_var, human, y, err};
  return Scm(std::move(d));
}

/// The model as built already runs the HITL policy.
inline Action hitl_action() { return {"hitl", {}}; }

/// The human decides every case: the flag is forced on.
inline Action human_only_action() {
  return {"human_only", {{hitl_vars::kFlag, {}, {{"", "1"}}}}};
}

inline OutcomeSpec wrong_decision_outcome() {
  return {{{{hitl_vars::kError, Comparator::Eq, "1"}}}};
}

inline CostModel hitl_cost_model(double ai_cost, double human_cost) {
  return {{{{{hitl_vars::kFlag, Comparator::Eq, "0"}}, ai_cost},
           {{{hitl_vars::kFlag, Comparator::Eq, "1"}}, human_cost}}};
}

/// Empirical joint of a log, binned on the policy's thresholds. Atoms are
/// ordered lexicographically by (truth, ai, bin, human).
inline HitlJoint empirical_joint(const std::vector<Case>& cases, const FlagPolicy& policy) {
  if (cases.empty()) throw Error(ErrorCode::EmptyCaseList, "", "no cases to tabulate");
  check_unique_ids(cases);
  HitlJoint joint;
  joint.bins = ConfidenceBins::aligned(policy);
  std::set<std::string> labels;
  std::map<std::tuple<std::string, std::string, std::size_t, std::string>, std::size_t> counts;
  for (const auto& c : cases) {
    labels.insert({c.truth, c.ai_decision, c.human_decision});
    ++counts[{c.truth, c.ai_decision, joint.bins.bin_of(c.ai_confidence), c.human_decision}];
  }
  joint.labels.assign(labels.begin(), labels.end());
  const double n = static_cast<double>(cases.size());
  for (const auto& [key, count] : counts)
    joint.atoms.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key),
                           static_cast<double>(count) / n});
  return joint;
}

/// Exact HITL-vs-human-only report on the SCM route.
inline BlameReport hitl_blame_exact(const HitlJoint& joint, const FlagPolicy& policy,
                                    double ai_cost, double human_cost, const DiscountSpec& spec) {
  Scm scm = build_hitl_scm(joint, policy);
  return discounted_blame(scm, hitl_action(), human_only_action(), wrong_decision_outcome(),
                          hitl_cost_model(ai_cost, human_cost), spec);
}

}  // namespace blamescope
