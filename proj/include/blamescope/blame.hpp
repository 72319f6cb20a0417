#pragma once

// Blameworthiness of one action relative to a reference action, expected
// decision cost, and the efficiency discount applied on top.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "blamescope/error.hpp"
#include "blamescope/scm.hpp"

namespace blamescope {

/// Replacement mechanism for one endogenous variable.
struct MechanismOverride {
  std::string var;
  std::vector<std::string> parents;
  std::map<std::string, std::string> table;
};

/// A policy change: the listed mechanisms are swapped in, everything else is
/// kept. An empty override list is the identity action.
struct Action {
  std::string label;
  std::vector<MechanismOverride> overrides;
};

/// Cost of one solved assignment is the sum of the terms whose condition
/// holds. An empty condition always holds.
struct CostTerm {
  Conjunction when;
  double cost = 0.0;
};

struct CostModel {
  std::vector<CostTerm> terms;
};

enum class DiscountKind { Unit, CostRatio };

struct DiscountSpec {
  DiscountKind kind = DiscountKind::CostRatio;
  double epsilon = 1e-9;
};

/// Exact enumeration or Monte Carlo. Both probabilities of one report always
/// come from the same estimator; in MC mode both systems see the same seed.
struct Estimator {
  enum class Mode { Exact, MonteCarlo };
  Mode mode = Mode::Exact;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  EnumerationOptions enumeration{};

  static Estimator exact() { return {}; }
  static Estimator monte_carlo(std::uint64_t samples, std::uint64_t seed) {
    return {Mode::MonteCarlo, samples, seed, {}};
  }
  const char* name() const { return mode == Mode::Exact ? "exact" : "monte_carlo"; }
};

struct BlameReport {
  double p_a = 0.0;
  double p_aprime = 0.0;
  double delta = 0.0;
  double cost_a = 0.0;
  double cost_aprime = 0.0;
  double gamma = 1.0;
  double db = 0.0;
  std::string estimator = "exact";
  // Probability measure the report was computed under; always the model's
  // declared exogenous distribution.
  std::string measure = "model";
};

inline Scm apply_action(const Scm& scm, const Action& action) {
  if (action.overrides.empty()) return scm;
  ScmDescription desc = scm.description();
  for (const auto& ov : action.overrides) {
    auto s = scm.endogenous_slot(ov.var);
    auto& en = desc.endogenous[s - scm.num_exogenous()];
    en.parents = ov.parents;
    en.table = ov.table;
  }
  return Scm(std::move(desc));
}

inline void check_cost_model(const CostModel& cost) {
  for (const auto& t : cost.terms)
    if (!(t.cost >= 0.0) || !std::isfinite(t.cost))
      throw Error(ErrorCode::InvalidArgument, "cost", "cost terms must be finite and non-negative");
}

namespace detail {

class CompiledCost {
 public:
  CompiledCost(const Scm& scm, const CostModel& cost) {
    check_cost_model(cost);
    for (const auto& t : cost.terms) {
      conditions_.emplace_back(scm, OutcomeSpec{{t.when}});
      costs_.push_back(t.cost);
    }
  }

  double operator()(std::span<const std::uint32_t> state) const {
    double c = 0.0;
    for (std::size_t i = 0; i < costs_.size(); ++i)
      if (conditions_[i].holds(state)) c += costs_[i];
    return c;
  }

 private:
  std::vector<CompiledOutcome> conditions_;
  std::vector<double> costs_;
};

inline double probability(const Scm& m, const OutcomeSpec& phi, const Estimator& est) {
  return est.mode == Estimator::Mode::Exact ? event_probability(m, phi, est.enumeration)
                                            : event_probability_mc(m, phi, est.samples, est.seed);
}

inline double expected_cost(const Scm& m, const CostModel& cost, const Estimator& est) {
  CompiledCost c(m, cost);
  double total = 0.0;
  if (est.mode == Estimator::Mode::Exact) {
    for_each_world(
        m, [&](std::span<const std::uint32_t> st, double w) { total += w * c(st); },
        est.enumeration);
    return total;
  }
  if (est.samples < 1) throw Error(ErrorCode::InvalidArgument, "samples", "must be at least 1");
  std::mt19937_64 rng(est.seed);
  Scm::State state(m.num_slots(), 0);
  for (std::uint64_t i = 0; i < est.samples; ++i) {
    sample_world(m, rng, state);
    total += c(state);
  }
  return total / static_cast<double>(est.samples);
}

}  // namespace detail

/// max{0, P(phi | M^a) - P(phi | M^a')}.
inline double delta(const Scm& scm, const Action& a, const Action& a_prime, const OutcomeSpec& phi,
                    const Estimator& est = {}) {
  double pa = detail::probability(apply_action(scm, a), phi, est);
  double pb = detail::probability(apply_action(scm, a_prime), phi, est);
  return std::max(0.0, pa - pb);
}

/// E[C | M^action].
inline double expected_cost(const Scm& scm, const Action& action, const CostModel& cost,
                            const Estimator& est = {}) {
  return detail::expected_cost(apply_action(scm, action), cost, est);
}

/// Discount factor in (0,1]. cost_ratio is clamp(cost_a / cost_aprime, eps, 1),
/// and 1 when the reference cost is zero.
inline double discount(const DiscountSpec& spec, double cost_a, double cost_aprime) {
  if (!(cost_a >= 0.0) || !(cost_aprime >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "discount", "costs must be non-negative");
  if (spec.kind == DiscountKind::Unit) return 1.0;
  if (!(spec.epsilon > 0.0) || spec.epsilon > 1.0)
    throw Error(ErrorCode::InvalidArgument, "discount", "epsilon must lie in (0,1]");
  if (cost_aprime == 0.0) return 1.0;
  return std::clamp(cost_a / cost_aprime, spec.epsilon, 1.0);
}

/// Fills every field of a BlameReport from two probabilities and two costs.
inline BlameReport make_report(double p_a, double p_aprime, double cost_a, double cost_aprime,
                               const DiscountSpec& spec) {
  BlameReport r;
  r.p_a = p_a;
  r.p_aprime = p_aprime;
  r.delta = std::max(0.0, p_a - p_aprime);
  r.cost_a = cost_a;
  r.cost_aprime = cost_aprime;
  r.gamma = discount(spec, cost_a, cost_aprime);
  r.db = r.gamma * r.delta;
  return r;
}

inline BlameReport discounted_blame(const Scm& scm, const Action& a, const Action& a_prime,
                                    const OutcomeSpec& phi, const CostModel& cost,
                                    const DiscountSpec& spec, const Estimator& est = {}) {
  Scm ma = apply_action(scm, a);
  Scm mb = apply_action(scm, a_prime);
  BlameReport r = make_report(detail::probability(ma, phi, est), detail::probability(mb, phi, est),
                              detail::expected_cost(ma, cost, est),
                              detail::expected_cost(mb, cost, est), spec);
  r.estimator = est.name();
  return r;
}

}  // namespace blamescope
