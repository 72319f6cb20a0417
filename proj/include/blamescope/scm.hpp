#pragma once

// Finite discrete acyclic structural causal models: validation, solving,
// exact and sampled outcome probabilities, interventions, abduction and
// counterfactual evaluation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "blamescope/error.hpp"

namespace blamescope {

inline constexpr double kValidationTolerance = 1e-9;
inline constexpr char kTupleSeparator = '|';

using Domain = std::vector<std::string>;

/// Variable id -> value. Ordered so that iteration and serialization are
/// deterministic.
using Assignment = std::map<std::string, std::string>;

struct ExogenousVar {
  std::string id;
  Domain values;
  std::vector<double> probs;
};

/// `table` maps the parent values joined by '|' (in `parents` order) to the
/// output value. A parentless variable has the single key "".
struct EndogenousVar {
  std::string id;
  Domain values;
  std::vector<std::string> parents;
  std::map<std::string, std::string> table;
};

/// Declarative form of a model, as read from and written to disk.
struct ScmDescription {
  std::vector<ExogenousVar> exogenous;
  std::vector<EndogenousVar> endogenous;
};

enum class Comparator { Eq, Neq };

struct Literal {
  std::string var;
  Comparator cmp = Comparator::Eq;
  std::string value;
};

using Conjunction = std::vector<Literal>;

/// Disjunction of conjunctions over endogenous variables. No clauses is the
/// impossible event; a clause with no literals is always true.
struct OutcomeSpec {
  std::vector<Conjunction> clauses;
};

struct EnumerationOptions {
  std::uint64_t max_states = std::uint64_t{1} << 24;
};

inline std::string join_tuple(std::span<const std::string> parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += kTupleSeparator;
    out += parts[i];
  }
  return out;
}

/// A validated, immutable model. Variables live in "slots": exogenous
/// variables first (description order), then endogenous ones.
class Scm {
 public:
  using State = std::vector<std::uint32_t>;

  explicit Scm(ScmDescription desc) : desc_(std::move(desc)) { compile(); }

  const ScmDescription& description() const noexcept { return desc_; }

  std::size_t num_exogenous() const noexcept { return desc_.exogenous.size(); }
  std::size_t num_endogenous() const noexcept { return desc_.endogenous.size(); }
  std::size_t num_slots() const noexcept { return num_exogenous() + num_endogenous(); }

  bool is_exogenous(std::size_t slot) const noexcept { return slot < num_exogenous(); }

  std::optional<std::size_t> find_slot(std::string_view id) const {
    auto it = slot_of_.find(std::string(id));
    if (it == slot_of_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t slot(std::string_view id) const {
    if (auto s = find_slot(id)) return *s;
    throw Error(ErrorCode::UnknownVariable, std::string(id), "no such variable");
  }

  std::size_t endogenous_slot(std::string_view id) const {
    auto s = slot(id);
    if (is_exogenous(s))
      throw Error(ErrorCode::UnknownVariable, std::string(id), "not an endogenous variable");
    return s;
  }

  const std::string& id(std::size_t slot) const {
    return is_exogenous(slot) ? desc_.exogenous[slot].id
                              : desc_.endogenous[slot - num_exogenous()].id;
  }

  const Domain& domain(std::size_t slot) const {
    return is_exogenous(slot) ? desc_.exogenous[slot].values
                              : desc_.endogenous[slot - num_exogenous()].values;
  }

  std::uint32_t value_index(std::size_t slot, std::string_view value) const {
    const auto& dom = domain(slot);
    auto it = std::find(dom.begin(), dom.end(), value);
    if (it == dom.end())
      throw Error(ErrorCode::ValueOutOfDomain, id(slot),
                  "value '" + std::string(value) + "' not in domain");
    return static_cast<std::uint32_t>(it - dom.begin());
  }

  double prob(std::size_t exo_slot, std::uint32_t value) const {
    return desc_.exogenous[exo_slot].probs[value];
  }

  /// Endogenous slots in evaluation order.
  const std::vector<std::size_t>& topological_order() const noexcept { return order_; }

  /// Size of the exogenous joint space, saturating at uint64 max.
  std::uint64_t joint_space_size() const noexcept { return joint_size_; }

  /// Fills the endogenous part of `state` from its exogenous part.
  void solve_in_place(std::span<std::uint32_t> state) const {
    for (std::size_t s : order_) {
      const auto& mech = mechanisms_[s - num_exogenous()];
      std::size_t row = 0;
      for (std::size_t i = 0; i < mech.parent_slots.size(); ++i)
        row += state[mech.parent_slots[i]] * mech.strides[i];
      state[s] = mech.table[row];
    }
  }

 private:
  struct Mechanism {
    std::vector<std::size_t> parent_slots;
    std::vector<std::size_t> strides;
    std::vector<std::uint32_t> table;
  };

  static void check_domain(const std::string& id, const Domain& values) {
    if (values.empty()) throw Error(ErrorCode::InvalidDomain, id, "domain is empty");
    std::vector<std::string> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(ErrorCode::InvalidDomain, id, "domain values are not unique");
    for (const auto& v : values)
      if (v.find(kTupleSeparator) != std::string::npos)
        throw Error(ErrorCode::InvalidDomain, id, "value '" + v + "' contains '|'");
  }

  void compile() {
    const std::size_t ne = num_exogenous();
    for (std::size_t i = 0; i < num_slots(); ++i) {
      const auto& vid = i < ne ? desc_.exogenous[i].id : desc_.endogenous[i - ne].id;
      if (vid.empty()) throw Error(ErrorCode::SchemaViolation, "", "empty variable id");
      if (!slot_of_.emplace(vid, i).second)
        throw Error(ErrorCode::DuplicateId, vid, "variable id used twice");
    }

    joint_size_ = 1;
    for (const auto& ex : desc_.exogenous) {
      check_domain(ex.id, ex.values);
      if (ex.probs.size() != ex.values.size())
        throw Error(ErrorCode::NonNormalizedDistribution, ex.id,
                    "probs and values differ in length");
      double total = 0.0;
      for (double p : ex.probs) {
        if (!(p >= 0.0 && p <= 1.0))
          throw Error(ErrorCode::NonNormalizedDistribution, ex.id, "probability outside [0,1]");
        total += p;
      }
      if (std::abs(total - 1.0) > kValidationTolerance)
        throw Error(ErrorCode::NonNormalizedDistribution, ex.id,
                    "probabilities sum to " + std::to_string(total));
      const auto n = static_cast<std::uint64_t>(ex.values.size());
      joint_size_ = joint_size_ > std::numeric_limits<std::uint64_t>::max() / n
                        ? std::numeric_limits<std::uint64_t>::max()
                        : joint_size_ * n;
    }

    for (const auto& en : desc_.endogenous) {
      check_domain(en.id, en.values);
      for (const auto& p : en.parents)
        if (!slot_of_.count(p))
          throw Error(ErrorCode::DanglingParent, en.id, "parent '" + p + "' does not exist");
    }

    order_ = topological_sort();

    mechanisms_.resize(num_endogenous());
    for (std::size_t k = 0; k < num_endogenous(); ++k) compile_mechanism(k);
  }

  std::vector<std::size_t> topological_sort() const {
    const std::size_t ne = num_exogenous();
    const std::size_t nn = num_endogenous();
    std::vector<std::size_t> indegree(nn, 0);
    std::vector<std::vector<std::size_t>> children(nn);
    for (std::size_t k = 0; k < nn; ++k) {
      for (const auto& p : desc_.endogenous[k].parents) {
        std::size_t ps = slot_of_.at(p);
        if (ps < ne) continue;
        children[ps - ne].push_back(k);
        ++indegree[k];
      }
    }
    // Kahn's algorithm; ties broken by description order.
    std::vector<std::size_t> order;
    std::vector<bool> done(nn, false);
    while (order.size() < nn) {
      std::size_t pick = nn;
      for (std::size_t k = 0; k < nn; ++k)
        if (!done[k] && indegree[k] == 0) {
          pick = k;
          break;
        }
      if (pick == nn) throw_cycle(done);
      done[pick] = true;
      order.push_back(pick + ne);
      for (std::size_t c : children[pick]) --indegree[c];
    }
    return order;
  }

  [[noreturn]] void throw_cycle(const std::vector<bool>& done) const {
    const std::size_t ne = num_exogenous();
    const std::size_t nn = num_endogenous();
    // Every unresolved variable has an unresolved endogenous parent, so
    // walking parents must revisit a node.
    std::size_t start = 0;
    while (done[start]) ++start;
    std::vector<std::size_t> path;
    std::vector<std::size_t> pos(nn, nn);
    std::size_t cur = start;
    while (pos[cur] == nn) {
      pos[cur] = path.size();
      path.push_back(cur);
      for (const auto& p : desc_.endogenous[cur].parents) {
        std::size_t ps = slot_of_.at(p);
        if (ps >= ne && !done[ps - ne]) {
          cur = ps - ne;
          break;
        }
      }
    }
    std::vector<std::size_t> cycle(path.begin() + static_cast<std::ptrdiff_t>(pos[cur]), path.end());
    std::reverse(cycle.begin(), cycle.end());
    std::string names;
    for (std::size_t k : cycle) names += desc_.endogenous[k].id + " -> ";
    names += desc_.endogenous[cycle.front()].id;
    throw Error(ErrorCode::CyclicGraph, desc_.endogenous[cycle.front()].id, "cycle " + names);
  }

  void compile_mechanism(std::size_t k) {
    const auto& en = desc_.endogenous[k];
    auto& mech = mechanisms_[k];
    const std::size_t np = en.parents.size();
    mech.parent_slots.resize(np);
    mech.strides.assign(np, 1);
    std::size_t rows = 1;
    for (std::size_t i = np; i-- > 0;) {
      mech.parent_slots[i] = slot_of_.at(en.parents[i]);
      mech.strides[i] = rows;
      rows *= domain(mech.parent_slots[i]).size();
    }
    if (en.table.size() > rows)
      throw Error(ErrorCode::PartialMechanism, en.id, "table has keys that match no parent tuple");

    mech.table.resize(rows);
    std::vector<std::uint32_t> digits(np, 0);
    std::vector<std::string> parts(np);
    const std::size_t out_slot = k + num_exogenous();
    for (std::size_t row = 0; row < rows; ++row) {
      for (std::size_t i = 0; i < np; ++i) parts[i] = domain(mech.parent_slots[i])[digits[i]];
      std::string key = join_tuple(parts);
      auto it = en.table.find(key);
      if (it == en.table.end())
        throw Error(ErrorCode::PartialMechanism, en.id, "no entry for parent tuple '" + key + "'");
      mech.table[row] = value_index(out_slot, it->second);
      for (std::size_t i = np; i-- > 0;) {
        if (++digits[i] < domain(mech.parent_slots[i]).size()) break;
        digits[i] = 0;
      }
    }
  }

  ScmDescription desc_;
  std::unordered_map<std::string, std::size_t> slot_of_;
  std::vector<std::size_t> order_;
  std::vector<Mechanism> mechanisms_;
  std::uint64_t joint_size_ = 1;
};

/// Throws the first violated model invariant.
inline void validate(const ScmDescription& desc) { Scm{desc}; }

inline std::vector<std::string> endogenous_ids(const Scm& scm) {
  std::vector<std::string> ids;
  for (const auto& v : scm.description().endogenous) ids.push_back(v.id);
  return ids;
}

/// `e` must bind every exogenous variable; extra bindings are rejected.
inline Assignment solve(const Scm& scm, const Assignment& e) {
  Scm::State state(scm.num_slots(), 0);
  for (std::size_t s = 0; s < scm.num_exogenous(); ++s) {
    auto it = e.find(scm.id(s));
    if (it == e.end())
      throw Error(ErrorCode::IncompleteExogenousAssignment, scm.id(s), "no value given");
    state[s] = scm.value_index(s, it->second);
  }
  for (const auto& [var, _] : e) {
    auto s = scm.slot(var);
    if (!scm.is_exogenous(s))
      throw Error(ErrorCode::IncompleteExogenousAssignment, var, "not an exogenous variable");
  }
  scm.solve_in_place(state);
  Assignment out;
  for (std::size_t s = scm.num_exogenous(); s < scm.num_slots(); ++s)
    out.emplace(scm.id(s), scm.domain(s)[state[s]]);
  return out;
}

/// An OutcomeSpec bound to the slots of one model.
class CompiledOutcome {
 public:
  CompiledOutcome(const Scm& scm, const OutcomeSpec& spec) {
    for (const auto& clause : spec.clauses) {
      std::vector<Test> tests;
      for (const auto& lit : clause) {
        auto s = scm.endogenous_slot(lit.var);
        tests.push_back({s, scm.value_index(s, lit.value), lit.cmp == Comparator::Eq});
      }
      clauses_.push_back(std::move(tests));
    }
  }

  bool holds(std::span<const std::uint32_t> state) const {
    for (const auto& clause : clauses_) {
      bool all = true;
      for (const auto& t : clause)
        if ((state[t.slot] == t.value) != t.equal) {
          all = false;
          break;
        }
      if (all) return true;
    }
    return false;
  }

 private:
  struct Test {
    std::size_t slot;
    std::uint32_t value;
    bool equal;
  };
  std::vector<std::vector<Test>> clauses_;
};

/// Visits every exogenous joint setting in mixed-radix order (last variable
/// fastest) with the model solved, passing the state and its prior weight.
template <typename Visitor>
void for_each_world(const Scm& scm, Visitor&& visit, const EnumerationOptions& opts = {}) {
  if (scm.joint_space_size() > opts.max_states)
    throw Error(ErrorCode::StateSpaceTooLarge, "",
                "exogenous joint space exceeds " + std::to_string(opts.max_states) +
                    " states; use the Monte Carlo estimator");
  const std::size_t ne = scm.num_exogenous();
  Scm::State state(scm.num_slots(), 0);
  while (true) {
    double w = 1.0;
    for (std::size_t s = 0; s < ne; ++s) w *= scm.prob(s, state[s]);
    scm.solve_in_place(state);
    visit(std::span<const std::uint32_t>(state), w);
    std::size_t i = ne;
    while (i-- > 0) {
      if (++state[i] < scm.domain(i).size()) break;
      state[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
}

/// Exact P(phi = 1) by enumerating all exogenous settings.
inline double event_probability(const Scm& scm, const OutcomeSpec& phi,
                                const EnumerationOptions& opts = {}) {
  CompiledOutcome outcome(scm, phi);
  double p = 0.0;
  for_each_world(
      scm,
      [&](std::span<const std::uint32_t> st, double w) {
        if (outcome.holds(st)) p += w;
      },
      opts);
  return std::clamp(p, 0.0, 1.0);
}

namespace detail {

/// Uniform double in [0,1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF draw for one exogenous variable.
inline std::uint32_t draw(const Scm& scm, std::size_t exo_slot, std::mt19937_64& rng) {
  const auto& probs = scm.description().exogenous[exo_slot].probs;
  double u = unit_uniform(rng);
  double cum = 0.0;
  std::uint32_t last_positive = 0;
  for (std::uint32_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    cum += probs[i];
    if (u < cum) return i;
  }
  return last_positive;
}

inline void sample_world(const Scm& scm, std::mt19937_64& rng, Scm::State& state) {
  for (std::size_t s = 0; s < scm.num_exogenous(); ++s) state[s] = draw(scm, s, rng);
  scm.solve_in_place(state);
}

}  // namespace detail

/// Monte Carlo estimate of P(phi = 1). Deterministic in (samples, seed).
inline double event_probability_mc(const Scm& scm, const OutcomeSpec& phi, std::uint64_t samples,
                                   std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "samples", "must be at least 1");
  CompiledOutcome outcome(scm, phi);
  std::mt19937_64 rng(seed);
  Scm::State state(scm.num_slots(), 0);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    detail::sample_world(scm, rng, state);
    if (outcome.holds(state)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

/// do(var = value): a copy of the model with var's mechanism made constant.
inline Scm intervene(const Scm& scm, std::string_view var, std::string_view value) {
  auto s = scm.endogenous_slot(var);
  scm.value_index(s, value);
  ScmDescription desc = scm.description();
  auto& en = desc.endogenous[s - scm.num_exogenous()];
  en.parents.clear();
  en.table = {{"", std::string(value)}};
  return Scm(std::move(desc));
}

using Intervention = std::pair<std::string, std::string>;

inline Scm intervene(const Scm& scm, std::span<const Intervention> interventions) {
  if (interventions.empty()) return scm;
  ScmDescription desc = scm.description();
  for (const auto& [var, value] : interventions) {
    auto s = scm.endogenous_slot(var);
    scm.value_index(s, value);
    auto& en = desc.endogenous[s - scm.num_exogenous()];
    en.parents.clear();
    en.table = {{"", value}};
  }
  return Scm(std::move(desc));
}

struct NoiseSetting {
  std::vector<std::uint32_t> values;  // one index per exogenous variable
  double probability = 0.0;
};

/// Posterior over exogenous settings given an observation. Only settings with
/// positive weight are kept, in enumeration order.
struct NoisePosterior {
  std::vector<NoiseSetting> support;

  double total() const {
    double t = 0.0;
    for (const auto& s : support) t += s.probability;
    return t;
  }
};

inline Assignment to_assignment(const Scm& scm, const NoiseSetting& setting) {
  Assignment a;
  for (std::size_t s = 0; s < scm.num_exogenous(); ++s)
    a.emplace(scm.id(s), scm.domain(s)[setting.values[s]]);
  return a;
}

/// Conditions the exogenous distribution on a partial endogenous observation
/// by rejecting inconsistent settings.
inline NoisePosterior abduct(const Scm& scm, const Assignment& observation,
                             const EnumerationOptions& opts = {}) {
  std::vector<std::pair<std::size_t, std::uint32_t>> checks;
  for (const auto& [var, value] : observation) {
    auto s = scm.endogenous_slot(var);
    checks.emplace_back(s, scm.value_index(s, value));
  }
  NoisePosterior post;
  double total = 0.0;
  const std::size_t ne = scm.num_exogenous();
  for_each_world(
      scm,
      [&](std::span<const std::uint32_t> st, double w) {
        if (w <= 0.0) return;
        for (const auto& [s, v] : checks)
          if (st[s] != v) return;
        post.support.push_back({std::vector<std::uint32_t>(st.begin(), st.begin() + ne), w});
        total += w;
      },
      opts);
  if (post.support.empty()) {
    std::string obs;
    for (const auto& [var, value] : observation) obs += (obs.empty() ? "" : ",") + var + "=" + value;
    throw Error(ErrorCode::ZeroProbabilityObservation, obs,
                "no exogenous setting with positive probability is consistent with the observation");
  }
  for (auto& s : post.support) s.probability /= total;
  return post;
}

/// Abduction, then intervention, then prediction under the posterior noise.
inline double counterfactual_probability(const Scm& scm, const Assignment& observation,
                                         std::span<const Intervention> interventions,
                                         const OutcomeSpec& phi,
                                         const EnumerationOptions& opts = {}) {
  NoisePosterior post = abduct(scm, observation, opts);
  Scm modified = intervene(scm, interventions);
  CompiledOutcome outcome(modified, phi);
  Scm::State state(modified.num_slots(), 0);
  double p = 0.0;
  for (const auto& setting : post.support) {
    std::copy(setting.values.begin(), setting.values.end(), state.begin());
    modified.solve_in_place(state);
    if (outcome.holds(state)) p += setting.probability;
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace blamescope
