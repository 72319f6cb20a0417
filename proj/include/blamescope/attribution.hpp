#pragma once

// Counterfactual classification of HITL errors against the human-only system
// and the responsibility table that follows from it.

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "blamescope/error.hpp"
#include "blamescope/hitl.hpp"

namespace blamescope {

enum class OutcomeClass { Avoidable, InevitableFlagged, InevitableUnflagged };

enum class Party { Human, AI, FlagDesigner };

inline constexpr std::array kOutcomeClasses = {OutcomeClass::Avoidable, OutcomeClass::InevitableFlagged,
                                               OutcomeClass::InevitableUnflagged};
inline constexpr std::array kParties = {Party::Human, Party::AI, Party::FlagDesigner};

inline std::string_view to_string(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::Avoidable: return "avoidable";
    case OutcomeClass::InevitableFlagged: return "inevitable_flagged";
    case OutcomeClass::InevitableUnflagged: return "inevitable_unflagged";
  }
  return "";
}

inline std::string_view to_string(Party p) {
  switch (p) {
    case Party::Human: return "human";
    case Party::AI: return "ai";
    case Party::FlagDesigner: return "flag_designer";
  }
  return "";
}

using PartySet = std::set<Party>;

struct AttributionRecord {
  std::string case_id;
  OutcomeClass outcome = OutcomeClass::Avoidable;
  bool flagged = false;
  PartySet parties;
};

struct AttributionSummary {
  std::size_t avoidable = 0;
  std::size_t inevitable_flagged = 0;
  std::size_t inevitable_unflagged = 0;
  std::size_t human = 0;
  std::size_t ai = 0;
  std::size_t flag_designer = 0;
  std::size_t total_errors = 0;
  std::size_t total_cases = 0;
};

/// std::nullopt when the HITL decision was correct. An error is inevitable
/// when the human-only system (the logged human decision) errs as well.
inline std::optional<OutcomeClass> classify(const Trace& trace, const Case& c) {
  if (trace.case_id != c.id)
    throw Error(ErrorCode::TraceCaseMismatch, trace.case_id, "trace belongs to case '" + c.id + "'");
  const std::string& expected = trace.flagged ? c.human_decision : c.ai_decision;
  if (trace.final_decision != expected || trace.error != (trace.final_decision != c.truth))
    throw Error(ErrorCode::TraceCaseMismatch, trace.case_id, "trace is not a HITL run of this case");
  if (!trace.error) return std::nullopt;
  bool human_only_errs = c.human_decision != c.truth;
  if (!human_only_errs) return OutcomeClass::Avoidable;
  return trace.flagged ? OutcomeClass::InevitableFlagged : OutcomeClass::InevitableUnflagged;
}

inline PartySet attribute(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::InevitableFlagged: return {Party::Human};
    case OutcomeClass::InevitableUnflagged:
    case OutcomeClass::Avoidable: return {Party::AI, Party::FlagDesigner};
  }
  return {};
}

/// One record per HITL error, in log order.
inline std::vector<AttributionRecord> attribute_log(const std::vector<Case>& cases,
                                                    const std::vector<Trace>& traces) {
  if (cases.size() != traces.size())
    throw Error(ErrorCode::TraceCaseMismatch, "", "case and trace counts differ");
  std::vector<AttributionRecord> records;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    auto cls = classify(traces[i], cases[i]);
    if (!cls) continue;
    records.push_back({cases[i].id, *cls, traces[i].flagged, attribute(*cls)});
  }
  return records;
}

inline AttributionSummary summarize(const std::vector<AttributionRecord>& records,
                                    std::size_t total_cases) {
  AttributionSummary s;
  s.total_cases = total_cases;
  s.total_errors = records.size();
  for (const auto& r : records) {
    switch (r.outcome) {
      case OutcomeClass::Avoidable: ++s.avoidable; break;
      case OutcomeClass::InevitableFlagged: ++s.inevitable_flagged; break;
      case OutcomeClass::InevitableUnflagged: ++s.inevitable_unflagged; break;
    }
    for (Party p : r.parties) {
      switch (p) {
        case Party::Human: ++s.human; break;
        case Party::AI: ++s.ai; break;
        case Party::FlagDesigner: ++s.flag_designer; break;
      }
    }
  }
  return s;
}

}  // namespace blamescope
