#pragma once

// Seeded synthetic case logs standing in for model-produced decision data.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "blamescope/error.hpp"
#include "blamescope/hitl.hpp"

namespace blamescope {

/// How the AI's confidence in its own decision relates to being right.
/// calibrated: right ~ U(0.6, 1.0), wrong ~ U(0.5, 0.8).
/// overconfident: right ~ U(0.6, 1.0), wrong ~ U(0.7, 1.0).
enum class ConfidenceProfile { Calibrated, Overconfident };

inline ConfidenceProfile parse_profile(std::string_view s) {
  if (s == "calibrated") return ConfidenceProfile::Calibrated;
  if (s == "overconfident") return ConfidenceProfile::Overconfident;
  throw Error(ErrorCode::InvalidArgument, std::string(s), "profile must be 'calibrated' or 'overconfident'");
}

inline std::string_view to_string(ConfidenceProfile p) {
  return p == ConfidenceProfile::Calibrated ? "calibrated" : "overconfident";
}

struct SyntheticParams {
  std::uint64_t seed = 42;
  std::size_t n_cases = 200;
  double ai_accuracy = 0.85;
  double human_accuracy = 0.9;
  double prevalence = 0.5;  // P(truth = "1")
  ConfidenceProfile profile = ConfidenceProfile::Calibrated;
};

/// Binary labels "0"/"1"; ids c0001, c0002, ... Confidences are rounded to
/// six decimals so the written log parses back to identical cases.
inline std::vector<Case> generate_cases(const SyntheticParams& p) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(p.ai_accuracy) || !in_unit(p.human_accuracy) || !in_unit(p.prevalence))
    throw Error(ErrorCode::InvalidArgument, "synthetic", "accuracies and prevalence must lie in [0,1]");
  if (p.n_cases < 1) throw Error(ErrorCode::InvalidArgument, "n", "need at least one case");

  std::mt19937_64 rng(p.seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  auto flip = [](const std::string& v) { return v == "1" ? std::string("0") : std::string("1"); };

  const int width = std::max(4, static_cast<int>(std::to_string(p.n_cases).size()));
  std::vector<Case> cases;
  cases.reserve(p.n_cases);
  for (std::size_t i = 0; i < p.n_cases; ++i) {
    Case c;
    char id[32];
    std::snprintf(id, sizeof id, "c%0*zu", width, i + 1);
    c.id = id;
    c.truth = uniform(0.0, 1.0) < p.prevalence ? "1" : "0";
    const bool ai_right = uniform(0.0, 1.0) < p.ai_accuracy;
    c.ai_decision = ai_right ? c.truth : flip(c.truth);
    double own;
    if (ai_right) own = uniform(0.6, 1.0);
    else if (p.profile == ConfidenceProfile::Calibrated) own = uniform(0.5, 0.8);
    else own = uniform(0.7, 1.0);
    double positive = c.ai_decision == "1" ? own : 1.0 - own;
    c.ai_confidence = std::round(positive * 1e6) / 1e6;
    c.human_decision = uniform(0.0, 1.0) < p.human_accuracy ? c.truth : flip(c.truth);
    cases.push_back(std::move(c));
  }
  return cases;
}

}  // namespace blamescope
