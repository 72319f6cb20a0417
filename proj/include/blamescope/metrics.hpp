#pragma once

// Agreement and classification metrics, and their conversion into
// metric-based blame scores in [0,1].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "blamescope/error.hpp"
#include "blamescope/hitl.hpp"

namespace blamescope {

/// k x k counts, row-major; rows are rater A, columns rater B. Category c
/// (1-based on disk) is index c-1.
struct OrdinalConfusion {
  std::size_t k = 0;
  std::vector<std::uint64_t> counts;

  explicit OrdinalConfusion(std::size_t categories = 2)
      : k(categories), counts(categories * categories, 0) {}

  OrdinalConfusion(std::size_t categories, std::vector<std::uint64_t> cells)
      : k(categories), counts(std::move(cells)) {
    if (counts.size() != k * k)
      throw Error(ErrorCode::InvalidArgument, "confusion", "expected k*k cells");
  }

  std::uint64_t& at(std::size_t i, std::size_t j) { return counts[i * k + j]; }
  std::uint64_t at(std::size_t i, std::size_t j) const { return counts[i * k + j]; }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

struct RatingPair {
  std::string case_id;
  int rater_a = 0;
  int rater_b = 0;
};

inline OrdinalConfusion confusion_from_ratings(const std::vector<RatingPair>& pairs, std::size_t k) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k", "need at least two categories");
  OrdinalConfusion m(k);
  for (const auto& p : pairs) {
    if (p.rater_a < 1 || p.rater_b < 1 || static_cast<std::size_t>(p.rater_a) > k ||
        static_cast<std::size_t>(p.rater_b) > k)
      throw Error(ErrorCode::SchemaViolation, p.case_id,
                  "rating outside [1," + std::to_string(k) + "]");
    ++m.at(static_cast<std::size_t>(p.rater_a - 1), static_cast<std::size_t>(p.rater_b - 1));
  }
  return m;
}

/// Quadratic weighted kappa: 1 - sum(w*O) / sum(w*E), w_ij = (i-j)^2/(k-1)^2,
/// O the normalized counts and E the outer product of O's marginals.
inline double qwk(const OrdinalConfusion& m) {
  if (m.k < 2) throw Error(ErrorCode::InvalidArgument, "k", "need at least two categories");
  if (m.counts.size() != m.k * m.k)
    throw Error(ErrorCode::InvalidArgument, "confusion", "expected k*k cells");
  const std::uint64_t n = m.total();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "confusion", "matrix has no ratings");
  const std::size_t k = m.k;
  const double total = static_cast<double>(n);
  std::vector<double> rows(k, 0.0), cols(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      rows[i] += static_cast<double>(m.at(i, j));
      cols[j] += static_cast<double>(m.at(i, j));
    }
  const double scale = static_cast<double>((k - 1) * (k - 1));
  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      const double w = d * d / scale;
      observed += w * static_cast<double>(m.at(i, j)) / total;
      expected += w * (rows[i] / total) * (cols[j] / total);
    }
  if (expected == 0.0)
    throw Error(ErrorCode::DegenerateMarginals, "",
                "both raters use one and the same category; agreement is undefined");
  return 1.0 - observed / expected;
}

/// clamp(1 - kappa, 0, 1).
inline double blame_from_agreement(double kappa) {
  if (!std::isfinite(kappa)) throw Error(ErrorCode::InvalidArgument, "kappa", "must be finite");
  return std::clamp(1.0 - kappa, 0.0, 1.0);
}

struct BinaryCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
};

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Degenerate denominators yield 0 rather than an error.
inline PrecisionRecallF1 precision_recall_f1(const BinaryCounts& c) {
  PrecisionRecallF1 r;
  if (c.tp + c.fp > 0) r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (r.precision + r.recall > 0.0)
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

/// max(0, f1_human_only - f1_hitl).
inline double blame_from_f1_drop(double f1_hitl, double f1_human_only) {
  if (!(f1_hitl >= 0.0 && f1_hitl <= 1.0) || !(f1_human_only >= 0.0 && f1_human_only <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "f1", "F1 scores must lie in [0,1]");
  return std::max(0.0, f1_human_only - f1_hitl);
}

/// Tallies final decisions against the truth of the matching cases.
inline BinaryCounts binary_counts(const std::vector<Trace>& traces, const std::vector<Case>& cases,
                                  const std::string& positive) {
  if (traces.size() != cases.size())
    throw Error(ErrorCode::TraceCaseMismatch, "", "case and trace counts differ");
  BinaryCounts c;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (traces[i].case_id != cases[i].id)
      throw Error(ErrorCode::TraceCaseMismatch, traces[i].case_id, "trace order differs from cases");
    const bool predicted = traces[i].final_decision == positive;
    const bool actual = cases[i].truth == positive;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

}  // namespace blamescope
