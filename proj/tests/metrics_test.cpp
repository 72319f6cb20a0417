#include <gtest/gtest.h>

#include <random>

#include "blamescope/metrics.hpp"

using namespace blamescope;

namespace {

/// Kappa from explicit rating lists: each pair of ratings contributes its
/// squared distance, and chance disagreement averages the squared distance
/// over all cross pairs of the two raters' ratings.
double pairwise_kappa(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  double observed = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) observed += (a[i] - b[i]) * (a[i] - b[i]);
  double chance = 0.0;
  for (int x : a)
    for (int y : b) chance += (x - y) * (x - y);
  return 1.0 - (observed / n) / (chance / (n * n));
}

void expand(const OrdinalConfusion& m, std::vector<int>& a, std::vector<int>& b) {
  for (std::size_t i = 0; i < m.k; ++i)
    for (std::size_t j = 0; j < m.k; ++j)
      for (std::uint64_t c = 0; c < m.at(i, j); ++c) {
        a.push_back(static_cast<int>(i));
        b.push_back(static_cast<int>(j));
      }
}

}  // namespace

TEST(Qwk, PerfectAgreement) {
  OrdinalConfusion m(3, {4, 0, 0, 0, 2, 0, 0, 0, 7});
  EXPECT_EQ(qwk(m), 1.0);
}

TEST(Qwk, TotalDisagreementTwoCategories) {
  OrdinalConfusion m(2, {0, 5, 5, 0});
  std::vector<int> a, b;
  expand(m, a, b);
  EXPECT_NEAR(pairwise_kappa(a, b), -1.0, 1e-12);
  EXPECT_NEAR(qwk(m), -1.0, 1e-12);
}

TEST(Qwk, ThreeCategoryExample) {
  OrdinalConfusion m(3, {2, 1, 0, 1, 3, 1, 0, 1, 2});
  std::vector<int> a, b;
  expand(m, a, b);
  double oracle = pairwise_kappa(a, b);
  EXPECT_NEAR(oracle, 2.0 / 3.0, 1e-12);  // observed 4/11, chance 12/11 in squared-distance units
  EXPECT_NEAR(qwk(m), oracle, 1e-9);
}

TEST(Qwk, DegenerateMarginals) {
  OrdinalConfusion m(3, {0, 0, 0, 0, 6, 0, 0, 0, 0});
  try {
    qwk(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateMarginals);
  }
  OrdinalConfusion split(2, {0, 6, 0, 0});  // raters constant on different categories
  EXPECT_NO_THROW(qwk(split));
}

TEST(Qwk, RandomMatricesMatchPairwiseDefinition) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 300; ++t) {
    std::size_t k = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
    OrdinalConfusion m(k);
    for (auto& c : m.counts) c = std::uniform_int_distribution<int>(0, 6)(rng);
    std::vector<int> a, b;
    expand(m, a, b);
    if (a.empty()) continue;
    double oracle;
    try {
      double v = qwk(m);
      oracle = pairwise_kappa(a, b);
      EXPECT_NEAR(v, oracle, 1e-9);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::DegenerateMarginals);
    }
  }
}

TEST(Qwk, ConfusionFromRatings) {
  auto m = confusion_from_ratings({{"a", 1, 1}, {"b", 2, 3}, {"c", 3, 3}}, 3);
  EXPECT_EQ(m.at(0, 0), 1u);
  EXPECT_EQ(m.at(1, 2), 1u);
  EXPECT_EQ(m.at(2, 2), 1u);
  EXPECT_THROW(confusion_from_ratings({{"a", 4, 1}}, 3), Error);
}

TEST(BlameFromAgreement, Examples) {
  EXPECT_NEAR(blame_from_agreement(0.478), 0.522, 1e-12);
  EXPECT_EQ(blame_from_agreement(1.0), 0.0);
  EXPECT_EQ(blame_from_agreement(-0.5), 1.0);
}

TEST(PrecisionRecallF1, Examples) {
  auto perfect = precision_recall_f1({10, 0, 0, 0});
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
  auto twothirds = precision_recall_f1({2, 1, 1, 0});
  EXPECT_NEAR(twothirds.precision, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(twothirds.recall, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(twothirds.f1, 2.0 / 3.0, 1e-15);
  auto none = precision_recall_f1({0, 5, 5, 0});
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);
  auto empty = precision_recall_f1({0, 0, 0, 7});
  EXPECT_EQ(empty.f1, 0.0);
}

TEST(PrecisionRecallF1, HarmonicMeanBounds) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    BinaryCounts c{rng() % 20, rng() % 20, rng() % 20, rng() % 20};
    auto m = precision_recall_f1(c);
    if (m.precision + m.recall > 0.0) {
      EXPECT_LE(std::min(m.precision, m.recall), m.f1 + 1e-15);
      EXPECT_LE(m.f1, std::max(m.precision, m.recall) + 1e-15);
      EXPECT_LE(m.f1, 2.0 * std::min(m.precision, m.recall) + 1e-15);
    }
  }
}

TEST(BlameFromF1Drop, Examples) {
  EXPECT_NEAR(blame_from_f1_drop(0.831, 0.896), 0.065, 1e-12);
  EXPECT_EQ(blame_from_f1_drop(0.8, 0.8), 0.0);
  EXPECT_EQ(blame_from_f1_drop(0.9, 0.8), 0.0);
  EXPECT_THROW(blame_from_f1_drop(1.2, 0.8), Error);
}

TEST(BinaryCounts, FromTraces) {
  std::vector<Case> cases{{"a", 0.9, "1", "1", "1"}, {"b", 0.9, "1", "0", "0"},
                          {"c", 0.1, "0", "1", "1"}, {"d", 0.1, "0", "0", "0"}};
  auto traces = run(cases, FlagPolicy{0.2, 0.8});
  auto c = binary_counts(traces, cases, "1");
  EXPECT_EQ(c.tp, 1u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_EQ(c.tn, 1u);
}
