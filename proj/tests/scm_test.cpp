#include <gtest/gtest.h>

#include <random>

#include "blamescope/io.hpp"
#include "blamescope/scm.hpp"
#include "test_util.hpp"

using namespace blamescope;
using namespace blamescope::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ConfigError;
}

}  // namespace

TEST(Validate, XorModelIsWellFormed) {
  EXPECT_NO_THROW(validate(xor_description()));
  Scm scm(xor_description());
  ASSERT_EQ(scm.topological_order().size(), 2u);
  EXPECT_EQ(scm.id(scm.topological_order()[0]), "X");
  EXPECT_EQ(scm.id(scm.topological_order()[1]), "Y");
}

TEST(Validate, TopologicalOrderIgnoresDescriptionOrder) {
  auto d = chain_description();
  std::swap(d.endogenous[0], d.endogenous[2]);  // C, B, A
  Scm scm(d);
  std::vector<std::string> order;
  for (auto s : scm.topological_order()) order.push_back(scm.id(s));
  EXPECT_EQ(order, (std::vector<std::string>{"A", "B", "C"}));
}

TEST(Validate, TwoCycleIsRejectedWithBothNames) {
  auto d = xor_description();
  d.endogenous[0].parents = {"Y"};
  d.endogenous[0].table = {{"0", "0"}, {"1", "1"}};
  try {
    validate(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CyclicGraph);
    std::string msg = e.what();
    EXPECT_NE(msg.find("X"), std::string::npos);
    EXPECT_NE(msg.find("Y"), std::string::npos);
  }
}

TEST(Validate, SelfLoopIsACycle) {
  auto d = xor_description();
  d.endogenous[0].parents = {"X"};
  EXPECT_EQ(code_of([&] { validate(d); }), ErrorCode::CyclicGraph);
}

TEST(Validate, DistributionSummingPastOneIsRejected) {
  auto d = xor_description();
  d.exogenous[0].probs = {0.5, 0.6};
  try {
    validate(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonNormalizedDistribution);
    EXPECT_EQ(e.subject(), "E1");
  }
}

TEST(Validate, NegativeProbabilityIsRejected) {
  auto d = xor_description();
  d.exogenous[1].probs = {1.2, -0.2};
  EXPECT_EQ(code_of([&] { validate(d); }), ErrorCode::NonNormalizedDistribution);
}

TEST(Validate, DanglingParentNamesTheVariable) {
  auto d = xor_description();
  d.endogenous[1].parents = {"X", "E9"};
  try {
    validate(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DanglingParent);
    EXPECT_EQ(e.subject(), "Y");
  }
}

TEST(Validate, PartialMechanismIsRejected) {
  auto d = xor_description();
  d.endogenous[1].table.erase("1|1");
  try {
    validate(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PartialMechanism);
    EXPECT_EQ(e.subject(), "Y");
  }
}

TEST(Validate, MechanismOutputOutsideDomainIsRejected) {
  auto d = xor_description();
  d.endogenous[1].table["1|1"] = "2";
  EXPECT_EQ(code_of([&] { validate(d); }), ErrorCode::ValueOutOfDomain);
}

TEST(Validate, DuplicateIdsAndBadDomains) {
  auto d = xor_description();
  d.endogenous[1].id = "E1";
  EXPECT_EQ(code_of([&] { validate(d); }), ErrorCode::DuplicateId);

  d = xor_description();
  d.endogenous[0].values = {"0", "0"};
  EXPECT_EQ(code_of([&] { validate(d); }), ErrorCode::InvalidDomain);

  d = xor_description();
  d.exogenous[0].values = {};
  d.exogenous[0].probs = {};
  EXPECT_EQ(code_of([&] { validate(d); }), ErrorCode::InvalidDomain);
}

TEST(Solve, XorExamples) {
  Scm scm(xor_description());
  EXPECT_EQ(solve(scm, {{"E1", "1"}, {"E2", "1"}}), (Assignment{{"X", "1"}, {"Y", "0"}}));
  EXPECT_EQ(solve(scm, {{"E1", "0"}, {"E2", "0"}}), (Assignment{{"X", "0"}, {"Y", "0"}}));
}

TEST(Solve, IdentityChain) {
  Scm scm(chain_description());
  EXPECT_EQ(solve(scm, {{"E1", "1"}}), (Assignment{{"A", "1"}, {"B", "1"}, {"C", "1"}}));
}

TEST(Solve, IncompleteNoiseIsRejected) {
  Scm scm(xor_description());
  EXPECT_EQ(code_of([&] { solve(scm, {{"E1", "1"}}); }), ErrorCode::IncompleteExogenousAssignment);
}

TEST(Solve, RepeatedCallsAreIdentical) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    auto m = random_model(rng);
    Scm scm(m.desc);
    Assignment e;
    for (const auto& x : m.desc.exogenous) e[x.id] = x.values[rng() % 2];
    auto first = solve(scm, e);
    EXPECT_EQ(first.size(), scm.num_endogenous());
    EXPECT_EQ(first, solve(scm, e));
    EXPECT_EQ(first, [&] {
      Assignment only_endo;
      auto all = oracle_solve(m.desc, e);
      for (const auto& v : m.desc.endogenous) only_endo[v.id] = all.at(v.id);
      return only_endo;
    }());
  }
}

TEST(EventProbability, XorYEqualsOne) {
  Scm scm(xor_description(0.5, 0.3));
  double oracle = oracle_probability(xor_description(0.5, 0.3), eq("Y", "1"));
  EXPECT_NEAR(oracle, 0.5, 1e-15);
  EXPECT_NEAR(event_probability(scm, eq("Y", "1")), oracle, 1e-12);
}

TEST(EventProbability, EmptyAndExhaustiveEvents) {
  Scm scm(xor_description());
  EXPECT_EQ(event_probability(scm, OutcomeSpec{}), 0.0);
  OutcomeSpec any{{{{"X", Comparator::Eq, "0"}}, {{"X", Comparator::Eq, "1"}}}};
  EXPECT_NEAR(event_probability(scm, any), 1.0, 1e-12);
  OutcomeSpec tautology{{Conjunction{}}};
  EXPECT_NEAR(event_probability(scm, tautology), 1.0, 1e-12);
}

TEST(EventProbability, NeqComparator) {
  Scm scm(xor_description(0.5, 0.3));
  OutcomeSpec phi{{{{"Y", Comparator::Neq, "1"}}}};
  EXPECT_NEAR(event_probability(scm, phi), 0.5, 1e-12);
}

TEST(EventProbability, OutcomeOnUnknownOrExogenousVariable) {
  Scm scm(xor_description());
  EXPECT_EQ(code_of([&] { event_probability(scm, eq("Z", "1")); }), ErrorCode::UnknownVariable);
  EXPECT_EQ(code_of([&] { event_probability(scm, eq("E1", "1")); }), ErrorCode::UnknownVariable);
  EXPECT_EQ(code_of([&] { event_probability(scm, eq("Y", "7")); }), ErrorCode::ValueOutOfDomain);
}

TEST(EventProbability, StateSpaceCap) {
  Scm scm(xor_description());
  EnumerationOptions opts{3};
  EXPECT_EQ(code_of([&] { event_probability(scm, eq("Y", "1"), opts); }), ErrorCode::StateSpaceTooLarge);
  EXPECT_NO_THROW(event_probability(scm, eq("Y", "1"), EnumerationOptions{4}));
}

TEST(EventProbability, MonotoneUnderClauseUnion) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    auto m = random_model(rng);
    Scm scm(m.desc);
    auto phi = random_outcome(rng, m.desc);
    auto extra = random_outcome(rng, m.desc);
    double before = event_probability(scm, phi);
    for (const auto& c : extra.clauses) phi.clauses.push_back(c);
    EXPECT_GE(event_probability(scm, phi), before - 1e-12);
    EXPECT_GE(before, 0.0);
    EXPECT_LE(before, 1.0);
  }
}

TEST(MonteCarlo, DeterministicAndClose) {
  Scm scm(xor_description(0.5, 0.3));
  double a = event_probability_mc(scm, eq("Y", "1"), 100000, 7);
  double b = event_probability_mc(scm, eq("Y", "1"), 100000, 7);
  EXPECT_EQ(a, b);
  EXPECT_NEAR(a, 0.5, 0.01);
}

TEST(MonteCarlo, DegenerateCases) {
  Scm scm(xor_description());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_EQ(event_probability_mc(scm, OutcomeSpec{}, 1000, seed), 0.0);
    double one = event_probability_mc(scm, eq("Y", "1"), 1, seed);
    EXPECT_TRUE(one == 0.0 || one == 1.0);
  }
  EXPECT_EQ(code_of([&] { event_probability_mc(scm, eq("Y", "1"), 0, 1); }), ErrorCode::InvalidArgument);
}

TEST(MonteCarlo, NeverDrawsZeroProbabilityValues) {
  auto d = xor_description(0.0, 1.0);
  Scm scm(d);
  EXPECT_EQ(event_probability_mc(scm, eq("X", "1"), 20000, 3), 0.0);
  EXPECT_EQ(event_probability_mc(scm, eq("Y", "1"), 20000, 3), 1.0);
}

TEST(Intervene, ConstantMechanismIgnoresNoise) {
  Scm scm(xor_description());
  Scm done = intervene(scm, "X", "0");
  for (const char* e1 : {"0", "1"})
    for (const char* e2 : {"0", "1"}) {
      auto out = solve(done, {{"E1", e1}, {"E2", e2}});
      EXPECT_EQ(out.at("X"), "0");
      EXPECT_EQ(out.at("Y"), e2);
    }
  EXPECT_NEAR(event_probability(intervene(scm, "X", "1"), eq("X", "1")), 1.0, 1e-12);
}

TEST(Intervene, IdempotentOnConstant) {
  Scm once = intervene(Scm(xor_description()), "X", "1");
  Scm twice = intervene(once, "X", "1");
  for (const char* e1 : {"0", "1"})
    for (const char* e2 : {"0", "1"})
      EXPECT_EQ(solve(once, {{"E1", e1}, {"E2", e2}}), solve(twice, {{"E1", e1}, {"E2", e2}}));
}

TEST(Intervene, LeavesInputUnchanged) {
  Scm scm(xor_description());
  std::string before = io::to_json(scm.description()).dump();
  Scm done = intervene(scm, "Y", "1");
  EXPECT_EQ(io::to_json(scm.description()).dump(), before);
  EXPECT_NE(io::to_json(done.description()).dump(), before);
}

TEST(Intervene, Errors) {
  Scm scm(xor_description());
  EXPECT_EQ(code_of([&] { intervene(scm, "Q", "1"); }), ErrorCode::UnknownVariable);
  EXPECT_EQ(code_of([&] { intervene(scm, "E1", "1"); }), ErrorCode::UnknownVariable);
  EXPECT_EQ(code_of([&] { intervene(scm, "X", "5"); }), ErrorCode::ValueOutOfDomain);
}

TEST(Abduct, XorObservationPinsNoise) {
  Scm scm(xor_description(0.5, 0.3));
  auto post = abduct(scm, {{"X", "1"}, {"Y", "0"}});
  ASSERT_EQ(post.support.size(), 1u);
  EXPECT_EQ(to_assignment(scm, post.support[0]), (Assignment{{"E1", "1"}, {"E2", "1"}}));
  EXPECT_NEAR(post.support[0].probability, 1.0, 1e-12);
}

TEST(Abduct, EmptyObservationIsThePrior) {
  Scm scm(xor_description(0.5, 0.3));
  auto post = abduct(scm, {});
  ASSERT_EQ(post.support.size(), 4u);
  const double expected[] = {0.35, 0.15, 0.35, 0.15};  // (E1,E2) = 00, 01, 10, 11
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(post.support[i].probability, expected[i], 1e-12);
}

TEST(Abduct, ImpossibleEvidence) {
  Scm scm(xor_description(0.0, 0.3));
  EXPECT_EQ(code_of([&] { abduct(scm, {{"X", "1"}}); }), ErrorCode::ZeroProbabilityObservation);
}

TEST(Abduct, PosteriorIsNormalizedAndConsistent) {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    auto m = random_model(rng);
    Scm scm(m.desc);
    const auto& v = m.desc.endogenous[rng() % m.desc.endogenous.size()];
    Assignment obs{{v.id, v.values[rng() % v.values.size()]}};
    NoisePosterior post;
    try {
      post = abduct(scm, obs);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ZeroProbabilityObservation);
      EXPECT_NEAR(oracle_probability(m.desc, eq(v.id, obs.begin()->second)), 0.0, 1e-12);
      continue;
    }
    ++checked;
    EXPECT_NEAR(post.total(), 1.0, 1e-9);
    for (const auto& s : post.support) {
      EXPECT_GT(s.probability, 0.0);
      EXPECT_EQ(solve(scm, to_assignment(scm, s)).at(v.id), obs.begin()->second);
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Counterfactual, XorWorkedExample) {
  Scm scm(xor_description(0.5, 0.3));
  std::vector<Intervention> dox0{{"X", "0"}};
  EXPECT_EQ(counterfactual_probability(scm, {{"X", "1"}, {"Y", "0"}}, dox0, eq("Y", "1")), 1.0);
  std::vector<Intervention> dox1{{"X", "1"}};
  EXPECT_EQ(counterfactual_probability(scm, {{"X", "1"}, {"Y", "0"}}, dox1, eq("Y", "0")), 1.0);
}

TEST(Counterfactual, FullObservationWithoutInterventionIsFactual) {
  Scm scm(xor_description(0.5, 0.3));
  OutcomeSpec phi{{{{"X", Comparator::Eq, "0"}, {"Y", Comparator::Eq, "1"}}}};
  EXPECT_EQ(counterfactual_probability(scm, {{"X", "0"}, {"Y", "1"}}, {}, phi), 1.0);
}

TEST(Counterfactual, CollapseLawOnRandomModels) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    auto m = random_model(rng);
    Scm scm(m.desc);
    auto phi = random_outcome(rng, m.desc);
    EXPECT_NEAR(counterfactual_probability(scm, {}, {}, phi), event_probability(scm, phi), 1e-12);
  }
}
