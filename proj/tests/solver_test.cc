// Copyright 2026 The DeSIA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "desia/solver.h"

#include "gtest/gtest.h"
#include "oracles.h"

namespace desia {
namespace {

SolveLimits NoClock(uint64_t nodes = 1'000'000) {
  SolveLimits l;
  l.max_nodes = nodes;
  l.max_seconds = 0;
  return l;
}

// Random schema-free problem small enough for exhaustive search.
FeasibilityProblem RandomProblem(Rng& rng) {
  const size_t n = 2 + rng.UniformInt(5);
  FeasibilityProblem p = FeasibilityProblem::WithVariables(n, 1 + rng.UniformInt(3));
  for (size_t v = 0; v < n; ++v) {
    if (rng.Bernoulli(0.3)) p.lower[v] = std::min<int64_t>(1, p.upper[v]);
  }
  const size_t m = 1 + rng.UniformInt(4);
  for (size_t k = 0; k < m; ++k) {
    SumConstraint c;
    for (uint32_t v = 0; v < n; ++v) {
      if (rng.Bernoulli(0.5)) c.vars.push_back(v);
    }
    if (c.vars.empty()) c.vars.push_back(0);
    c.target = static_cast<int64_t>(rng.UniformInt(2 * c.vars.size() + 1));
    p.constraints.push_back(c);
  }
  return p;
}

TEST(Solve, AgreesWithExhaustiveSearch) {
  Rng rng(101);
  int feasible = 0, infeasible = 0;
  for (int i = 0; i < 600; ++i) {
    FeasibilityProblem p = RandomProblem(rng);
    const bool want = testing::OracleFeasible(p);
    SolveResult r = Solve(p, rng.NextU64(), nullptr, NoClock());
    ASSERT_NE(r.status, SolveStatus::kUnknown) << "instance " << i;
    EXPECT_EQ(r.status == SolveStatus::kFeasible, want) << "instance " << i;
    if (r.status == SolveStatus::kFeasible) {
      EXPECT_TRUE(p.IsSatisfiedBy(r.assignment)) << "instance " << i;
      ++feasible;
    } else {
      ++infeasible;
    }
  }
  // Both outcomes must be exercised.
  EXPECT_GT(feasible, 50);
  EXPECT_GT(infeasible, 50);
}

TEST(Solve, ReleaseProblemsRecoverConsistentWorlds) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    SchemaPtr s = testing::RandomSmallSchema(rng, 12);
    Dataset d = testing::RandomDataset(rng, s, 1 + rng.UniformInt(6));
    std::vector<AggregateQuery> qs;
    for (size_t k = 0, m = rng.UniformInt(6); k < m; ++k) {
      qs.push_back(testing::RandomQuery(rng, *s));
    }
    QueryRelease rel = Release(qs, d);
    auto p = BuildProblem(rel, s);
    ASSERT_TRUE(p.ok());
    EXPECT_EQ(p->num_variables(), s->num_cells());
    EXPECT_EQ(p->num_query_constraints, qs.size());
    EXPECT_TRUE(p->IsSatisfiedBy(DatasetToAssignment(d)));
    FeasibilityProblem t = TightenDomains(*p, rel);
    EXPECT_TRUE(t.IsSatisfiedBy(DatasetToAssignment(d)));
    SolveResult r = Solve(t, i, nullptr, NoClock());
    ASSERT_EQ(r.status, SolveStatus::kFeasible);
    Dataset world = AssignmentToDataset(r.assignment, s);
    EXPECT_EQ(EvaluateAll(qs, world), rel.answers);
    EXPECT_EQ(world.size(), d.size());
  }
}

TEST(Tighten, NeverRemovesSolutionsAndShrinksBounds) {
  Rng rng(23);
  for (int i = 0; i < 150; ++i) {
    SchemaPtr s = testing::RandomSmallSchema(rng, 6);
    Dataset d = testing::RandomDataset(rng, s, 1 + rng.UniformInt(3));
    std::vector<AggregateQuery> qs = {testing::RandomQuery(rng, *s),
                                      testing::RandomQuery(rng, *s)};
    QueryRelease rel = Release(qs, d);
    FeasibilityProblem p = *BuildProblem(rel, s);
    FeasibilityProblem t = TightenDomains(p, rel);
    for (size_t v = 0; v < p.num_variables(); ++v) EXPECT_LE(t.upper[v], p.upper[v]);
    // Every world of the loose problem is still admitted.
    const auto cells = testing::QueryCells(rel, *s);
    testing::ForEachMultiset(s->num_cells(), rel.dataset_size,
                             [&](const std::vector<int64_t>& x) {
                               if (!testing::Consistent(x, rel, cells)) return;
                               EXPECT_TRUE(t.IsSatisfiedBy(Assignment{x}));
                             });
  }
}

TEST(BuildProblem, ClampsNegativeNoisyAnswers) {
  SchemaPtr s = *AttributeSchema::FromJson(nlohmann::json::parse(
      R"({"attributes": [{"name": "a", "domain": [0, 1]},
                         {"name": "b", "domain": [0, 1], "sensitive": true}]})"));
  QueryRelease rel;
  rel.queries = {AggregateQuery::Total(*s)};
  rel.queries[0].subsets[0] = ValueSet({0}, 2);
  rel.answers = {-3};
  rel.dataset_size = 2;
  rel.noise = NoiseMeta{1.0, 1};
  auto p = BuildProblem(rel, s);
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p->constraints[0].target, 0);
  EXPECT_FALSE(p->warnings.empty());
}

TEST(BuildProblem, VariableCap) {
  SchemaPtr s = *AttributeSchema::FromJson(nlohmann::json::parse(
      R"({"attributes": [{"name": "a", "range": [0, 99]},
                         {"name": "b", "domain": [0, 1], "sensitive": true}]})"));
  QueryRelease rel;
  rel.dataset_size = 1;
  auto p = BuildProblem(rel, s, 50);
  EXPECT_EQ(p.status().code(), absl::StatusCode::kResourceExhausted);
}

TEST(Solve, DetectsInfeasibleAndRespectsNodeLimit) {
  FeasibilityProblem p = FeasibilityProblem::WithVariables(3, 2);
  p.constraints = {{{0, 1}, 4}, {{1, 2}, 0}, {{0}, 1}};
  EXPECT_EQ(Solve(p, 1, nullptr, NoClock()).status, SolveStatus::kInfeasible);

  // Parity puzzle: propagation alone cannot decide it, so a tiny budget
  // leaves it unknown.
  FeasibilityProblem hard = FeasibilityProblem::WithVariables(24, 1);
  for (uint32_t v = 0; v + 1 < 24; v += 2) hard.constraints.push_back({{v, v + 1}, 1});
  SumConstraint odd;
  for (uint32_t v = 0; v < 24; v += 2) odd.vars.push_back(v);
  odd.target = 5;
  SumConstraint even;
  for (uint32_t v = 1; v < 24; v += 2) even.vars.push_back(v);
  even.target = 8;
  hard.constraints.push_back(odd);
  hard.constraints.push_back(even);
  SolveResult r = Solve(hard, 3, nullptr, NoClock(2));
  EXPECT_EQ(r.status, SolveStatus::kUnknown);
  EXPECT_LE(r.nodes, 3u);
  EXPECT_EQ(Solve(hard, 3, nullptr, NoClock()).status, SolveStatus::kInfeasible);
}

TEST(Solve, FollowsAFeasibleHint) {
  FeasibilityProblem p = FeasibilityProblem::WithVariables(6, 3);
  p.constraints = {{{0, 1, 2, 3, 4, 5}, 6}};
  Assignment hint{{3, 0, 1, 0, 2, 0}};
  for (uint64_t seed = 0; seed < 20; ++seed) {
    SolveResult r = Solve(p, seed, &hint, NoClock());
    ASSERT_EQ(r.status, SolveStatus::kFeasible);
    EXPECT_EQ(r.assignment, hint);
  }
}

TEST(Solve, SameSeedSameAnswer) {
  Rng rng(55);
  for (int i = 0; i < 50; ++i) {
    FeasibilityProblem p = RandomProblem(rng);
    SolveResult a = Solve(p, i, nullptr, NoClock(), true);
    SolveResult b = Solve(p, i, nullptr, NoClock(), true);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.assignment, b.assignment);
  }
}

TEST(Constraints, AddFixRestrict) {
  FeasibilityProblem p = FeasibilityProblem::WithVariables(3, 2);
  p.constraints = {{{0, 1, 2}, 3}};
  auto fixed = FixVariable(p, 0, 2);
  ASSERT_TRUE(fixed.ok());
  EXPECT_EQ(fixed->lower[0], 2);
  EXPECT_FALSE(FixVariable(p, 0, 5).ok());
  EXPECT_FALSE(FixVariable(p, 9, 0).ok());
  auto added = AddSumConstraint(*fixed, {1, 2}, 0);
  ASSERT_TRUE(added.ok());
  EXPECT_EQ(Solve(*added, 0, nullptr, NoClock()).status, SolveStatus::kInfeasible);
  EXPECT_FALSE(AddSumConstraint(p, {3}, 0).ok());
  auto emptied = RestrictDomain(p, 1, 3, 4);
  ASSERT_TRUE(emptied.ok());
  EXPECT_EQ(Solve(*emptied, 0, nullptr, NoClock()).status, SolveStatus::kInfeasible);
}

TEST(Enumerate, ReturnsValidSolutionsOrStopsOnInfeasible) {
  FeasibilityProblem p = FeasibilityProblem::WithVariables(5, 2);
  p.constraints = {{{0, 1, 2, 3, 4}, 4}, {{0, 1}, 2}};
  Enumeration e = EnumerateSolutions(p, 30, 8, nullptr, NoClock());
  ASSERT_EQ(e.solutions.size(), 30u);
  std::set<std::vector<int64_t>> distinct;
  for (const auto& a : e.solutions) {
    EXPECT_TRUE(p.IsSatisfiedBy(a));
    distinct.insert(a.values);
  }
  // Seeds differ, so the solutions should not all coincide.
  EXPECT_GT(distinct.size(), 1u);

  p.constraints.push_back({{2, 3, 4}, 5});
  Enumeration none = EnumerateSolutions(p, 30, 8, nullptr, NoClock());
  EXPECT_TRUE(none.solutions.empty());
  EXPECT_EQ(none.infeasible, 1u);
}

TEST(CoveredCells, MatchesCovers) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    SchemaPtr s = testing::RandomSmallSchema(rng, 30);
    AggregateQuery q = testing::RandomQuery(rng, *s);
    std::vector<uint32_t> want;
    for (uint32_t c = 0; c < s->num_cells(); ++c) {
      if (Covers(q, s->CellRecord(c))) want.push_back(c);
    }
    EXPECT_EQ(CoveredCells(q, *s), want);
  }
}

TEST(Assignment, DatasetRoundTrip) {
  Rng rng(12);
  SchemaPtr s = testing::RandomSmallSchema(rng, 20);
  Dataset d = testing::RandomDataset(rng, s, 15);
  Assignment a = DatasetToAssignment(d);
  EXPECT_TRUE(AssignmentToDataset(a, s).SameMultiset(d));
}

}  // namespace
}  // namespace desia
