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

#include "desia/aggregates.h"

#include <cmath>
#include <set>

#include "gtest/gtest.h"
#include "oracles.h"

namespace desia {
namespace {

SchemaPtr Small() {
  return *AttributeSchema::FromJson(nlohmann::json::parse(R"({
    "attributes": [
      {"name": "age", "domain": [20, 30, 40, 50]},
      {"name": "sex", "domain": [0, 1]},
      {"name": "y", "domain": [0, 1, 2], "sensitive": true}
    ]})"));
}

// Straight-line count without the membership machinery.
int64_t NaiveCount(const AggregateQuery& q, const Dataset& d) {
  int64_t n = 0;
  for (const Record& r : d.records()) {
    bool in = true;
    for (size_t i = 0; i < r.values.size(); ++i) {
      const auto& c = q.subsets[i].codes();
      in = in && std::find(c.begin(), c.end(), r.values[i]) != c.end();
    }
    n += in;
  }
  return n;
}

TEST(ValueSet, FlagsAndMembership) {
  EXPECT_TRUE(ValueSet::Full(3).full());
  ValueSet iv = ValueSet::Interval(1, 2, 4);
  EXPECT_TRUE(iv.interval());
  EXPECT_FALSE(iv.contains(0));
  EXPECT_TRUE(iv.contains(2));
  ValueSet holes({3, 0}, 4);
  EXPECT_FALSE(holes.interval());
  EXPECT_TRUE(holes.contains(3));
  EXPECT_FALSE(holes.contains(1));
  EXPECT_TRUE(ValueSet({0, 1, 2}, 3).full());
}

TEST(Evaluate, MatchesNaiveCountOnRandomQueries) {
  Rng rng(17);
  SchemaPtr s = Small();
  for (int rep = 0; rep < 50; ++rep) {
    Dataset d = testing::RandomDataset(rng, s, 1 + rng.UniformInt(60));
    std::vector<AggregateQuery> qs;
    for (int k = 0; k < 20; ++k) qs.push_back(testing::RandomQuery(rng, *s));
    const std::vector<int64_t> all = EvaluateAll(qs, d);
    QueryMembershipIndex index(qs, d);
    for (size_t k = 0; k < qs.size(); ++k) {
      const int64_t want = NaiveCount(qs[k], d);
      EXPECT_EQ(Evaluate(qs[k], d), want);
      EXPECT_EQ(all[k], want);
      EXPECT_EQ(index.Count(k), want);
      const auto users = index.Userset(k);
      EXPECT_EQ(static_cast<int64_t>(users.size()), want);
      for (uint32_t u : users) EXPECT_TRUE(Covers(qs[k], d.record(u)));
    }
  }
}

TEST(Evaluate, TotalCountsEverything) {
  Rng rng(3);
  SchemaPtr s = Small();
  Dataset d = testing::RandomDataset(rng, s, 37);
  EXPECT_EQ(Evaluate(AggregateQuery::Total(*s), d), 37);
}

TEST(Covers, PartialIgnoresSensitive) {
  SchemaPtr s = Small();
  AggregateQuery q = AggregateQuery::Total(*s);
  q.subsets[0] = ValueSet({1}, 4);
  q.subsets[2] = ValueSet({2}, 3);
  EXPECT_TRUE(q.conditions_sensitive());
  EXPECT_TRUE(CoversPartial(q, PartialRecord{{1, 0}}));
  EXPECT_FALSE(CoversPartial(q, PartialRecord{{0, 0}}));
  EXPECT_FALSE(Covers(q, Record{{1, 0, 1}}));
}

TEST(ValidateQuery, RejectsShapeAndDomainErrors) {
  SchemaPtr s = Small();
  AggregateQuery q = AggregateQuery::Total(*s);
  EXPECT_TRUE(ValidateQuery(q, *s).ok());
  q.subsets.pop_back();
  EXPECT_FALSE(ValidateQuery(q, *s).ok());
  AggregateQuery e = AggregateQuery::Total(*s);
  e.subsets[1] = ValueSet({}, 2);
  EXPECT_FALSE(ValidateQuery(e, *s).ok());
}

TEST(Marginals, CountAndPartitionProperty) {
  SchemaPtr s = Small();
  auto one = MakeMarginalQueries(*s, {}, 1);
  ASSERT_TRUE(one.ok());
  EXPECT_EQ(one->size(), 4u + 2u + 3u);
  auto two = MakeMarginalQueries(*s, {}, 2);
  ASSERT_TRUE(two.ok());
  EXPECT_EQ(two->size(), 4u * 2 + 4u * 3 + 2u * 3);
  // Each 2-way table partitions the records.
  Rng rng(5);
  Dataset d = testing::RandomDataset(rng, s, 41);
  const auto counts = EvaluateAll(*two, d);
  int64_t sum = 0;
  for (size_t k = 0; k < 8; ++k) sum += counts[k];
  EXPECT_EQ(sum, 41);
  auto bucketed = MakeMarginalQueries(*s, {0}, 1, {{0, 3}});
  ASSERT_TRUE(bucketed.ok());
  ASSERT_EQ(bucketed->size(), 2u);
  EXPECT_EQ((*bucketed)[1].subsets[0].codes(), std::vector<Code>{3});
  EXPECT_FALSE(MakeMarginalQueries(*s, {}, 4).ok());
  EXPECT_FALSE(MakeMarginalQueries(*s, {7}, 1).ok());
}

TEST(QueryJson, RoundTripsRandomQueries) {
  Rng rng(9);
  SchemaPtr s = Small();
  std::vector<AggregateQuery> qs;
  for (int k = 0; k < 200; ++k) qs.push_back(testing::RandomQuery(rng, *s));
  qs.push_back(AggregateQuery::Total(*s));
  auto back = ParseQuerySpec(QuerySpecToJson(qs, *s), *s);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(*back, qs);
}

TEST(QueryJson, ExternalCodesAndRanges) {
  SchemaPtr s = Small();
  auto q = QueryFromJson(
      nlohmann::json::parse(R"({"conditions": {"age": {"range": [30, 50]}, "y": [2]}})"),
      *s);
  ASSERT_TRUE(q.ok());
  EXPECT_EQ(q->subsets[0].codes(), (std::vector<Code>{1, 2, 3}));
  EXPECT_EQ(q->subsets[2].codes(), std::vector<Code>{2});
  EXPECT_FALSE(QueryFromJson(nlohmann::json::parse(R"({"conditions": {"age": [25]}})"), *s).ok());
  EXPECT_FALSE(QueryFromJson(nlohmann::json::parse(R"({"conditions": {"zip": [1]}})"), *s).ok());
  EXPECT_FALSE(QueryFromJson(nlohmann::json::parse(R"({"name": "x"})"), *s).ok());
}

TEST(SampleQueries, DistinctSubsetAndDeterministic) {
  SchemaPtr s = Small();
  auto pool = *MakeMarginalQueries(*s, {}, 2);
  auto a = SampleQueries(pool, 10, 44);
  auto b = SampleQueries(pool, 10, 44);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(*a, *b);
  std::set<std::string> seen;
  for (const auto& q : *a) seen.insert(QueryToJson(q, *s).dump());
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_TRUE(SampleQueries(pool, 0, 1)->empty());
  EXPECT_FALSE(SampleQueries(pool, pool.size() + 1, 1).ok());
}

TEST(Release, JsonRoundTripAndSchemaCheck) {
  Rng rng(2);
  SchemaPtr s = Small();
  Dataset d = testing::RandomDataset(rng, s, 12);
  auto pool = *MakeMarginalQueries(*s, {}, 1);
  QueryRelease rel = Release(pool, d);
  auto back = ReleaseFromJson(ReleaseToJson(rel, *s), *s);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->answers, rel.answers);
  EXPECT_EQ(back->queries, rel.queries);
  EXPECT_EQ(back->dataset_size, 12);
  nlohmann::json bad = ReleaseToJson(rel, *s);
  bad["answers"].push_back(1);
  EXPECT_FALSE(ReleaseFromJson(bad, *s).ok());
  nlohmann::json other = ReleaseToJson(rel, *s);
  other["schema_hash"] = "0000000000000000";
  EXPECT_EQ(ReleaseFromJson(other, *s).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(Laplace, ScaleMatchesEpsilon) {
  SchemaPtr s = Small();
  QueryRelease rel;
  rel.queries.assign(20000, AggregateQuery::Total(*s));
  rel.answers.assign(20000, 100);
  rel.dataset_size = 100;
  for (double eps : {0.5, 2.0}) {
    auto noisy = AddLaplaceNoise(rel, eps, 31);
    ASSERT_TRUE(noisy.ok());
    double abs_dev = 0;
    for (int64_t a : noisy->answers) abs_dev += std::abs(a - 100);
    abs_dev /= 20000;
    // E|round(L)| for Laplace(b): close to b for b >= 0.5.
    EXPECT_NEAR(abs_dev, 1.0 / eps, 0.08 / eps + 0.1);
    EXPECT_FALSE(AddLaplaceNoise(*noisy, eps, 1).ok());
  }
  EXPECT_FALSE(AddLaplaceNoise(rel, 0.0, 1).ok());
  auto same1 = AddLaplaceNoise(rel, 1.0, 5);
  auto same2 = AddLaplaceNoise(rel, 1.0, 5);
  EXPECT_EQ(same1->answers, same2->answers);
}

}  // namespace
}  // namespace desia
