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

#include "desia/baselines.h"

#include <cmath>
#include <filesystem>

#include "gtest/gtest.h"
#include "desia/desia.h"
#include "oracles.h"

namespace desia {
namespace {

SchemaPtr Tiny3() {
  return *AttributeSchema::FromJson(nlohmann::json::parse(R"({
    "attributes": [
      {"name": "a", "range": [0, 2]},
      {"name": "b", "range": [0, 1]},
      {"name": "s", "range": [0, 1], "sensitive": true}
    ]})"));
}

std::vector<AggregateQuery> AllCellQueries(const AttributeSchema& s) {
  std::vector<AggregateQuery> out;
  for (uint64_t c = 0; c < s.num_cells(); ++c) {
    const Record r = s.CellRecord(c);
    AggregateQuery q = AggregateQuery::Total(s);
    for (size_t i = 0; i < r.values.size(); ++i) {
      q.subsets[i] = ValueSet({r.values[i]}, s.domain_size(i));
    }
    out.push_back(q);
  }
  return out;
}

SolveLimits NoClock() {
  SolveLimits l;
  l.max_nodes = 1'000'000;
  l.max_seconds = 0;
  return l;
}

TEST(RapLoss, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  SchemaPtr s = Tiny3();
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    SoftDataset soft = SoftDataset::Uniform(s, 4);
    for (double& l : soft.logits) l = rng.Normal();
    std::vector<AggregateQuery> qs;
    std::vector<double> targets;
    for (int k = 0; k < 6; ++k) {
      qs.push_back(testing::RandomQuery(rng, *s));
      targets.push_back(static_cast<double>(rng.UniformInt(5)));
    }
    std::vector<double> g;
    RapLoss(soft, qs, targets, &g);
    for (size_t i = 0; i < soft.logits.size(); ++i) {
      const double keep = soft.logits[i], h = 1e-5;
      soft.logits[i] = keep + h;
      const double up = RapLoss(soft, qs, targets, nullptr);
      soft.logits[i] = keep - h;
      const double down = RapLoss(soft, qs, targets, nullptr);
      soft.logits[i] = keep;
      const double fd = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(fd - g[i]) / std::max(1e-3, std::abs(g[i])));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(RapRelaxedEval, UniformAndOneHot) {
  Rng rng(6);
  SchemaPtr s = Tiny3();
  SoftDataset u = SoftDataset::Uniform(s, 10);
  for (int k = 0; k < 30; ++k) {
    AggregateQuery q = testing::RandomQuery(rng, *s);
    double frac = 1;
    for (size_t i = 0; i < q.subsets.size(); ++i) {
      frac *= static_cast<double>(q.subsets[i].size()) / s->domain_size(i);
    }
    EXPECT_NEAR(RapRelaxedEval(u, q), 10 * frac, 1e-12);
    Dataset d = testing::RandomDataset(rng, s, 7);
    EXPECT_NEAR(RapRelaxedEval(SoftDataset::OneHot(d, INFINITY), q),
                static_cast<double>(Evaluate(q, d)), 1e-12);
  }
}

TEST(SoftDataset, HardenAndProbabilities) {
  Rng rng(1);
  SchemaPtr s = Tiny3();
  Dataset d = testing::RandomDataset(rng, s, 9);
  SoftDataset soft = SoftDataset::OneHot(d, 3.0);
  EXPECT_TRUE(soft.Harden().SameMultiset(d));
  const auto p = soft.Probabilities();
  double row0 = 0;
  for (size_t j = 0; j < soft.row_width; ++j) row0 += p[j];
  EXPECT_NEAR(row0, 3.0, 1e-12);  // one distribution per attribute
  Rng draw(2);
  EXPECT_TRUE(SoftDataset::OneHot(d, INFINITY).Sample(draw).SameMultiset(d));
}

TEST(RapOptimize, ExactFixedPointAndMonotoneLoss) {
  Rng rng(11);
  SchemaPtr s = Tiny3();
  Dataset d = testing::RandomDataset(rng, s, 8);
  auto pool = *MakeMarginalQueries(*s, {}, 2);
  QueryRelease rel = Release(pool, d);
  RapConfig cfg;
  cfg.iterations = 50;
  auto fixed = RapOptimize(rel, SoftDataset::OneHot(d, INFINITY), cfg, 1);
  ASSERT_TRUE(fixed.ok());
  EXPECT_EQ(fixed->loss_history.front(), 0.0);
  EXPECT_TRUE(fixed->hardened.SameMultiset(d));

  SoftDataset start = SoftDataset::Uniform(s, 8);
  for (double& l : start.logits) l = 0.5 * rng.Normal();
  cfg.iterations = 300;
  auto run = RapOptimize(rel, start, cfg, 2);
  ASSERT_TRUE(run.ok());
  for (size_t k = 1; k < run->loss_history.size(); ++k) {
    EXPECT_LE(run->loss_history[k], run->loss_history[k - 1]);
  }
  EXPECT_LT(run->loss_history.back(), run->loss_history.front());
}

TEST(RapOptimize, FrozenLogitsStayPut) {
  Rng rng(12);
  SchemaPtr s = Tiny3();
  Dataset d = testing::RandomDataset(rng, s, 5);
  QueryRelease rel = Release(*MakeMarginalQueries(*s, {}, 1), d);
  SoftDataset start = SoftDataset::Uniform(s, 5);
  for (double& l : start.logits) l = rng.Normal();
  std::vector<char> frozen(start.logits.size(), 0);
  for (size_t j = 0; j < start.row_width; ++j) frozen[j] = 1;
  RapConfig cfg;
  cfg.iterations = 40;
  auto run = RapOptimize(rel, start, cfg, 3, frozen);
  ASSERT_TRUE(run.ok());
  for (size_t j = 0; j < start.row_width; ++j) {
    EXPECT_EQ(run->soft.logits[j], start.logits[j]);
  }
}

TEST(RapReconstruct, SizesAndSeeds) {
  Rng rng(13);
  SchemaPtr s = Tiny3();
  Dataset d = testing::RandomDataset(rng, s, 6);
  Dataset aux = testing::RandomDataset(rng, s, 30);
  QueryRelease rel = Release(*MakeMarginalQueries(*s, {}, 2), d);
  RapConfig cfg;
  cfg.iterations = 30;
  auto a = RapReconstruct(rel, s, 4, &aux, 9, cfg);
  auto b = RapReconstruct(rel, s, 4, &aux, 9, cfg);
  ASSERT_TRUE(a.ok());
  ASSERT_EQ(a->datasets.size(), 4u);
  for (size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(a->datasets[k].size(), 6u);
    EXPECT_TRUE(a->datasets[k].SameMultiset(b->datasets[k]));
  }
  auto r = RapReconstruct(rel, s, 2, nullptr, 9, cfg);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->datasets.size(), 2u);
}

TEST(CipReconstruct, FullHistogramPinsTheDataset) {
  Rng rng(14);
  SchemaPtr s = Tiny3();
  Dataset d = testing::RandomDataset(rng, s, 7);
  QueryRelease rel = Release(AllCellQueries(*s), d);
  auto rec = CipReconstruct(rel, s, 5, nullptr, 1, NoClock());
  ASSERT_TRUE(rec.ok());
  ASSERT_EQ(rec->datasets.size(), 5u);
  for (const Dataset& x : rec->datasets) EXPECT_TRUE(x.SameMultiset(d));
}

TEST(CipReconstruct, AuxHintIsUsedWhenConsistent) {
  Rng rng(15);
  SchemaPtr s = Tiny3();
  Dataset d = testing::RandomDataset(rng, s, 6);
  // Aux with the same histogram, scaled by two.
  std::vector<Record> twice(d.records().begin(), d.records().end());
  twice.insert(twice.end(), d.records().begin(), d.records().end());
  Dataset aux(s, twice);
  QueryRelease rel = Release(*MakeMarginalQueries(*s, {}, 1), d);
  auto rec = CipReconstruct(rel, s, 3, &aux, 2, NoClock());
  ASSERT_TRUE(rec.ok());
  for (const Dataset& x : rec->datasets) EXPECT_TRUE(x.SameMultiset(d));
}

TEST(CipReconstruct, InfeasibleReleaseIsDiagnosed) {
  SchemaPtr s = Tiny3();
  QueryRelease rel;
  rel.queries = {AggregateQuery::Total(*s)};
  rel.answers = {3};
  rel.dataset_size = 2;
  auto rec = CipReconstruct(rel, s, 3, nullptr, 2, NoClock());
  ASSERT_TRUE(rec.ok());
  EXPECT_TRUE(rec->datasets.empty());
  EXPECT_FALSE(rec->diagnostics.empty());
}

ReconstructionSet Recon(SchemaPtr s, std::vector<std::vector<Record>> sets) {
  ReconstructionSet r;
  for (auto& v : sets) r.datasets.emplace_back(s, v);
  return r;
}

TEST(LNeighborhood, PartitionsAllRecords) {
  Rng rng(16);
  SchemaPtr s = Tiny3();
  ReconstructionSet r;
  for (int k = 0; k < 4; ++k) r.datasets.push_back(testing::RandomDataset(rng, s, 9));
  const PartialRecord t{{1, 0}};
  size_t total = 0;
  for (size_t l = 0; l <= 2; ++l) {
    for (const Record& rec : LNeighborhood(t, r, l)) {
      size_t dist = 0;
      for (size_t i = 0; i < 2; ++i) dist += rec.values[i] != t.values[i];
      EXPECT_EQ(dist, l);
      ++total;
    }
  }
  EXPECT_EQ(total, 36u);
}

TEST(AiaVote, SmallestNeighborhoodWins) {
  SchemaPtr s = Tiny3();
  TargetUser t{PartialRecord{{0, 0}}, "0-0"};
  // No exact copies; the 1-neighborhood votes 1 twice, 0 once.
  ReconstructionSet r = Recon(s, {{Record{{1, 0, 1}}, Record{{2, 1, 0}}},
                                  {Record{{0, 1, 1}}, Record{{0, 1, 0}}}});
  Vote v = AiaVote(t, r, 2, 1);
  EXPECT_EQ(v.value, 1);
  EXPECT_NEAR(v.score, 2.0 / 3.0, 1e-12);
  // An exact copy takes precedence.
  r.datasets.push_back(Dataset(s, {Record{{0, 0, 0}}}));
  v = AiaVote(t, r, 2, 1);
  EXPECT_EQ(v.value, 0);
  EXPECT_EQ(v.score, 0.0);
}

TEST(AiaVote, TiesAreBrokenUniformly) {
  SchemaPtr s = Tiny3();
  TargetUser t{PartialRecord{{0, 0}}, "0-0"};
  ReconstructionSet r = Recon(s, {{Record{{0, 0, 0}}}, {Record{{0, 0, 1}}}});
  int ones = 0;
  for (uint64_t seed = 0; seed < 2000; ++seed) {
    Vote v = AiaVote(t, r, 2, seed);
    EXPECT_EQ(v.score, 0.5);
    ones += v.value;
  }
  EXPECT_NEAR(ones / 2000.0, 0.5, 0.03);
  Vote empty = AiaVote(t, ReconstructionSet{}, 2, 4);
  EXPECT_EQ(empty.score, 0.5);
}

TEST(MiaVote, MajorityAndScore) {
  SchemaPtr s = Tiny3();
  Record target{{2, 1, 1}};
  ReconstructionSet r = Recon(s, {{target, target}, {Record{{0, 0, 0}}}, {target}});
  Vote v = MiaVote(target, r);
  EXPECT_EQ(v.value, 1);
  EXPECT_NEAR(v.score, 2.0 / 3.0, 1e-12);
  r.datasets.push_back(Dataset(s, {}));
  v = MiaVote(target, r);
  EXPECT_EQ(v.value, 0);  // 2 of 4 is not a majority
  EXPECT_EQ(v.score, 0.5);
}

TEST(Likelihood, VotesForTheCloserGaussian) {
  SchemaPtr s = Tiny3();
  TargetUser t{PartialRecord{{0, 0}}, "0-0"};
  QueryRelease rel;
  AggregateQuery q1 = AggregateQuery::Total(*s);
  q1.subsets[2] = ValueSet({1}, 2);
  AggregateQuery q2 = q1;
  q2.subsets[0] = ValueSet({2}, 3);  // excludes the target
  AggregateQuery q3 = AggregateQuery::Total(*s);  // ignores the sensitive value
  rel.queries = {q1, q2, q3};
  rel.answers = {6, 0, 10};
  rel.dataset_size = 10;
  ShadowBatch batch;
  batch.features = FeatureMatrix(4, 3);
  batch.labels = {0, 0, 1, 1};
  const double f1[4] = {4, 5, 6, 7};
  for (size_t i = 0; i < 4; ++i) {
    batch.features.at(i, 0) = f1[i];
    batch.features.at(i, 1) = 9;
    batch.features.at(i, 2) = 10;
  }
  Vote v = LikelihoodAttack(rel, t, batch, 2, 1);
  EXPECT_EQ(v.value, 1);
  EXPECT_EQ(v.score, 1.0);
  rel.answers[0] = 4;
  v = LikelihoodAttack(rel, t, batch, 2, 1);
  EXPECT_EQ(v.value, 0);
  EXPECT_EQ(v.score, 0.0);
}

TEST(ReconstructionSet, SaveLoadRoundTrip) {
  Rng rng(17);
  SchemaPtr s = Tiny3();
  ReconstructionSet r;
  r.method = "cip-rand";
  for (int k = 0; k < 3; ++k) {
    r.datasets.push_back(testing::RandomDataset(rng, s, 5));
    r.seeds.push_back(100 + k);
  }
  const std::string dir =
      (std::filesystem::temp_directory_path() / "desia_recon_test").string();
  std::filesystem::remove_all(dir);
  ASSERT_TRUE(SaveReconstructionSet(dir, r).ok());
  auto back = LoadReconstructionSet(dir, s);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->method, "cip-rand");
  EXPECT_EQ(back->seeds, r.seeds);
  ASSERT_EQ(back->datasets.size(), 3u);
  for (size_t k = 0; k < 3; ++k) {
    EXPECT_TRUE(back->datasets[k].SameMultiset(r.datasets[k]));
  }
  EXPECT_FALSE(LoadReconstructionSet(dir + "/missing", s).ok());
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace desia
