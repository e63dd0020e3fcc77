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

#include "desia/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "desia/baselines.h"

namespace desia {
namespace {

constexpr uint64_t kStreamRandomize = 1;
constexpr uint64_t kStreamQueries = 2;
constexpr uint64_t kStreamNoise = 3;
constexpr uint64_t kStreamTargets = 4;
constexpr uint64_t kStreamMembership = 5;
constexpr uint64_t kStreamReconstruct = 6;

const char* FinderName(FeasibleValueFinder f) {
  return f == FeasibleValueFinder::kSolver ? "solver" : "synthetic";
}

uint64_t TargetSeed(uint64_t attack_seed, std::string_view id) {
  return DeriveSeed({attack_seed, Fnv1a64(id)});
}

absl::StatusOr<std::vector<AggregateQuery>> PickQueries(
    std::span<const AggregateQuery> pool, const GameConfig& cfg, size_t s) {
  auto m = ResolveQueryCount(cfg, s, pool.size());
  if (!m.ok()) return m.status();
  if (!cfg.num_queries && !cfg.query_ratio) {
    return std::vector<AggregateQuery>(pool.begin(), pool.end());
  }
  return SampleQueries(pool, *m, DeriveSeed({cfg.game_seed, kStreamQueries,
                                             cfg.query_stream}));
}

absl::StatusOr<QueryRelease> MaybeNoise(QueryRelease rel, const GameConfig& cfg,
                                        uint64_t extra) {
  if (!cfg.epsilon || std::isinf(*cfg.epsilon)) return rel;
  return AddLaplaceNoise(rel, *cfg.epsilon,
                         DeriveSeed({cfg.game_seed, kStreamNoise,
                                     cfg.noise_stream, extra}));
}

absl::StatusOr<std::optional<ReconstructionSet>> Reconstruct(
    const GameConfig& cfg, const QueryRelease& rel, SchemaPtr schema,
    const Dataset& aux, uint64_t seed) {
  const size_t k = cfg.num_reconstructions;
  absl::StatusOr<ReconstructionSet> recon;
  switch (cfg.method) {
    case AttackMethod::kCipRand:
      recon = CipReconstruct(rel, schema, k, nullptr, seed, cfg.desia.limits);
      break;
    case AttackMethod::kCipInit:
      recon = CipReconstruct(rel, schema, k, &aux, seed, cfg.desia.limits);
      break;
    case AttackMethod::kRapRand:
      recon = RapReconstruct(rel, schema, k, nullptr, seed, cfg.desia.rap);
      break;
    case AttackMethod::kRapInit:
      recon = RapReconstruct(rel, schema, k, &aux, seed, cfg.desia.rap);
      break;
    default:
      return std::optional<ReconstructionSet>();
  }
  if (!recon.ok()) return recon.status();
  return std::optional<ReconstructionSet>(*std::move(recon));
}

std::string ReleaseHash(const QueryRelease& rel, const AttributeSchema& schema) {
  return HashHex(Fnv1a64(ReleaseToJson(rel, schema).dump()));
}

}  // namespace

std::string_view AttackMethodName(AttackMethod m) {
  switch (m) {
    case AttackMethod::kDesia:
      return "desia";
    case AttackMethod::kCipRand:
      return "cip-rand";
    case AttackMethod::kCipInit:
      return "cip-init";
    case AttackMethod::kRapRand:
      return "rap-rand";
    case AttackMethod::kRapInit:
      return "rap-init";
    case AttackMethod::kLikelihood:
      return "likelihood";
    case AttackMethod::kRandom:
      return "random";
  }
  return "?";
}

absl::StatusOr<AttackMethod> ParseAttackMethod(std::string_view name) {
  for (AttackMethod m :
       {AttackMethod::kDesia, AttackMethod::kCipRand, AttackMethod::kCipInit,
        AttackMethod::kRapRand, AttackMethod::kRapInit, AttackMethod::kLikelihood,
        AttackMethod::kRandom}) {
    if (AttackMethodName(m) == name) return m;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown attack method '", std::string(name), "'"));
}

nlohmann::json GameConfigToJson(const GameConfig& cfg) {
  nlohmann::json j;
  j["method"] = AttackMethodName(cfg.method);
  j["num_queries"] = cfg.num_queries ? nlohmann::json(*cfg.num_queries) : nullptr;
  j["query_ratio"] = cfg.query_ratio ? nlohmann::json(*cfg.query_ratio) : nullptr;
  j["epsilon"] = cfg.epsilon && std::isfinite(*cfg.epsilon)
                     ? nlohmann::json(*cfg.epsilon)
                     : nullptr;
  j["game_seed"] = cfg.game_seed;
  j["attack_seed"] = cfg.attack_seed;
  j["query_stream"] = cfg.query_stream;
  j["noise_stream"] = cfg.noise_stream;
  j["num_reconstructions"] = cfg.num_reconstructions;
  j["target_cap"] = cfg.target_cap;
  const DesiaConfig& d = cfg.desia;
  j["desia"] = {
      {"finder", FinderName(d.finder)},
      {"uniqueness_constraint", d.uniqueness_constraint},
      {"verification", d.verification},
      {"stochastic_module", d.stochastic_module},
      {"num_shadows", d.num_shadows},
      {"lambda_grid", d.lambda_grid},
      {"max_nodes", d.limits.max_nodes},
      {"max_seconds", d.limits.max_seconds},
      {"max_iterations", d.logistic.max_iterations},
      {"gradient_tolerance", d.logistic.gradient_tolerance},
      {"rap",
       {{"iterations", d.rap.iterations},
        {"step_size", d.rap.step_size},
        {"init_noise", d.rap.init_noise},
        {"init_logit_gap", d.rap.init_logit_gap},
        {"sample_hardening", d.rap.sample_hardening}}}};
  return j;
}

absl::StatusOr<size_t> ResolveQueryCount(const GameConfig& cfg, size_t s,
                                         size_t available) {
  size_t m = available;
  if (cfg.num_queries) {
    m = *cfg.num_queries;
  } else if (cfg.query_ratio) {
    if (*cfg.query_ratio < 0 || !std::isfinite(*cfg.query_ratio)) {
      return absl::InvalidArgumentError("query ratio must be >= 0");
    }
    m = static_cast<size_t>(std::llround(*cfg.query_ratio * static_cast<double>(s)));
  }
  if (m > available) {
    return absl::InvalidArgumentError(absl::StrCat(
        "m = ", m, " exceeds the ", available, " available queries"));
  }
  return m;
}

absl::Status ParallelFor(size_t n, size_t workers,
                         const std::function<absl::Status(size_t)>& fn) {
  std::vector<absl::Status> status(n);
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < n; i = next++) status[i] = fn(i);
  };
  const size_t threads = std::min(std::max<size_t>(workers, 1), std::max<size_t>(n, 1));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  for (const absl::Status& st : status) {
    if (!st.ok()) return st;
  }
  return absl::OkStatus();
}

std::pair<Dataset, Dataset> SplitForGame(const Dataset& d, uint64_t seed) {
  return SplitPrivateAux(d, 0.1, seed);
}

std::string DatasetHash(const Dataset& d) {
  std::ostringstream out;
  WriteDatasetCsv(out, d);
  return HashHex(Fnv1a64(out.str()));
}

absl::StatusOr<AiaGameSetup> PrepareAiaGame(const Dataset& d_private,
                                            std::span<const AggregateQuery> queries,
                                            const GameConfig& cfg,
                                            const PostReleaseHook& hook) {
  SchemaPtr schema = d_private.schema_ptr();
  AiaGameSetup setup;

  // Step 1: randomize the sensitive attribute, pick unique targets.
  Dataset protected_data =
      RandomizeSensitive(d_private, DeriveSeed({cfg.game_seed, kStreamRandomize}));
  std::vector<TargetUser> targets = FindUniqueTargets(protected_data);
  const size_t num_unique = targets.size();
  if (targets.size() > cfg.target_cap) {
    std::vector<uint32_t> idx(targets.size()), chosen;
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(DeriveSeed({cfg.game_seed, kStreamTargets}));
    rng.SampleWithoutReplacement(idx, cfg.target_cap, chosen);
    std::sort(chosen.begin(), chosen.end());
    for (uint32_t i : chosen) setup.targets.push_back(targets[i]);
  } else {
    setup.targets = std::move(targets);
  }
  // Step 2: record the truth.
  std::map<PartialRecord, Code> sensitive_of;
  for (const Record& r : protected_data.records()) {
    sensitive_of[Project(r)] = r.values.back();
  }
  for (const TargetUser& t : setup.targets) {
    setup.truth.push_back(sensitive_of.at(t.partial));
  }

  // Step 3: release.
  auto picked = PickQueries(queries, cfg, protected_data.size());
  if (!picked.ok()) return picked.status();
  auto rel = MaybeNoise(Release(*picked, protected_data), cfg, 0);
  if (!rel.ok()) return rel.status();
  setup.release = *std::move(rel);
  if (hook) hook(protected_data);

  setup.metadata = {{"game", "aia"},
                    {"sensitive_randomization", "one draw shared by all targets"},
                    {"schema_hash", HashHex(schema->Hash())},
                    {"private_hash", DatasetHash(d_private)},
                    {"release_hash", ReleaseHash(setup.release, *schema)},
                    {"dataset_size", protected_data.size()},
                    {"num_queries", setup.release.queries.size()},
                    {"num_unique_targets", num_unique},
                    {"num_targets", setup.targets.size()}};
  if (setup.targets.empty()) {
    setup.warnings.push_back("no unique targets in the protected dataset");
  }
  return setup;
}

absl::StatusOr<GameRun> AttackAiaGame(const AiaGameSetup& setup, SchemaPtr schema,
                                      const Dataset& d_aux, const GameConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (schema->Hash() != d_aux.schema().Hash()) {
    return absl::InvalidArgumentError("release and auxiliary schemas differ");
  }
  const QueryRelease& rel = setup.release;
  const std::vector<TargetUser>& targets = setup.targets;
  GameRun run;
  run.metadata = setup.metadata;
  run.metadata["config"] = GameConfigToJson(cfg);
  run.metadata["aux_hash"] = DatasetHash(d_aux);
  run.warnings = setup.warnings;

  const AttackerView view{&rel, schema, &d_aux};
  auto recon = Reconstruct(cfg, rel, schema, d_aux,
                           DeriveSeed({cfg.attack_seed, kStreamReconstruct}));
  if (!recon.ok()) return recon.status();
  if (*recon) {
    for (const std::string& w : (*recon)->diagnostics) run.warnings.push_back(w);
    if ((*recon)->datasets.empty()) {
      run.warnings.push_back("no reconstruction succeeded; votes fall back to guessing");
    }
  }
  DesiaSharedState shared;
  if (cfg.method == AttackMethod::kDesia) {
    auto prepared = PrepareDesiaShared(view, cfg.desia,
                                       DeriveSeed({cfg.attack_seed, kStreamReconstruct}));
    if (!prepared.ok()) return prepared.status();
    shared = *std::move(prepared);
  }
  const int vn = schema->sensitive_domain_size();
  run.results.resize(targets.size());
  absl::Status st = ParallelFor(targets.size(), cfg.workers, [&](size_t i) {
    const TargetUser& t = targets[i];
    const uint64_t tseed = TargetSeed(cfg.attack_seed, t.id);
    AttackResult r;
    r.target = t.id;
    r.method = std::string(AttackMethodName(cfg.method));
    switch (cfg.method) {
      case AttackMethod::kDesia: {
        auto res = DesiaAttack(view, t, cfg.desia, tseed, &shared);
        if (!res.ok()) return res.status();
        r = *std::move(res);
        break;
      }
      case AttackMethod::kCipRand:
      case AttackMethod::kCipInit:
      case AttackMethod::kRapRand:
      case AttackMethod::kRapInit: {
        const Vote v = AiaVote(t, **recon, vn, tseed);
        r.prediction = v.value;
        r.score = v.score;
        break;
      }
      case AttackMethod::kLikelihood: {
        auto batch = SampleShadowDatasetsAia(
            d_aux, t, rel.queries, static_cast<size_t>(rel.dataset_size),
            cfg.desia.num_shadows, DeriveSeed({tseed, 4}));
        if (!batch.ok()) return batch.status();
        const Vote v = LikelihoodAttack(rel, t, *batch, vn, DeriveSeed({tseed, 5}));
        r.prediction = v.value;
        r.score = v.score;
        break;
      }
      case AttackMethod::kRandom: {
        Rng rng(tseed);
        r.prediction = static_cast<Code>(rng.UniformInt(vn));
        r.score = 0.5;
        break;
      }
    }
    r.truth = setup.truth[i];
    run.results[i] = std::move(r);
    return absl::OkStatus();
  });
  if (!st.ok()) return st;
  run.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  return run;
}

absl::StatusOr<GameRun> RunAiaGame(const Dataset& d_private, const Dataset& d_aux,
                                   std::span<const AggregateQuery> queries,
                                   const GameConfig& cfg,
                                   const PostReleaseHook& hook) {
  const auto start = std::chrono::steady_clock::now();
  if (d_private.schema().Hash() != d_aux.schema().Hash()) {
    return absl::InvalidArgumentError("private and auxiliary schemas differ");
  }
  auto setup = PrepareAiaGame(d_private, queries, cfg, hook);
  if (!setup.ok()) return setup.status();
  auto run = AttackAiaGame(*setup, d_private.schema_ptr(), d_aux, cfg);
  if (!run.ok()) return run.status();
  run->wall_seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return run;
}

absl::Status SaveAiaSetup(const std::string& dir, const AiaGameSetup& setup,
                          const AttributeSchema& schema) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return absl::UnavailableError(absl::StrCat("cannot create ", dir));
  nlohmann::json rel = ReleaseToJson(setup.release, schema);
  rel["meta"] = setup.metadata;
  rel["meta"]["warnings"] = setup.warnings;
  std::ofstream out(dir + "/release.json");
  out << rel.dump(2) << "\n";
  std::ofstream tout(dir + "/targets.jsonl");
  for (size_t i = 0; i < setup.targets.size(); ++i) {
    nlohmann::json t = {{"id", setup.targets[i].id},
                        {"partial", setup.targets[i].partial.values},
                        {"truth", setup.truth[i]}};
    tout << t.dump() << "\n";
  }
  if (!out || !tout) return absl::DataLossError(absl::StrCat("cannot write ", dir));
  return absl::OkStatus();
}

absl::StatusOr<AiaGameSetup> LoadAiaSetup(const std::string& dir,
                                          const AttributeSchema& schema) {
  AiaGameSetup setup;
  std::ifstream in(dir + "/release.json");
  if (!in) return absl::NotFoundError(absl::StrCat("no release.json in ", dir));
  std::ifstream tin(dir + "/targets.jsonl");
  if (!tin) return absl::NotFoundError(absl::StrCat("no targets.jsonl in ", dir));
  try {
    nlohmann::json j;
    in >> j;
    auto rel = ReleaseFromJson(j, schema);
    if (!rel.ok()) return rel.status();
    setup.release = *std::move(rel);
    if (j.contains("meta")) {
      setup.metadata = j["meta"];
      setup.warnings = setup.metadata.value("warnings", std::vector<std::string>{});
      setup.metadata.erase("warnings");
    }
    std::string line;
    while (std::getline(tin, line)) {
      if (line.empty()) continue;
      const nlohmann::json t = nlohmann::json::parse(line);
      TargetUser u;
      u.id = t.at("id").get<std::string>();
      u.partial.values = t.at("partial").get<std::vector<Code>>();
      if (!schema.IsValid(u.partial)) {
        return absl::InvalidArgumentError(
            absl::StrCat("target ", u.id, " does not fit the schema"));
      }
      setup.targets.push_back(std::move(u));
      setup.truth.push_back(t.at("truth").get<Code>());
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed game files in ", dir, ": ", e.what()));
  }
  return setup;
}

std::vector<Record> SelectMiaTargets(const Dataset& d, size_t cap,
                                     uint64_t seed) {
  std::vector<Record> distinct(d.records().begin(), d.records().end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() <= cap) return distinct;
  std::vector<uint32_t> idx(distinct.size()), chosen;
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.SampleWithoutReplacement(idx, cap, chosen);
  std::sort(chosen.begin(), chosen.end());
  std::vector<Record> out;
  for (uint32_t i : chosen) out.push_back(distinct[i]);
  return out;
}

absl::StatusOr<GameRun> RunMiaGame(const Dataset& d_private, const Dataset& d_aux,
                                   std::span<const AggregateQuery> queries,
                                   const GameConfig& cfg,
                                   std::span<const Record> targets) {
  const auto start = std::chrono::steady_clock::now();
  const size_t s = d_private.size();
  if (s < 2) return absl::InvalidArgumentError("membership game needs s >= 2");
  if (cfg.method == AttackMethod::kLikelihood) {
    return absl::InvalidArgumentError("the likelihood attack is attribute-only");
  }
  SchemaPtr schema = d_private.schema_ptr();
  std::vector<size_t> position(targets.size());
  for (size_t i = 0; i < targets.size(); ++i) {
    auto it = std::find(d_private.records().begin(), d_private.records().end(),
                        targets[i]);
    if (it == d_private.records().end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("target ", i, " is not in the protected dataset"));
    }
    position[i] = it - d_private.records().begin();
  }
  auto picked = PickQueries(queries, cfg, s - 1);
  if (!picked.ok()) return picked.status();

  GameRun run;
  run.metadata = {{"game", "mia"},
                  {"config", GameConfigToJson(cfg)},
                  {"schema_hash", HashHex(schema->Hash())},
                  {"private_hash", DatasetHash(d_private)},
                  {"aux_hash", DatasetHash(d_aux)},
                  {"dataset_size", s - 1},
                  {"num_queries", picked->size()},
                  {"num_targets", targets.size()}};
  run.results.resize(targets.size());
  std::vector<std::vector<std::string>> notes(targets.size());
  absl::Status st = ParallelFor(targets.size(), cfg.workers, [&](size_t i) {
    const Record& target = targets[i];
    Rng rng(DeriveSeed({cfg.game_seed, kStreamMembership, i}));
    const Code b = rng.Bernoulli(0.5) ? 1 : 0;
    size_t removed = position[i];
    if (b == 1) {
      removed = rng.UniformInt(s - 1);
      if (removed >= position[i]) ++removed;
    }
    std::vector<Record> kept;
    kept.reserve(s - 1);
    for (size_t j = 0; j < s; ++j) {
      if (j != removed) kept.push_back(d_private.record(j));
    }
    const Dataset released_from(schema, std::move(kept));
    auto rel = MaybeNoise(Release(*picked, released_from), cfg, i);
    if (!rel.ok()) return rel.status();

    std::vector<std::string> parts;
    for (Code c : target.values) parts.push_back(absl::StrCat(c));
    const std::string id = absl::StrCat(i, ":", absl::StrJoin(parts, "-"));
    const uint64_t tseed = TargetSeed(cfg.attack_seed, id);
    const AttackerView view{&*rel, schema, &d_aux};
    AttackResult r;
    r.method = std::string(AttackMethodName(cfg.method)) + "-mia";
    switch (cfg.method) {
      case AttackMethod::kDesia: {
        auto res = DesiaAttackMia(view, target, cfg.desia, tseed);
        if (!res.ok()) return res.status();
        r = *std::move(res);
        break;
      }
      case AttackMethod::kRandom:
        r.prediction = static_cast<Code>(Rng(tseed).UniformInt(2));
        r.score = 0.5;
        break;
      default: {
        auto recon = Reconstruct(cfg, *rel, schema, d_aux,
                                 DeriveSeed({tseed, kStreamReconstruct}));
        if (!recon.ok()) return recon.status();
        notes[i] = (*recon)->diagnostics;
        const Vote v = MiaVote(target, **recon);
        r.prediction = v.value;
        r.score = v.score;
        break;
      }
    }
    r.target = id;
    r.truth = b;
    run.results[i] = std::move(r);
    return absl::OkStatus();
  });
  if (!st.ok()) return st;
  for (size_t i = 0; i < notes.size(); ++i) {
    for (const std::string& n : notes[i]) {
      run.warnings.push_back(absl::StrCat("target ", i, ": ", n));
    }
  }
  run.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  return run;
}

absl::StatusOr<std::vector<GameRun>> SweepQueryRatio(
    const Dataset& d_private, const Dataset& d_aux,
    std::span<const AggregateQuery> queries, std::span<const double> ratios,
    const GameConfig& cfg) {
  std::vector<GameRun> runs;
  for (size_t k = 0; k < ratios.size(); ++k) {
    GameConfig c = cfg;
    c.num_queries.reset();
    c.query_ratio = ratios[k];
    c.query_stream = DeriveSeed({cfg.query_stream, k});
    auto run = RunAiaGame(d_private, d_aux, queries, c);
    if (!run.ok()) return run.status();
    run->metadata["ratio"] = ratios[k];
    runs.push_back(*std::move(run));
  }
  return runs;
}

absl::StatusOr<std::vector<GameRun>> SweepNoise(
    const Dataset& d_private, const Dataset& d_aux,
    std::span<const AggregateQuery> queries, std::span<const double> epsilons,
    size_t repeats, const GameConfig& cfg) {
  if (repeats < 1) return absl::InvalidArgumentError("repeats must be >= 1");
  std::vector<GameRun> runs;
  for (double eps : epsilons) {
    if (!(eps > 0)) {
      return absl::InvalidArgumentError("epsilon must be > 0");
    }
    const size_t n = std::isinf(eps) ? 1 : repeats;
    for (size_t r = 0; r < n; ++r) {
      GameConfig c = cfg;
      c.epsilon = eps;
      c.noise_stream = DeriveSeed({cfg.noise_stream, r});
      auto run = RunAiaGame(d_private, d_aux, queries, c);
      if (!run.ok()) return run.status();
      run->metadata["epsilon"] = std::isinf(eps) ? nlohmann::json("inf")
                                                 : nlohmann::json(eps);
      run->metadata["repeat"] = r;
      runs.push_back(*std::move(run));
    }
  }
  return runs;
}

absl::Status SaveGameRun(const std::string& dir, const GameRun& run,
                         std::string_view header) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return absl::UnavailableError(absl::StrCat("cannot create ", dir));
  {
    std::ofstream out(dir + "/results.jsonl");
    if (!header.empty()) out << "# " << header << "\n";
    WriteResultsJsonl(out, run.results);
    if (!out) return absl::DataLossError(absl::StrCat("cannot write ", dir));
  }
  nlohmann::json meta = run.metadata;
  meta["warnings"] = run.warnings;
  meta["wall_seconds"] = run.wall_seconds;
  std::ofstream out(dir + "/meta.json");
  out << meta.dump(2) << "\n";
  if (!out) return absl::DataLossError(absl::StrCat("cannot write ", dir));
  return absl::OkStatus();
}

absl::StatusOr<GameRun> LoadGameRun(const std::string& dir) {
  std::ifstream in(dir + "/results.jsonl");
  if (!in) return absl::NotFoundError(absl::StrCat("no results in ", dir));
  auto results = ReadResultsJsonl(in);
  if (!results.ok()) return results.status();
  GameRun run;
  run.results = *std::move(results);
  std::ifstream meta_in(dir + "/meta.json");
  if (meta_in) {
    try {
      meta_in >> run.metadata;
    } catch (const nlohmann::json::exception& e) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed meta.json: ", e.what()));
    }
    run.wall_seconds = run.metadata.value("wall_seconds", 0.0);
    run.warnings = run.metadata.value("warnings", std::vector<std::string>{});
    run.metadata.erase("wall_seconds");
    run.metadata.erase("warnings");
  }
  return run;
}

}  // namespace desia
