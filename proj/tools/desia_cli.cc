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

// desia: data generation, query building, release, attack, sweeps and
// reports. Exit codes: 0 ok, 1 usage or configuration error, 2 runtime
// failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "desia/aggregates.h"
#include "desia/core_model.h"
#include "desia/harness.h"
#include "desia/metrics.h"
#include "run_config.h"

namespace desia::cli {
namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct Flags {
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::string> ratio;
  std::optional<std::string> epsilon;
  std::optional<size_t> targets;
  std::optional<size_t> workers;
  std::optional<std::string> out;
  std::vector<std::string> set;
  std::string input;
};

// Separates configuration mistakes (exit 1) from failures while running.
struct Failure {
  int code;
  std::string message;
};

Failure Usage(std::string msg) { return {kUsageError, std::move(msg)}; }
Failure Runtime(const absl::Status& st) {
  return {kRuntimeError, std::string(st.message())};
}

std::optional<Failure> RequireFile(const std::string& what, const std::string& path) {
  if (path.empty()) return Usage(absl::StrCat("no ", what, " path configured"));
  if (!std::filesystem::exists(path)) {
    return Usage(absl::StrCat(what, " not found: ", path));
  }
  return std::nullopt;
}

class Tool {
 public:
  Tool(RunConfig cfg, std::string command)
      : cfg_(std::move(cfg)), command_(std::move(command)) {
    cfg_.game_cfg.game_seed = DeriveSeed({cfg_.seed, 1});
    cfg_.game_cfg.attack_seed = DeriveSeed({cfg_.seed, 2});
    cfg_.game_cfg.workers = cfg_.workers;
  }

  std::optional<Failure> Run(const std::string& input) {
    if (command_ == "gen-data") return GenData();
    if (command_ == "make-queries") return MakeQueries();
    if (command_ == "release") return DoRelease();
    if (command_ == "attack") return Attack();
    if (command_ == "sweep") return Sweep();
    if (command_ == "report") return DoReport(input);
    return Usage(absl::StrCat("unknown command ", command_));
  }

 private:
  std::string Header() const {
    return absl::StrCat("desia ", DESIA_VERSION, " command=", command_,
                        " config=", ConfigHash(cfg_), " seed=", cfg_.seed);
  }

  nlohmann::json Meta() const {
    return {{"tool", "desia"},
            {"version", DESIA_VERSION},
            {"command", command_},
            {"config_hash", ConfigHash(cfg_)},
            {"seed", cfg_.seed},
            {"config", RunConfigToJson(cfg_)}};
  }

  std::optional<Failure> LoadSchema() {
    if (auto f = RequireFile("schema", cfg_.schema_path)) return f;
    auto s = AttributeSchema::LoadJson(cfg_.schema_path);
    if (!s.ok()) return Usage(absl::StrCat(cfg_.schema_path, ": ", s.status().message()));
    schema_ = *s;
    return std::nullopt;
  }

  std::optional<Failure> LoadData(const std::string& what, const std::string& path,
                                  std::optional<Dataset>& into) {
    if (auto f = RequireFile(what, path)) return f;
    auto d = LoadDatasetCsv(path, schema_);
    if (!d.ok()) return Usage(absl::StrCat(path, ": ", d.status().message()));
    into = *std::move(d);
    return std::nullopt;
  }

  std::optional<Failure> LoadPool() {
    const std::string path = cfg_.PoolPath();
    if (auto f = RequireFile("query pool", path)) return f;
    auto qs = LoadQuerySpec(path, *schema_);
    if (!qs.ok()) return Usage(std::string(qs.status().message()));
    pool_ = *std::move(qs);
    return std::nullopt;
  }

  std::optional<Failure> Write(const std::string& path, const std::string& text) {
    std::error_code ec;
    std::filesystem::create_directories(std::filesystem::path(path).parent_path(), ec);
    std::ofstream out(path);
    out << text;
    if (!out) return Runtime(absl::DataLossError(absl::StrCat("cannot write ", path)));
    return std::nullopt;
  }

  std::optional<Failure> SaveCsv(const std::string& path, const Dataset& d) {
    std::error_code ec;
    std::filesystem::create_directories(std::filesystem::path(path).parent_path(), ec);
    absl::Status st = SaveDatasetCsv(path, d, Header());
    if (!st.ok()) return Runtime(st);
    return std::nullopt;
  }

  std::optional<Failure> GenData() {
    if (auto f = LoadSchema()) return f;
    std::optional<Dataset> full;
    if (!cfg_.dataset_path.empty()) {
      if (auto f = LoadData("dataset", cfg_.dataset_path, full)) return f;
    } else {
      auto d = GenerateSynthetic(schema_, cfg_.dataset_size, cfg_.DataSeed());
      if (!d.ok()) return Runtime(d.status());
      full = *std::move(d);
      if (auto f = SaveCsv(cfg_.out + "/data.csv", *full)) return f;
    }
    auto [priv, aux] = SplitForGame(*full, cfg_.SplitSeed());
    if (auto f = SaveCsv(cfg_.PrivatePath(), priv)) return f;
    if (auto f = SaveCsv(cfg_.AuxPath(), aux)) return f;
    std::cout << "private " << priv.size() << " records -> " << cfg_.PrivatePath()
              << "\naux " << aux.size() << " records -> " << cfg_.AuxPath() << "\n";
    return std::nullopt;
  }

  std::optional<Failure> MakeQueries() {
    if (auto f = LoadSchema()) return f;
    std::vector<AggregateQuery> pool;
    if (!cfg_.query_spec.empty()) {
      if (auto f = RequireFile("query spec", cfg_.query_spec)) return f;
      auto qs = LoadQuerySpec(cfg_.query_spec, *schema_);
      if (!qs.ok()) return Usage(std::string(qs.status().message()));
      pool = *std::move(qs);
    } else {
      std::vector<size_t> attrs;
      for (size_t i = 0; i < schema_->num_attributes(); ++i) attrs.push_back(i);
      const size_t top = std::min(cfg_.max_way, attrs.size());
      for (size_t k = 1; k <= top; ++k) {
        auto qs = MakeMarginalQueries(*schema_, attrs, k, {});
        if (!qs.ok()) return Usage(std::string(qs.status().message()));
        pool.insert(pool.end(), qs->begin(), qs->end());
      }
    }
    nlohmann::json j = QuerySpecToJson(pool, *schema_);
    j["meta"] = Meta();
    if (auto f = Write(cfg_.PoolPath(), j.dump(1) + "\n")) return f;
    std::cout << pool.size() << " queries -> " << cfg_.PoolPath() << "\n";
    return std::nullopt;
  }

  std::optional<Failure> DoRelease() {
    if (cfg_.game != "aia") {
      return Usage("the membership game releases per target; run 'attack' directly");
    }
    if (auto f = LoadSchema()) return f;
    std::optional<Dataset> priv;
    if (auto f = LoadData("private dataset", cfg_.PrivatePath(), priv)) return f;
    if (auto f = LoadPool()) return f;
    if (auto st = ResolveQueryCount(cfg_.game_cfg, priv->size(), pool_.size()); !st.ok()) {
      return Usage(std::string(st.status().message()));
    }
    auto setup = PrepareAiaGame(*priv, pool_, cfg_.game_cfg);
    if (!setup.ok()) return Runtime(setup.status());
    setup->metadata["tool"] = Meta();
    if (absl::Status st = SaveAiaSetup(cfg_.ReleaseDir(), *setup, *schema_); !st.ok()) {
      return Runtime(st);
    }
    std::cout << setup->release.queries.size() << " answers, "
              << setup->targets.size() << " targets -> " << cfg_.ReleaseDir() << "\n";
    return std::nullopt;
  }

  std::optional<Failure> Attack() {
    if (auto f = LoadSchema()) return f;
    std::optional<Dataset> aux;
    if (auto f = LoadData("auxiliary dataset", cfg_.AuxPath(), aux)) return f;
    absl::StatusOr<GameRun> run;
    if (cfg_.game == "aia") {
      const std::string dir = cfg_.ReleaseDir();
      if (auto f = RequireFile("release", dir + "/release.json")) return f;
      auto setup = LoadAiaSetup(dir, *schema_);
      if (!setup.ok()) return Usage(std::string(setup.status().message()));
      run = AttackAiaGame(*setup, schema_, *aux, cfg_.game_cfg);
    } else {
      std::optional<Dataset> priv;
      if (auto f = LoadData("private dataset", cfg_.PrivatePath(), priv)) return f;
      if (auto f = LoadPool()) return f;
      const std::vector<Record> targets =
          SelectMiaTargets(*priv, cfg_.game_cfg.target_cap, cfg_.TargetSeed());
      run = RunMiaGame(*priv, *aux, pool_, cfg_.game_cfg, targets);
    }
    if (!run.ok()) return Runtime(run.status());
    run->metadata["tool"] = Meta();
    if (absl::Status st = SaveGameRun(cfg_.AttackDir(), *run, Header()); !st.ok()) {
      return Runtime(st);
    }
    for (const std::string& w : run->warnings) std::cerr << "warning: " << w << "\n";
    std::cout << run->results.size() << " results -> " << cfg_.AttackDir() << "\n";
    return std::nullopt;
  }

  std::optional<Failure> Sweep() {
    if (cfg_.game != "aia") return Usage("sweeps run the attribute game only");
    if (auto f = LoadSchema()) return f;
    std::optional<Dataset> priv, aux;
    if (auto f = LoadData("private dataset", cfg_.PrivatePath(), priv)) return f;
    if (auto f = LoadData("auxiliary dataset", cfg_.AuxPath(), aux)) return f;
    if (auto f = LoadPool()) return f;
    const bool by_ratio = cfg_.sweep_axis == "ratio";
    for (double r : cfg_.ratios) {
      if (by_ratio && std::llround(r * priv->size()) > static_cast<long long>(pool_.size())) {
        return Usage(absl::StrCat("ratio ", r, " needs more than the ",
                                  pool_.size(), " pooled queries"));
      }
    }
    auto runs = by_ratio
                    ? SweepQueryRatio(*priv, *aux, pool_, cfg_.ratios, cfg_.game_cfg)
                    : SweepNoise(*priv, *aux, pool_, cfg_.epsilons, cfg_.repeats,
                                 cfg_.game_cfg);
    if (!runs.ok()) return Runtime(runs.status());
    const std::string root = cfg_.out + "/sweep/" + cfg_.sweep_axis;
    nlohmann::json rows = nlohmann::json::array();
    std::map<std::string, std::pair<double, size_t>> mean_auc;
    for (GameRun& run : *runs) {
      const nlohmann::json value = by_ratio ? run.metadata["ratio"] : run.metadata["epsilon"];
      std::string label = value.is_string() ? value.get<std::string>() : value.dump();
      if (!by_ratio) label += absl::StrCat("_r", run.metadata["repeat"].get<size_t>());
      run.metadata["tool"] = Meta();
      const std::string dir = root + "/" + label;
      if (absl::Status st = SaveGameRun(dir, run, Header()); !st.ok()) return Runtime(st);
      const Report rep = Summarize(run.results, cfg_.ks);
      nlohmann::json row = {{cfg_.sweep_axis, value},
                            {"dir", dir},
                            {"accuracy", rep.overall.accuracy},
                            {"deterministic_coverage", rep.overall.deterministic_coverage},
                            {"auc", rep.overall.auc ? nlohmann::json(*rep.overall.auc)
                                                    : nlohmann::json(nullptr)}};
      rows.push_back(row);
      if (rep.overall.auc) {
        auto& [sum, n] = mean_auc[value.dump()];
        sum += *rep.overall.auc;
        ++n;
      }
    }
    nlohmann::json means = nlohmann::json::object();
    for (const auto& [k, v] : mean_auc) means[k] = v.first / v.second;
    nlohmann::json summary = {{"meta", Meta()}, {"runs", rows}, {"mean_auc", means}};
    if (auto f = Write(root + "/sweep.json", summary.dump(2) + "\n")) return f;
    std::cout << runs->size() << " runs -> " << root << "\n";
    for (const auto& [k, v] : mean_auc) {
      std::cout << cfg_.sweep_axis << "=" << k << " mean_auc=" << v.first / v.second << "\n";
    }
    return std::nullopt;
  }

  std::optional<Failure> DoReport(const std::string& input) {
    std::string path = input.empty() ? cfg_.AttackDir() : input;
    if (std::filesystem::is_directory(path)) path += "/results.jsonl";
    if (auto f = RequireFile("results", path)) return f;
    std::ifstream in(path);
    auto results = ReadResultsJsonl(in);
    if (!results.ok()) return Usage(absl::StrCat(path, ": ", results.status().message()));
    for (double k : cfg_.ks) {
      if (!(k > 0 && k < 1)) return Usage(absl::StrCat("report k must lie in (0,1), got ", k));
    }
    const Report rep = Summarize(*results, cfg_.ks);
    nlohmann::json j = ReportToJson(rep);
    j["meta"] = Meta();
    j["meta"]["input"] = path;
    const std::string dir = cfg_.out + "/report";
    if (auto f = Write(dir + "/report.json", j.dump(2) + "\n")) return f;
    if (rep.overall.roc) {
      std::ostringstream roc;
      WriteRocCsv(roc, *rep.overall.roc, Header());
      if (auto f = Write(dir + "/roc.csv", roc.str())) return f;
    }
    for (const std::string& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "targets=" << rep.overall.count << " accuracy=" << rep.overall.accuracy;
    if (rep.overall.auc) std::cout << " auc=" << *rep.overall.auc;
    for (const auto& [k, tpr] : rep.overall.tpr_at_fpr) std::cout << " tpr@" << k << "=" << tpr;
    std::cout << " deterministic=" << rep.overall.deterministic_coverage << " -> " << dir
              << "\n";
    return std::nullopt;
  }

  RunConfig cfg_;
  std::string command_;
  SchemaPtr schema_;
  std::vector<AggregateQuery> pool_;
};

void AddCommon(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "Experiment manifest (TOML-style sections)");
  sub->add_option("--seed", f.seed, "Master seed");
  sub->add_option("--method", f.method,
                  "desia | cip-rand | cip-init | rap-rand | rap-init | likelihood | random");
  sub->add_option("--ratio", f.ratio, "Released queries over dataset size");
  sub->add_option("--epsilon", f.epsilon, "Laplace noise parameter (inf = exact)");
  sub->add_option("--targets", f.targets, "Maximum number of attacked targets");
  sub->add_option("--workers", f.workers, "Worker threads");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--set", f.set, "Override: section.key=value (repeatable)");
}

int Main(int argc, char** argv) {
  CLI::App app{"Inference attacks against fixed aggregate releases"};
  app.set_version_flag("--version", std::string(DESIA_VERSION));
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-data", "Generate (or split) a dataset into private and auxiliary parts"},
      {"make-queries", "Build the query pool"},
      {"release", "Randomize, pick targets and publish the release"},
      {"attack", "Attack every target of the release"},
      {"sweep", "Repeat the game over query ratios or noise levels"},
      {"report", "AUC, TPR at low FPR and accuracy from a results file"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    AddCommon(sub, flags);
    if (name == "report") sub->add_option("input", flags.input, "results.jsonl or run dir");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  if (!flags.config.empty()) {
    auto loaded = LoadRunConfig(flags.config);
    if (!loaded.ok()) {
      std::cerr << "error: " << loaded.status().message() << "\n";
      return kUsageError;
    }
    cfg = *std::move(loaded);
  }
  std::vector<std::pair<std::string, std::string>> overrides;
  if (flags.seed) overrides.emplace_back("run.seed", std::to_string(*flags.seed));
  if (flags.method) overrides.emplace_back("game.method", *flags.method);
  if (flags.ratio) overrides.emplace_back("game.ratio", *flags.ratio);
  if (flags.epsilon) overrides.emplace_back("game.epsilon", *flags.epsilon);
  if (flags.targets) overrides.emplace_back("game.targets", std::to_string(*flags.targets));
  if (flags.workers) overrides.emplace_back("run.workers", std::to_string(*flags.workers));
  if (flags.out) overrides.emplace_back("run.out", *flags.out);
  for (const std::string& kv : flags.set) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --set expects section.key=value, got '" << kv << "'\n";
      return kUsageError;
    }
    overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [key, value] : overrides) {
    if (absl::Status st = SetOption(cfg, key, value); !st.ok()) {
      std::cerr << "error: " << st.message() << "\n";
      return kUsageError;
    }
  }
  // An explicit epsilon of inf means an exact release.
  if (cfg.game_cfg.epsilon && std::isinf(*cfg.game_cfg.epsilon)) cfg.game_cfg.epsilon.reset();

  Tool tool(std::move(cfg), command);
  if (std::optional<Failure> f = tool.Run(flags.input)) {
    std::cerr << "error: " << f->message << "\n";
    return f->code;
  }
  return 0;
}

}  // namespace
}  // namespace desia::cli

int main(int argc, char** argv) { return desia::cli::Main(argc, argv); }
