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

#include "run_config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "desia/random.h"

namespace desia::cli {
namespace {

std::string Unquote(std::string v) {
  v = std::string(absl::StripAsciiWhitespace(v));
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') &&
      v.back() == v.front()) {
    v = v.substr(1, v.size() - 2);
  }
  return v;
}

absl::Status Bad(const std::string& key, const std::string& value,
                 const std::string& what) {
  return absl::InvalidArgumentError(
      absl::StrCat(key, ": '", value, "' is not ", what));
}

absl::StatusOr<double> ParseDouble(const std::string& key, const std::string& v) {
  const std::string t = absl::AsciiStrToLower(v);
  if (t == "inf" || t == "infinity") return kNoNoise;
  double d = 0;
  if (!absl::SimpleAtod(v, &d)) return Bad(key, v, "a number");
  return d;
}

absl::StatusOr<uint64_t> ParseCount(const std::string& key, const std::string& v) {
  uint64_t n = 0;
  if (!absl::SimpleAtoi(v, &n)) return Bad(key, v, "a non-negative integer");
  return n;
}

absl::StatusOr<bool> ParseBool(const std::string& key, const std::string& v) {
  const std::string t = absl::AsciiStrToLower(v);
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  return Bad(key, v, "a boolean");
}

std::string Join(const std::string& dir, const std::string& name) {
  return dir + "/" + name;
}

}  // namespace

std::string RunConfig::PrivatePath() const {
  return private_path.empty() ? Join(out, "private.csv") : private_path;
}
std::string RunConfig::AuxPath() const {
  return aux_path.empty() ? Join(out, "aux.csv") : aux_path;
}
std::string RunConfig::PoolPath() const {
  return pool_path.empty() ? Join(out, "queries.json") : pool_path;
}
std::string RunConfig::ReleaseDir() const { return Join(out, "release"); }
std::string RunConfig::AttackDir() const {
  std::string name(AttackMethodName(game_cfg.method));
  if (game_cfg.method == AttackMethod::kDesia) {
    name = DesiaMethodName(game_cfg.desia);
  }
  return Join(out, absl::StrCat("attack/", game, "-", name));
}

uint64_t RunConfig::DataSeed() const { return DeriveSeed({seed, 0}); }
uint64_t RunConfig::SplitSeed() const { return DeriveSeed({seed, 3}); }
uint64_t RunConfig::TargetSeed() const { return DeriveSeed({seed, 4}); }

absl::StatusOr<std::vector<double>> ParseNumberList(const std::string& text) {
  std::vector<double> out;
  for (absl::string_view part : absl::StrSplit(text, ',', absl::SkipWhitespace())) {
    const std::string item(absl::StripAsciiWhitespace(part));
    auto d = ParseDouble("list", item);
    if (!d.ok()) return d.status();
    out.push_back(*d);
  }
  return out;
}

absl::Status SetOption(RunConfig& cfg, const std::string& key,
                       const std::string& raw) {
  const std::string v = Unquote(raw);
  GameConfig& g = cfg.game_cfg;
  DesiaConfig& d = g.desia;

  auto count = [&](auto& field) -> absl::Status {
    auto n = ParseCount(key, v);
    if (!n.ok()) return n.status();
    field = static_cast<std::remove_reference_t<decltype(field)>>(*n);
    return absl::OkStatus();
  };
  auto real = [&](double& field) -> absl::Status {
    auto x = ParseDouble(key, v);
    if (!x.ok()) return x.status();
    field = *x;
    return absl::OkStatus();
  };
  auto flag = [&](bool& field) -> absl::Status {
    auto b = ParseBool(key, v);
    if (!b.ok()) return b.status();
    field = *b;
    return absl::OkStatus();
  };
  auto list = [&](std::vector<double>& field) -> absl::Status {
    auto l = ParseNumberList(v);
    if (!l.ok()) return Bad(key, v, "a list of numbers");
    field = *std::move(l);
    return absl::OkStatus();
  };

  if (key == "run.seed") return count(cfg.seed);
  if (key == "run.out") { cfg.out = v; return absl::OkStatus(); }
  if (key == "run.workers") return count(cfg.workers);
  if (key == "data.schema") { cfg.schema_path = v; return absl::OkStatus(); }
  if (key == "data.size") return count(cfg.dataset_size);
  if (key == "data.dataset") { cfg.dataset_path = v; return absl::OkStatus(); }
  if (key == "data.private") { cfg.private_path = v; return absl::OkStatus(); }
  if (key == "data.aux") { cfg.aux_path = v; return absl::OkStatus(); }
  if (key == "queries.spec") { cfg.query_spec = v; return absl::OkStatus(); }
  if (key == "queries.max_way") return count(cfg.max_way);
  if (key == "queries.pool") { cfg.pool_path = v; return absl::OkStatus(); }
  if (key == "game.kind") {
    if (v != "aia" && v != "mia") return Bad(key, v, "'aia' or 'mia'");
    cfg.game = v;
    return absl::OkStatus();
  }
  if (key == "game.method") {
    auto m = ParseAttackMethod(v);
    if (!m.ok()) return m.status();
    g.method = *m;
    return absl::OkStatus();
  }
  if (key == "game.ratio") {
    if (v.empty()) { g.query_ratio.reset(); return absl::OkStatus(); }
    double r = 0;
    if (absl::Status st = real(r); !st.ok()) return st;
    if (r < 0) return Bad(key, v, "a ratio >= 0");
    g.query_ratio = r;
    return absl::OkStatus();
  }
  if (key == "game.num_queries") {
    if (v.empty()) { g.num_queries.reset(); return absl::OkStatus(); }
    size_t m = 0;
    if (absl::Status st = count(m); !st.ok()) return st;
    g.num_queries = m;
    return absl::OkStatus();
  }
  if (key == "game.epsilon") {
    if (v.empty()) { g.epsilon.reset(); return absl::OkStatus(); }
    double e = 0;
    if (absl::Status st = real(e); !st.ok()) return st;
    if (!(e > 0)) return Bad(key, v, "a positive epsilon");
    g.epsilon = e;
    return absl::OkStatus();
  }
  if (key == "game.targets") return count(g.target_cap);
  if (key == "game.reconstructions") return count(g.num_reconstructions);
  if (key == "desia.finder") {
    if (v == "solver") d.finder = FeasibleValueFinder::kSolver;
    else if (v == "synthetic") d.finder = FeasibleValueFinder::kSynthetic;
    else return Bad(key, v, "'solver' or 'synthetic'");
    return absl::OkStatus();
  }
  if (key == "desia.uniqueness") return flag(d.uniqueness_constraint);
  if (key == "desia.verification") return flag(d.verification);
  if (key == "desia.stochastic") return flag(d.stochastic_module);
  if (key == "desia.shadows") return count(d.num_shadows);
  if (key == "desia.lambda_grid") return list(d.lambda_grid);
  if (key == "desia.max_nodes") return count(d.limits.max_nodes);
  if (key == "desia.max_seconds") return real(d.limits.max_seconds);
  if (key == "desia.max_iterations") return count(d.logistic.max_iterations);
  if (key == "desia.gradient_tolerance") return real(d.logistic.gradient_tolerance);
  if (key == "rap.iterations") return count(d.rap.iterations);
  if (key == "rap.step_size") return real(d.rap.step_size);
  if (key == "rap.init_noise") return real(d.rap.init_noise);
  if (key == "rap.init_logit_gap") return real(d.rap.init_logit_gap);
  if (key == "rap.sample_hardening") return flag(d.rap.sample_hardening);
  if (key == "sweep.axis") {
    if (v != "ratio" && v != "epsilon") return Bad(key, v, "'ratio' or 'epsilon'");
    cfg.sweep_axis = v;
    return absl::OkStatus();
  }
  if (key == "sweep.ratios") return list(cfg.ratios);
  if (key == "sweep.epsilons") return list(cfg.epsilons);
  if (key == "sweep.repeats") return count(cfg.repeats);
  if (key == "report.ks") return list(cfg.ks);
  return absl::InvalidArgumentError(absl::StrCat("unknown option '", key, "'"));
}

absl::StatusOr<RunConfig> LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat(path, ": cannot open config"));
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": ", e.what()));
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": key '", section, "' outside a section"));
    }
    for (const auto& [key, value] : body) {
      // Trailing comments are allowed after values.
      std::string v = value.data();
      if (const size_t hash = v.find(" #"); hash != std::string::npos) v.resize(hash);
      absl::Status st = SetOption(cfg, section + "." + key, v);
      if (!st.ok()) {
        return absl::InvalidArgumentError(absl::StrCat(path, ": ", st.message()));
      }
    }
  }
  return cfg;
}

nlohmann::json RunConfigToJson(const RunConfig& cfg) {
  auto numbers = [](const std::vector<double>& xs) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : xs) a.push_back(std::isinf(x) ? nlohmann::json("inf") : nlohmann::json(x));
    return a;
  };
  return {{"seed", cfg.seed},
          {"out", cfg.out},
          {"data",
           {{"schema", cfg.schema_path},
            {"size", cfg.dataset_size},
            {"dataset", cfg.dataset_path},
            {"private", cfg.PrivatePath()},
            {"aux", cfg.AuxPath()}}},
          {"queries",
           {{"spec", cfg.query_spec}, {"max_way", cfg.max_way}, {"pool", cfg.PoolPath()}}},
          {"game", cfg.game},
          {"game_config", GameConfigToJson(cfg.game_cfg)},
          {"sweep",
           {{"axis", cfg.sweep_axis},
            {"ratios", numbers(cfg.ratios)},
            {"epsilons", numbers(cfg.epsilons)},
            {"repeats", cfg.repeats}}},
          {"report", {{"ks", numbers(cfg.ks)}}}};
}

std::string ConfigHash(const RunConfig& cfg) {
  return HashHex(Fnv1a64(RunConfigToJson(cfg).dump()));
}

}  // namespace desia::cli
