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

// Python bindings: schemas, datasets, releases, the deterministic module,
// full games and the metrics.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "desia/aggregates.h"
#include "desia/core_model.h"
#include "desia/desia.h"
#include "desia/harness.h"
#include "desia/metrics.h"
#include "desia/solver.h"

namespace py = pybind11;

namespace desia {
namespace {

template <typename T>
T Unwrap(absl::StatusOr<T> v) {
  if (!v.ok()) {
    const std::string msg(v.status().message());
    if (absl::IsNotFound(v.status())) throw py::value_error("not found: " + msg);
    if (absl::IsInvalidArgument(v.status()) || absl::IsFailedPrecondition(v.status()) ||
        absl::IsOutOfRange(v.status())) {
      throw py::value_error(msg);
    }
    throw std::runtime_error(msg);
  }
  return *std::move(v);
}

std::vector<std::vector<Code>> Rows(const Dataset& d) {
  std::vector<std::vector<Code>> out;
  out.reserve(d.size());
  for (const Record& r : d.records()) out.push_back(r.values);
  return out;
}

py::dict ResultDict(const AttackResult& r) {
  py::dict d;
  d["target"] = r.target;
  d["method"] = r.method;
  d["prediction"] = r.prediction;
  d["score"] = r.score;
  d["deterministic"] = r.deterministic;
  d["truth"] = r.truth;
  return d;
}

GameConfig MakeConfig(const std::string& method, std::optional<double> ratio,
                      std::optional<double> epsilon, uint64_t seed, size_t targets,
                      size_t shadows, size_t reconstructions, uint64_t max_nodes,
                      size_t workers) {
  GameConfig cfg;
  cfg.method = Unwrap(ParseAttackMethod(method));
  cfg.query_ratio = ratio;
  cfg.epsilon = epsilon;
  cfg.game_seed = DeriveSeed({seed, 1});
  cfg.attack_seed = DeriveSeed({seed, 2});
  cfg.target_cap = targets;
  cfg.num_reconstructions = reconstructions;
  cfg.workers = workers;
  cfg.desia.num_shadows = shadows;
  cfg.desia.limits.max_nodes = max_nodes;
  cfg.desia.limits.max_seconds = 0;
  return cfg;
}

}  // namespace
}  // namespace desia

PYBIND11_MODULE(_desia, m) {
  using namespace desia;
  m.doc() = "Attribute and membership inference against aggregate releases";
  m.attr("__version__") = DESIA_VERSION;

  py::class_<AttributeSchema, std::shared_ptr<AttributeSchema>>(m, "Schema")
      .def_static(
          "load", [](const std::string& path) {
            return std::const_pointer_cast<AttributeSchema>(
                Unwrap(AttributeSchema::LoadJson(path)));
          },
          py::arg("path"))
      .def_static(
          "from_json", [](const std::string& text) {
            return std::const_pointer_cast<AttributeSchema>(
                Unwrap(AttributeSchema::FromJson(nlohmann::json::parse(text))));
          },
          py::arg("text"))
      .def_property_readonly("names", [](const AttributeSchema& s) {
        std::vector<std::string> out;
        for (size_t i = 0; i < s.num_attributes(); ++i) out.push_back(s.attribute(i).name);
        return out;
      })
      .def_property_readonly("domain_sizes", [](const AttributeSchema& s) {
        std::vector<int> out;
        for (size_t i = 0; i < s.num_attributes(); ++i) out.push_back(s.domain_size(i));
        return out;
      })
      .def_property_readonly("num_cells", &AttributeSchema::num_cells)
      .def("to_json", [](const AttributeSchema& s) { return s.ToJson().dump(); });

  // Datasets hold dense codes, sensitive attribute last.
  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](std::shared_ptr<AttributeSchema> s,
                       const std::vector<std::vector<Code>>& rows) {
             std::vector<Record> recs;
             for (const auto& r : rows) recs.push_back(Record{r});
             return Unwrap(Dataset::Create(s, std::move(recs)));
           }),
           py::arg("schema"), py::arg("rows"))
      .def_static(
          "load", [](const std::string& path, std::shared_ptr<AttributeSchema> s) {
            return Unwrap(LoadDatasetCsv(path, s));
          },
          py::arg("path"), py::arg("schema"))
      .def_static(
          "generate", [](std::shared_ptr<AttributeSchema> s, size_t n, uint64_t seed) {
            return Unwrap(GenerateSynthetic(s, n, seed));
          },
          py::arg("schema"), py::arg("size"), py::arg("seed"))
      .def("__len__", &Dataset::size)
      .def("rows", &Rows)
      .def("save", [](const Dataset& d, const std::string& path) {
        absl::Status st = SaveDatasetCsv(path, d);
        if (!st.ok()) throw std::runtime_error(std::string(st.message()));
      })
      .def("split", [](const Dataset& d, uint64_t seed) { return SplitForGame(d, seed); },
           py::arg("seed"));

  py::class_<AggregateQuery>(m, "Query")
      .def("to_json", [](const AggregateQuery& q, std::shared_ptr<AttributeSchema> s) {
        return QueryToJson(q, *s).dump();
      });

  m.def(
      "marginal_queries",
      [](std::shared_ptr<AttributeSchema> s, int max_way) {
        std::vector<AggregateQuery> pool;
        for (int k = 1; k <= max_way; ++k) {
          auto q = Unwrap(MakeMarginalQueries(*s, {}, k));
          pool.insert(pool.end(), q.begin(), q.end());
        }
        return pool;
      },
      py::arg("schema"), py::arg("max_way") = 3);
  m.def(
      "load_queries",
      [](const std::string& path, std::shared_ptr<AttributeSchema> s) {
        return Unwrap(LoadQuerySpec(path, *s));
      },
      py::arg("path"), py::arg("schema"));

  py::class_<QueryRelease>(m, "Release")
      .def_readonly("answers", &QueryRelease::answers)
      .def_readonly("dataset_size", &QueryRelease::dataset_size)
      .def_property_readonly("num_queries",
                             [](const QueryRelease& r) { return r.queries.size(); });
  m.def(
      "release",
      [](const std::vector<AggregateQuery>& qs, const Dataset& d) { return Release(qs, d); },
      py::arg("queries"), py::arg("dataset"));
  m.def(
      "add_laplace_noise",
      [](const QueryRelease& r, double epsilon, uint64_t seed) {
        return Unwrap(AddLaplaceNoise(r, epsilon, seed));
      },
      py::arg("release"), py::arg("epsilon"), py::arg("seed"));

  m.def(
      "deterministic_aia",
      [](const QueryRelease& rel, std::shared_ptr<AttributeSchema> s,
         const std::vector<Code>& partial, uint64_t max_nodes,
         uint64_t seed) -> std::optional<Code> {
        SolveLimits limits{max_nodes, 0};
        PartialRecord p{partial};
        return Unwrap(DeterministicAia(rel, s, TargetUser{p, TargetId(p)}, limits, seed)).value;
      },
      py::arg("release"), py::arg("schema"), py::arg("partial"),
      py::arg("max_nodes") = 1'000'000, py::arg("seed") = 0,
      "Sensitive value proven unique for the target, or None.");
  m.def(
      "deterministic_mia",
      [](const QueryRelease& rel, std::shared_ptr<AttributeSchema> s,
         const std::vector<Code>& record, uint64_t max_nodes,
         uint64_t seed) -> std::optional<Code> {
        SolveLimits limits{max_nodes, 0};
        return Unwrap(DeterministicMia(rel, s, Record{record}, limits, seed)).value;
      },
      py::arg("release"), py::arg("schema"), py::arg("record"),
      py::arg("max_nodes") = 1'000'000, py::arg("seed") = 0);

  m.def(
      "run_aia_game",
      [](const Dataset& priv, const Dataset& aux, const std::vector<AggregateQuery>& qs,
         const std::string& method, std::optional<double> ratio,
         std::optional<double> epsilon, uint64_t seed, size_t targets, size_t shadows,
         size_t reconstructions, uint64_t max_nodes, size_t workers) {
        GameConfig cfg = MakeConfig(method, ratio, epsilon, seed, targets, shadows,
                                    reconstructions, max_nodes, workers);
        GameRun run;
        {
          py::gil_scoped_release release;
          run = Unwrap(RunAiaGame(priv, aux, qs, cfg));
        }
        py::list out;
        for (const AttackResult& r : run.results) out.append(ResultDict(r));
        return out;
      },
      py::arg("private"), py::arg("aux"), py::arg("queries"), py::arg("method") = "desia",
      py::arg("ratio") = py::none(), py::arg("epsilon") = py::none(), py::arg("seed") = 0,
      py::arg("targets") = 200, py::arg("shadows") = 3000, py::arg("reconstructions") = 100,
      py::arg("max_nodes") = 200000, py::arg("workers") = 1);

  m.def(
      "auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return Auc(Unwrap(Roc(scores, labels)));
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "roc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        std::vector<std::tuple<double, double, double>> out;
        for (const RocPoint& p : Unwrap(Roc(scores, labels)).points) {
          out.emplace_back(p.fpr, p.tpr, p.threshold);
        }
        return out;
      },
      py::arg("scores"), py::arg("labels"), "(fpr, tpr, threshold) points.");
  m.def(
      "tpr_at_fpr",
      [](const std::vector<double>& scores, const std::vector<int>& labels, double k) {
        return Unwrap(TprAtFpr(Unwrap(Roc(scores, labels)), k));
      },
      py::arg("scores"), py::arg("labels"), py::arg("k"));
}
