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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "desia/desia.h"
#include "json.hpp"

namespace desia {

absl::StatusOr<ReconstructionSet> CipReconstruct(const QueryRelease& rel,
                                                 SchemaPtr schema, size_t k,
                                                 const Dataset* aux,
                                                 uint64_t seed,
                                                 SolveLimits limits) {
  if (k < 1) return absl::InvalidArgumentError("K must be >= 1");
  auto built = BuildProblem(rel, schema);
  if (!built.ok()) return built.status();
  FeasibilityProblem p = TightenDomains(*built, rel);

  ReconstructionSet out;
  out.method = aux != nullptr ? "cip-init" : "cip-rand";
  for (const std::string& w : p.warnings) out.diagnostics.push_back(w);

  std::optional<Assignment> hint;
  if (aux != nullptr && !aux->empty()) {
    const std::vector<uint32_t> counts = aux->CellCounts();
    const double scale = static_cast<double>(rel.dataset_size) /
                         static_cast<double>(aux->size());
    hint.emplace();
    hint->values.resize(counts.size());
    for (size_t v = 0; v < counts.size(); ++v) {
      const int64_t scaled =
          static_cast<int64_t>(std::floor(counts[v] * scale + 0.5));
      hint->values[v] = std::clamp(scaled, p.lower[v], std::max(p.lower[v], p.upper[v]));
    }
  }
  Enumeration e = EnumerateSolutions(p, k, seed, hint ? &*hint : nullptr, limits);
  for (size_t i = 0; i < e.solutions.size(); ++i) {
    out.datasets.push_back(AssignmentToDataset(e.solutions[i], schema));
  }
  for (size_t i = 0; i < k; ++i) out.seeds.push_back(DeriveSeed({seed, i}));
  if (e.infeasible > 0) {
    out.diagnostics.push_back("release constraints are infeasible");
  }
  if (e.unknown > 0) {
    out.diagnostics.push_back(
        absl::StrCat(e.unknown, " solve(s) hit the search limits"));
  }
  return out;
}

SoftDataset SoftDataset::Uniform(SchemaPtr schema, size_t rows) {
  SoftDataset s;
  s.schema = std::move(schema);
  s.rows = rows;
  for (size_t i = 0; i < s.schema->num_attributes(); ++i) {
    s.offsets.push_back(s.row_width);
    s.row_width += s.schema->domain_size(i);
  }
  s.logits.assign(rows * s.row_width, 0.0);
  return s;
}

SoftDataset SoftDataset::OneHot(const Dataset& d, double gap) {
  SoftDataset s = Uniform(d.schema_ptr(), d.size());
  for (size_t r = 0; r < d.size(); ++r) {
    double* row = s.logits.data() + r * s.row_width;
    for (size_t i = 0; i < s.offsets.size(); ++i) {
      for (int v = 0; v < d.schema().domain_size(i); ++v) {
        row[s.offsets[i] + v] = v == d.record(r).values[i] ? 0.0 : -gap;
      }
    }
  }
  return s;
}

std::vector<double> SoftDataset::Probabilities() const {
  std::vector<double> p(logits.size());
  const size_t n = offsets.size();
  for (size_t r = 0; r < rows; ++r) {
    for (size_t i = 0; i < n; ++i) {
      const size_t start = r * row_width + offsets[i];
      const size_t len = schema->domain_size(i);
      double mx = -std::numeric_limits<double>::infinity();
      for (size_t v = 0; v < len; ++v) mx = std::max(mx, logits[start + v]);
      double total = 0;
      for (size_t v = 0; v < len; ++v) {
        p[start + v] = std::exp(logits[start + v] - mx);
        total += p[start + v];
      }
      for (size_t v = 0; v < len; ++v) p[start + v] /= total;
    }
  }
  return p;
}

Dataset SoftDataset::Harden() const {
  std::vector<Record> records(rows);
  const size_t n = offsets.size();
  for (size_t r = 0; r < rows; ++r) {
    records[r].values.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const double* l = logits.data() + r * row_width + offsets[i];
      records[r].values[i] = static_cast<Code>(
          std::max_element(l, l + schema->domain_size(i)) - l);
    }
  }
  return Dataset(schema, std::move(records));
}

Dataset SoftDataset::Sample(Rng& rng) const {
  const std::vector<double> p = Probabilities();
  std::vector<Record> records(rows);
  const size_t n = offsets.size();
  for (size_t r = 0; r < rows; ++r) {
    records[r].values.resize(n);
    for (size_t i = 0; i < n; ++i) {
      records[r].values[i] = static_cast<Code>(rng.Categorical(
          {p.data() + r * row_width + offsets[i],
           static_cast<size_t>(schema->domain_size(i))}));
    }
  }
  return Dataset(schema, std::move(records));
}

namespace {

// Conditioned attributes of one query (full-domain attributes contribute a
// factor of exactly 1 and are skipped).
struct QueryTerms {
  std::vector<size_t> attrs;
  std::vector<const std::vector<Code>*> codes;
};

std::vector<QueryTerms> CollectTerms(std::span<const AggregateQuery> queries) {
  std::vector<QueryTerms> out(queries.size());
  for (size_t k = 0; k < queries.size(); ++k) {
    for (size_t i = 0; i < queries[k].subsets.size(); ++i) {
      if (queries[k].subsets[i].full()) continue;
      out[k].attrs.push_back(i);
      out[k].codes.push_back(&queries[k].subsets[i].codes());
    }
  }
  return out;
}

}  // namespace

double RapRelaxedEval(const SoftDataset& soft, const AggregateQuery& q) {
  const std::vector<double> p = soft.Probabilities();
  double total = 0;
  for (size_t r = 0; r < soft.rows; ++r) {
    double prod = 1;
    for (size_t i = 0; i < q.subsets.size(); ++i) {
      if (q.subsets[i].full()) continue;
      double mass = 0;
      for (Code v : q.subsets[i].codes()) {
        mass += p[r * soft.row_width + soft.offsets[i] + v];
      }
      prod *= mass;
    }
    total += prod;
  }
  return total;
}

double RapLoss(const SoftDataset& soft, std::span<const AggregateQuery> queries,
               std::span<const double> targets, std::vector<double>* grad) {
  const std::vector<double> p = soft.Probabilities();
  const std::vector<QueryTerms> terms = CollectTerms(queries);
  const size_t m = queries.size();
  std::vector<double> relaxed(m, 0.0);
  auto mass = [&](size_t r, size_t attr, const std::vector<Code>& codes) {
    double s = 0;
    const double* row = p.data() + r * soft.row_width + soft.offsets[attr];
    for (Code v : codes) s += row[v];
    return s;
  };
  for (size_t r = 0; r < soft.rows; ++r) {
    for (size_t k = 0; k < m; ++k) {
      double prod = 1;
      for (size_t t = 0; t < terms[k].attrs.size(); ++t) {
        prod *= mass(r, terms[k].attrs[t], *terms[k].codes[t]);
      }
      relaxed[k] += prod;
    }
  }
  double loss = 0;
  std::vector<double> resid(m);
  for (size_t k = 0; k < m; ++k) {
    resid[k] = relaxed[k] - targets[k];
    loss += resid[k] * resid[k];
  }
  if (grad == nullptr) return loss;

  grad->assign(soft.logits.size(), 0.0);
  std::vector<double> g_prob(soft.row_width);
  std::vector<double> masses, prefix, suffix;
  const size_t n = soft.offsets.size();
  for (size_t r = 0; r < soft.rows; ++r) {
    std::fill(g_prob.begin(), g_prob.end(), 0.0);
    for (size_t k = 0; k < m; ++k) {
      const size_t c = terms[k].attrs.size();
      if (c == 0 || resid[k] == 0) continue;
      masses.resize(c);
      for (size_t t = 0; t < c; ++t) {
        masses[t] = mass(r, terms[k].attrs[t], *terms[k].codes[t]);
      }
      // d(prod)/d(mass_t) = product of the other masses.
      prefix.assign(c + 1, 1.0);
      suffix.assign(c + 1, 1.0);
      for (size_t t = 0; t < c; ++t) prefix[t + 1] = prefix[t] * masses[t];
      for (size_t t = c; t-- > 0;) suffix[t] = suffix[t + 1] * masses[t];
      for (size_t t = 0; t < c; ++t) {
        const double coef = 2.0 * resid[k] * prefix[t] * suffix[t + 1];
        double* gp = g_prob.data() + soft.offsets[terms[k].attrs[t]];
        for (Code v : *terms[k].codes[t]) gp[v] += coef;
      }
    }
    // Chain rule through the per-attribute softmax.
    for (size_t i = 0; i < n; ++i) {
      const size_t len = soft.schema->domain_size(i);
      const double* pr = p.data() + r * soft.row_width + soft.offsets[i];
      const double* gp = g_prob.data() + soft.offsets[i];
      double dot = 0;
      for (size_t v = 0; v < len; ++v) dot += pr[v] * gp[v];
      double* out = grad->data() + r * soft.row_width + soft.offsets[i];
      for (size_t v = 0; v < len; ++v) out[v] = pr[v] * (gp[v] - dot);
    }
  }
  return loss;
}

absl::StatusOr<RapRun> RapOptimize(const QueryRelease& rel, SoftDataset init,
                                   const RapConfig& config, uint64_t seed,
                                   const std::vector<char>& frozen) {
  if (!frozen.empty() && frozen.size() != init.logits.size()) {
    return absl::InvalidArgumentError("frozen mask does not match the logits");
  }
  std::vector<double> targets(rel.answers.begin(), rel.answers.end());
  RapRun run{std::move(init), Dataset(nullptr, {}), {}};
  SoftDataset& soft = run.soft;
  std::vector<double> grad, cand_grad;
  double loss = RapLoss(soft, rel.queries, targets, &grad);
  if (!std::isfinite(loss)) {
    return absl::InternalError("non-finite RAP loss at initialization");
  }
  run.loss_history.push_back(loss);
  double step = config.step_size;
  SoftDataset cand = soft;
  for (int it = 0; it < config.iterations && loss > 0; ++it) {
    for (size_t j = 0; j < soft.logits.size(); ++j) {
      cand.logits[j] = (!frozen.empty() && frozen[j])
                           ? soft.logits[j]
                           : soft.logits[j] - step * grad[j];
    }
    const double cand_loss = RapLoss(cand, rel.queries, targets, &cand_grad);
    if (std::isnan(cand_loss)) {
      return absl::InternalError(
          absl::StrCat("non-finite RAP loss at iteration ", it));
    }
    if (cand_loss <= loss) {
      std::swap(soft.logits, cand.logits);
      std::swap(grad, cand_grad);
      loss = cand_loss;
    } else {
      step *= 0.5;
    }
    run.loss_history.push_back(loss);
  }
  if (config.sample_hardening) {
    Rng rng(DeriveSeed({seed, 0x68617264ULL}));
    run.hardened = soft.Sample(rng);
  } else {
    run.hardened = soft.Harden();
  }
  return run;
}

absl::StatusOr<ReconstructionSet> RapReconstruct(const QueryRelease& rel,
                                                 SchemaPtr schema, size_t k,
                                                 const Dataset* aux,
                                                 uint64_t seed,
                                                 const RapConfig& config) {
  if (k < 1) return absl::InvalidArgumentError("K must be >= 1");
  const size_t s = static_cast<size_t>(std::max<int64_t>(rel.dataset_size, 0));
  const bool use_aux = aux != nullptr && !aux->empty();
  ReconstructionSet out;
  out.method = use_aux ? "rap-init" : "rap-rand";
  for (size_t run_idx = 0; run_idx < k; ++run_idx) {
    const uint64_t run_seed = DeriveSeed({seed, run_idx});
    out.seeds.push_back(run_seed);
    Rng rng(run_seed);
    SoftDataset init;
    if (use_aux) {
      std::vector<Record> picked;
      if (aux->size() >= s) {
        std::vector<uint32_t> idx(aux->size()), chosen;
        std::iota(idx.begin(), idx.end(), 0);
        rng.SampleWithoutReplacement(idx, s, chosen);
        for (uint32_t i : chosen) picked.push_back(aux->record(i));
      } else {
        for (size_t i = 0; i < s; ++i) {
          picked.push_back(aux->record(rng.UniformInt(aux->size())));
        }
      }
      init = SoftDataset::OneHot(Dataset(schema, std::move(picked)),
                                 config.init_logit_gap);
    } else {
      init = SoftDataset::Uniform(schema, s);
      for (double& l : init.logits) l = config.init_noise * rng.Normal();
    }
    auto run = RapOptimize(rel, std::move(init), config, run_seed);
    if (!run.ok()) {
      out.diagnostics.push_back(
          absl::StrCat("run ", run_idx, ": ", run.status().message()));
      continue;
    }
    out.datasets.push_back(std::move(run->hardened));
  }
  return out;
}

std::vector<Record> LNeighborhood(const PartialRecord& target,
                                  const ReconstructionSet& recon, size_t l) {
  std::vector<Record> out;
  for (const Dataset& d : recon.datasets) {
    for (const Record& r : d.records()) {
      size_t dist = 0;
      for (size_t i = 0; i < target.values.size(); ++i) {
        dist += r.values[i] != target.values[i];
      }
      if (dist == l) out.push_back(r);
    }
  }
  return out;
}

namespace {

Code PickAmongMax(const std::vector<size_t>& counts, Rng& rng) {
  const size_t best = *std::max_element(counts.begin(), counts.end());
  std::vector<Code> tied;
  for (size_t v = 0; v < counts.size(); ++v) {
    if (counts[v] == best) tied.push_back(static_cast<Code>(v));
  }
  return tied.size() == 1 ? tied[0] : tied[rng.UniformInt(tied.size())];
}

Vote RandomGuess(int domain, Rng& rng) {
  return {static_cast<Code>(rng.UniformInt(domain)), 0.5};
}

}  // namespace

Vote AiaVote(const TargetUser& target, const ReconstructionSet& recon,
             int sensitive_domain_size, uint64_t seed) {
  Rng rng(seed);
  const size_t n1 = target.partial.values.size();
  // counts[L][v]: records at distance L with sensitive value v.
  std::vector<std::vector<size_t>> counts(
      n1 + 1, std::vector<size_t>(sensitive_domain_size, 0));
  bool any = false;
  for (const Dataset& d : recon.datasets) {
    for (const Record& r : d.records()) {
      size_t dist = 0;
      for (size_t i = 0; i < n1; ++i) dist += r.values[i] != target.partial.values[i];
      ++counts[dist][r.values[n1]];
      any = true;
    }
  }
  if (!any) return RandomGuess(sensitive_domain_size, rng);
  for (const auto& c : counts) {
    const size_t total = std::accumulate(c.begin(), c.end(), size_t{0});
    if (total == 0) continue;
    Vote v;
    v.value = PickAmongMax(c, rng);
    v.score = sensitive_domain_size > 1
                  ? static_cast<double>(c[1]) / static_cast<double>(total)
                  : 0.0;
    return v;
  }
  return RandomGuess(sensitive_domain_size, rng);
}

Vote MiaVote(const Record& target, const ReconstructionSet& recon) {
  if (recon.datasets.empty()) return {0, 0.5};
  size_t hits = 0;
  for (const Dataset& d : recon.datasets) {
    hits += std::find(d.records().begin(), d.records().end(), target) !=
            d.records().end();
  }
  const double k = static_cast<double>(recon.datasets.size());
  return {static_cast<Code>(static_cast<double>(hits) > k / 2.0 ? 1 : 0),
          static_cast<double>(hits) / k};
}

Vote LikelihoodAttack(const QueryRelease& rel, const TargetUser& target,
                      const ShadowBatch& batch, int sensitive_domain_size,
                      uint64_t seed) {
  Rng rng(seed);
  std::vector<size_t> votes(sensitive_domain_size, 0);
  size_t cast = 0;
  const size_t rows = batch.features.rows;
  for (size_t k = 0; k < rel.queries.size(); ++k) {
    const AggregateQuery& q = rel.queries[k];
    if (!q.conditions_sensitive() || !CoversPartial(q, target.partial)) continue;
    const double x = static_cast<double>(rel.answers[k]);
    std::vector<double> score(sensitive_domain_size,
                              -std::numeric_limits<double>::infinity());
    for (int b = 0; b < sensitive_domain_size; ++b) {
      double sum = 0, sum2 = 0;
      size_t cnt = 0;
      for (size_t i = 0; i < rows; ++i) {
        if (batch.labels[i] != b) continue;
        const double f = batch.features.at(i, k);
        sum += f;
        sum2 += f * f;
        ++cnt;
      }
      if (cnt == 0) continue;
      const double mu = sum / static_cast<double>(cnt);
      const double var = std::max(0.0, sum2 / static_cast<double>(cnt) - mu * mu);
      const double sd = std::sqrt(var);
      if (sd < 1e-12) {
        // Point mass: infinite density on an exact match, zero otherwise.
        score[b] = std::abs(x - mu) < 1e-9
                       ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
      } else {
        const double z = (x - mu) / sd;
        score[b] = -std::log(sd) - 0.5 * z * z;
      }
    }
    const double best = *std::max_element(score.begin(), score.end());
    if (best == -std::numeric_limits<double>::infinity()) continue;
    size_t n_best = 0;
    Code arg = 0;
    for (int b = 0; b < sensitive_domain_size; ++b) {
      if (score[b] == best) {
        ++n_best;
        arg = b;
      }
    }
    // A query that cannot separate the groups abstains.
    if (n_best != 1) continue;
    ++votes[arg];
    ++cast;
  }
  if (cast == 0) return RandomGuess(sensitive_domain_size, rng);
  Vote v;
  v.value = PickAmongMax(votes, rng);
  v.score = sensitive_domain_size > 1
                ? static_cast<double>(votes[1]) / static_cast<double>(cast)
                : 0.0;
  return v;
}

absl::Status SaveReconstructionSet(const std::string& dir,
                                   const ReconstructionSet& recon) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return absl::UnavailableError(absl::StrCat("cannot create ", dir));
  for (size_t k = 0; k < recon.datasets.size(); ++k) {
    absl::Status st = SaveDatasetCsv(
        absl::StrCat(dir, "/dataset_", k, ".csv"), recon.datasets[k]);
    if (!st.ok()) return st;
  }
  nlohmann::json manifest = {{"method", recon.method},
                             {"count", recon.datasets.size()},
                             {"seeds", recon.seeds},
                             {"diagnostics", recon.diagnostics}};
  std::ofstream out(dir + "/manifest.json");
  out << manifest.dump(2) << "\n";
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("cannot write manifest in ", dir));
}

absl::StatusOr<ReconstructionSet> LoadReconstructionSet(const std::string& dir,
                                                        SchemaPtr schema) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) return absl::NotFoundError(absl::StrCat("no manifest in ", dir));
  ReconstructionSet recon;
  size_t count = 0;
  try {
    nlohmann::json m;
    in >> m;
    recon.method = m.at("method").get<std::string>();
    count = m.at("count").get<size_t>();
    recon.seeds = m.value("seeds", std::vector<uint64_t>{});
    recon.diagnostics = m.value("diagnostics", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed manifest: ", e.what()));
  }
  for (size_t k = 0; k < count; ++k) {
    auto d = LoadDatasetCsv(absl::StrCat(dir, "/dataset_", k, ".csv"), schema);
    if (!d.ok()) return d.status();
    recon.datasets.push_back(*std::move(d));
  }
  return recon;
}

}  // namespace desia
