// Copyright 2026 The Spanner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPANNER_REGISTRY_HPP_
#define SPANNER_REGISTRY_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spanner/combiner.hpp"
#include "spanner/corpus.hpp"
#include "spanner/eval.hpp"
#include "spanner/model.hpp"

namespace spanner {

enum class CombineMethod { kSpanner, kMajority, kWeightedOverall, kWeightedClass };

CombineMethod ParseCombineMethod(std::string_view name);
std::string_view CombineMethodName(CombineMethod method);

// Failures a client can fix; `code` is a stable machine-readable tag.
class RequestError : public Error {
 public:
  RequestError(std::string code, const std::string &what, int status = 400)
      : Error(what), code_(std::move(code)), status_(status) {}
  const std::string &code() const { return code_; }
  int status() const { return status_; }

 private:
  std::string code_;
  int status_;
};

struct CombineRequest {
  // Exactly one of `systems` and `interval` selects the systems.
  std::vector<std::string> systems;
  std::optional<RankInterval> interval;
  CombineMethod method = CombineMethod::kSpanner;
  bool include_spans = false;

  static CombineRequest FromJson(const nlohmann::json &j);
  nlohmann::json ToJson() const;
};

// Runs one combination method over systems given in rank order. `model` is
// required for the span-scorer combiner only.
CorpusSpans RunCombination(CombineMethod method,
                           std::span<const SystemOutput> ranked,
                           const Corpus &corpus, const TrainedModel *model);

nlohmann::json ReportToJson(const EvalReport &report);
nlohmann::json BucketsToJson(const std::vector<BucketReport> &reports);
nlohmann::json HeatmapToJson(const Heatmap &heatmap);

struct SystemEntry {
  std::string name;
  std::map<std::string, std::string> outputs;  // split -> path under root
  // Scores on the weight split.
  double overall_f1 = 0;
  double macro_f1 = 0;
  std::map<std::string, double> per_class_f1;
  int rank = 0;

  nlohmann::json ToJson() const;
  static SystemEntry FromJson(const nlohmann::json &j);
};

struct RegistrySetup {
  std::string train_path;
  std::string test_path;
  std::string dev_path;         // optional
  std::string checkpoint_path;  // optional
  ConllOptions conll;
  // Score and rank systems on the test split instead of dev.
  bool weights_from_test = false;
};

// A directory holding the corpora, an optional checkpoint, registered system
// outputs and a JSON manifest. Systems are ranked by descending F1 on the
// weight split (dev when available); combinations are scored on test.
class Registry {
 public:
  static Registry Create(const std::filesystem::path &root,
                         const RegistrySetup &setup);
  static Registry Open(const std::filesystem::path &root);

  const std::filesystem::path &root() const { return root_; }
  const std::vector<SystemEntry> &systems() const { return systems_; }
  const std::string &eval_split() const { return eval_split_; }
  const std::string &weight_split() const { return weight_split_; }
  std::vector<std::string> splits() const;
  const Corpus &corpus(const std::string &split) const;
  const Corpus &eval_corpus() const { return corpus(eval_split_); }
  const TrainStats &train_stats() const { return train_stats_; }
  const TrainedModel *model() const { return model_.get(); }

  // `outputs` maps every registry split to the text of a CoNLL system output.
  const SystemEntry &Register(const std::string &name,
                              const std::map<std::string, std::string> &outputs);
  const SystemEntry &RegisterFiles(const std::string &name,
                                   const std::map<std::string, std::string> &paths);

  // Eval-split outputs with weight-split scores attached, in rank order.
  std::vector<SystemOutput> Select(const CombineRequest &request) const;
  const SystemOutput &output(const std::string &name,
                             const std::string &split) const;

  // The report document shared by the CLI and the HTTP service.
  nlohmann::json CombineReport(const CombineRequest &request) const;
  Heatmap Buckets(const std::string &a, const std::string &b,
                  std::optional<AttributeKind> attribute) const;

  nlohmann::json ManifestJson() const;

 private:
  Registry() = default;
  void Load();
  void SaveManifest() const;
  void Rerank();

  std::filesystem::path root_;
  ConllOptions conll_;
  std::map<std::string, std::string> corpus_paths_;
  std::string checkpoint_path_;
  std::string eval_split_ = "test";
  std::string weight_split_ = "dev";
  std::map<std::string, Corpus> corpora_;
  TrainStats train_stats_;
  std::shared_ptr<const TrainedModel> model_;
  std::vector<SystemEntry> systems_;
  // name -> split -> output
  std::map<std::string, std::map<std::string, SystemOutput>> outputs_;
};

}  // namespace spanner

#endif  // SPANNER_REGISTRY_HPP_
