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

#include "spanner/registry.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "spanner/voting.hpp"

namespace spanner {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char *kManifestFormat = "spanner-registry/1";
constexpr const char *kManifestFile = "manifest.json";

std::string ReadFile(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFileAtomically(const fs::path &path, const std::string &content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
  }
  fs::rename(tmp, path);
}

json PrfToJson(const Prf &prf) {
  return {{"precision", prf.precision()}, {"recall", prf.recall()},
          {"f1", prf.f1()},               {"gold", prf.gold},
          {"predicted", prf.predicted},   {"correct", prf.correct}};
}

json SpansToJson(const CorpusSpans &spans) {
  json out = json::array();
  for (const auto &sentence : spans) {
    json row = json::array();
    for (const auto &s : sentence)
      row.push_back({{"begin", s.begin}, {"end", s.end}, {"label", s.label},
                     {"prob", s.prob}});
    out.push_back(std::move(row));
  }
  return out;
}

void CheckSystemName(const std::string &name) {
  static const std::regex kValid("[A-Za-z0-9_.-]+");
  if (!std::regex_match(name, kValid) || name == "." || name == "..")
    throw RequestError("invalid_name", "system name '" + name +
                                           "' must match [A-Za-z0-9_.-]+");
}

}  // namespace

CombineMethod ParseCombineMethod(std::string_view name) {
  if (name == "spanner") return CombineMethod::kSpanner;
  if (name == "vm") return CombineMethod::kMajority;
  if (name == "vof1") return CombineMethod::kWeightedOverall;
  if (name == "vcf1") return CombineMethod::kWeightedClass;
  throw RequestError("unknown_method", "unknown combination method '" +
                                           std::string(name) +
                                           "' (expected spanner, vm, vof1 or vcf1)");
}

std::string_view CombineMethodName(CombineMethod method) {
  switch (method) {
    case CombineMethod::kSpanner: return "spanner";
    case CombineMethod::kMajority: return "vm";
    case CombineMethod::kWeightedOverall: return "vof1";
    case CombineMethod::kWeightedClass: return "vcf1";
  }
  return "?";
}

CombineRequest CombineRequest::FromJson(const json &j) {
  if (!j.is_object()) throw RequestError("bad_request", "request must be a JSON object");
  CombineRequest req;
  try {
    if (j.contains("systems")) req.systems = j.at("systems").get<std::vector<std::string>>();
    if (j.contains("interval")) req.interval = ParseRankInterval(j.at("interval").get<std::string>());
    req.method = ParseCombineMethod(j.value("method", std::string("spanner")));
    req.include_spans = j.value("include_spans", false);
  } catch (const RequestError &) {
    throw;
  } catch (const std::exception &e) {
    throw RequestError("bad_request", e.what());
  }
  return req;
}

json CombineRequest::ToJson() const {
  json j = {{"method", CombineMethodName(method)}, {"include_spans", include_spans}};
  if (interval) j["interval"] = FormatRankInterval(*interval);
  else j["systems"] = systems;
  return j;
}

CorpusSpans RunCombination(CombineMethod method,
                           std::span<const SystemOutput> ranked,
                           const Corpus &corpus, const TrainedModel *model) {
  if (ranked.empty()) throw RequestError("empty_selection", "no systems selected");
  if (method == CombineMethod::kSpanner) {
    if (!model)
      throw RequestError("no_model", "the span combiner needs a model checkpoint");
    return SpannerCombineCorpus(ranked, corpus, *model);
  }
  VoteWeights weights;
  if (method != CombineMethod::kMajority) weights = VoteWeights::FromSystems(ranked);
  CorpusSpans out;
  out.reserve(corpus.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto table = CollectCandidates(ranked, s);
    switch (method) {
      case CombineMethod::kMajority: out.push_back(VoteMajority(table)); break;
      case CombineMethod::kWeightedOverall:
        out.push_back(VoteWeightedOverall(table, weights.overall));
        break;
      default:
        out.push_back(VoteWeightedClass(table, weights.per_class, weights.outside));
        break;
    }
  }
  return out;
}

json ReportToJson(const EvalReport &report) {
  json per_class = json::object();
  for (const auto &[label, prf] : report.per_class) per_class[label] = PrfToJson(prf);
  return {{"overall", PrfToJson(report.overall)},
          {"per_class", std::move(per_class)},
          {"macro_f1", report.macro_f1()}};
}

json BucketsToJson(const std::vector<BucketReport> &reports) {
  json out = json::object();
  for (const auto &r : reports) {
    json rows = json::array();
    for (int k = 0; k < kNumBuckets; ++k) {
      const auto f1 = r.f1(k);
      rows.push_back({{"bucket", BucketName(Bucket(k))},
                      {"f1", f1 ? json(*f1) : json(nullptr)},
                      {"gold", r.buckets[k].gold},
                      {"predicted", r.buckets[k].predicted},
                      {"correct", r.buckets[k].correct}});
    }
    out[std::string(AttributeName(r.spec.kind))] = std::move(rows);
  }
  return out;
}

json HeatmapToJson(const Heatmap &heatmap) {
  json attributes = json::array(), matrix = json::array();
  for (std::size_t i = 0; i < heatmap.attributes.size(); ++i) {
    attributes.push_back(AttributeName(heatmap.attributes[i]));
    json row = json::array();
    for (const auto &cell : heatmap.rows[i])
      row.push_back(cell ? json(*cell) : json(nullptr));
    matrix.push_back(std::move(row));
  }
  return {{"attributes", std::move(attributes)},
          {"buckets", {"XS", "S", "L", "XL"}},
          {"matrix", std::move(matrix)}};
}

json SystemEntry::ToJson() const {
  return {{"name", name},           {"outputs", outputs},
          {"overall_f1", overall_f1}, {"macro_f1", macro_f1},
          {"per_class_f1", per_class_f1}, {"rank", rank}};
}

SystemEntry SystemEntry::FromJson(const json &j) {
  SystemEntry e;
  e.name = j.at("name").get<std::string>();
  e.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  e.overall_f1 = j.at("overall_f1").get<double>();
  e.macro_f1 = j.at("macro_f1").get<double>();
  e.per_class_f1 = j.at("per_class_f1").get<std::map<std::string, double>>();
  e.rank = j.at("rank").get<int>();
  return e;
}

Registry Registry::Create(const fs::path &root, const RegistrySetup &setup) {
  if (fs::exists(root / kManifestFile))
    throw Error("registry already exists at '" + root.string() + "'");
  if (setup.train_path.empty() || setup.test_path.empty())
    throw Error("a registry needs train and test corpora");
  fs::create_directories(root / "data");
  fs::create_directories(root / "systems");

  Registry reg;
  reg.root_ = root;
  reg.conll_ = setup.conll;
  auto copy = [&](const std::string &split, const std::string &from) {
    const std::string rel = "data/" + split + ".conll";
    ReadConllFile(from, setup.conll);  // validate before copying
    fs::copy_file(from, root / rel, fs::copy_options::overwrite_existing);
    reg.corpus_paths_[split] = rel;
  };
  copy("train", setup.train_path);
  copy("test", setup.test_path);
  if (!setup.dev_path.empty()) copy("dev", setup.dev_path);
  reg.weight_split_ = setup.dev_path.empty() || setup.weights_from_test ? "test" : "dev";
  if (!setup.checkpoint_path.empty()) {
    ReadCheckpointFile(setup.checkpoint_path);
    fs::copy_file(setup.checkpoint_path, root / "model.json",
                  fs::copy_options::overwrite_existing);
    reg.checkpoint_path_ = "model.json";
  }
  reg.SaveManifest();
  reg.Load();
  return reg;
}

Registry Registry::Open(const fs::path &root) {
  Registry reg;
  reg.root_ = root;
  const json manifest = json::parse(ReadFile(root / kManifestFile));
  if (manifest.value("format", "") != kManifestFormat)
    throw Error("unsupported registry manifest in '" + root.string() + "'");
  reg.conll_.scheme = ParseTagScheme(manifest.at("scheme").get<std::string>());
  reg.conll_.token_col = manifest.at("token_col").get<int>();
  reg.conll_.tag_col = manifest.at("tag_col").get<int>();
  reg.corpus_paths_ = manifest.at("corpora").get<std::map<std::string, std::string>>();
  reg.checkpoint_path_ = manifest.value("checkpoint", "");
  reg.eval_split_ = manifest.at("eval_split").get<std::string>();
  reg.weight_split_ = manifest.at("weight_split").get<std::string>();
  for (const auto &e : manifest.at("systems")) reg.systems_.push_back(SystemEntry::FromJson(e));
  reg.Load();
  return reg;
}

void Registry::Load() {
  corpora_.clear();
  for (const auto &[split, rel] : corpus_paths_)
    corpora_[split] = ReadConllFile((root_ / rel).string(), conll_);
  train_stats_ = TrainStats::Build(corpora_.at("train"));
  if (!checkpoint_path_.empty())
    model_ = std::make_shared<const TrainedModel>(
        ReadCheckpointFile((root_ / checkpoint_path_).string()));
  outputs_.clear();
  for (const auto &entry : systems_)
    for (const auto &[split, rel] : entry.outputs)
      outputs_[entry.name][split] = ReadSystemOutput(
          entry.name, (root_ / rel).string(), corpus(split), conll_);
  std::sort(systems_.begin(), systems_.end(),
            [](const SystemEntry &a, const SystemEntry &b) { return a.rank < b.rank; });
}

json Registry::ManifestJson() const {
  json systems = json::array();
  for (const auto &e : systems_) systems.push_back(e.ToJson());
  return {{"format", kManifestFormat},
          {"scheme", TagSchemeName(conll_.scheme)},
          {"token_col", conll_.token_col},
          {"tag_col", conll_.tag_col},
          {"corpora", corpus_paths_},
          {"checkpoint", checkpoint_path_},
          {"eval_split", eval_split_},
          {"weight_split", weight_split_},
          {"systems", std::move(systems)}};
}

void Registry::SaveManifest() const {
  WriteFileAtomically(root_ / kManifestFile, ManifestJson().dump(2) + "\n");
}

void Registry::Rerank() {
  std::sort(systems_.begin(), systems_.end(),
            [](const SystemEntry &a, const SystemEntry &b) {
              return a.overall_f1 != b.overall_f1 ? a.overall_f1 > b.overall_f1
                                                  : a.name < b.name;
            });
  for (std::size_t i = 0; i < systems_.size(); ++i)
    systems_[i].rank = static_cast<int>(i) + 1;
}

std::vector<std::string> Registry::splits() const {
  std::vector<std::string> out{eval_split_};
  if (weight_split_ != eval_split_) out.push_back(weight_split_);
  return out;
}

const Corpus &Registry::corpus(const std::string &split) const {
  auto it = corpora_.find(split);
  if (it == corpora_.end()) throw Error("registry has no '" + split + "' split");
  return it->second;
}

const SystemEntry &Registry::Register(
    const std::string &name, const std::map<std::string, std::string> &outputs) {
  CheckSystemName(name);
  if (outputs_.count(name))
    throw RequestError("duplicate_system", "system '" + name + "' is already registered", 409);
  const auto needed = splits();
  for (const auto &[split, text] : outputs)
    if (std::find(needed.begin(), needed.end(), split) == needed.end())
      throw RequestError("bad_split", "registry has no output split '" + split + "'");

  SystemEntry entry;
  entry.name = name;
  std::map<std::string, SystemOutput> parsed;
  for (const auto &split : needed) {
    auto it = outputs.find(split);
    if (it == outputs.end())
      throw RequestError("missing_output", "system '" + name + "' needs an output for the '" +
                                               split + "' split");
    try {
      parsed[split] = ParseSystemOutput(name, it->second, corpus(split), conll_);
    } catch (const RequestError &) {
      throw;
    } catch (const Error &e) {
      throw RequestError("misaligned_output", e.what());
    }
  }
  const auto report = EntityF1(corpus(weight_split_), parsed.at(weight_split_).spans);
  entry.overall_f1 = report.overall.f1();
  entry.macro_f1 = report.macro_f1();
  for (const auto &[label, prf] : report.per_class) entry.per_class_f1[label] = prf.f1();
  for (const auto &split : needed) {
    const std::string rel = "systems/" + name + "." + split + ".conll";
    WriteFileAtomically(root_ / rel, outputs.at(split));
    entry.outputs[split] = rel;
  }
  outputs_[name] = std::move(parsed);
  systems_.push_back(entry);
  Rerank();
  SaveManifest();
  return *std::find_if(systems_.begin(), systems_.end(),
                       [&](const SystemEntry &e) { return e.name == name; });
}

const SystemEntry &Registry::RegisterFiles(
    const std::string &name, const std::map<std::string, std::string> &paths) {
  std::map<std::string, std::string> texts;
  for (const auto &[split, path] : paths) texts[split] = ReadFile(path);
  return Register(name, texts);
}

const SystemOutput &Registry::output(const std::string &name,
                                     const std::string &split) const {
  auto it = outputs_.find(name);
  if (it == outputs_.end())
    throw RequestError("unknown_system", "unknown system '" + name + "'", 404);
  return it->second.at(split);
}

std::vector<SystemOutput> Registry::Select(const CombineRequest &request) const {
  if (request.interval && !request.systems.empty())
    throw RequestError("bad_request", "give either systems or interval, not both");
  std::vector<std::string> names;
  if (request.interval) {
    std::vector<std::string> ranked;
    for (const auto &e : systems_) ranked.push_back(e.name);
    try {
      names = CombinationCase<std::string>(ranked, *request.interval);
    } catch (const Error &e) {
      throw RequestError("empty_selection", e.what());
    }
  } else {
    std::set<std::string> seen;
    for (const auto &n : request.systems) {
      output(n, eval_split_);
      if (seen.insert(n).second) names.push_back(n);
    }
  }
  if (names.empty()) throw RequestError("empty_selection", "no systems selected");

  std::vector<SystemOutput> selected;
  for (const auto &entry : systems_) {
    if (std::find(names.begin(), names.end(), entry.name) == names.end()) continue;
    SystemOutput out = output(entry.name, eval_split_);
    out.overall_f1 = entry.overall_f1;
    out.macro_f1 = entry.macro_f1;
    out.class_f1 = entry.per_class_f1;
    selected.push_back(std::move(out));
  }
  return selected;
}

json Registry::CombineReport(const CombineRequest &request) const {
  const auto selected = Select(request);
  const Corpus &gold = eval_corpus();
  const auto spans = RunCombination(request.method, selected, gold, model_.get());

  json names = json::array();
  json best = nullptr;
  double best_f1 = -1;
  for (const auto &s : selected) {
    names.push_back(s.name);
    const double f1 = EntityF1(gold, s.spans).overall.f1();
    if (f1 > best_f1) {
      best_f1 = f1;
      best = {{"name", s.name}, {"f1", f1}};
    }
  }
  json report = ReportToJson(EntityF1(gold, spans));
  report["method"] = CombineMethodName(request.method);
  report["systems"] = std::move(names);
  report["best_single"] = std::move(best);
  report["buckets"] = BucketsToJson(BucketF1All(gold, spans, train_stats_));
  if (request.include_spans) report["spans"] = SpansToJson(spans);
  return report;
}

Heatmap Registry::Buckets(const std::string &a, const std::string &b,
                          std::optional<AttributeKind> attribute) const {
  const Corpus &gold = eval_corpus();
  auto reports = [&](const std::string &name) {
    const auto &spans = output(name, eval_split_).spans;
    if (attribute)
      return std::vector<BucketReport>{
          BucketF1(gold, spans, AttributeSpec::Default(*attribute), train_stats_)};
    return BucketF1All(gold, spans, train_stats_);
  };
  return HeatmapDiff(reports(a), reports(b));
}

}  // namespace spanner
