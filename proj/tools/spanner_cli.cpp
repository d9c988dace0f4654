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

// Command-line front end: training, prediction, evaluation, registry
// management, combination and the HTTP service.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spanner/combiner.hpp"
#include "spanner/eval.hpp"
#include "spanner/model.hpp"
#include "spanner/registry.hpp"
#include "spanner/service.hpp"
#include "spanner/synthetic.hpp"
#include "spanner/wilcoxon.hpp"

namespace {

using nlohmann::json;
using namespace spanner;

void WriteOutput(const std::string &path, const std::string &content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

struct ConllFlags {
  std::string scheme = "BIO";
  int token_col = 0;
  int tag_col = -1;

  void Add(CLI::App *app) {
    app->add_option("--scheme", scheme, "Tag scheme: BIO, BIOES or IOB1")
        ->capture_default_str();
    app->add_option("--token-col", token_col, "Token column")->capture_default_str();
    app->add_option("--tag-col", tag_col, "Tag column; negative counts from the end")
        ->capture_default_str();
  }
  ConllOptions options(DecodeMode mode = DecodeMode::kStrict) const {
    return {token_col, tag_col, ParseTagScheme(scheme), mode};
  }
};

// Per-sentence F1 over sentences where either side has an entity.
std::vector<double> SentenceF1(const Corpus &gold, const CorpusSpans &pred,
                               const std::vector<std::size_t> &keep) {
  std::vector<double> out;
  for (auto s : keep)
    out.push_back(EntityF1(CorpusSpans{gold.sentences[s].gold_spans},
                           CorpusSpans{pred[s]})
                      .overall.f1());
  return out;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Span-based named entity recognition and system combination"};
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.require_subcommand(1);
  std::uint64_t seed = 42;
  app.add_option("--seed", seed, "Random seed")->capture_default_str();

  // fixture
  auto *fixture = app.add_subcommand("fixture", "Write a synthetic lexicon corpus");
  std::size_t fixture_sentences = 200;
  std::string fixture_out;
  fixture->add_option("--sentences", fixture_sentences)->capture_default_str();
  fixture->add_option("--out", fixture_out, "Output path (default stdout)");

  // train
  auto *train = app.add_subcommand("train", "Train the span model");
  std::string train_path, dev_path, model_out, pretrained_path;
  ModelConfig config;
  ConllFlags train_conll;
  bool verbose = false;
  train->add_option("--train", train_path)->required()->check(CLI::ExistingFile);
  train->add_option("--dev", dev_path)->check(CLI::ExistingFile);
  train->add_option("--out", model_out, "Checkpoint path")->required();
  train->add_option("--pretrained", pretrained_path, "Word vectors, one per line")
      ->check(CLI::ExistingFile);
  train->add_option("--word-dim", config.word_dim)->capture_default_str();
  train->add_option("--hidden-dim", config.hidden_dim)->capture_default_str();
  train->add_option("--max-span-len", config.max_span_len)->capture_default_str();
  train->add_option("--length-dim", config.length_dim)->capture_default_str();
  train->add_option("--lr", config.learning_rate)->capture_default_str();
  train->add_option("--epochs", config.epochs)->capture_default_str();
  train->add_option("--batch-size", config.batch_size)->capture_default_str();
  train->add_option("--neg-ratio", config.neg_downsample_ratio)->capture_default_str();
  train->add_option("--clip", config.gradient_clip)->capture_default_str();
  train->add_option("--patience", config.patience)->capture_default_str();
  train->add_option("--min-count", config.min_count)->capture_default_str();
  train->add_flag("--verbose", verbose, "Log every epoch");
  train_conll.Add(train);

  // predict
  auto *predict = app.add_subcommand("predict", "Tag a corpus with a trained model");
  std::string predict_model, predict_input, predict_out;
  ConllFlags predict_conll;
  predict->add_option("--model", predict_model)->required()->check(CLI::ExistingFile);
  predict->add_option("--input", predict_input)->required()->check(CLI::ExistingFile);
  predict->add_option("--out", predict_out, "CoNLL output (default stdout)");
  predict_conll.Add(predict);

  // eval
  auto *eval = app.add_subcommand("eval", "Score predictions against gold");
  std::string eval_gold, eval_pred, eval_train, eval_against, eval_format = "json";
  ConllFlags eval_conll;
  eval->add_option("--gold", eval_gold)->required()->check(CLI::ExistingFile);
  eval->add_option("--pred", eval_pred)->required()->check(CLI::ExistingFile);
  eval->add_option("--train", eval_train, "Training corpus; enables bucket reports")
      ->check(CLI::ExistingFile);
  eval->add_option("--against", eval_against,
                   "Second prediction file for a Wilcoxon test on sentence F1")
      ->check(CLI::ExistingFile);
  eval->add_option("--format", eval_format)->check(CLI::IsMember({"json", "csv"}));
  eval_conll.Add(eval);

  // init
  auto *init = app.add_subcommand("init", "Create a system registry");
  std::string registry_dir;
  RegistrySetup setup;
  ConllFlags init_conll;
  init->add_option("--registry", registry_dir)->required();
  init->add_option("--train", setup.train_path)->required()->check(CLI::ExistingFile);
  init->add_option("--test", setup.test_path)->required()->check(CLI::ExistingFile);
  init->add_option("--dev", setup.dev_path)->check(CLI::ExistingFile);
  init->add_option("--checkpoint", setup.checkpoint_path)->check(CLI::ExistingFile);
  init->add_flag("--weights-from-test", setup.weights_from_test,
                 "Rank and weight systems by test-split F1");
  init_conll.Add(init);

  // register
  auto *reg = app.add_subcommand("register", "Register a base system's outputs");
  std::string reg_name, reg_output, reg_dev_output;
  reg->add_option("--registry", registry_dir)->required();
  reg->add_option("--name", reg_name)->required();
  reg->add_option("--output", reg_output, "Output on the test split")
      ->required()->check(CLI::ExistingFile);
  reg->add_option("--dev-output", reg_dev_output, "Output on the dev split")
      ->check(CLI::ExistingFile);

  // combine
  auto *combine = app.add_subcommand("combine", "Combine registered systems");
  std::string method = "spanner", interval;
  std::vector<std::string> systems;
  bool with_spans = false;
  combine->add_option("--registry", registry_dir)->required();
  combine->add_option("--method", method)->check(CLI::IsMember({"spanner", "vm", "vof1", "vcf1"}))
      ->capture_default_str();
  auto *systems_opt = combine->add_option("--systems", systems)->delimiter(',');
  combine->add_option("--interval", interval, "Rank slice such as m[:3] or all")
      ->excludes(systems_opt);
  combine->add_flag("--spans", with_spans, "Include predicted spans");

  // buckets
  auto *buckets = app.add_subcommand("buckets", "Bucket F1 difference between two systems");
  std::string attr, sys_a, sys_b, buckets_format = "csv";
  buckets->add_option("--registry", registry_dir)->required();
  buckets->add_option("--attr", attr, "eCon, sLen, eLen or oDen (default all)");
  buckets->add_option("--a", sys_a)->required();
  buckets->add_option("--b", sys_b)->required();
  buckets->add_option("--format", buckets_format)->check(CLI::IsMember({"json", "csv"}));

  // synth
  auto *synth = app.add_subcommand("synth", "Corrupt gold annotations into a system output");
  std::string synth_gold, synth_out;
  ErrorModel errors;
  ConllFlags synth_conll;
  synth->add_option("--gold", synth_gold)->required()->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output path (default stdout)");
  synth->add_option("--p-drop", errors.p_drop)->capture_default_str();
  synth->add_option("--p-swap", errors.p_label_swap)->capture_default_str();
  synth->add_option("--p-shift", errors.p_boundary_shift)->capture_default_str();
  synth->add_option("--labels", errors.target_labels, "Only corrupt these labels")
      ->delimiter(',');
  synth_conll.Add(synth);

  // serve
  auto *serve = app.add_subcommand("serve", "Serve the registry over HTTP");
  int port = 8080;
  std::string host = "0.0.0.0";
  serve->add_option("--registry", registry_dir)->required();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  std::cerr << "seed: " << seed << '\n';

  try {
    if (*fixture) {
      WriteOutput(fixture_out,
                  WriteConll(MakeLexiconCorpus(LexiconCorpusOptions::Default(),
                                               fixture_sentences, seed)));
    } else if (*train) {
      config.seed = seed;
      const auto train_corpus = ReadConllFile(train_path, train_conll.options());
      const auto dev_corpus =
          dev_path.empty() ? Corpus{} : ReadConllFile(dev_path, train_conll.options());
      PretrainedVectors vectors;
      TrainOptions options;
      if (!pretrained_path.empty()) {
        vectors = ReadPretrainedVectors(pretrained_path);
        options.pretrained = &vectors;
      }
      if (verbose) options.log = &std::cerr;
      const auto model = Train(train_corpus, dev_corpus, config, options);
      WriteCheckpointFile(model, model_out);
      const auto &selection = dev_corpus.sentences.empty() ? train_corpus : dev_corpus;
      std::cout << json{{"checkpoint", model_out},
                        {"selection_f1",
                         EntityF1(selection, model.PredictCorpus(selection)).overall.f1()}}
                       .dump()
                << '\n';
    } else if (*predict) {
      const auto model = ReadCheckpointFile(predict_model);
      const auto corpus =
          ReadConllFile(predict_input, predict_conll.options(DecodeMode::kLenient));
      WriteOutput(predict_out, WriteConll(corpus, model.PredictCorpus(corpus)));
    } else if (*eval) {
      const auto gold = ReadConllFile(eval_gold, eval_conll.options());
      const auto pred = ParseSystemOutput("pred", [&] {
        std::ifstream in(eval_pred);
        std::ostringstream b;
        b << in.rdbuf();
        return b.str();
      }(), gold, eval_conll.options());
      const auto report = EntityF1(gold, pred.spans);
      if (eval_format == "csv") {
        std::cout << ReportToCsv(report);
        if (!eval_train.empty()) {
          const auto stats = TrainStats::Build(ReadConllFile(eval_train, eval_conll.options()));
          for (const auto &b : BucketF1All(gold, pred.spans, stats)) {
            std::cout << "\nattribute,bucket,gold,predicted,correct,f1\n";
            for (int k = 0; k < kNumBuckets; ++k) {
              const auto f1 = b.f1(k);
              std::cout << AttributeName(b.spec.kind) << ',' << BucketName(Bucket(k)) << ','
                        << b.buckets[k].gold << ',' << b.buckets[k].predicted << ','
                        << b.buckets[k].correct << ',' << (f1 ? std::to_string(*f1) : "")
                        << '\n';
            }
          }
        }
      } else {
        json out = ReportToJson(report);
        if (!eval_train.empty()) {
          const auto stats = TrainStats::Build(ReadConllFile(eval_train, eval_conll.options()));
          out["buckets"] = BucketsToJson(BucketF1All(gold, pred.spans, stats));
        }
        if (!eval_against.empty()) {
          const auto other = ReadSystemOutput("against", eval_against, gold, eval_conll.options());
          std::vector<std::size_t> keep;
          for (std::size_t s = 0; s < gold.size(); ++s)
            if (!gold.sentences[s].gold_spans.empty() || !pred.spans[s].empty() ||
                !other.spans[s].empty())
              keep.push_back(s);
          const auto a = SentenceF1(gold, pred.spans, keep);
          const auto b = SentenceF1(gold, other.spans, keep);
          const auto w = WilcoxonSignedRank(a, b);
          out["wilcoxon"] = {{"n", w.n}, {"statistic", w.statistic}, {"p_value", w.p_value},
                             {"exact", w.exact}, {"degenerate", w.degenerate},
                             {"significant", w.significant}};
        }
        std::cout << out.dump(2) << '\n';
      }
    } else if (*init) {
      setup.conll = init_conll.options();
      const auto registry = Registry::Create(registry_dir, setup);
      std::cout << registry.ManifestJson().dump(2) << '\n';
    } else if (*reg) {
      auto registry = Registry::Open(registry_dir);
      std::map<std::string, std::string> paths{{registry.eval_split(), reg_output}};
      if (registry.weight_split() != registry.eval_split()) {
        if (reg_dev_output.empty())
          throw Error("this registry also needs --dev-output");
        paths[registry.weight_split()] = reg_dev_output;
      }
      std::cout << registry.RegisterFiles(reg_name, paths).ToJson().dump(2) << '\n';
    } else if (*combine) {
      const auto registry = Registry::Open(registry_dir);
      CombineRequest request;
      request.method = ParseCombineMethod(method);
      request.systems = systems;
      if (!interval.empty()) request.interval = ParseRankInterval(interval);
      if (interval.empty() && systems.empty()) request.interval = RankInterval{1, 0};
      request.include_spans = with_spans;
      std::cout << registry.CombineReport(request).dump() << '\n';
    } else if (*buckets) {
      const auto registry = Registry::Open(registry_dir);
      std::optional<AttributeKind> kind;
      if (!attr.empty()) kind = ParseAttribute(attr);
      const auto heatmap = registry.Buckets(sys_a, sys_b, kind);
      if (buckets_format == "csv") std::cout << heatmap.ToCsv();
      else std::cout << HeatmapToJson(heatmap).dump(2) << '\n';
    } else if (*synth) {
      const auto gold = ReadConllFile(synth_gold, synth_conll.options());
      const auto out = SynthesizeSystem(gold, errors, seed, "synth");
      WriteOutput(synth_out, WriteConll(gold, out.spans));
    } else if (*serve) {
      Service service(Registry::Open(registry_dir));
      std::cerr << "listening on " << host << ':' << port << '\n';
      if (!service.Listen(host, port)) throw Error("cannot bind port " + std::to_string(port));
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
