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

#include "spanner/model.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "spanner/eval.hpp"

namespace spanner {
namespace {

using nlohmann::json;

json ConfigToJson(const ModelConfig &c) {
  return {{"word_dim", c.word_dim},
          {"hidden_dim", c.hidden_dim},
          {"max_span_len", c.max_span_len},
          {"length_dim", c.length_dim},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"neg_downsample_ratio", c.neg_downsample_ratio},
          {"gradient_clip", c.gradient_clip},
          {"patience", c.patience},
          {"min_count", c.min_count}};
}

ModelConfig ConfigFromJson(const json &j) {
  ModelConfig c;
  c.word_dim = j.at("word_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.max_span_len = j.at("max_span_len").get<int>();
  c.length_dim = j.at("length_dim").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.neg_downsample_ratio = j.at("neg_downsample_ratio").get<double>();
  c.gradient_clip = j.at("gradient_clip").get<double>();
  c.patience = j.at("patience").get<int>();
  c.min_count = j.at("min_count").get<int>();
  return c;
}

template <typename Block>
json TensorToJson(const char *name, const Block &block) {
  json values = json::array();
  for (Eigen::Index r = 0; r < block.rows(); ++r)
    for (Eigen::Index c = 0; c < block.cols(); ++c) values.push_back(block(r, c));
  json shape = Block::ColsAtCompileTime == 1
                   ? json::array({block.rows()})
                   : json::array({block.rows(), block.cols()});
  return {{"name", name}, {"shape", shape}, {"values", std::move(values)}};
}

template <typename Block>
void TensorFromJson(const json &t, Block &block) {
  const auto shape = t.at("shape").get<std::vector<Eigen::Index>>();
  const Eigen::Index rows = shape.at(0);
  const Eigen::Index cols = shape.size() > 1 ? shape[1] : 1;
  if (rows != block.rows() || cols != block.cols())
    throw Error("tensor '" + t.at("name").get<std::string>() +
                "' has shape inconsistent with the configuration");
  const auto &values = t.at("values");
  if (values.size() != static_cast<std::size_t>(rows * cols))
    throw Error("tensor '" + t.at("name").get<std::string>() +
                "' has the wrong number of values");
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      block(r, c) = values[k++].get<double>();
}

double GlobalNorm(ModelParams<double> &grad) {
  double sq = 0;
  ForEachBlock(grad, [&](const char *, auto &b) { sq += b.squaredNorm(); });
  return std::sqrt(sq);
}

}  // namespace

void ModelConfig::Validate() const {
  if (word_dim < 1 || hidden_dim < 1 || length_dim < 1)
    throw Error("model dimensions must be >= 1");
  if (max_span_len < 1) throw Error("max_span_len must be >= 1");
  if (!(neg_downsample_ratio > 0.0 && neg_downsample_ratio <= 1.0))
    throw Error("neg_downsample_ratio must lie in (0, 1]");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (!(gradient_clip > 0)) throw Error("gradient_clip must be positive");
  if (!(learning_rate > 0)) throw Error("learning_rate must be positive");
}

PretrainedVectors ReadPretrainedVectors(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  PretrainedVectors vectors;
  std::string line;
  std::size_t dim = 0, line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    std::vector<double> v;
    for (double x; fields >> x;) v.push_back(x);
    if (!fields.eof()) throw ParseError(line_no, path + ": non-numeric value");
    if (dim == 0) dim = v.size();
    if (v.empty() || v.size() != dim)
      throw ParseError(line_no, path + ": expected " + std::to_string(dim) +
                                    " values");
    vectors[word] = std::move(v);
  }
  return vectors;
}

HiddenStates<double> TrainedModel::Encode(
    const std::vector<std::string> &tokens) const {
  const auto ids = vocab.Encode(tokens);
  return spanner::Encode<double>(ids, params);
}

Vector<double> TrainedModel::SpanLogits(const HiddenStates<double> &hidden,
                                        int begin, int end) const {
  return Logits(SpanRepresentation(hidden, begin, end, params, true), params);
}

std::vector<ScoredSpan> TrainedModel::Predict(
    const std::vector<std::string> &tokens) const {
  const auto ids = vocab.Encode(tokens);
  return PredictSpans<double>(ids, params, labels, config.max_span_len);
}

CorpusSpans TrainedModel::PredictCorpus(const Corpus &corpus) const {
  CorpusSpans out;
  out.reserve(corpus.size());
  for (const auto &sentence : corpus.sentences) {
    SpanList spans;
    for (auto &s : Predict(sentence.tokens)) spans.push_back(std::move(s.span));
    out.push_back(std::move(spans));
  }
  return out;
}

int TrainedModel::label_index(const std::string &label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

TrainedModel InitializeModel(const Corpus &train, const ModelConfig &config,
                             const PretrainedVectors *pretrained) {
  config.Validate();
  if (train.sentences.empty()) throw Error("training corpus is empty");
  TrainedModel model;
  model.config = config;
  model.vocab = Vocab::Build(train, config.min_count);
  model.labels = train.label_set;
  ModelDims dims{static_cast<int>(model.vocab.size()), config.word_dim,
                 config.hidden_dim, config.max_span_len, config.length_dim,
                 static_cast<int>(model.labels.size())};
  std::mt19937_64 rng(config.seed);
  model.params = InitUniform<double>(dims, rng);
  if (pretrained) {
    for (std::size_t id = 2; id < model.vocab.size(); ++id) {
      auto it = pretrained->find(model.vocab.word(static_cast<int>(id)));
      if (it == pretrained->end()) continue;
      if (static_cast<int>(it->second.size()) != config.word_dim)
        throw Error("pretrained vectors have dimension " +
                    std::to_string(it->second.size()) + ", word_dim is " +
                    std::to_string(config.word_dim));
      for (int k = 0; k < config.word_dim; ++k)
        model.params.embeddings(static_cast<Eigen::Index>(id), k) = it->second[k];
    }
  }
  return model;
}

std::vector<TrainingExample> MakeExamples(const Corpus &corpus,
                                          const Vocab &vocab,
                                          const std::vector<std::string> &labels,
                                          int max_span_len) {
  std::vector<TrainingExample> out;
  out.reserve(corpus.size());
  for (const auto &sentence : corpus.sentences) {
    TrainingExample ex;
    ex.token_ids = vocab.Encode(sentence.tokens);
    for (auto [b, e] : EnumerateSpans(sentence.size(), max_span_len)) {
      int label = 0;
      for (const auto &g : sentence.gold_spans) {
        if (g.begin != b || g.end != e) continue;
        auto it = std::find(labels.begin(), labels.end(), g.label);
        if (it != labels.end()) label = static_cast<int>(it - labels.begin());
      }
      ex.spans.push_back({b, e, label});
    }
    out.push_back(std::move(ex));
  }
  return out;
}

TrainedModel Train(const Corpus &train, const Corpus &dev,
                   const ModelConfig &config, const TrainOptions &options) {
  TrainedModel model = InitializeModel(train, config, options.pretrained);
  const auto examples =
      MakeExamples(train, model.vocab, model.labels, config.max_span_len);
  const Corpus &selection = dev.sentences.empty() ? train : dev;

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::bernoulli_distribution keep_negative(config.neg_downsample_ratio);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  ModelParams<double> best = model.params;
  double best_f1 = -std::numeric_limits<double>::infinity();
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<TrainingExample> batch;
      for (std::size_t k = start; k < stop; ++k) {
        const auto &ex = examples[order[k]];
        if (config.neg_downsample_ratio >= 1.0) {
          batch.push_back(ex);
          continue;
        }
        TrainingExample sampled{ex.token_ids, {}};
        for (const auto &sp : ex.spans)
          if (sp.label != 0 || keep_negative(rng)) sampled.spans.push_back(sp);
        batch.push_back(std::move(sampled));
      }
      auto result = ComputeLossAndGradient<double>(batch, model.params);
      epoch_loss += result.loss;
      ++batches;
      const double norm = GlobalNorm(result.gradient);
      const double step = config.learning_rate *
                          (norm > config.gradient_clip ? config.gradient_clip / norm : 1.0);
      ForEachBlockPair(model.params, result.gradient,
                       [&](const char *, auto &p, const auto &g) { p -= step * g; });
    }
    const double f1 =
        EntityF1(selection, model.PredictCorpus(selection)).overall.f1();
    const double mean_loss = batches ? epoch_loss / batches : 0.0;
    // Ties on F1 go to the lower training loss; only F1 gains reset patience.
    const bool kept = f1 > best_f1 || (f1 == best_f1 && mean_loss < best_loss);
    if (kept) {
      best = model.params;
      best_loss = mean_loss;
    }
    if (f1 > best_f1) {
      best_f1 = f1;
      stale = 0;
    } else {
      ++stale;
    }
    if (options.log)
      *options.log << "epoch " << epoch << " loss " << mean_loss << " dev_f1 "
                   << f1 << (kept ? " *" : "") << '\n';
    if (stale >= config.patience) break;
  }
  model.params = std::move(best);
  return model;
}

std::uint64_t ParamsChecksum(const ModelParams<double> &params) {
  std::uint64_t hash = 1469598103934665603ULL;
  ForEachBlock(params, [&](const char *, const auto &block) {
    const auto *bytes = reinterpret_cast<const unsigned char *>(block.data());
    for (std::size_t i = 0; i < block.size() * sizeof(double); ++i) {
      hash ^= bytes[i];
      hash *= 1099511628211ULL;
    }
  });
  return hash;
}

std::string SaveCheckpoint(const TrainedModel &model) {
  json tensors = json::array();
  ForEachBlock(model.params, [&](const char *name, const auto &block) {
    tensors.push_back(TensorToJson(name, block));
  });
  json doc = {{"format", kCheckpointFormat},
              {"config", ConfigToJson(model.config)},
              {"vocab", model.vocab.words()},
              {"labels", model.labels},
              {"tensors", std::move(tensors)}};
  return doc.dump();
}

TrainedModel LoadCheckpoint(const std::string &document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception &e) {
    throw Error(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (doc.value("format", "") != kCheckpointFormat)
    throw Error("unsupported checkpoint format '" + doc.value("format", "") + "'");
  try {
    TrainedModel model;
    model.config = ConfigFromJson(doc.at("config"));
    model.config.Validate();
    model.vocab = Vocab::FromWords(doc.at("vocab").get<std::vector<std::string>>());
    model.labels = doc.at("labels").get<std::vector<std::string>>();
    if (model.labels.empty() || model.labels.front() != kOutsideLabel)
      throw Error("checkpoint label set must start with O");
    ModelDims dims{static_cast<int>(model.vocab.size()), model.config.word_dim,
                   model.config.hidden_dim, model.config.max_span_len,
                   model.config.length_dim,
                   static_cast<int>(model.labels.size())};
    model.params = ModelParams<double>::Zero(dims);
    const auto &tensors = doc.at("tensors");
    std::size_t index = 0;
    ForEachBlock(model.params, [&](const char *name, auto &block) {
      if (index >= tensors.size() || tensors[index].at("name") != name)
        throw Error(std::string("checkpoint missing tensor '") + name + "'");
      TensorFromJson(tensors[index++], block);
    });
    return model;
  } catch (const json::exception &e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
}

void WriteCheckpointFile(const TrainedModel &model, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << SaveCheckpoint(model);
}

TrainedModel ReadCheckpointFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return LoadCheckpoint(buffer.str());
}

}  // namespace spanner
