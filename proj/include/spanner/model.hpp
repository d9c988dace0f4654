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

#ifndef SPANNER_MODEL_HPP_
#define SPANNER_MODEL_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "spanner/corpus.hpp"
#include "spanner/decode.hpp"
#include "spanner/span_model.hpp"

namespace spanner {

// Hyperparameters of the span scorer and its SGD trainer.
struct ModelConfig {
  int word_dim = 50;
  int hidden_dim = 50;
  int max_span_len = 6;
  int length_dim = 16;
  double learning_rate = 1.0;
  int epochs = 100;
  int batch_size = 4;
  std::uint64_t seed = 42;
  // Probability of keeping each non-entity span, redrawn every epoch.
  double neg_downsample_ratio = 0.3;
  double gradient_clip = 5.0;
  int patience = 20;
  int min_count = 1;

  void Validate() const;
};

using PretrainedVectors = std::unordered_map<std::string, std::vector<double>>;

// "word v1 v2 ..." per line; all rows must share one dimension.
PretrainedVectors ReadPretrainedVectors(const std::string &path);

struct TrainedModel {
  ModelConfig config;
  Vocab vocab;
  std::vector<std::string> labels;  // "O" first
  ModelParams<double> params;

  std::vector<ScoredSpan> Predict(const std::vector<std::string> &tokens) const;
  CorpusSpans PredictCorpus(const Corpus &corpus) const;
  // Logits for an arbitrary span; lengths beyond max_span_len reuse the last
  // length embedding.
  Vector<double> SpanLogits(const HiddenStates<double> &hidden, int begin,
                            int end) const;
  HiddenStates<double> Encode(const std::vector<std::string> &tokens) const;
  int label_index(const std::string &label) const;
};

struct TrainOptions {
  const PretrainedVectors *pretrained = nullptr;
  std::ostream *log = nullptr;
};

// Vocabulary, label set and seeded initial parameters.
TrainedModel InitializeModel(const Corpus &train, const ModelConfig &config,
                             const PretrainedVectors *pretrained = nullptr);

// Every enumerated span of every sentence, labeled with the gold entity label
// on exact match and "O" otherwise.
std::vector<TrainingExample> MakeExamples(const Corpus &corpus,
                                          const Vocab &vocab,
                                          const std::vector<std::string> &labels,
                                          int max_span_len);

// SGD with global-norm clipping; returns the parameters with the best dev F1
// (train F1 when dev is empty), stopping after `patience` epochs without
// improvement.
TrainedModel Train(const Corpus &train, const Corpus &dev,
                   const ModelConfig &config, const TrainOptions &options = {});

// FNV-1a over all parameter bytes.
std::uint64_t ParamsChecksum(const ModelParams<double> &params);

inline constexpr const char *kCheckpointFormat = "spanner-checkpoint/1";

std::string SaveCheckpoint(const TrainedModel &model);
TrainedModel LoadCheckpoint(const std::string &document);
void WriteCheckpointFile(const TrainedModel &model, const std::string &path);
TrainedModel ReadCheckpointFile(const std::string &path);

}  // namespace spanner

#endif  // SPANNER_MODEL_HPP_
