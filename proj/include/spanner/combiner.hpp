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

#ifndef SPANNER_COMBINER_HPP_
#define SPANNER_COMBINER_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spanner/corpus.hpp"
#include "spanner/decode.hpp"
#include "spanner/model.hpp"

namespace spanner {

// One base system's predictions over an evaluation corpus.
struct SystemOutput {
  std::string name;
  std::vector<std::vector<std::string>> tags;
  CorpusSpans spans;
  // Reference-split scores, when known.
  std::optional<double> overall_f1;
  std::map<std::string, double> class_f1;
  std::optional<double> macro_f1;

  std::size_t size() const { return spans.size(); }
};

// Parses a CoNLL system output leniently and checks it aligns token for
// token with `reference`.
SystemOutput ParseSystemOutput(const std::string &name, std::string_view text,
                               const Corpus &reference,
                               const ConllOptions &options = {});
SystemOutput ReadSystemOutput(const std::string &name, const std::string &path,
                              const Corpus &reference,
                              const ConllOptions &options = {});
SystemOutput MakeSystemOutput(const std::string &name, const Corpus &reference,
                              const CorpusSpans &spans);

struct Candidate {
  int begin = 0;
  int end = 0;
  // labels[j] is system j's label for exactly this span, "O" if it has none.
  std::vector<std::string> labels;
};

struct CandidateTable {
  std::size_t num_systems = 0;
  std::vector<Candidate> candidates;  // unique positions, sorted
};

// Union of all systems' entity spans in one sentence.
CandidateTable CollectCandidates(std::span<const SystemOutput> outputs,
                                 std::size_t sentence);

struct CombinedScore {
  // Per label: (number of systems voting it) * exp(logit - max logit).
  std::vector<double> mass;
  int label = 0;
  double normalized = 0;  // mass[label] / sum(mass)
};

// Sums the span's label scores over the systems' votes and takes the argmax
// over the full label set (including "O"). Logits are shifted by their max,
// which scales every label's mass by the same factor. Votes for labels
// outside `labels` carry no mass.
CombinedScore CombineVotes(std::span<const std::string> votes,
                           const Vector<double> &logits,
                           std::span<const std::string> labels);

// Re-recognizes the candidates of one sentence with the span scorer; "O"
// winners are dropped and overlaps resolved by normalized mass.
std::vector<ScoredSpan> SpannerCombine(const CandidateTable &table,
                                       const std::vector<std::string> &tokens,
                                       const TrainedModel &model);

CorpusSpans SpannerCombineCorpus(std::span<const SystemOutput> outputs,
                                 const Corpus &corpus,
                                 const TrainedModel &model);

// Half-open 1-based rank interval [first, last).
struct RankInterval {
  int first = 1;
  int last = 0;  // 0 means "through the end"
};

// Parses the slice notation "m[i:k]" (also "m[:k]", "m[i:]", "i:k") and
// "all". Slice bounds are zero-based like list slices over the ranked
// systems, so "m[:3]" is the top three and "m[1:]" drops the best system.
RankInterval ParseRankInterval(std::string_view text);
std::string FormatRankInterval(const RankInterval &interval);

// Systems ranked `first` .. `last - 1`; `ranked` must be in rank order.
// Like a list slice, `last` is clamped to the number of systems; an empty
// selection is an error.
template <typename T>
std::vector<T> CombinationCase(std::span<const T> ranked,
                               const RankInterval &interval) {
  const int m = static_cast<int>(ranked.size());
  const int last = interval.last == 0 ? m + 1 : std::min(interval.last, m + 1);
  if (interval.first < 1 || interval.first >= last)
    throw Error("rank interval " + FormatRankInterval(interval) +
                " selects no systems out of " + std::to_string(m));
  return {ranked.begin() + (interval.first - 1), ranked.begin() + (last - 1)};
}

struct ErrorModel {
  double p_drop = 0;
  double p_label_swap = 0;
  double p_boundary_shift = 0;
  // When non-empty, only entities with these labels are corrupted.
  std::vector<std::string> target_labels;
};

// Corrupts gold entities independently: drop, relabel uniformly among the
// other entity labels, or move one boundary by one token (rejected if the
// result leaves the sentence or collides with another span).
SystemOutput SynthesizeSystem(const Corpus &gold, const ErrorModel &errors,
                              std::uint64_t seed, const std::string &name);

}  // namespace spanner

#endif  // SPANNER_COMBINER_HPP_
