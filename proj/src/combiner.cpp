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

#include "spanner/combiner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace spanner {
namespace {

int ParseBound(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0)
    throw Error("malformed rank interval '" + std::string(whole) + "'");
  return value;
}

}  // namespace

SystemOutput ParseSystemOutput(const std::string &name, std::string_view text,
                               const Corpus &reference,
                               const ConllOptions &options) {
  ConllOptions lenient = options;
  lenient.mode = DecodeMode::kLenient;
  Corpus parsed;
  try {
    parsed = ParseConll(text, lenient);
  } catch (const Error &e) {
    throw Error("system '" + name + "': " + e.what());
  }
  if (parsed.size() != reference.size())
    throw Error("system '" + name + "' has " + std::to_string(parsed.size()) +
                " sentences, corpus has " + std::to_string(reference.size()));
  SystemOutput out;
  out.name = name;
  for (std::size_t s = 0; s < parsed.size(); ++s) {
    auto &sentence = parsed.sentences[s];
    const auto &ref = reference.sentences[s];
    if (sentence.tokens != ref.tokens)
      throw Error("system '" + name + "' does not align with the corpus at sentence " +
                  std::to_string(s + 1));
    out.tags.push_back(std::move(sentence.gold_tags));
    out.spans.push_back(std::move(sentence.gold_spans));
  }
  return out;
}

SystemOutput ReadSystemOutput(const std::string &name, const std::string &path,
                              const Corpus &reference,
                              const ConllOptions &options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseSystemOutput(name, buffer.str(), reference, options);
}

SystemOutput MakeSystemOutput(const std::string &name, const Corpus &reference,
                              const CorpusSpans &spans) {
  if (spans.size() != reference.size())
    throw Error("system '" + name + "' does not cover the corpus");
  SystemOutput out;
  out.name = name;
  out.spans = spans;
  for (std::size_t s = 0; s < spans.size(); ++s)
    out.tags.push_back(SpansToTags(spans[s], reference.sentences[s].size()));
  return out;
}

CandidateTable CollectCandidates(std::span<const SystemOutput> outputs,
                                 std::size_t sentence) {
  if (outputs.empty()) throw Error("at least one system is required");
  CandidateTable table;
  table.num_systems = outputs.size();
  for (const auto &out : outputs) {
    if (out.size() != outputs.front().size() || sentence >= out.size())
      throw Error("system '" + out.name + "' is not aligned with the others");
    for (const auto &span : out.spans[sentence]) {
      auto it = std::find_if(
          table.candidates.begin(), table.candidates.end(),
          [&](const Candidate &c) { return c.begin == span.begin && c.end == span.end; });
      if (it == table.candidates.end())
        table.candidates.push_back(
            {span.begin, span.end,
             std::vector<std::string>(outputs.size(), kOutsideLabel)});
    }
  }
  std::sort(table.candidates.begin(), table.candidates.end(),
            [](const Candidate &a, const Candidate &b) {
              return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
            });
  for (std::size_t j = 0; j < outputs.size(); ++j)
    for (const auto &span : outputs[j].spans[sentence])
      for (auto &c : table.candidates)
        if (c.begin == span.begin && c.end == span.end) c.labels[j] = span.label;
  return table;
}

CombinedScore CombineVotes(std::span<const std::string> votes,
                           const Vector<double> &logits,
                           std::span<const std::string> labels) {
  const double shift = logits.maxCoeff();
  CombinedScore out;
  out.mass.assign(labels.size(), 0.0);
  for (const auto &vote : votes) {
    auto it = std::find(labels.begin(), labels.end(), vote);
    if (it == labels.end()) continue;
    const auto k = it - labels.begin();
    out.mass[k] += std::exp(logits(k) - shift);
  }
  double total = 0;
  for (std::size_t k = 0; k < out.mass.size(); ++k) {
    total += out.mass[k];
    if (out.mass[k] > out.mass[out.label]) out.label = static_cast<int>(k);
  }
  out.normalized = total > 0 ? out.mass[out.label] / total : 0.0;
  return out;
}

std::vector<ScoredSpan> SpannerCombine(const CandidateTable &table,
                                       const std::vector<std::string> &tokens,
                                       const TrainedModel &model) {
  std::vector<ScoredSpan> accepted;
  if (table.candidates.empty()) return accepted;
  const auto hidden = model.Encode(tokens);
  for (const auto &c : table.candidates) {
    const auto combined =
        CombineVotes(c.labels, model.SpanLogits(hidden, c.begin, c.end), model.labels);
    if (combined.label == 0 || combined.mass[combined.label] <= 0) continue;
    ScoredSpan scored;
    scored.span = Span{c.begin, c.end, model.labels[combined.label],
                       combined.normalized};
    scored.label_index = combined.label;
    double total = 0;
    for (double m : combined.mass) total += m;
    for (double m : combined.mass) scored.probs.push_back(m / total);
    accepted.push_back(std::move(scored));
  }
  return HeuristicDecode(std::move(accepted));
}

CorpusSpans SpannerCombineCorpus(std::span<const SystemOutput> outputs,
                                 const Corpus &corpus,
                                 const TrainedModel &model) {
  CorpusSpans out;
  out.reserve(corpus.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    SpanList spans;
    for (auto &scored : SpannerCombine(CollectCandidates(outputs, s),
                                       corpus.sentences[s].tokens, model))
      spans.push_back(std::move(scored.span));
    out.push_back(std::move(spans));
  }
  return out;
}

RankInterval ParseRankInterval(std::string_view text) {
  if (text == "all") return {1, 0};
  std::string_view body = text;
  if (body.starts_with("m[") && body.ends_with("]"))
    body = body.substr(2, body.size() - 3);
  const auto colon = body.find(':');
  if (colon == std::string_view::npos)
    throw Error("malformed rank interval '" + std::string(text) + "'");
  const auto lo = body.substr(0, colon);
  const auto hi = body.substr(colon + 1);
  RankInterval interval;
  interval.first = lo.empty() ? 1 : ParseBound(lo, text) + 1;
  interval.last = hi.empty() ? 0 : ParseBound(hi, text) + 1;
  return interval;
}

std::string FormatRankInterval(const RankInterval &interval) {
  std::string out = "m[";
  if (interval.first > 1) out += std::to_string(interval.first - 1);
  out += ':';
  if (interval.last != 0) out += std::to_string(interval.last - 1);
  return out + "]";
}

SystemOutput SynthesizeSystem(const Corpus &gold, const ErrorModel &errors,
                              std::uint64_t seed, const std::string &name) {
  for (double p : {errors.p_drop, errors.p_label_swap, errors.p_boundary_shift})
    if (!(p >= 0.0 && p <= 1.0)) throw Error("error probabilities must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution drop(errors.p_drop);
  std::bernoulli_distribution swap(errors.p_label_swap);
  std::bernoulli_distribution shift(errors.p_boundary_shift);
  std::bernoulli_distribution coin(0.5);
  const std::vector<std::string> entity_labels(gold.label_set.begin() + 1,
                                               gold.label_set.end());

  CorpusSpans spans;
  for (const auto &sentence : gold.sentences) {
    SpanList out;
    const auto &entities = sentence.gold_spans;
    for (std::size_t i = 0; i < entities.size(); ++i) {
      Span span = entities[i];
      if (!errors.target_labels.empty() &&
          std::find(errors.target_labels.begin(), errors.target_labels.end(),
                    span.label) == errors.target_labels.end()) {
        out.push_back(span);
        continue;
      }
      if (drop(rng)) continue;
      if (swap(rng) && entity_labels.size() > 1) {
        std::vector<std::string> others;
        for (const auto &l : entity_labels)
          if (l != span.label) others.push_back(l);
        std::uniform_int_distribution<std::size_t> pick(0, others.size() - 1);
        span.label = others[pick(rng)];
      }
      if (shift(rng)) {
        Span moved = span;
        const int delta = coin(rng) ? 1 : -1;
        (coin(rng) ? moved.begin : moved.end) += delta;
        bool ok = moved.begin >= 1 && moved.begin <= moved.end &&
                  moved.end <= sentence.size();
        for (std::size_t k = 0; ok && k < entities.size(); ++k)
          if (k != i && entities[k].overlaps(moved)) ok = false;
        for (const auto &kept : out)
          if (kept.overlaps(moved)) ok = false;
        if (ok) span = moved;
      }
      out.push_back(span);
    }
    spans.push_back(std::move(out));
  }
  return MakeSystemOutput(name, gold, spans);
}

}  // namespace spanner
