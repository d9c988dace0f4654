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

#ifndef SPANNER_CORPUS_HPP_
#define SPANNER_CORPUS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spanner/types.hpp"

namespace spanner {

// IOB1 is accepted on input only and is rewritten to BIO while loading.
enum class TagScheme { kBIO, kBIOES, kIOB1 };

TagScheme ParseTagScheme(std::string_view name);
std::string_view TagSchemeName(TagScheme scheme);

enum class DecodeMode { kStrict, kLenient };

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<std::string> gold_tags;
  SpanList gold_spans;

  int size() const { return static_cast<int>(tokens.size()); }
};

struct Corpus {
  std::vector<Sentence> sentences;
  // "O" first, then entity labels in lexicographic order.
  std::vector<std::string> label_set{kOutsideLabel};
  TagScheme tag_scheme = TagScheme::kBIO;

  std::size_t size() const { return sentences.size(); }
  std::size_t num_entities() const;
  // Index into label_set, or -1.
  int label_index(std::string_view label) const;
};

struct ConllOptions {
  int token_col = 0;
  // Negative values count from the last column.
  int tag_col = -1;
  TagScheme scheme = TagScheme::kBIO;
  DecodeMode mode = DecodeMode::kStrict;
};

// Reads whitespace-separated column data. Blank lines end sentences and
// "-DOCSTART-" lines are skipped.
Corpus ParseConll(std::string_view text, const ConllOptions &options = {});
Corpus ReadConllFile(const std::string &path, const ConllOptions &options = {});

// Writes "token tag" lines with a blank line after every sentence.
std::string WriteConll(const Corpus &corpus);
// Writes tokens of `corpus` with tags derived from `spans`.
std::string WriteConll(const Corpus &corpus, const CorpusSpans &spans,
                       TagScheme scheme = TagScheme::kBIO);

// Decodes a tag sequence into sorted, non-overlapping spans. Lenient mode
// treats a continuation tag with no matching open entity as a new start.
SpanList TagsToSpans(std::span<const std::string> tags,
                     TagScheme scheme = TagScheme::kBIO,
                     DecodeMode mode = DecodeMode::kStrict);

std::vector<std::string> SpansToTags(std::span<const Span> spans, int n,
                                     TagScheme scheme = TagScheme::kBIO);

// Recomputes gold_spans from gold_tags and label_set from the spans.
void RebuildSpans(Corpus &corpus, DecodeMode mode);

class Vocab {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;

  Vocab();
  // Words ordered by descending frequency, ties lexicographic.
  static Vocab Build(const Corpus &train, int min_count = 1);
  static Vocab FromWords(std::vector<std::string> words);

  std::int32_t id(std::string_view word) const;
  bool contains(std::string_view word) const;
  const std::string &word(std::int32_t id) const { return words_.at(id); }
  std::size_t size() const { return words_.size(); }
  // Index-ordered words including the two specials.
  const std::vector<std::string> &words() const { return words_; }

  std::vector<std::int32_t> Encode(std::span<const std::string> tokens) const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

}  // namespace spanner

#endif  // SPANNER_CORPUS_HPP_
