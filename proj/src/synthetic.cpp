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

#include "spanner/synthetic.hpp"

#include <algorithm>
#include <random>

namespace spanner {

LexiconCorpusOptions LexiconCorpusOptions::Default() {
  LexiconCorpusOptions o;
  o.lexicon = {
      {{"John", "Smith"}, "PER"},      {{"Maria"}, "PER"},
      {{"Ahmed", "Khan"}, "PER"},      {{"London"}, "LOC"},
      {{"New", "York"}, "LOC"},        {{"Lake", "Geneva"}, "LOC"},
      {{"Acme", "Corp"}, "ORG"},       {{"Reuters"}, "ORG"},
      {{"World", "Cup"}, "MISC"},      {{"Olympics"}, "MISC"},
  };
  o.fillers = {"the",   "a",     "of",      "in",     "said",   "on",
               "was",   "and",   "to",      "visited", "met",   "with",
               "after", "today", "reported", "about",  "from",  "new",
               "game",  "talks", "city",    "late",   "during", "week"};
  return o;
}

Corpus MakeLexiconCorpus(const LexiconCorpusOptions &options,
                         std::size_t num_sentences, std::uint64_t seed) {
  if (options.lexicon.empty() || options.fillers.empty())
    throw Error("lexicon corpus needs entries and fillers");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> length(options.min_length, options.max_length);
  std::uniform_int_distribution<int> count(1, std::max(1, options.max_entities));
  std::uniform_int_distribution<std::size_t> entry(0, options.lexicon.size() - 1);
  std::uniform_int_distribution<std::size_t> filler(0, options.fillers.size() - 1);

  Corpus corpus;
  for (std::size_t s = 0; s < num_sentences; ++s) {
    // Build a sequence of slots: fillers and entity placeholders.
    const int n_fill = length(rng);
    const int n_ent = count(rng);
    std::vector<int> slots(static_cast<std::size_t>(n_fill), -1);
    for (int k = 0; k < n_ent; ++k) {
      std::uniform_int_distribution<std::size_t> where(0, slots.size());
      slots.insert(slots.begin() + static_cast<std::ptrdiff_t>(where(rng)),
                   static_cast<int>(entry(rng)));
    }
    Sentence sentence;
    int prev_entity = -1;
    for (int slot : slots) {
      if (slot < 0) {
        sentence.tokens.push_back(options.fillers[filler(rng)]);
        sentence.gold_tags.emplace_back(kOutsideLabel);
        prev_entity = -1;
        continue;
      }
      // Keep adjacent entities apart so BIO boundaries stay unambiguous.
      if (prev_entity >= 0) {
        sentence.tokens.push_back(options.fillers[filler(rng)]);
        sentence.gold_tags.emplace_back(kOutsideLabel);
      }
      const auto &e = options.lexicon[static_cast<std::size_t>(slot)];
      for (std::size_t t = 0; t < e.tokens.size(); ++t) {
        sentence.tokens.push_back(e.tokens[t]);
        sentence.gold_tags.push_back((t == 0 ? "B-" : "I-") + e.label);
      }
      prev_entity = slot;
    }
    corpus.sentences.push_back(std::move(sentence));
  }
  corpus.tag_scheme = TagScheme::kBIO;
  RebuildSpans(corpus, DecodeMode::kStrict);
  return corpus;
}

}  // namespace spanner
