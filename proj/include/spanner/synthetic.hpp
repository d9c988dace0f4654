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

#ifndef SPANNER_SYNTHETIC_HPP_
#define SPANNER_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "spanner/corpus.hpp"

namespace spanner {

struct LexiconEntry {
  std::vector<std::string> tokens;
  std::string label;
};

struct LexiconCorpusOptions {
  std::vector<LexiconEntry> lexicon;
  std::vector<std::string> fillers;
  int min_length = 4;
  int max_length = 12;
  int max_entities = 2;

  // Ten unambiguous entries over PER, LOC, ORG and MISC plus a filler pool
  // disjoint from every entity token.
  static LexiconCorpusOptions Default();
};

// Sentences of filler tokens with one to `max_entities` lexicon entries
// placed at random non-adjacent positions, tagged in BIO.
Corpus MakeLexiconCorpus(const LexiconCorpusOptions &options,
                         std::size_t num_sentences, std::uint64_t seed);

}  // namespace spanner

#endif  // SPANNER_SYNTHETIC_HPP_
