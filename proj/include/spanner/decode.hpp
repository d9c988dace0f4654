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

#ifndef SPANNER_DECODE_HPP_
#define SPANNER_DECODE_HPP_

#include <algorithm>
#include <vector>

#include "spanner/types.hpp"

namespace spanner {

// A candidate span with its full label distribution. `span.prob` holds the
// probability of `span.label`, which is the distribution's argmax.
struct ScoredSpan {
  Span span;
  int label_index = 0;
  std::vector<double> probs;
};

inline const Span &SpanOf(const Span &s) { return s; }
inline const Span &SpanOf(const ScoredSpan &s) { return s.span; }

// Greedy overlap removal: highest probability first (ties prefer the longer
// span, then the smaller start); a span is accepted iff it overlaps nothing
// accepted so far. Identical positions count as overlapping. Output is sorted
// by start.
template <typename T>
std::vector<T> HeuristicDecode(std::vector<T> spans) {
  std::stable_sort(spans.begin(), spans.end(), [](const T &x, const T &y) {
    const Span &a = SpanOf(x);
    const Span &b = SpanOf(y);
    if (a.prob != b.prob) return a.prob > b.prob;
    if (a.length() != b.length()) return a.length() > b.length();
    return a.begin < b.begin;
  });
  std::vector<T> kept;
  for (auto &candidate : spans) {
    const Span &c = SpanOf(candidate);
    bool clash = std::any_of(kept.begin(), kept.end(), [&](const T &k) {
      return SpanOf(k).overlaps(c);
    });
    if (!clash) kept.push_back(std::move(candidate));
  }
  std::sort(kept.begin(), kept.end(), [](const T &x, const T &y) {
    return SpanOf(x).begin < SpanOf(y).begin;
  });
  return kept;
}

}  // namespace spanner

#endif  // SPANNER_DECODE_HPP_
