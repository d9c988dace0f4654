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

#ifndef SPANNER_TYPES_HPP_
#define SPANNER_TYPES_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spanner {

inline constexpr const char *kOutsideLabel = "O";

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the CoNLL reader; carries the 1-based source line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string &what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A labeled entity span over 1-based inclusive token positions [begin, end].
// The sentence is implied by the container the span sits in.
struct Span {
  int begin = 0;
  int end = 0;
  std::string label;
  double prob = 1.0;

  int length() const { return end - begin + 1; }
  bool overlaps(const Span &other) const {
    return begin <= other.end && other.begin <= end;
  }
  bool same_position(const Span &other) const {
    return begin == other.begin && end == other.end;
  }
};

// Position and label equality; probability is a score, not identity.
inline bool operator==(const Span &a, const Span &b) {
  return a.begin == b.begin && a.end == b.end && a.label == b.label;
}

using SpanList = std::vector<Span>;

// One list of spans per sentence.
using CorpusSpans = std::vector<SpanList>;

}  // namespace spanner

#endif  // SPANNER_TYPES_HPP_
