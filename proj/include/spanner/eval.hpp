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

#ifndef SPANNER_EVAL_HPP_
#define SPANNER_EVAL_HPP_

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "spanner/corpus.hpp"
#include "spanner/types.hpp"

namespace spanner {

// Entity counts for one scope; all ratios are 0 when undefined.
struct Prf {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;

  double precision() const;
  double recall() const;
  double f1() const;
  Prf &operator+=(const Prf &other);
};

struct EvalReport {
  Prf overall;
  std::map<std::string, Prf> per_class;

  // Unweighted mean of per-class F1 over classes with gold entities.
  double macro_f1() const;
};

// A prediction is correct iff both boundaries and the label match a gold span.
// Predicted spans within a sentence must not overlap.
EvalReport EntityF1(const CorpusSpans &gold, const CorpusSpans &pred);
EvalReport EntityF1(const Corpus &gold, const CorpusSpans &pred);

CorpusSpans GoldSpans(const Corpus &corpus);

// Attributes

enum class AttributeKind { kECon, kSLen, kELen, kODen };
inline constexpr std::array<AttributeKind, 4> kAllAttributes = {
    AttributeKind::kECon, AttributeKind::kSLen, AttributeKind::kELen,
    AttributeKind::kODen};

std::string_view AttributeName(AttributeKind kind);
AttributeKind ParseAttribute(std::string_view name);

// Training-side statistics the attribute functions need.
struct TrainStats {
  std::unordered_set<std::string> vocab;  // case-sensitive
  // Lowercased entity surface form -> label -> count.
  std::unordered_map<std::string, std::map<std::string, int>> surface_labels;

  static TrainStats Build(const Corpus &train);
};

struct EntityAttributes {
  double entity_length = 0;
  double sentence_length = 0;
  double oov_density = 0;
  double label_consistency = 0;

  double get(AttributeKind kind) const;
};

std::string SurfaceForm(const Span &span, const std::vector<std::string> &tokens);

EntityAttributes ComputeAttributes(const Span &entity,
                                   const std::vector<std::string> &tokens,
                                   const TrainStats &stats);

// Buckets

enum class Bucket { kXS = 0, kS, kL, kXL };
inline constexpr int kNumBuckets = 4;
std::string_view BucketName(Bucket bucket);

struct Interval {
  double lo = 0;
  double hi = 0;
  bool lo_closed = true;
  bool hi_closed = true;

  bool contains(double v) const;
};

struct AttributeSpec {
  AttributeKind kind = AttributeKind::kELen;
  std::array<Interval, kNumBuckets> buckets;

  // Default intervals:
  //   eCon  {0}, (0,0.5], (0.5,1), {1}
  //   sLen  [1,7), [7,16), [16,31), [31,124]
  //   eLen  {1}, {2}, {3}, (3,6]
  //   oDen  {0}, (0,0.067], (0.067,0.203], (0.203,1]
  static AttributeSpec Default(AttributeKind kind);

  // Throws unless the intervals are ordered and tile a contiguous range.
  void Validate() const;
};

bool operator==(const Interval &a, const Interval &b);
bool operator==(const AttributeSpec &a, const AttributeSpec &b);

// Values outside the covered range go to the nearest end bucket, with a
// warning.
Bucket Bucketize(double value, const AttributeSpec &spec);

struct BucketReport {
  AttributeSpec spec;
  std::array<Prf, kNumBuckets> buckets;

  // Absent when the bucket holds neither gold nor predicted entities.
  std::optional<double> f1(int bucket) const;
};

// Gold and predicted entities are each bucketed by their own attribute values.
BucketReport BucketF1(const Corpus &gold, const CorpusSpans &pred,
                      const AttributeSpec &spec, const TrainStats &stats);
std::vector<BucketReport> BucketF1All(const Corpus &gold,
                                      const CorpusSpans &pred,
                                      const TrainStats &stats);

struct Heatmap {
  std::vector<AttributeKind> attributes;
  // Row per attribute: F1_a - F1_b per bucket, absent where either is.
  std::vector<std::array<std::optional<double>, kNumBuckets>> rows;

  std::string ToCsv() const;
};

Heatmap HeatmapDiff(const std::vector<BucketReport> &a,
                    const std::vector<BucketReport> &b);

std::string ReportToCsv(const EvalReport &report);

}  // namespace spanner

#endif  // SPANNER_EVAL_HPP_
