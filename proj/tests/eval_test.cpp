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

#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "spanner/eval.hpp"
#include "spanner/log.hpp"
#include "spanner/synthetic.hpp"

using namespace spanner;

namespace {

Sentence MakeSentence(int n, SpanList spans) {
  Sentence s;
  for (int i = 1; i <= n; ++i) s.tokens.push_back("w" + std::to_string(i));
  s.gold_spans = std::move(spans);
  s.gold_tags = SpansToTags(s.gold_spans, n);
  return s;
}

// Eight gold entities, two per entity-length bucket, with one designed error
// pattern per bucket.
struct BucketFixture {
  Corpus gold;
  CorpusSpans pred;

  BucketFixture() {
    gold.label_set = {"O", "LOC", "PER"};
    gold.sentences = {
        MakeSentence(6, {{1, 1, "LOC"}, {3, 4, "PER"}}),
        MakeSentence(6, {{2, 2, "PER"}, {4, 5, "LOC"}}),
        MakeSentence(8, {{1, 3, "LOC"}, {5, 7, "PER"}}),
        MakeSentence(12, {{1, 4, "PER"}, {6, 10, "LOC"}}),
    };
    pred = {
        // XS both right; S: one right.
        {{1, 1, "LOC"}, {3, 4, "PER"}},
        // XS right; S: label error.
        {{2, 2, "PER"}, {4, 5, "PER"}},
        // L: one right, one truncated to length 2.
        {{1, 3, "LOC"}, {5, 6, "PER"}},
        // XL: (1,4) missed, (6,10) right, spurious length-4 span.
        {{2, 5, "PER"}, {6, 10, "LOC"}},
    };
  }
};

}  // namespace

TEST_CASE("perfect predictions score one") {
  BucketFixture f;
  const auto r = EntityF1(f.gold, GoldSpans(f.gold));
  CHECK(r.overall.gold == 8);
  CHECK(r.overall.f1() == 1.0);
  CHECK(r.overall.precision() == 1.0);
  CHECK(r.overall.recall() == 1.0);
  CHECK(r.macro_f1() == 1.0);
}

TEST_CASE("mixed boundary and label errors") {
  const CorpusSpans gold{{{1, 1, "LOC"}, {3, 4, "PER"}}};
  const CorpusSpans pred{{{1, 1, "LOC"}, {2, 2, "ORG"}}};
  const auto r = EntityF1(gold, pred);
  CHECK(r.overall.precision() == 0.5);
  CHECK(r.overall.recall() == 0.5);
  CHECK(r.overall.f1() == 0.5);
  CHECK(r.per_class.at("LOC").f1() == 1.0);
  CHECK(r.per_class.at("PER").recall() == 0.0);
  CHECK(r.per_class.at("ORG").precision() == 0.0);
  // Classes without gold entities do not enter the macro average.
  CHECK(r.macro_f1() == 0.5);
}

TEST_CASE("boundary-only and label-only errors") {
  const CorpusSpans gold{{{2, 3, "PER"}}, {{1, 2, "LOC"}}};
  CHECK(EntityF1(gold, CorpusSpans{{{2, 4, "PER"}}, {{1, 2, "LOC"}}}).overall.f1() == 0.5);
  CHECK(EntityF1(gold, CorpusSpans{{{2, 3, "LOC"}}, {{1, 2, "LOC"}}}).overall.f1() == 0.5);
  const auto r = EntityF1(gold, CorpusSpans{{{2, 3, "PER"}, {5, 5, "X"}}, {}});
  CHECK(r.overall.precision() == 0.5);
  CHECK(r.overall.recall() == 0.5);
  const auto r2 = EntityF1(gold, CorpusSpans{{{2, 3, "PER"}}, {}});
  CHECK(r2.overall.precision() == 1.0);
  CHECK(r2.overall.recall() == 0.5);
  CHECK(r2.overall.f1() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("empty predictions follow the zero convention") {
  const CorpusSpans gold{{{1, 1, "LOC"}}};
  const auto r = EntityF1(gold, CorpusSpans{{}});
  CHECK(r.overall.precision() == 0.0);
  CHECK(r.overall.recall() == 0.0);
  CHECK(r.overall.f1() == 0.0);
  CHECK(EntityF1(CorpusSpans{{}}, CorpusSpans{{}}).overall.f1() == 0.0);
}

TEST_CASE("entity F1 rejects overlapping predictions and misalignment") {
  const CorpusSpans gold{{{1, 1, "LOC"}}};
  CHECK_THROWS_AS(EntityF1(gold, CorpusSpans{{{1, 2, "A"}, {2, 3, "B"}}}), Error);
  CHECK_THROWS_AS(EntityF1(gold, CorpusSpans{}), Error);
}

TEST_CASE("precision and recall swap with the arguments") {
  const auto a = MakeLexiconCorpus(LexiconCorpusOptions::Default(), 30, 1);
  const auto b = MakeLexiconCorpus(LexiconCorpusOptions::Default(), 30, 2);
  CorpusSpans sa = GoldSpans(a), sb;
  // Align b's spans to a's sentence lengths by truncation.
  for (std::size_t i = 0; i < a.size(); ++i) {
    SpanList keep;
    for (const auto &s : b.sentences[i].gold_spans)
      if (s.end <= a.sentences[i].size()) keep.push_back(s);
    sb.push_back(keep);
  }
  const auto ab = EntityF1(sa, sb);
  const auto ba = EntityF1(sb, sa);
  CHECK(ab.overall.precision() == ba.overall.recall());
  CHECK(ab.overall.recall() == ba.overall.precision());
  CHECK(ab.overall.f1() == ba.overall.f1());
  const double p = ab.overall.precision(), r = ab.overall.recall();
  if (p + r > 0) CHECK(ab.overall.f1() == doctest::Approx(2 * p * r / (p + r)));
}

TEST_CASE("attributes of an entity") {
  const auto train = ParseConll(
      "Paris B-LOC\nis O\n\nParis B-LOC\nagain O\n\nPARIS B-LOC\n\nparis B-PER\n"
      "\nNew B-LOC\nYork I-LOC\n");
  const auto stats = TrainStats::Build(train);
  const std::vector<std::string> tokens{"New", "York", "is", "big", "and",
                                        "Paris", "is", "is", "is", "again"};
  const auto ny = ComputeAttributes({1, 2, "LOC"}, tokens, stats);
  CHECK(ny.entity_length == 2);
  CHECK(ny.sentence_length == 10);
  // "big" and "and" are out of vocabulary.
  CHECK(ny.oov_density == doctest::Approx(0.2));
  CHECK(ny.label_consistency == 1.0);
  CHECK(ComputeAttributes({6, 6, "LOC"}, tokens, stats).label_consistency == 0.75);
  CHECK(ComputeAttributes({6, 6, "PER"}, tokens, stats).label_consistency == 0.25);
  CHECK(ComputeAttributes({4, 4, "LOC"}, tokens, stats).label_consistency == 0.0);
  CHECK(SurfaceForm({1, 2, "LOC"}, tokens) == "New York");
}

TEST_CASE("bucketize with the default intervals") {
  using K = AttributeKind;
  CHECK(Bucketize(1.0, AttributeSpec::Default(K::kECon)) == Bucket::kXL);
  CHECK(Bucketize(0.0, AttributeSpec::Default(K::kECon)) == Bucket::kXS);
  CHECK(Bucketize(0.5, AttributeSpec::Default(K::kECon)) == Bucket::kS);
  CHECK(Bucketize(0.75, AttributeSpec::Default(K::kECon)) == Bucket::kL);
  CHECK(Bucketize(10, AttributeSpec::Default(K::kSLen)) == Bucket::kS);
  CHECK(Bucketize(7, AttributeSpec::Default(K::kSLen)) == Bucket::kS);
  CHECK(Bucketize(6, AttributeSpec::Default(K::kSLen)) == Bucket::kXS);
  CHECK(Bucketize(16, AttributeSpec::Default(K::kSLen)) == Bucket::kL);
  CHECK(Bucketize(124, AttributeSpec::Default(K::kSLen)) == Bucket::kXL);
  CHECK(Bucketize(0.0, AttributeSpec::Default(K::kODen)) == Bucket::kXS);
  CHECK(Bucketize(0.067, AttributeSpec::Default(K::kODen)) == Bucket::kS);
  CHECK(Bucketize(0.1, AttributeSpec::Default(K::kODen)) == Bucket::kL);
  CHECK(Bucketize(0.5, AttributeSpec::Default(K::kODen)) == Bucket::kXL);
  CHECK(Bucketize(1, AttributeSpec::Default(K::kELen)) == Bucket::kXS);
  CHECK(Bucketize(2, AttributeSpec::Default(K::kELen)) == Bucket::kS);
  CHECK(Bucketize(3, AttributeSpec::Default(K::kELen)) == Bucket::kL);
  CHECK(Bucketize(6, AttributeSpec::Default(K::kELen)) == Bucket::kXL);
}

TEST_CASE("out of range values clamp with a warning") {
  std::vector<std::string> warnings;
  auto previous = SetWarningHandler([&](std::string_view m) { warnings.emplace_back(m); });
  CHECK(Bucketize(200, AttributeSpec::Default(AttributeKind::kSLen)) == Bucket::kXL);
  CHECK(Bucketize(9, AttributeSpec::Default(AttributeKind::kELen)) == Bucket::kXL);
  CHECK(Bucketize(0, AttributeSpec::Default(AttributeKind::kELen)) == Bucket::kXS);
  SetWarningHandler(previous);
  CHECK(warnings.size() == 3);
}

TEST_CASE("attribute specs validate their intervals") {
  for (auto kind : kAllAttributes) CHECK_NOTHROW(AttributeSpec::Default(kind).Validate());
  auto spec = AttributeSpec::Default(AttributeKind::kSLen);
  spec.buckets[1].lo = 8;
  CHECK_THROWS_AS(spec.Validate(), Error);
  spec = AttributeSpec::Default(AttributeKind::kSLen);
  spec.buckets[1].lo_closed = false;
  CHECK_THROWS_AS(spec.Validate(), Error);
  for (auto kind : kAllAttributes) CHECK(ParseAttribute(AttributeName(kind)) == kind);
  CHECK_THROWS_AS(ParseAttribute("nope"), Error);
}

TEST_CASE("bucket F1 on the eight-entity fixture") {
  BucketFixture f;
  const TrainStats stats;
  const auto report = BucketF1(f.gold, f.pred, AttributeSpec::Default(AttributeKind::kELen), stats);
  CHECK(report.buckets[0].gold == 2);
  CHECK(report.buckets[1].gold == 2);
  CHECK(report.buckets[2].gold == 2);
  CHECK(report.buckets[3].gold == 2);
  CHECK(*report.f1(0) == 1.0);
  CHECK(report.buckets[1].predicted == 3);
  CHECK(*report.f1(1) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(*report.f1(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(*report.f1(3) == 0.5);

  const auto perfect = BucketF1All(f.gold, GoldSpans(f.gold), stats);
  const auto mine = BucketF1All(f.gold, f.pred, stats);
  const auto diff = HeatmapDiff(mine, perfect);
  const auto elen = std::find(diff.attributes.begin(), diff.attributes.end(),
                              AttributeKind::kELen) - diff.attributes.begin();
  CHECK(*diff.rows[elen][0] == 0.0);
  CHECK(*diff.rows[elen][1] == doctest::Approx(-0.6).epsilon(1e-15));
  CHECK(*diff.rows[elen][2] == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  CHECK(*diff.rows[elen][3] == -0.5);
}

TEST_CASE("empty buckets are absent") {
  const Corpus gold{{MakeSentence(3, {{1, 1, "LOC"}})}, {"O", "LOC"}};
  const auto r = BucketF1(gold, GoldSpans(gold), AttributeSpec::Default(AttributeKind::kELen), {});
  CHECK(r.f1(0).has_value());
  CHECK_FALSE(r.f1(1).has_value());
  CHECK_FALSE(r.f1(3).has_value());
  // A bucket with only false positives has F1 0, not absent.
  const CorpusSpans pred{{{1, 1, "LOC"}, {2, 3, "LOC"}}};
  CHECK(*BucketF1(gold, pred, AttributeSpec::Default(AttributeKind::kELen), {}).f1(1) == 0.0);
}

TEST_CASE("single-bucket corpus matches overall F1") {
  const Corpus gold{{MakeSentence(4, {{1, 1, "LOC"}, {3, 3, "PER"}}),
                     MakeSentence(4, {{2, 2, "LOC"}})},
                    {"O", "LOC", "PER"}};
  const CorpusSpans pred{{{1, 1, "LOC"}, {3, 3, "LOC"}}, {{4, 4, "PER"}}};
  const auto r = BucketF1(gold, pred, AttributeSpec::Default(AttributeKind::kELen), {});
  CHECK(*r.f1(0) == EntityF1(gold, pred).overall.f1());
}

TEST_CASE("bucket counts partition gold entities for every attribute") {
  const auto train = MakeLexiconCorpus(LexiconCorpusOptions::Default(), 40, 5);
  const auto test = MakeLexiconCorpus(LexiconCorpusOptions::Default(), 60, 6);
  const auto stats = TrainStats::Build(train);
  CorpusSpans pred = GoldSpans(test);
  for (std::size_t i = 0; i < pred.size(); i += 3) pred[i].clear();
  std::size_t total_pred = 0;
  for (const auto &s : pred) total_pred += s.size();
  for (const auto &report : BucketF1All(test, pred, stats)) {
    std::size_t g = 0, p = 0;
    for (const auto &b : report.buckets) {
      g += b.gold;
      p += b.predicted;
    }
    CHECK(g == test.num_entities());
    CHECK(p == total_pred);
  }
}

TEST_CASE("heatmap of a report against itself is zero and swapping negates") {
  BucketFixture f;
  const TrainStats stats;
  const auto a = BucketF1All(f.gold, f.pred, stats);
  const auto b = BucketF1All(f.gold, GoldSpans(f.gold), stats);
  const auto zero = HeatmapDiff(a, a);
  for (const auto &row : zero.rows)
    for (const auto &cell : row)
      if (cell) CHECK(*cell == 0.0);
  const auto ab = HeatmapDiff(a, b), ba = HeatmapDiff(b, a);
  for (std::size_t r = 0; r < ab.rows.size(); ++r) {
    for (int k = 0; k < kNumBuckets; ++k) {
      CHECK(ab.rows[r][k].has_value() == ba.rows[r][k].has_value());
      if (ab.rows[r][k]) CHECK(*ab.rows[r][k] == -*ba.rows[r][k]);
    }
  }
  auto other = b;
  other[0].spec.buckets[0].hi = 0.01;
  CHECK_THROWS_AS(HeatmapDiff(a, other), Error);
  CHECK(ab.ToCsv().rfind("attribute,XS,S,L,XL\n", 0) == 0);
}

TEST_CASE("report CSV lists overall then classes") {
  const CorpusSpans gold{{{1, 1, "LOC"}, {3, 4, "PER"}}};
  const CorpusSpans pred{{{1, 1, "LOC"}, {2, 2, "ORG"}}};
  const auto csv = ReportToCsv(EntityF1(gold, pred));
  CHECK(csv.rfind("class,gold,predicted,correct,precision,recall,f1\noverall,2,2,1,", 0) == 0);
  CHECK(csv.find("\nLOC,1,1,1,") != std::string::npos);
}
