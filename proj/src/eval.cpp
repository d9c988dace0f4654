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

#include "spanner/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "spanner/log.hpp"

namespace spanner {
namespace {

double Ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string Lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void CheckNonOverlapping(const SpanList &spans, std::size_t sentence) {
  for (std::size_t i = 0; i < spans.size(); ++i)
    for (std::size_t j = i + 1; j < spans.size(); ++j)
      if (spans[i].overlaps(spans[j]))
        throw Error("overlapping predicted spans in sentence " +
                    std::to_string(sentence) + "; decode before scoring");
}

}  // namespace

double Prf::precision() const { return Ratio(correct, predicted); }
double Prf::recall() const { return Ratio(correct, gold); }
double Prf::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

Prf &Prf::operator+=(const Prf &other) {
  gold += other.gold;
  predicted += other.predicted;
  correct += other.correct;
  return *this;
}

double EvalReport::macro_f1() const {
  double sum = 0;
  int n = 0;
  for (const auto &[label, prf] : per_class) {
    if (prf.gold == 0) continue;
    sum += prf.f1();
    ++n;
  }
  return n == 0 ? 0.0 : sum / n;
}

EvalReport EntityF1(const CorpusSpans &gold, const CorpusSpans &pred) {
  if (gold.size() != pred.size())
    throw Error("prediction covers " + std::to_string(pred.size()) +
                " sentences, gold has " + std::to_string(gold.size()));
  EvalReport report;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    CheckNonOverlapping(pred[s], s);
    for (const auto &g : gold[s]) ++report.per_class[g.label].gold;
    for (const auto &p : pred[s]) {
      auto &cls = report.per_class[p.label];
      ++cls.predicted;
      if (std::find(gold[s].begin(), gold[s].end(), p) != gold[s].end())
        ++cls.correct;
    }
  }
  for (const auto &[label, prf] : report.per_class) report.overall += prf;
  return report;
}

EvalReport EntityF1(const Corpus &gold, const CorpusSpans &pred) {
  return EntityF1(GoldSpans(gold), pred);
}

CorpusSpans GoldSpans(const Corpus &corpus) {
  CorpusSpans out;
  out.reserve(corpus.size());
  for (const auto &s : corpus.sentences) out.push_back(s.gold_spans);
  return out;
}

std::string_view AttributeName(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::kECon: return "eCon";
    case AttributeKind::kSLen: return "sLen";
    case AttributeKind::kELen: return "eLen";
    case AttributeKind::kODen: return "oDen";
  }
  return "?";
}

AttributeKind ParseAttribute(std::string_view name) {
  for (auto kind : kAllAttributes)
    if (AttributeName(kind) == name) return kind;
  throw Error("unknown attribute '" + std::string(name) +
              "' (expected eCon, sLen, eLen or oDen)");
}

TrainStats TrainStats::Build(const Corpus &train) {
  TrainStats stats;
  for (const auto &sentence : train.sentences) {
    stats.vocab.insert(sentence.tokens.begin(), sentence.tokens.end());
    for (const auto &span : sentence.gold_spans)
      ++stats.surface_labels[Lowercase(SurfaceForm(span, sentence.tokens))]
                            [span.label];
  }
  return stats;
}

double EntityAttributes::get(AttributeKind kind) const {
  switch (kind) {
    case AttributeKind::kECon: return label_consistency;
    case AttributeKind::kSLen: return sentence_length;
    case AttributeKind::kELen: return entity_length;
    case AttributeKind::kODen: return oov_density;
  }
  return 0;
}

std::string SurfaceForm(const Span &span,
                        const std::vector<std::string> &tokens) {
  std::string out;
  for (int i = span.begin; i <= span.end; ++i) {
    if (i > span.begin) out += ' ';
    out += tokens.at(static_cast<std::size_t>(i - 1));
  }
  return out;
}

EntityAttributes ComputeAttributes(const Span &entity,
                                   const std::vector<std::string> &tokens,
                                   const TrainStats &stats) {
  EntityAttributes attrs;
  attrs.entity_length = entity.length();
  attrs.sentence_length = static_cast<double>(tokens.size());
  const auto oov = std::count_if(
      tokens.begin(), tokens.end(),
      [&](const std::string &t) { return !stats.vocab.count(t); });
  attrs.oov_density =
      tokens.empty() ? 0.0 : static_cast<double>(oov) / tokens.size();
  auto it = stats.surface_labels.find(Lowercase(SurfaceForm(entity, tokens)));
  if (it != stats.surface_labels.end()) {
    int total = 0;
    for (const auto &[label, count] : it->second) total += count;
    auto match = it->second.find(entity.label);
    const int same = match == it->second.end() ? 0 : match->second;
    attrs.label_consistency = total == 0 ? 0.0 : double(same) / total;
  }
  return attrs;
}

std::string_view BucketName(Bucket bucket) {
  static constexpr std::string_view kNames[] = {"XS", "S", "L", "XL"};
  return kNames[static_cast<int>(bucket)];
}

bool Interval::contains(double v) const {
  const bool above = lo_closed ? v >= lo : v > lo;
  const bool below = hi_closed ? v <= hi : v < hi;
  return above && below;
}

bool operator==(const Interval &a, const Interval &b) {
  return a.lo == b.lo && a.hi == b.hi && a.lo_closed == b.lo_closed &&
         a.hi_closed == b.hi_closed;
}

bool operator==(const AttributeSpec &a, const AttributeSpec &b) {
  return a.kind == b.kind && a.buckets == b.buckets;
}

AttributeSpec AttributeSpec::Default(AttributeKind kind) {
  AttributeSpec spec{kind, {}};
  switch (kind) {
    case AttributeKind::kECon:
      spec.buckets = {Interval{0, 0, true, true}, Interval{0, 0.5, false, true},
                      Interval{0.5, 1, false, false},
                      Interval{1, 1, true, true}};
      break;
    case AttributeKind::kSLen:
      spec.buckets = {Interval{1, 7, true, false}, Interval{7, 16, true, false},
                      Interval{16, 31, true, false},
                      Interval{31, 124, true, true}};
      break;
    case AttributeKind::kELen:
      spec.buckets = {Interval{1, 1, true, true}, Interval{1, 2, false, true},
                      Interval{2, 3, false, true}, Interval{3, 6, false, true}};
      break;
    case AttributeKind::kODen:
      spec.buckets = {Interval{0, 0, true, true},
                      Interval{0, 0.067, false, true},
                      Interval{0.067, 0.203, false, true},
                      Interval{0.203, 1, false, true}};
      break;
  }
  return spec;
}

void AttributeSpec::Validate() const {
  const std::string name(AttributeName(kind));
  for (int i = 0; i < kNumBuckets; ++i) {
    const auto &b = buckets[i];
    if (b.lo > b.hi || (b.lo == b.hi && !(b.lo_closed && b.hi_closed)))
      throw Error(name + " bucket " + std::string(BucketName(Bucket(i))) +
                  " is empty or inverted");
    if (i == 0) continue;
    const auto &prev = buckets[i - 1];
    if (prev.hi != b.lo || prev.hi_closed == b.lo_closed)
      throw Error(name + " buckets " +
                  std::string(BucketName(Bucket(i - 1))) + " and " +
                  std::string(BucketName(Bucket(i))) +
                  " do not meet at a single shared endpoint");
  }
}

Bucket Bucketize(double value, const AttributeSpec &spec) {
  for (int i = 0; i < kNumBuckets; ++i)
    if (spec.buckets[i].contains(value)) return Bucket(i);
  const bool low = std::isnan(value) || value <= spec.buckets.front().lo;
  const Bucket clamped = low ? Bucket::kXS : Bucket::kXL;
  Warn(std::string(AttributeName(spec.kind)) + " value " +
       FormatNumber(value) + " outside bucket range; clamped to " +
       std::string(BucketName(clamped)));
  return clamped;
}

std::optional<double> BucketReport::f1(int bucket) const {
  const Prf &prf = buckets.at(bucket);
  if (prf.gold == 0 && prf.predicted == 0) return std::nullopt;
  return prf.f1();
}

BucketReport BucketF1(const Corpus &gold, const CorpusSpans &pred,
                      const AttributeSpec &spec, const TrainStats &stats) {
  spec.Validate();
  if (gold.size() != pred.size())
    throw Error("prediction covers " + std::to_string(pred.size()) +
                " sentences, gold has " + std::to_string(gold.size()));
  BucketReport report{spec, {}};
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto &sentence = gold.sentences[s];
    auto bucket_of = [&](const Span &span) {
      return static_cast<int>(Bucketize(
          ComputeAttributes(span, sentence.tokens, stats).get(spec.kind),
          spec));
    };
    for (const auto &g : sentence.gold_spans)
      ++report.buckets[bucket_of(g)].gold;
    for (const auto &p : pred[s]) {
      auto &cell = report.buckets[bucket_of(p)];
      ++cell.predicted;
      if (std::find(sentence.gold_spans.begin(), sentence.gold_spans.end(),
                    p) != sentence.gold_spans.end())
        ++cell.correct;
    }
  }
  return report;
}

std::vector<BucketReport> BucketF1All(const Corpus &gold,
                                      const CorpusSpans &pred,
                                      const TrainStats &stats) {
  std::vector<BucketReport> out;
  for (auto kind : kAllAttributes)
    out.push_back(BucketF1(gold, pred, AttributeSpec::Default(kind), stats));
  return out;
}

Heatmap HeatmapDiff(const std::vector<BucketReport> &a,
                    const std::vector<BucketReport> &b) {
  if (a.size() != b.size())
    throw Error("heatmap operands cover different attribute sets");
  Heatmap map;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].spec == b[i].spec))
      throw Error("bucket specs differ for attribute " +
                  std::string(AttributeName(a[i].spec.kind)));
    map.attributes.push_back(a[i].spec.kind);
    auto &row = map.rows.emplace_back();
    for (int k = 0; k < kNumBuckets; ++k) {
      const auto fa = a[i].f1(k), fb = b[i].f1(k);
      if (fa && fb) row[k] = *fa - *fb;
    }
  }
  return map;
}

std::string Heatmap::ToCsv() const {
  std::string out = "attribute,XS,S,L,XL\n";
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    out += AttributeName(attributes[i]);
    for (const auto &cell : rows[i]) {
      out += ',';
      if (cell) out += FormatNumber(*cell);
    }
    out += '\n';
  }
  return out;
}

std::string ReportToCsv(const EvalReport &report) {
  std::string out = "class,gold,predicted,correct,precision,recall,f1\n";
  auto row = [&](const std::string &name, const Prf &prf) {
    out += name + ',' + std::to_string(prf.gold) + ',' +
           std::to_string(prf.predicted) + ',' + std::to_string(prf.correct) +
           ',' + FormatNumber(prf.precision()) + ',' +
           FormatNumber(prf.recall()) + ',' + FormatNumber(prf.f1()) + '\n';
  };
  row("overall", report.overall);
  for (const auto &[label, prf] : report.per_class) row(label, prf);
  return out;
}

}  // namespace spanner
