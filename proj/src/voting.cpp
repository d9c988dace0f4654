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

#include "spanner/voting.hpp"

#include <algorithm>
#include <cmath>

#include "spanner/log.hpp"

namespace spanner {
namespace {

bool Tied(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

struct Tally {
  std::string label;
  double score = 0;
  std::size_t first_voter = 0;
};

template <typename WeightFn>
SpanList Vote(const CandidateTable &table, WeightFn weight) {
  SpanList accepted;
  for (const auto &c : table.candidates) {
    std::vector<Tally> tallies;
    double total = 0;
    for (std::size_t j = 0; j < c.labels.size(); ++j) {
      const double w = weight(j, c.labels[j]);
      total += w;
      auto it = std::find_if(tallies.begin(), tallies.end(),
                             [&](const Tally &t) { return t.label == c.labels[j]; });
      if (it == tallies.end())
        tallies.push_back({c.labels[j], w, j});
      else
        it->score += w;
    }
    const Tally *best = nullptr;
    for (const auto &t : tallies) {
      if (!best || (!Tied(t.score, best->score) && t.score > best->score) ||
          (Tied(t.score, best->score) && t.first_voter < best->first_voter))
        best = &t;
    }
    if (!best || best->label == kOutsideLabel) continue;
    accepted.push_back(
        Span{c.begin, c.end, best->label, total > 0 ? best->score / total : 0.0});
  }
  return HeuristicDecode(std::move(accepted));
}

void CheckWeights(std::span<const double> weights, std::size_t systems,
                  bool need_positive) {
  if (weights.size() != systems)
    throw Error("expected " + std::to_string(systems) + " system weights, got " +
                std::to_string(weights.size()));
  for (double w : weights)
    if (!(w >= 0)) throw Error("voting weights must be non-negative");
  if (need_positive &&
      std::none_of(weights.begin(), weights.end(), [](double w) { return w > 0; }))
    throw Error("at least one voting weight must be positive");
}

}  // namespace

VoteWeights VoteWeights::FromSystems(std::span<const SystemOutput> systems) {
  VoteWeights weights;
  for (const auto &s : systems) {
    if (!s.overall_f1)
      throw Error("system '" + s.name + "' has no recorded overall F1");
    weights.overall.push_back(*s.overall_f1);
    weights.per_class.push_back(s.class_f1);
    weights.outside.push_back(s.macro_f1.value_or(*s.overall_f1));
  }
  return weights;
}

SpanList VoteMajority(const CandidateTable &table) {
  return Vote(table, [](std::size_t, const std::string &) { return 1.0; });
}

SpanList VoteWeightedOverall(const CandidateTable &table,
                             std::span<const double> weights) {
  CheckWeights(weights, table.num_systems, true);
  return Vote(table,
              [&](std::size_t j, const std::string &) { return weights[j]; });
}

SpanList VoteWeightedClass(
    const CandidateTable &table,
    const std::vector<std::map<std::string, double>> &class_weights,
    std::span<const double> outside_weights) {
  CheckWeights(outside_weights, table.num_systems, false);
  if (class_weights.size() != table.num_systems)
    throw Error("expected class weights for " +
                std::to_string(table.num_systems) + " systems");
  return Vote(table, [&](std::size_t j, const std::string &label) {
    if (label == kOutsideLabel) return outside_weights[j];
    auto it = class_weights[j].find(label);
    if (it != class_weights[j].end()) return it->second;
    Warn("no class weight for label '" + label + "' of system " +
         std::to_string(j + 1) + "; using 0");
    return 0.0;
  });
}

}  // namespace spanner
