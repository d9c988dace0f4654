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

#ifndef SPANNER_VOTING_HPP_
#define SPANNER_VOTING_HPP_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "spanner/combiner.hpp"

namespace spanner {

// Per-system voting weights. `overall` drives weighted-overall voting;
// `per_class` and `outside` drive weighted-class voting, where `outside` is
// the weight of a system's "O" vote.
struct VoteWeights {
  std::vector<double> overall;
  std::vector<std::map<std::string, double>> per_class;
  std::vector<double> outside;

  // Overall F1, class F1 and macro F1 (for "O") read off each system.
  static VoteWeights FromSystems(std::span<const SystemOutput> systems);
};

// Systems are assumed to appear in the table in rank order: on a tie, the
// label voted by the best-ranked system among the tied labels wins. "O"
// winners are dropped and overlaps decoded with priority = winning share of
// the total vote.
SpanList VoteMajority(const CandidateTable &table);
SpanList VoteWeightedOverall(const CandidateTable &table,
                             std::span<const double> weights);
// A class weight missing for some system counts as 0, with a warning.
SpanList VoteWeightedClass(const CandidateTable &table,
                           const std::vector<std::map<std::string, double>> &class_weights,
                           std::span<const double> outside_weights);

}  // namespace spanner

#endif  // SPANNER_VOTING_HPP_
