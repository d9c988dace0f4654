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

#include "spanner/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spanner/types.hpp"

namespace spanner {
namespace {

constexpr int kExactLimit = 25;

double PositiveRankSum(std::span<const double> diffs,
                       const std::vector<double> &ranks) {
  double sum = 0;
  for (std::size_t i = 0; i < diffs.size(); ++i)
    if (diffs[i] > 0) sum += ranks[i];
  return sum;
}

}  // namespace

std::vector<double> AbsoluteRanks(std::span<const double> diffs) {
  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(diffs[a]) < std::abs(diffs[b]);
  });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n &&
           std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]]))
      ++j;
    const double mean = (static_cast<double>(i + 1) + (j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean;
    i = j + 1;
  }
  return ranks;
}

// Counts, over all 2^n sign assignments, how many give a positive rank sum at
// least as far from its mean as the observed one. Ranks are doubled so tied
// half-ranks stay integral; the distribution is built by subset-sum counting.
double WilcoxonExactP(std::span<const double> diffs) {
  const auto ranks = AbsoluteRanks(diffs);
  std::vector<int> doubled;
  for (double r : ranks) doubled.push_back(static_cast<int>(std::lround(2 * r)));
  const int total = std::accumulate(doubled.begin(), doubled.end(), 0);
  std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
  counts[0] = 1;
  int reach = 0;
  for (int r : doubled) {
    for (int s = reach; s >= 0; --s)
      if (counts[s] != 0) counts[s + r] += counts[s];
    reach += r;
  }
  const long observed =
      std::lround(2 * PositiveRankSum(diffs, ranks));
  // Distances from the mean, all doubled again to stay integral.
  const long dist = std::labs(2 * observed - total);
  double extreme = 0;
  for (int s = 0; s <= total; ++s)
    if (std::labs(2L * s - total) >= dist) extreme += counts[s];
  const double p = extreme / std::ldexp(1.0, static_cast<int>(diffs.size()));
  return std::min(1.0, p);
}

double WilcoxonNormalP(std::span<const double> diffs) {
  const auto ranks = AbsoluteRanks(diffs);
  const double n = static_cast<double>(diffs.size());
  const double mean = n * (n + 1) / 4.0;
  double variance = n * (n + 1) * (2 * n + 1) / 24.0;
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    variance -= (t * t * t - t) / 48.0;
    i = j;
  }
  if (variance <= 0) return 1.0;
  const double w = PositiveRankSum(diffs, ranks);
  // Continuity correction toward the mean.
  const double dev = std::max(0.0, std::abs(w - mean) - 0.5);
  const double z = dev / std::sqrt(variance);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

WilcoxonResult WilcoxonSignedRank(std::span<const double> x,
                                  std::span<const double> y) {
  if (x.size() != y.size())
    throw Error("paired samples differ in length: " +
                std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  std::vector<double> diffs;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] - y[i] != 0.0) diffs.push_back(x[i] - y[i]);

  WilcoxonResult result;
  result.n = static_cast<int>(diffs.size());
  if (diffs.empty()) {
    result.degenerate = true;
    return result;
  }
  const auto ranks = AbsoluteRanks(diffs);
  result.w_plus = PositiveRankSum(diffs, ranks);
  result.w_minus = result.n * (result.n + 1) / 2.0 - result.w_plus;
  result.statistic = std::min(result.w_plus, result.w_minus);
  result.exact = result.n <= kExactLimit;
  result.p_value = result.exact ? WilcoxonExactP(diffs) : WilcoxonNormalP(diffs);
  result.significant = result.p_value < 0.05;
  return result;
}

}  // namespace spanner
