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

#ifndef SPANNER_WILCOXON_HPP_
#define SPANNER_WILCOXON_HPP_

#include <span>
#include <vector>

namespace spanner {

struct WilcoxonResult {
  // min(W+, W-) over the non-zero differences.
  double statistic = 0;
  double w_plus = 0;
  double w_minus = 0;
  double p_value = 1.0;
  int n = 0;  // pairs left after dropping zero differences
  bool exact = false;
  bool degenerate = false;  // every difference was zero
  bool significant = false;  // p < 0.05
};

// Average ranks (1-based) of |d| with ties sharing the mean rank.
std::vector<double> AbsoluteRanks(std::span<const double> diffs);

// Two-sided Wilcoxon signed-rank test on paired samples. Exact null
// distribution for n <= 25, tie-corrected normal approximation beyond.
WilcoxonResult WilcoxonSignedRank(std::span<const double> x,
                                  std::span<const double> y);

// The two p-value routes, exposed for cross-checking. Both take the
// non-zero paired differences.
double WilcoxonExactP(std::span<const double> diffs);
double WilcoxonNormalP(std::span<const double> diffs);

}  // namespace spanner

#endif  // SPANNER_WILCOXON_HPP_
