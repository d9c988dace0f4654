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

// Reference implementations used only by tests. They are written with plain
// loops and share no arithmetic with the library.
#ifndef SPANNER_TESTS_ORACLES_HPP_
#define SPANNER_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "spanner/span_model.hpp"

namespace oracle {

using spanner::ModelParams;
using spanner::TrainingExample;

inline double Sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One LSTM direction over `xs` (already in processing order).
inline std::vector<std::vector<double>> LstmStates(
    const spanner::LstmParams<double> &p,
    const std::vector<std::vector<double>> &xs) {
  const int h = static_cast<int>(p.recurrent.cols());
  const int d = static_cast<int>(p.input.cols());
  std::vector<double> hp(h, 0.0), cp(h, 0.0);
  std::vector<std::vector<double>> out;
  for (const auto &x : xs) {
    std::vector<double> a(4 * h);
    for (int r = 0; r < 4 * h; ++r) {
      double v = p.bias(r);
      for (int k = 0; k < d; ++k) v += p.input(r, k) * x[k];
      for (int k = 0; k < h; ++k) v += p.recurrent(r, k) * hp[k];
      a[r] = v;
    }
    std::vector<double> hn(h), cn(h);
    for (int k = 0; k < h; ++k) {
      const double i = Sig(a[k]), f = Sig(a[h + k]);
      const double g = std::tanh(a[2 * h + k]), o = Sig(a[3 * h + k]);
      cn[k] = f * cp[k] + i * g;
      hn[k] = o * std::tanh(cn[k]);
    }
    hp = hn;
    cp = cn;
    out.push_back(hn);
  }
  return out;
}

// Row t is [forward_t ; backward_t].
inline std::vector<std::vector<double>> BiStates(
    const ModelParams<double> &p, const std::vector<std::int32_t> &ids) {
  std::vector<std::vector<double>> xs;
  for (auto id : ids) {
    std::vector<double> x(p.embeddings.cols());
    for (int k = 0; k < static_cast<int>(x.size()); ++k) x[k] = p.embeddings(id, k);
    xs.push_back(x);
  }
  auto fwd = LstmStates(p.forward, xs);
  std::reverse(xs.begin(), xs.end());
  auto bwd = LstmStates(p.backward, xs);
  std::reverse(bwd.begin(), bwd.end());
  std::vector<std::vector<double>> rows;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    auto row = fwd[t];
    row.insert(row.end(), bwd[t].begin(), bwd[t].end());
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<double> SpanVec(const std::vector<std::vector<double>> &rows,
                                   const ModelParams<double> &p, int b, int e) {
  std::vector<double> s = rows[b - 1];
  s.insert(s.end(), rows[e - 1].begin(), rows[e - 1].end());
  const int len = std::min<int>(e - b + 1, static_cast<int>(p.length_table.rows()));
  for (int k = 0; k < p.length_table.cols(); ++k) s.push_back(p.length_table(len - 1, k));
  return s;
}

inline std::vector<double> Dot(const ModelParams<double> &p,
                               const std::vector<double> &s) {
  std::vector<double> z(p.classes.rows(), 0.0);
  for (int c = 0; c < p.classes.rows(); ++c)
    for (std::size_t k = 0; k < s.size(); ++k) z[c] += p.classes(c, k) * s[k];
  return z;
}

// Mean of -log softmax(z)[gold] over every listed span.
inline double Loss(const std::vector<TrainingExample> &batch,
                   const ModelParams<double> &p) {
  double total = 0;
  std::size_t count = 0;
  for (const auto &ex : batch) {
    if (ex.spans.empty()) continue;
    const auto rows = BiStates(p, ex.token_ids);
    for (const auto &sp : ex.spans) {
      const auto z = Dot(p, SpanVec(rows, p, sp.begin, sp.end));
      double denom = 0;
      for (double v : z) denom += std::exp(v);
      total += -std::log(std::exp(z[sp.label]) / denom);
      ++count;
    }
  }
  return count ? total / count : 0.0;
}

struct GradCheck {
  double max_rel_error = 0;
  std::string worst_block;
  std::size_t checked = 0;
};

inline constexpr double kRelFloor = 1e-6;

inline double RelError(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), kRelFloor});
}

// Central differences of `Loss` against an analytic gradient, every entry of
// every block. The padding embedding row is skipped; the analytic gradient
// for it must be exactly zero.
inline GradCheck CheckGradient(const std::vector<TrainingExample> &batch,
                               ModelParams<double> params,
                               const ModelParams<double> &analytic,
                               double eps = 1e-4) {
  GradCheck out;
  const ModelParams<double> &grad = analytic;
  spanner::ForEachBlockPair(params, grad, [&](const char *name, auto &w,
                                              const auto &g) {
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (std::string(name) == "embeddings" && r == 0) {
          if (g(r, c) != 0.0) {
            out.max_rel_error = std::max(out.max_rel_error, 1.0);
            out.worst_block = "embeddings(pad)";
          }
          continue;
        }
        const double saved = w(r, c);
        w(r, c) = saved + eps;
        const double up = Loss(batch, params);
        w(r, c) = saved - eps;
        const double down = Loss(batch, params);
        w(r, c) = saved;
        const double err = RelError(g(r, c), (up - down) / (2 * eps));
        ++out.checked;
        if (err > out.max_rel_error) {
          out.max_rel_error = err;
          out.worst_block = name;
        }
      }
    }
  });
  return out;
}

struct TinyProblem {
  spanner::ModelDims dims;
  ModelParams<double> params;
  std::vector<TrainingExample> batch;
};

// Random dims in [1, 8], one or two sentences of at most five tokens, every
// enumerated span labelled at random. Token ids avoid the padding row.
inline TinyProblem RandomTinyProblem(std::mt19937_64 &rng, double scale = 0.5) {
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  TinyProblem t;
  t.dims.vocab_size = pick(3, 8);
  t.dims.word_dim = pick(1, 8);
  t.dims.hidden_dim = pick(1, 8);
  t.dims.max_span_len = pick(1, 5);
  t.dims.length_dim = pick(1, 8);
  t.dims.num_labels = pick(2, 5);
  t.params = spanner::InitUniform<double>(t.dims, rng, scale);
  const int sentences = pick(1, 2);
  for (int s = 0; s < sentences; ++s) {
    TrainingExample ex;
    const int n = pick(1, 5);
    for (int i = 0; i < n; ++i) ex.token_ids.push_back(pick(1, t.dims.vocab_size - 1));
    for (auto [b, e] : spanner::EnumerateSpans(n, t.dims.max_span_len))
      ex.spans.push_back({b, e, pick(0, t.dims.num_labels - 1)});
    t.batch.push_back(std::move(ex));
  }
  return t;
}

// Combined mass per label: for each system voting l, add exp(z_l) / exp(max z).
// Returns the argmax over `labels` (first maximum) and the masses.
inline std::pair<int, std::vector<double>> CombineByHand(
    const std::vector<std::string> &votes, const std::vector<double> &logits,
    const std::vector<std::string> &labels) {
  double top = logits[0];
  for (double z : logits) top = std::max(top, z);
  std::vector<double> mass(labels.size(), 0.0);
  for (const auto &v : votes)
    for (std::size_t k = 0; k < labels.size(); ++k)
      if (labels[k] == v) mass[k] = mass[k] + std::exp(logits[k] - top);
  int best = 0;
  for (std::size_t k = 1; k < mass.size(); ++k)
    if (mass[k] > mass[best]) best = static_cast<int>(k);
  return {best, mass};
}

// Two-sided exact signed-rank p-value by enumerating every sign assignment of
// the given absolute ranks.
inline double EnumeratedSignedRankP(const std::vector<double> &ranks,
                                    double observed_w_plus) {
  const int n = static_cast<int>(ranks.size());
  double total = 0;
  for (double r : ranks) total += r;
  const double mean = total / 2;
  const double observed_dev = std::abs(observed_w_plus - mean);
  std::uint64_t extreme = 0;
  const std::uint64_t all = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < all; ++mask) {
    double w = 0;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) w += ranks[i];
    if (std::abs(w - mean) >= observed_dev - 1e-9) ++extreme;
  }
  return std::min(1.0, static_cast<double>(extreme) / static_cast<double>(all));
}

// Average ranks of |d| by sorting, assigned with a pairwise count.
inline std::vector<double> RanksByCounting(const std::vector<double> &d) {
  std::vector<double> ranks;
  for (double x : d) {
    int less = 0, equal = 0;
    for (double y : d) {
      if (std::abs(y) < std::abs(x)) ++less;
      else if (std::abs(y) == std::abs(x)) ++equal;
    }
    ranks.push_back(less + (equal + 1) / 2.0);
  }
  return ranks;
}

}  // namespace oracle

#endif  // SPANNER_TESTS_ORACLES_HPP_
