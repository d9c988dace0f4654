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

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "spanner/span_model.hpp"

using namespace spanner;

namespace {

ModelDims SmallDims() {
  ModelDims d;
  d.vocab_size = 6;
  d.word_dim = 3;
  d.hidden_dim = 2;
  d.max_span_len = 3;
  d.length_dim = 2;
  d.num_labels = 3;
  return d;
}

std::vector<std::int32_t> Ids(std::initializer_list<int> ids) {
  return {ids.begin(), ids.end()};
}

}  // namespace

TEST_CASE("EnumerateSpans orders by length then start") {
  using P = std::pair<int, int>;
  CHECK(EnumerateSpans(3, 3) ==
        std::vector<P>{{1, 1}, {2, 2}, {3, 3}, {1, 2}, {2, 3}, {1, 3}});
  CHECK(EnumerateSpans(1, 5) == std::vector<P>{{1, 1}});
  CHECK(EnumerateSpans(4, 2).size() == 7);
  for (int n = 1; n <= 12; ++n)
    for (int l = 1; l <= n; ++l)
      CHECK(EnumerateSpans(n, l).size() ==
            static_cast<std::size_t>(n * l - l * (l - 1) / 2));
}

TEST_CASE("zero LSTM weights give zero hidden states") {
  std::mt19937_64 rng(3);
  auto p = InitUniform<double>(SmallDims(), rng, 0.1);
  for (auto *dir : {&p.forward, &p.backward}) {
    dir->input.setZero();
    dir->recurrent.setZero();
    dir->bias.setZero();
  }
  const auto h = Encode<double>(Ids({1, 2, 3}), p);
  CHECK(h.size() == 3);
  CHECK(h.states.cols() == 4);
  CHECK(h.states.isZero(0.0));
}

TEST_CASE("single token sentence has one row") {
  std::mt19937_64 rng(4);
  const auto p = InitUniform<double>(SmallDims(), rng, 0.5);
  const auto h = Encode<double>(Ids({4}), p);
  CHECK(h.size() == 1);
  CHECK(h.states.allFinite());
}

TEST_CASE("encoder matches a loop-based reference") {
  std::mt19937_64 rng(5);
  const auto p = InitUniform<double>(SmallDims(), rng, 0.8);
  const auto ids = Ids({2, 5, 1, 3});
  const auto h = Encode<double>(ids, p);
  const auto ref = oracle::BiStates(p, ids);
  for (int t = 0; t < 4; ++t)
    for (int k = 0; k < 4; ++k) CHECK(h.states(t, k) == doctest::Approx(ref[t][k]).epsilon(1e-12));
}

TEST_CASE("reversing the sentence swaps directions when both share weights") {
  std::mt19937_64 rng(6);
  auto p = InitUniform<double>(SmallDims(), rng, 0.5);
  p.backward = p.forward;
  const auto ids = Ids({1, 4, 2, 5, 3});
  auto rev = ids;
  std::reverse(rev.begin(), rev.end());
  const auto a = Encode<double>(ids, p);
  const auto b = Encode<double>(rev, p);
  const int n = 5, h = 2;
  for (int t = 0; t < n; ++t) {
    for (int k = 0; k < h; ++k) {
      CHECK(a.states(t, k) == doctest::Approx(b.states(n - 1 - t, h + k)));
      CHECK(a.states(t, h + k) == doctest::Approx(b.states(n - 1 - t, k)));
    }
  }
}

TEST_CASE("out of range token id is rejected") {
  std::mt19937_64 rng(7);
  const auto p = InitUniform<double>(SmallDims(), rng, 0.1);
  CHECK_THROWS_AS(Encode<double>(Ids({1, 6}), p), Error);
  CHECK_THROWS_AS(Encode<double>(Ids({-1}), p), Error);
}

TEST_CASE("span representation concatenates boundaries and length") {
  ModelDims d;
  d.vocab_size = 2;
  d.word_dim = 1;
  d.hidden_dim = 1;
  d.max_span_len = 2;
  d.length_dim = 1;
  d.num_labels = 2;
  auto p = ModelParams<double>::Zero(d);
  p.length_table << 9, 5;
  HiddenStates<double> h;
  h.states.resize(2, 2);
  h.states << 1, 2, 3, 4;
  const auto s = SpanRepresentation(h, 1, 2, p);
  CHECK(s.size() == d.span_dim());
  CHECK(s == Vector<double>{{1, 2, 3, 4, 5}});
  const auto single = SpanRepresentation(h, 2, 2, p);
  CHECK(single == Vector<double>{{3, 4, 3, 4, 9}});

  h.states << 1, 2, 1, 2;
  const auto one = SpanRepresentation(h, 1, 1, p);
  const auto two = SpanRepresentation(h, 1, 2, p);
  CHECK(one.head(4) == two.head(4));
  CHECK(one(4) != two(4));

  HiddenStates<double> three;
  three.states = Matrix<double>::Ones(3, 2);
  CHECK_THROWS_AS(SpanRepresentation(three, 1, 3, p), Error);
  CHECK(SpanRepresentation(three, 1, 3, p, true)(4) == 5);
  CHECK_THROWS_AS(SpanRepresentation(three, 0, 1, p), Error);
  CHECK_THROWS_AS(SpanRepresentation(three, 2, 4, p), Error);
}

TEST_CASE("score is exp of the dot product") {
  ModelDims d;
  d.hidden_dim = 1;
  d.length_dim = 1;
  d.num_labels = 3;
  auto p = ModelParams<double>::Zero(d);
  const Vector<double> s = Vector<double>::Unit(5, 4);
  p.classes(1, 4) = std::log(2.0);
  p.classes(2, 4) = std::log(0.5);
  CHECK(Score(s, 0, p) == 1.0);
  CHECK(Score(s, 1, p) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(Score(s, 2, p) == doctest::Approx(0.5).epsilon(1e-15));
  p.classes(1, 4) = 1e6;
  CHECK_THROWS_AS(Score(s, 1, p), Error);
  CHECK_THROWS_AS(Score(Vector<double>(Vector<double>::Zero(3)), 0, p), Error);
}

TEST_CASE("softmax closed forms") {
  const auto half = Softmax(Vector<double>{{0.7, 0.7}});
  CHECK(half(0) == doctest::Approx(0.5));
  CHECK(half(1) == doctest::Approx(0.5));
  const auto q = Softmax(Vector<double>{{0.0, std::log(3.0)}});
  CHECK(q(0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(q(1) == doctest::Approx(0.75).epsilon(1e-14));
  const auto big = Softmax(Vector<double>{{1000.0, 1000.0 + std::log(3.0)}});
  CHECK(big(1) == doctest::Approx(0.75).epsilon(1e-12));
  const Vector<double> z{{-1.0, 2.5, 0.3}};
  const Vector<double> shifted = (z.array() + 17.0).matrix();
  CHECK((Softmax(z) - Softmax(shifted)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("uniform predictions give loss ln c per span") {
  auto d = SmallDims();
  d.num_labels = 4;
  std::mt19937_64 rng(8);
  auto p = InitUniform<double>(d, rng, 0.3);
  p.classes.setZero();
  TrainingExample ex{Ids({1, 2, 3}), {}};
  for (auto [b, e] : EnumerateSpans(3, 3)) ex.spans.push_back({b, e, (b + e) % 4});
  const std::vector<TrainingExample> batch{ex};
  const auto lg = ComputeLossAndGradient<double>(batch, p);
  CHECK(lg.num_spans == 6);
  CHECK(lg.loss == doctest::Approx(std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    const auto t = oracle::RandomTinyProblem(rng);
    const auto lg = ComputeLossAndGradient<double>(t.batch, t.params);
    CHECK(lg.loss == doctest::Approx(oracle::Loss(t.batch, t.params)).epsilon(1e-12));
    const auto check = oracle::CheckGradient(t.batch, t.params, lg.gradient);
    INFO("worst block: " << check.worst_block);
    CHECK(check.max_rel_error < 1e-4);
  }
}

TEST_CASE("saturated softmax yields a vanishing gradient") {
  ModelDims d = SmallDims();
  std::mt19937_64 rng(9);
  auto p = InitUniform<double>(d, rng, 0.1);
  // Every span gets gold label 1; the length embedding carries a margin of 40.
  p.classes.setZero();
  p.length_table.setZero();
  p.length_table.col(0).setOnes();
  p.classes(1, 4 * d.hidden_dim) = 40.0;
  TrainingExample ex{Ids({3, 1, 4}), {}};
  for (auto [b, e] : EnumerateSpans(3, 3)) ex.spans.push_back({b, e, 1});
  const std::vector<TrainingExample> batch{ex};
  const auto lg = ComputeLossAndGradient<double>(batch, p);
  double norm2 = 0;
  ForEachBlock(lg.gradient, [&](const char *, const auto &g) { norm2 += g.squaredNorm(); });
  CHECK(std::sqrt(norm2) < 1e-8);
  CHECK(lg.loss < 1e-15);
}

TEST_CASE("empty batch yields zero loss and gradient") {
  std::mt19937_64 rng(10);
  const auto p = InitUniform<double>(SmallDims(), rng, 0.1);
  const std::vector<TrainingExample> batch{{Ids({1, 2}), {}}};
  const auto lg = ComputeLossAndGradient<double>(batch, p);
  CHECK(lg.loss == 0);
  CHECK(lg.num_spans == 0);
}

TEST_CASE("non-finite parameters are reported by block") {
  std::mt19937_64 rng(11);
  auto p = InitUniform<double>(SmallDims(), rng, 0.1);
  p.length_table(0, 0) = std::numeric_limits<double>::quiet_NaN();
  const std::vector<TrainingExample> batch{{Ids({1, 2}), {{1, 1, 0}}}};
  try {
    ComputeLossAndGradient<double>(batch, p);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("length_table") != std::string::npos);
  }
}

TEST_CASE("model is generic over the scalar type") {
  std::mt19937_64 rng(12);
  const auto t = oracle::RandomTinyProblem(rng);
  const auto wide = t.params.cast<long double>();
  const auto narrow = ComputeLossAndGradient<double>(t.batch, t.params);
  const auto precise = ComputeLossAndGradient<long double>(t.batch, wide);
  CHECK(static_cast<double>(precise.loss) == doctest::Approx(narrow.loss).epsilon(1e-12));
  const auto single = t.params.cast<float>();
  const auto f = ComputeLossAndGradient<float>(t.batch, single);
  CHECK(static_cast<double>(f.loss) == doctest::Approx(narrow.loss).epsilon(1e-5));
}

TEST_CASE("predict keeps only the entity span in London is beautiful") {
  // word_dim = hidden_dim = length_dim = 1; "London" has embedding 1, the
  // others 0. The forward LSTM passes its input straight through a saturated
  // input and output gate and forgets everything, so h_f = tanh(tanh(4 x)).
  ModelDims d;
  d.vocab_size = 5;
  d.word_dim = 1;
  d.hidden_dim = 1;
  d.max_span_len = 3;
  d.length_dim = 1;
  d.num_labels = 2;
  auto p = ModelParams<double>::Zero(d);
  p.embeddings(2, 0) = 1.0;
  p.forward.bias << 30, -30, 0, 30;
  p.forward.input(2, 0) = 4.0;
  p.length_table << -1, -5, -5;
  p.classes(1, 0) = 5;  // h_b forward
  p.classes(1, 2) = 5;  // h_e forward
  p.classes(1, 4) = 3;  // length
  const std::vector<std::string> labels{"O", "LOC"};
  const auto out = PredictSpans<double>(Ids({2, 3, 4}), p, labels, 3);
  REQUIRE(out.size() == 1);
  CHECK(out[0].span == Span{1, 1, "LOC"});
  CHECK(out[0].probs.size() == 2);
  CHECK(out[0].span.prob == doctest::Approx(out[0].probs[1]));

  const auto none = PredictSpans<double>(Ids({3, 4, 3}), p, labels, 3);
  CHECK(none.empty());
}

TEST_CASE("scored spans carry normalized distributions") {
  std::mt19937_64 rng(13);
  auto d = SmallDims();
  const auto p = InitUniform<double>(d, rng, 1.0);
  const std::vector<std::string> labels{"O", "A", "B"};
  const auto all = ScoreAllSpans<double>(Ids({1, 2, 3, 4, 5}), p, labels, 3);
  CHECK(all.size() == EnumerateSpans(5, 3).size());
  for (const auto &s : all) {
    double sum = 0, top = 0;
    for (double v : s.probs) {
      sum += v;
      top = std::max(top, v);
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
    CHECK(s.span.prob == top);
    CHECK(s.span.label == labels[s.label_index]);
  }
}
