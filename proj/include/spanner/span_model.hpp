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

#ifndef SPANNER_SPAN_MODEL_HPP_
#define SPANNER_SPAN_MODEL_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spanner/decode.hpp"
#include "spanner/types.hpp"

namespace spanner {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct ModelDims {
  int vocab_size = 2;
  int word_dim = 50;
  int hidden_dim = 50;
  int max_span_len = 6;
  int length_dim = 16;
  int num_labels = 2;

  int span_dim() const { return 4 * hidden_dim + length_dim; }
};

// One LSTM direction. Gate rows are stacked as input, forget, cell, output.
template <typename Scalar>
struct LstmParams {
  Matrix<Scalar> input;      // 4H x D
  Matrix<Scalar> recurrent;  // 4H x H
  Vector<Scalar> bias;       // 4H
};

template <typename Scalar>
struct ModelParams {
  Matrix<Scalar> embeddings;  // |V| x D, row 0 is padding
  LstmParams<Scalar> forward;
  LstmParams<Scalar> backward;
  Matrix<Scalar> length_table;  // L_max x Dl, row l-1 embeds length l
  Matrix<Scalar> classes;       // c x (4H + Dl), one row per label

  static ModelParams Zero(const ModelDims &dims) {
    const int h = dims.hidden_dim;
    ModelParams p;
    p.embeddings = Matrix<Scalar>::Zero(dims.vocab_size, dims.word_dim);
    for (auto *dir : {&p.forward, &p.backward}) {
      dir->input = Matrix<Scalar>::Zero(4 * h, dims.word_dim);
      dir->recurrent = Matrix<Scalar>::Zero(4 * h, h);
      dir->bias = Vector<Scalar>::Zero(4 * h);
    }
    p.length_table = Matrix<Scalar>::Zero(dims.max_span_len, dims.length_dim);
    p.classes = Matrix<Scalar>::Zero(dims.num_labels, dims.span_dim());
    return p;
  }

  template <typename To>
  ModelParams<To> cast() const {
    ModelParams<To> p;
    p.embeddings = embeddings.template cast<To>();
    for (auto [dst, src] : {std::pair{&p.forward, &forward},
                            std::pair{&p.backward, &backward}}) {
      dst->input = src->input.template cast<To>();
      dst->recurrent = src->recurrent.template cast<To>();
      dst->bias = src->bias.template cast<To>();
    }
    p.length_table = length_table.template cast<To>();
    p.classes = classes.template cast<To>();
    return p;
  }

  ModelDims dims() const {
    return {static_cast<int>(embeddings.rows()),
            static_cast<int>(embeddings.cols()),
            static_cast<int>(forward.recurrent.cols()),
            static_cast<int>(length_table.rows()),
            static_cast<int>(length_table.cols()),
            static_cast<int>(classes.rows())};
  }
};

// Visits every parameter block by name, in a fixed order.
template <typename Params, typename F>
void ForEachBlock(Params &p, F &&f) {
  f("embeddings", p.embeddings);
  f("lstm_forward.input", p.forward.input);
  f("lstm_forward.recurrent", p.forward.recurrent);
  f("lstm_forward.bias", p.forward.bias);
  f("lstm_backward.input", p.backward.input);
  f("lstm_backward.recurrent", p.backward.recurrent);
  f("lstm_backward.bias", p.backward.bias);
  f("length_table", p.length_table);
  f("classes", p.classes);
}

template <typename Scalar, typename F>
void ForEachBlockPair(ModelParams<Scalar> &a, const ModelParams<Scalar> &b,
                      F &&f) {
  f("embeddings", a.embeddings, b.embeddings);
  f("lstm_forward.input", a.forward.input, b.forward.input);
  f("lstm_forward.recurrent", a.forward.recurrent, b.forward.recurrent);
  f("lstm_forward.bias", a.forward.bias, b.forward.bias);
  f("lstm_backward.input", a.backward.input, b.backward.input);
  f("lstm_backward.recurrent", a.backward.recurrent, b.backward.recurrent);
  f("lstm_backward.bias", a.backward.bias, b.backward.bias);
  f("length_table", a.length_table, b.length_table);
  f("classes", a.classes, b.classes);
}

// Uniform(-range, range) everywhere except the zero padding row.
template <typename Scalar, typename Rng>
ModelParams<Scalar> InitUniform(const ModelDims &dims, Rng &rng,
                                Scalar range = Scalar(0.1)) {
  std::uniform_real_distribution<double> dist(-static_cast<double>(range),
                                              static_cast<double>(range));
  auto p = ModelParams<Scalar>::Zero(dims);
  ForEachBlock(p, [&](const char *, auto &block) {
    for (Eigen::Index i = 0; i < block.size(); ++i)
      block.data()[i] = static_cast<Scalar>(dist(rng));
  });
  p.embeddings.row(0).setZero();
  return p;
}

// Per-token BiLSTM states, one row per token: [forward ; backward].
template <typename Scalar>
struct HiddenStates {
  Matrix<Scalar> states;  // n x 2H
  int size() const { return static_cast<int>(states.rows()); }
};

namespace detail {

template <typename Scalar>
Scalar Sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

// Activations of one LSTM direction, columns in processing order.
template <typename Scalar>
struct LstmTrace {
  Matrix<Scalar> gates;   // 4H x n, post-activation
  Matrix<Scalar> cells;   // H x n
  Matrix<Scalar> hidden;  // H x n
};

template <typename Scalar>
LstmTrace<Scalar> RunLstm(const LstmParams<Scalar> &p,
                          const Matrix<Scalar> &inputs) {
  const Eigen::Index h = p.recurrent.cols();
  const Eigen::Index n = inputs.cols();
  LstmTrace<Scalar> trace{Matrix<Scalar>(4 * h, n), Matrix<Scalar>(h, n),
                          Matrix<Scalar>(h, n)};
  Vector<Scalar> prev_h = Vector<Scalar>::Zero(h);
  Vector<Scalar> prev_c = Vector<Scalar>::Zero(h);
  for (Eigen::Index t = 0; t < n; ++t) {
    Vector<Scalar> a = p.input * inputs.col(t) + p.recurrent * prev_h + p.bias;
    for (Eigen::Index k = 0; k < h; ++k) {
      a(k) = Sigmoid(a(k));
      a(h + k) = Sigmoid(a(h + k));
      a(2 * h + k) = std::tanh(a(2 * h + k));
      a(3 * h + k) = Sigmoid(a(3 * h + k));
    }
    auto i = a.segment(0, h);
    auto f = a.segment(h, h);
    auto g = a.segment(2 * h, h);
    auto o = a.segment(3 * h, h);
    prev_c = f.cwiseProduct(prev_c) + i.cwiseProduct(g);
    prev_h = o.cwiseProduct(prev_c.array().tanh().matrix());
    trace.gates.col(t) = a;
    trace.cells.col(t) = prev_c;
    trace.hidden.col(t) = prev_h;
  }
  return trace;
}

// Backpropagation through time. `d_hidden` is the loss gradient with respect
// to each hidden output (H x n, processing order). Accumulates parameter
// gradients into `grad` and returns the gradient for the inputs (D x n).
template <typename Scalar>
Matrix<Scalar> BackpropLstm(const LstmParams<Scalar> &p,
                            const Matrix<Scalar> &inputs,
                            const LstmTrace<Scalar> &trace,
                            const Matrix<Scalar> &d_hidden,
                            LstmParams<Scalar> &grad) {
  const Eigen::Index h = p.recurrent.cols();
  const Eigen::Index n = inputs.cols();
  Matrix<Scalar> d_inputs(inputs.rows(), n);
  Vector<Scalar> dh_next = Vector<Scalar>::Zero(h);
  Vector<Scalar> dc_next = Vector<Scalar>::Zero(h);
  Vector<Scalar> da(4 * h);
  const Vector<Scalar> zero = Vector<Scalar>::Zero(h);
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const auto gates = trace.gates.col(t);
    const Vector<Scalar> c = trace.cells.col(t);
    const Vector<Scalar> c_prev = t > 0 ? Vector<Scalar>(trace.cells.col(t - 1)) : zero;
    const Vector<Scalar> h_prev = t > 0 ? Vector<Scalar>(trace.hidden.col(t - 1)) : zero;
    const Vector<Scalar> dh = d_hidden.col(t) + dh_next;
    for (Eigen::Index k = 0; k < h; ++k) {
      const Scalar i = gates(k), f = gates(h + k), g = gates(2 * h + k),
                   o = gates(3 * h + k);
      const Scalar tc = std::tanh(c(k));
      const Scalar dc = dh(k) * o * (Scalar(1) - tc * tc) + dc_next(k);
      da(k) = dc * g * i * (Scalar(1) - i);
      da(h + k) = dc * c_prev(k) * f * (Scalar(1) - f);
      da(2 * h + k) = dc * i * (Scalar(1) - g * g);
      da(3 * h + k) = dh(k) * tc * o * (Scalar(1) - o);
      dc_next(k) = dc * f;
    }
    grad.input.noalias() += da * inputs.col(t).transpose();
    grad.recurrent.noalias() += da * h_prev.transpose();
    grad.bias += da;
    d_inputs.col(t).noalias() = p.input.transpose() * da;
    dh_next.noalias() = p.recurrent.transpose() * da;
  }
  return d_inputs;
}

template <typename Scalar>
struct EncoderTrace {
  Matrix<Scalar> inputs;  // D x n, token order
  Matrix<Scalar> reversed_inputs;
  LstmTrace<Scalar> forward;
  LstmTrace<Scalar> backward;  // processing order is reversed token order
  HiddenStates<Scalar> states;
};

template <typename Scalar>
EncoderTrace<Scalar> EncodeWithTrace(std::span<const std::int32_t> ids,
                                     const ModelParams<Scalar> &params) {
  const Eigen::Index n = static_cast<Eigen::Index>(ids.size());
  const Eigen::Index h = params.forward.recurrent.cols();
  EncoderTrace<Scalar> tr;
  tr.inputs.resize(params.embeddings.cols(), n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto id = ids[t];
    if (id < 0 || id >= params.embeddings.rows())
      throw Error("token id " + std::to_string(id) +
                  " outside embedding table of " +
                  std::to_string(params.embeddings.rows()) + " rows");
    tr.inputs.col(t) = params.embeddings.row(id).transpose();
  }
  tr.reversed_inputs = tr.inputs.rowwise().reverse();
  tr.forward = RunLstm(params.forward, tr.inputs);
  tr.backward = RunLstm(params.backward, tr.reversed_inputs);
  tr.states.states.resize(n, 2 * h);
  tr.states.states.leftCols(h) = tr.forward.hidden.transpose();
  tr.states.states.rightCols(h) =
      tr.backward.hidden.rowwise().reverse().transpose();
  return tr;
}

}  // namespace detail

template <typename Scalar>
HiddenStates<Scalar> Encode(std::span<const std::int32_t> ids,
                            const ModelParams<Scalar> &params) {
  return detail::EncodeWithTrace(ids, params).states;
}

// All (begin, end) with end - begin < max_len, ordered by length then start.
inline std::vector<std::pair<int, int>> EnumerateSpans(int n, int max_len) {
  std::vector<std::pair<int, int>> out;
  for (int len = 1; len <= std::min(n, max_len); ++len)
    for (int b = 1; b + len - 1 <= n; ++b) out.emplace_back(b, b + len - 1);
  return out;
}

// [h_b ; h_e ; length embedding]. With clamp_length, spans longer than the
// table reuse its last row; otherwise they are rejected.
template <typename Scalar>
Vector<Scalar> SpanRepresentation(const HiddenStates<Scalar> &hidden, int begin,
                                  int end, const ModelParams<Scalar> &params,
                                  bool clamp_length = false) {
  const int n = hidden.size();
  if (begin < 1 || end < begin || end > n)
    throw Error("span [" + std::to_string(begin) + "," + std::to_string(end) +
                "] outside sentence of length " + std::to_string(n));
  int len = end - begin + 1;
  const int max_len = static_cast<int>(params.length_table.rows());
  if (len > max_len) {
    if (!clamp_length)
      throw Error("span length " + std::to_string(len) +
                  " exceeds length table size " + std::to_string(max_len));
    len = max_len;
  }
  const Eigen::Index hd = hidden.states.cols();
  Vector<Scalar> s(2 * hd + params.length_table.cols());
  s << hidden.states.row(begin - 1).transpose(),
      hidden.states.row(end - 1).transpose(),
      params.length_table.row(len - 1).transpose();
  return s;
}

template <typename Scalar>
Vector<Scalar> Logits(const Vector<Scalar> &span_repr,
                      const ModelParams<Scalar> &params) {
  if (span_repr.size() != params.classes.cols())
    throw Error("span representation has dimension " +
                std::to_string(span_repr.size()) + ", expected " +
                std::to_string(params.classes.cols()));
  return params.classes * span_repr;
}

// exp(s . y_k), unnormalized.
template <typename Scalar>
Scalar Score(const Vector<Scalar> &span_repr, int label,
             const ModelParams<Scalar> &params) {
  const Scalar value = std::exp(Logits(span_repr, params)(label));
  if (!std::isfinite(static_cast<double>(value)))
    throw Error("non-finite score for label " + std::to_string(label));
  return value;
}

// Max-shifted so large logits do not overflow.
template <typename Scalar>
Vector<Scalar> Softmax(const Vector<Scalar> &logits) {
  Vector<Scalar> p = (logits.array() - logits.maxCoeff()).exp().matrix();
  return p / p.sum();
}

template <typename Scalar>
Vector<Scalar> PredictProba(const Vector<Scalar> &span_repr,
                            const ModelParams<Scalar> &params) {
  return Softmax(Logits(span_repr, params));
}

struct LabeledPosition {
  int begin = 0;
  int end = 0;
  int label = 0;
};

struct TrainingExample {
  std::vector<std::int32_t> token_ids;
  // Spans the loss is taken over, each with exactly one gold label index.
  std::vector<LabeledPosition> spans;
};

template <typename Scalar>
struct LossAndGradient {
  Scalar loss = 0;
  ModelParams<Scalar> gradient;
  std::size_t num_spans = 0;
};

// Mean span-level cross entropy over every listed span in the batch, with
// analytic gradients. The padding embedding row receives no gradient.
template <typename Scalar>
LossAndGradient<Scalar> ComputeLossAndGradient(
    std::span<const TrainingExample> batch, const ModelParams<Scalar> &params) {
  LossAndGradient<Scalar> out;
  out.gradient = ModelParams<Scalar>::Zero(params.dims());
  for (const auto &ex : batch) out.num_spans += ex.spans.size();
  if (out.num_spans == 0) return out;
  const Scalar scale = Scalar(1) / static_cast<Scalar>(out.num_spans);
  const Eigen::Index h = params.forward.recurrent.cols();
  const Eigen::Index dl = params.length_table.cols();
  const int max_len = static_cast<int>(params.length_table.rows());
  auto &grad = out.gradient;

  for (const auto &ex : batch) {
    if (ex.spans.empty()) continue;
    const auto tr = detail::EncodeWithTrace<Scalar>(ex.token_ids, params);
    const Eigen::Index n = tr.states.size();
    Matrix<Scalar> d_states = Matrix<Scalar>::Zero(n, 2 * h);
    for (const auto &sp : ex.spans) {
      const Vector<Scalar> s =
          SpanRepresentation(tr.states, sp.begin, sp.end, params);
      const Vector<Scalar> logits = params.classes * s;
      const Scalar shift = logits.maxCoeff();
      const Scalar log_norm =
          shift + std::log((logits.array() - shift).exp().sum());
      out.loss += (log_norm - logits(sp.label)) * scale;
      Vector<Scalar> d_logits = (logits.array() - log_norm).exp().matrix();
      d_logits(sp.label) -= Scalar(1);
      d_logits *= scale;
      grad.classes.noalias() += d_logits * s.transpose();
      const Vector<Scalar> ds = params.classes.transpose() * d_logits;
      d_states.row(sp.begin - 1) += ds.segment(0, 2 * h).transpose();
      d_states.row(sp.end - 1) += ds.segment(2 * h, 2 * h).transpose();
      grad.length_table.row(std::min(sp.end - sp.begin + 1, max_len) - 1) +=
          ds.segment(4 * h, dl).transpose();
    }
    const Matrix<Scalar> d_fwd = d_states.leftCols(h).transpose();
    const Matrix<Scalar> d_bwd =
        d_states.rightCols(h).transpose().rowwise().reverse();
    const Matrix<Scalar> dx_fwd = detail::BackpropLstm(
        params.forward, tr.inputs, tr.forward, d_fwd, grad.forward);
    const Matrix<Scalar> dx_bwd = detail::BackpropLstm(
        params.backward, tr.reversed_inputs, tr.backward, d_bwd, grad.backward);
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto id = ex.token_ids[t];
      if (id == 0) continue;
      grad.embeddings.row(id) +=
          (dx_fwd.col(t) + dx_bwd.col(n - 1 - t)).transpose();
    }
  }

  if (!std::isfinite(static_cast<double>(out.loss))) {
    std::string culprit = "forward pass";
    ForEachBlock(params, [&](const char *name, const auto &block) {
      if (culprit == "forward pass" && !block.allFinite()) culprit = name;
    });
    throw Error("non-finite loss; offending block: " + culprit);
  }
  return out;
}

// All enumerated spans with their label distributions; `labels` names the
// rows of the class matrix.
template <typename Scalar>
std::vector<ScoredSpan> ScoreAllSpans(std::span<const std::int32_t> ids,
                                      const ModelParams<Scalar> &params,
                                      std::span<const std::string> labels,
                                      int max_len) {
  std::vector<ScoredSpan> out;
  if (ids.empty()) return out;
  const auto hidden = Encode<Scalar>(ids, params);
  for (auto [b, e] : EnumerateSpans(static_cast<int>(ids.size()), max_len)) {
    const Vector<Scalar> p =
        PredictProba(SpanRepresentation(hidden, b, e, params), params);
    Eigen::Index best;
    p.maxCoeff(&best);
    ScoredSpan scored;
    scored.span = Span{b, e, labels[best], static_cast<double>(p(best))};
    scored.label_index = static_cast<int>(best);
    scored.probs.assign(p.data(), p.data() + p.size());
    out.push_back(std::move(scored));
  }
  return out;
}

// Entities only: spans whose argmax label is not "O" (label index 0), then
// overlap-decoded.
template <typename Scalar>
std::vector<ScoredSpan> PredictSpans(std::span<const std::int32_t> ids,
                                     const ModelParams<Scalar> &params,
                                     std::span<const std::string> labels,
                                     int max_len) {
  std::vector<ScoredSpan> entities;
  for (auto &s : ScoreAllSpans(ids, params, labels, max_len))
    if (s.label_index != 0) entities.push_back(std::move(s));
  return HeuristicDecode(std::move(entities));
}

}  // namespace spanner

#endif  // SPANNER_SPAN_MODEL_HPP_
