// Copyright 2026 The Commitgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commitgen/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "commitgen/errors.h"

namespace commitgen {
namespace {

constexpr double kLayerNormEpsilon = 1e-5;

std::string JoinLines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Building blocks. Each forward takes an optional cache; a null cache means
// inference and nothing is retained.

template <typename T>
struct LayerNormCache {
  Matrix<T> normalized;
  std::vector<T> inv_std;
};

template <typename T>
Matrix<T> LayerNormForward(const Matrix<T>& x, const LayerNormWeights<T>& w,
                           LayerNormCache<T>* cache) {
  const Eigen::Index rows = x.rows();
  Matrix<T> normalized(rows, x.cols());
  std::vector<T> inv_std(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const T mean = x.row(r).mean();
    auto centered = (x.row(r).array() - mean).matrix();
    const T var = centered.squaredNorm() / static_cast<T>(x.cols());
    const T inv = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEpsilon));
    normalized.row(r) = centered * inv;
    inv_std[static_cast<std::size_t>(r)] = inv;
  }
  Matrix<T> y = (normalized.array().rowwise() * w.gain.row(0).array()).matrix();
  y.rowwise() += w.bias.row(0);
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

template <typename T>
Matrix<T> LayerNormBackward(const Matrix<T>& dy, const LayerNormWeights<T>& w,
                            const LayerNormCache<T>& cache, LayerNormWeights<T>* grad) {
  grad->gain += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
  grad->bias += dy.colwise().sum();
  const Matrix<T> dnorm = (dy.array().rowwise() * w.gain.row(0).array()).matrix();
  Matrix<T> dx(dy.rows(), dy.cols());
  const T n = static_cast<T>(dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const T mean_d = dnorm.row(r).sum() / n;
    const T mean_dx = dnorm.row(r).dot(cache.normalized.row(r)) / n;
    dx.row(r) = (dnorm.row(r).array() - mean_d -
                 cache.normalized.row(r).array() * mean_dx) *
                cache.inv_std[static_cast<std::size_t>(r)];
  }
  return dx;
}

template <typename T>
Matrix<T> Linear(const Matrix<T>& x, const Matrix<T>& weight, const Matrix<T>& bias) {
  Matrix<T> y = x * weight;
  y.rowwise() += bias.row(0);
  return y;
}

// Accumulates weight/bias gradients and returns dx.
template <typename T>
Matrix<T> LinearBackward(const Matrix<T>& dy, const Matrix<T>& x, const Matrix<T>& weight,
                         Matrix<T>* dweight, Matrix<T>* dbias) {
  dweight->noalias() += x.transpose() * dy;
  *dbias += dy.colwise().sum();
  return dy * weight.transpose();
}

template <typename T>
struct AttentionCache {
  Matrix<T> query_input;
  Matrix<T> kv_input;
  Matrix<T> q, k, v;
  std::vector<Matrix<T>> probs;  // one per head, query_len x key_len
  Matrix<T> context;
};

// Softmax over keys that are valid and, when causal, not in the future.
// Masked entries are exactly zero.
template <typename T>
void MaskedSoftmaxRows(Matrix<T>* scores, std::span<const std::uint8_t> key_valid,
                       bool causal) {
  const Eigen::Index keys = scores->cols();
  for (Eigen::Index i = 0; i < scores->rows(); ++i) {
    T max_score = -std::numeric_limits<T>::infinity();
    for (Eigen::Index j = 0; j < keys; ++j) {
      if (key_valid[static_cast<std::size_t>(j)] && (!causal || j <= i)) {
        max_score = std::max(max_score, (*scores)(i, j));
      }
    }
    T sum = 0;
    for (Eigen::Index j = 0; j < keys; ++j) {
      if (key_valid[static_cast<std::size_t>(j)] && (!causal || j <= i)) {
        const T e = std::exp((*scores)(i, j) - max_score);
        (*scores)(i, j) = e;
        sum += e;
      } else {
        (*scores)(i, j) = 0;
      }
    }
    if (sum > 0) scores->row(i) /= sum;
  }
}

template <typename T>
Matrix<T> AttentionForward(const Matrix<T>& query_input, const Matrix<T>& kv_input,
                           const AttentionWeights<T>& w, int heads,
                           std::span<const std::uint8_t> key_valid, bool causal,
                           AttentionCache<T>* cache) {
  Matrix<T> q = Linear(query_input, w.query, w.query_bias);
  Matrix<T> k = Linear(kv_input, w.key, w.key_bias);
  Matrix<T> v = Linear(kv_input, w.value, w.value_bias);
  const Eigen::Index hidden = q.cols();
  const Eigen::Index head_dim = hidden / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(head_dim));
  Matrix<T> context(q.rows(), hidden);
  std::vector<Matrix<T>> probs;
  for (int h = 0; h < heads; ++h) {
    const Eigen::Index off = h * head_dim;
    Matrix<T> scores = (q.middleCols(off, head_dim) * k.middleCols(off, head_dim).transpose()) * scale;
    MaskedSoftmaxRows(&scores, key_valid, causal);
    context.middleCols(off, head_dim).noalias() = scores * v.middleCols(off, head_dim);
    if (cache) probs.push_back(std::move(scores));
  }
  Matrix<T> out = Linear(context, w.output, w.output_bias);
  if (cache) {
    cache->query_input = query_input;
    cache->kv_input = kv_input;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->probs = std::move(probs);
    cache->context = std::move(context);
  }
  return out;
}

// Returns (d query_input, d kv_input).
template <typename T>
std::pair<Matrix<T>, Matrix<T>> AttentionBackward(const Matrix<T>& dout,
                                                  const AttentionWeights<T>& w, int heads,
                                                  const AttentionCache<T>& cache,
                                                  AttentionWeights<T>* grad) {
  const Matrix<T> dcontext =
      LinearBackward(dout, cache.context, w.output, &grad->output, &grad->output_bias);
  const Eigen::Index hidden = cache.q.cols();
  const Eigen::Index head_dim = hidden / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(head_dim));
  Matrix<T> dq(cache.q.rows(), hidden);
  Matrix<T> dk(cache.k.rows(), hidden);
  Matrix<T> dv(cache.v.rows(), hidden);
  for (int h = 0; h < heads; ++h) {
    const Eigen::Index off = h * head_dim;
    const Matrix<T>& p = cache.probs[static_cast<std::size_t>(h)];
    const auto dctx = dcontext.middleCols(off, head_dim);
    const Matrix<T> dp = dctx * cache.v.middleCols(off, head_dim).transpose();
    dv.middleCols(off, head_dim).noalias() = p.transpose() * dctx;
    Matrix<T> ds = p.cwiseProduct(dp);
    const Eigen::Matrix<T, Eigen::Dynamic, 1> row_dot = ds.rowwise().sum();
    ds -= (p.array().colwise() * row_dot.array()).matrix();
    dq.middleCols(off, head_dim).noalias() = (ds * cache.k.middleCols(off, head_dim)) * scale;
    dk.middleCols(off, head_dim).noalias() =
        (ds.transpose() * cache.q.middleCols(off, head_dim)) * scale;
  }
  Matrix<T> dquery =
      LinearBackward(dq, cache.query_input, w.query, &grad->query, &grad->query_bias);
  Matrix<T> dkv = LinearBackward(dk, cache.kv_input, w.key, &grad->key, &grad->key_bias);
  dkv += LinearBackward(dv, cache.kv_input, w.value, &grad->value, &grad->value_bias);
  return {std::move(dquery), std::move(dkv)};
}

// tanh approximation of GELU.
template <typename T>
T Gelu(T x) {
  const T c = static_cast<T>(0.7978845608028654);
  return T(0.5) * x * (T(1) + std::tanh(c * (x + T(0.044715) * x * x * x)));
}

template <typename T>
T GeluDerivative(T x) {
  const T c = static_cast<T>(0.7978845608028654);
  const T inner = c * (x + T(0.044715) * x * x * x);
  const T t = std::tanh(inner);
  const T dinner = c * (T(1) + T(3) * T(0.044715) * x * x);
  return T(0.5) * (T(1) + t) + T(0.5) * x * (T(1) - t * t) * dinner;
}

template <typename T>
struct FeedForwardCache {
  Matrix<T> input;
  Matrix<T> pre_activation;
  Matrix<T> activation;
};

template <typename T>
Matrix<T> FeedForwardForward(const Matrix<T>& x, const FeedForwardWeights<T>& w,
                             FeedForwardCache<T>* cache) {
  Matrix<T> pre = Linear(x, w.inner, w.inner_bias);
  Matrix<T> act = pre.unaryExpr([](T v) { return Gelu(v); });
  Matrix<T> out = Linear(act, w.outer, w.outer_bias);
  if (cache) {
    cache->input = x;
    cache->pre_activation = std::move(pre);
    cache->activation = std::move(act);
  }
  return out;
}

template <typename T>
Matrix<T> FeedForwardBackward(const Matrix<T>& dout, const FeedForwardWeights<T>& w,
                              const FeedForwardCache<T>& cache, FeedForwardWeights<T>* grad) {
  Matrix<T> dact =
      LinearBackward(dout, cache.activation, w.outer, &grad->outer, &grad->outer_bias);
  dact.array() *= cache.pre_activation.unaryExpr([](T v) { return GeluDerivative(v); }).array();
  return LinearBackward(dact, cache.input, w.inner, &grad->inner, &grad->inner_bias);
}

// Inverted dropout. An empty mask means identity.
template <typename T>
struct Dropout {
  double rate = 0;
  std::mt19937_64* rng = nullptr;

  bool active() const { return rng != nullptr && rate > 0; }

  Matrix<T> Apply(const Matrix<T>& x, Matrix<T>* mask) const {
    if (!active()) return x;
    std::bernoulli_distribution keep(1.0 - rate);
    const T scale = static_cast<T>(1.0 / (1.0 - rate));
    *mask = Matrix<T>(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < mask->size(); ++i) {
      mask->data()[i] = keep(*rng) ? scale : T(0);
    }
    return x.cwiseProduct(*mask);
  }
};

template <typename T>
Matrix<T> ApplyMask(const Matrix<T>& d, const Matrix<T>& mask) {
  return mask.size() == 0 ? d : d.cwiseProduct(mask);
}

// ---------------------------------------------------------------------------
// Encoder and decoder stacks.

template <typename T>
struct EncoderLayerCache {
  LayerNormCache<T> attention_norm;
  AttentionCache<T> attention;
  Matrix<T> attention_dropout;
  LayerNormCache<T> feed_forward_norm;
  FeedForwardCache<T> feed_forward;
  Matrix<T> feed_forward_dropout;
};

template <typename T>
struct DecoderLayerCache {
  LayerNormCache<T> self_norm;
  AttentionCache<T> self_attention;
  Matrix<T> self_dropout;
  LayerNormCache<T> cross_norm;
  AttentionCache<T> cross_attention;
  Matrix<T> cross_dropout;
  LayerNormCache<T> feed_forward_norm;
  FeedForwardCache<T> feed_forward;
  Matrix<T> feed_forward_dropout;
};

template <typename T>
struct ExampleCache {
  Matrix<T> source_embedding_dropout;
  std::vector<EncoderLayerCache<T>> encoder;
  LayerNormCache<T> encoder_norm;
  Matrix<T> target_embedding_dropout;
  std::vector<DecoderLayerCache<T>> decoder;
  LayerNormCache<T> decoder_norm;
  Matrix<T> hidden;  // decoder output after the final norm
};

template <typename T>
Matrix<T> Embed(const Matrix<T>& tokens, const Matrix<T>& positions, std::span<const int> ids) {
  Matrix<T> x(static_cast<Eigen::Index>(ids.size()), tokens.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) =
        tokens.row(ids[i]) + positions.row(static_cast<Eigen::Index>(i));
  }
  return x;
}

template <typename T>
Matrix<T> EncoderForward(const Parameters<T>& p, const ModelConfig& config,
                         std::span<const int> ids, std::span<const std::uint8_t> mask,
                         const Dropout<T>& dropout, ExampleCache<T>* cache) {
  Matrix<T> x = Embed(p.token_embedding, p.source_positions, ids);
  x = dropout.Apply(x, cache ? &cache->source_embedding_dropout : nullptr);
  if (cache) cache->encoder.resize(p.encoder.size());
  for (std::size_t l = 0; l < p.encoder.size(); ++l) {
    const auto& w = p.encoder[l];
    EncoderLayerCache<T>* c = cache ? &cache->encoder[l] : nullptr;
    Matrix<T> a = LayerNormForward(x, w.attention_norm, c ? &c->attention_norm : nullptr);
    Matrix<T> attn = AttentionForward(a, a, w.self_attention, config.heads, mask, false,
                                      c ? &c->attention : nullptr);
    x += dropout.Apply(attn, c ? &c->attention_dropout : nullptr);
    Matrix<T> b = LayerNormForward(x, w.feed_forward_norm, c ? &c->feed_forward_norm : nullptr);
    Matrix<T> ff = FeedForwardForward(b, w.feed_forward, c ? &c->feed_forward : nullptr);
    x += dropout.Apply(ff, c ? &c->feed_forward_dropout : nullptr);
  }
  return LayerNormForward(x, p.encoder_norm, cache ? &cache->encoder_norm : nullptr);
}

// Runs the decoder stack on `ids`; returns the pre-final-norm activations.
template <typename T>
Matrix<T> DecoderStack(const Parameters<T>& p, const ModelConfig& config,
                       std::span<const int> ids, std::span<const std::uint8_t> mask,
                       const Matrix<T>& memory, std::span<const std::uint8_t> memory_mask,
                       const Dropout<T>& dropout, ExampleCache<T>* cache) {
  Matrix<T> y = Embed(p.token_embedding, p.target_positions, ids);
  y = dropout.Apply(y, cache ? &cache->target_embedding_dropout : nullptr);
  if (cache) cache->decoder.resize(p.decoder.size());
  for (std::size_t l = 0; l < p.decoder.size(); ++l) {
    const auto& w = p.decoder[l];
    DecoderLayerCache<T>* c = cache ? &cache->decoder[l] : nullptr;
    Matrix<T> a = LayerNormForward(y, w.self_attention_norm, c ? &c->self_norm : nullptr);
    Matrix<T> self = AttentionForward(a, a, w.self_attention, config.heads, mask, true,
                                      c ? &c->self_attention : nullptr);
    y += dropout.Apply(self, c ? &c->self_dropout : nullptr);
    Matrix<T> b = LayerNormForward(y, w.cross_attention_norm, c ? &c->cross_norm : nullptr);
    Matrix<T> cross = AttentionForward(b, memory, w.cross_attention, config.heads,
                                       memory_mask, false, c ? &c->cross_attention : nullptr);
    y += dropout.Apply(cross, c ? &c->cross_dropout : nullptr);
    Matrix<T> f = LayerNormForward(y, w.feed_forward_norm, c ? &c->feed_forward_norm : nullptr);
    Matrix<T> ff = FeedForwardForward(f, w.feed_forward, c ? &c->feed_forward : nullptr);
    y += dropout.Apply(ff, c ? &c->feed_forward_dropout : nullptr);
  }
  return y;
}

template <typename T>
Matrix<T> LogSoftmaxRows(const Matrix<T>& logits) {
  Matrix<T> out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const T max = logits.row(r).maxCoeff();
    const T lse = max + std::log((logits.row(r).array() - max).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

template <typename T>
Matrix<T> OutputLogits(const Parameters<T>& p, const Matrix<T>& hidden) {
  Matrix<T> logits = hidden * p.token_embedding.transpose();
  logits.rowwise() += p.output_bias.row(0);
  return logits;
}

void CheckExample(const EncodedExample& ex, const ModelConfig& config) {
  auto check_ids = [&](const std::vector<int>& ids, const char* what) {
    for (int id : ids) {
      if (id < 0 || id >= config.vocab_size) {
        throw ShapeError(std::string(what) + " id " + std::to_string(id) +
                         " outside vocabulary of size " + std::to_string(config.vocab_size));
      }
    }
  };
  if (ex.source_ids.empty()) throw ShapeError("empty source sequence");
  if (ex.target_ids.empty()) throw ShapeError("empty target sequence");
  if (static_cast<int>(ex.source_ids.size()) > config.max_source_len) {
    throw ShapeError("source length " + std::to_string(ex.source_ids.size()) +
                     " exceeds max_source_len " + std::to_string(config.max_source_len));
  }
  if (static_cast<int>(ex.target_ids.size()) > config.max_target_len) {
    throw ShapeError("target length " + std::to_string(ex.target_ids.size()) +
                     " exceeds max_target_len " + std::to_string(config.max_target_len));
  }
  if (ex.source_mask.size() != ex.source_ids.size() ||
      ex.target_mask.size() != ex.target_ids.size()) {
    throw ShapeError("mask length does not match sequence length");
  }
  check_ids(ex.source_ids, "source");
  check_ids(ex.target_ids, "target");
}

template <typename T>
void CheckParameters(const Parameters<T>& p, const ModelConfig& config) {
  if (p.token_embedding.rows() != config.vocab_size ||
      p.token_embedding.cols() != config.hidden_dim ||
      static_cast<int>(p.encoder.size()) != config.encoder_layers ||
      static_cast<int>(p.decoder.size()) != config.decoder_layers ||
      p.source_positions.rows() != config.max_source_len ||
      p.target_positions.rows() != config.max_target_len) {
    throw ShapeError("parameters do not match the model configuration");
  }
}

struct TargetView {
  std::span<const int> inputs;              // target[0 .. L-2]
  std::span<const std::uint8_t> input_mask;
};

TargetView DecoderInputs(const EncodedExample& ex) {
  const std::size_t n = ex.target_ids.size() - 1;
  return {std::span<const int>(ex.target_ids).first(n),
          std::span<const std::uint8_t>(ex.target_mask).first(n)};
}

std::size_t CountLabels(const EncodedExample& ex) {
  std::size_t n = 0;
  for (std::size_t t = 1; t < ex.target_mask.size(); ++t) n += ex.target_mask[t] ? 1 : 0;
  return n;
}

// Forward and backward for one example. Adds d(loss)/d(theta) scaled by
// `scale` into *grad and returns the summed NLL.
template <typename T>
double ExampleLossAndGradient(const Parameters<T>& p, const ModelConfig& config,
                              const EncodedExample& ex, T scale, const Dropout<T>& dropout,
                              Parameters<T>* grad) {
  if (ex.target_ids.size() < 2 || CountLabels(ex) == 0) return 0.0;
  ExampleCache<T> cache;
  const Matrix<T> memory =
      EncoderForward(p, config, ex.source_ids, ex.source_mask, dropout, &cache);
  const TargetView target = DecoderInputs(ex);
  const Matrix<T> y = DecoderStack(p, config, target.inputs, target.input_mask, memory,
                                   ex.source_mask, dropout, &cache);
  const Matrix<T> hidden = LayerNormForward(y, p.decoder_norm, &cache.decoder_norm);
  const Matrix<T> log_probs = LogSoftmaxRows(OutputLogits(p, hidden));

  double nll = 0;
  Matrix<T> dlogits = Matrix<T>::Zero(log_probs.rows(), log_probs.cols());
  for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
    if (!ex.target_mask[static_cast<std::size_t>(t) + 1]) continue;
    const int label = ex.target_ids[static_cast<std::size_t>(t) + 1];
    nll -= static_cast<double>(log_probs(t, label));
    dlogits.row(t) = log_probs.row(t).array().exp() * scale;
    dlogits(t, label) -= scale;
  }

  // Tied output projection.
  grad->token_embedding.noalias() += dlogits.transpose() * hidden;
  grad->output_bias += dlogits.colwise().sum();
  Matrix<T> dy = LayerNormBackward(Matrix<T>(dlogits * p.token_embedding), p.decoder_norm,
                                   cache.decoder_norm, &grad->decoder_norm);

  Matrix<T> dmemory = Matrix<T>::Zero(memory.rows(), memory.cols());
  for (std::size_t l = p.decoder.size(); l-- > 0;) {
    const auto& w = p.decoder[l];
    auto& g = grad->decoder[l];
    const auto& c = cache.decoder[l];

    Matrix<T> dff = FeedForwardBackward(ApplyMask(dy, c.feed_forward_dropout), w.feed_forward,
                                        c.feed_forward, &g.feed_forward);
    dy += LayerNormBackward(dff, w.feed_forward_norm, c.feed_forward_norm, &g.feed_forward_norm);

    auto [dcross_q, dcross_kv] = AttentionBackward(ApplyMask(dy, c.cross_dropout),
                                                   w.cross_attention, config.heads,
                                                   c.cross_attention, &g.cross_attention);
    dmemory += dcross_kv;
    dy += LayerNormBackward(dcross_q, w.cross_attention_norm, c.cross_norm,
                            &g.cross_attention_norm);

    auto [dself_q, dself_kv] = AttentionBackward(ApplyMask(dy, c.self_dropout),
                                                 w.self_attention, config.heads,
                                                 c.self_attention, &g.self_attention);
    dself_q += dself_kv;
    dy += LayerNormBackward(dself_q, w.self_attention_norm, c.self_norm,
                            &g.self_attention_norm);
  }
  dy = ApplyMask(dy, cache.target_embedding_dropout);
  for (std::size_t t = 0; t < target.inputs.size(); ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    grad->token_embedding.row(target.inputs[t]) += dy.row(row);
    grad->target_positions.row(row) += dy.row(row);
  }

  Matrix<T> dx = LayerNormBackward(dmemory, p.encoder_norm, cache.encoder_norm,
                                   &grad->encoder_norm);
  for (std::size_t l = p.encoder.size(); l-- > 0;) {
    const auto& w = p.encoder[l];
    auto& g = grad->encoder[l];
    const auto& c = cache.encoder[l];
    Matrix<T> dff = FeedForwardBackward(ApplyMask(dx, c.feed_forward_dropout), w.feed_forward,
                                        c.feed_forward, &g.feed_forward);
    dx += LayerNormBackward(dff, w.feed_forward_norm, c.feed_forward_norm, &g.feed_forward_norm);
    auto [dq, dkv] = AttentionBackward(ApplyMask(dx, c.attention_dropout), w.self_attention,
                                       config.heads, c.attention, &g.self_attention);
    dq += dkv;
    dx += LayerNormBackward(dq, w.attention_norm, c.attention_norm, &g.attention_norm);
  }
  dx = ApplyMask(dx, cache.source_embedding_dropout);
  for (std::size_t s = 0; s < ex.source_ids.size(); ++s) {
    const auto row = static_cast<Eigen::Index>(s);
    grad->token_embedding.row(ex.source_ids[s]) += dx.row(row);
    grad->source_positions.row(row) += dx.row(row);
  }
  return nll;
}

template <typename T>
Matrix<T> ExampleLogProbs(const Parameters<T>& p, const ModelConfig& config,
                          const EncodedExample& ex) {
  const Matrix<T> memory = EncoderForward(p, config, ex.source_ids, ex.source_mask,
                                          Dropout<T>{}, static_cast<ExampleCache<T>*>(nullptr));
  if (ex.target_ids.size() < 2) return Matrix<T>(0, config.vocab_size);
  const TargetView target = DecoderInputs(ex);
  const Matrix<T> y = DecoderStack(p, config, target.inputs, target.input_mask, memory,
                                   ex.source_mask, Dropout<T>{},
                                   static_cast<ExampleCache<T>*>(nullptr));
  const Matrix<T> hidden =
      LayerNormForward(y, p.decoder_norm, static_cast<LayerNormCache<T>*>(nullptr));
  return LogSoftmaxRows(OutputLogits(p, hidden));
}

template <typename T>
void InitLayerNorm(LayerNormWeights<T>* ln, int hidden) {
  ln->gain = Matrix<T>::Zero(1, hidden);
  ln->bias = Matrix<T>::Zero(1, hidden);
}

template <typename T>
void InitAttention(AttentionWeights<T>* a, int hidden) {
  for (Matrix<T>* m : {&a->query, &a->key, &a->value, &a->output}) {
    *m = Matrix<T>::Zero(hidden, hidden);
  }
  for (Matrix<T>* m : {&a->query_bias, &a->key_bias, &a->value_bias, &a->output_bias}) {
    *m = Matrix<T>::Zero(1, hidden);
  }
}

template <typename T>
void InitFeedForward(FeedForwardWeights<T>* f, int hidden, int ffn) {
  f->inner = Matrix<T>::Zero(hidden, ffn);
  f->inner_bias = Matrix<T>::Zero(1, ffn);
  f->outer = Matrix<T>::Zero(ffn, hidden);
  f->outer_bias = Matrix<T>::Zero(1, hidden);
}

bool EndsWith(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string_view EncodingModeName(EncodingMode mode) {
  return mode == EncodingMode::kChangedLines ? "changed_lines" : "all_modification";
}

EncodingMode ParseEncodingMode(std::string_view name) {
  if (name == "changed_lines") return EncodingMode::kChangedLines;
  if (name == "all_modification") return EncodingMode::kAllModification;
  throw std::invalid_argument("unknown encoding mode '" + std::string(name) + "'");
}

ModelConfig ModelConfig::ForVocabulary(const Vocabulary& vocab) {
  ModelConfig config;
  config.vocab_size = vocab.size();
  config.specials = vocab.specials();
  config.vocab_fingerprint = vocab.Fingerprint();
  return config;
}

ModelConfig ModelConfig::FullScale(const Vocabulary& vocab) {
  ModelConfig config = ForVocabulary(vocab);
  config.encoder_layers = 12;
  config.decoder_layers = 3;
  config.hidden_dim = 768;
  config.heads = 12;
  config.ffn_dim = 3072;
  return config;
}

void ModelConfig::Validate() const {
  if (vocab_size < kNumSpecialTokens) throw std::invalid_argument("vocab_size too small");
  if (encoder_layers < 0 || decoder_layers < 0) {
    throw std::invalid_argument("layer counts must be non-negative");
  }
  if (hidden_dim < 1 || heads < 1 || ffn_dim < 1) {
    throw std::invalid_argument("hidden_dim, heads and ffn_dim must be positive");
  }
  if (hidden_dim % heads != 0) {
    throw std::invalid_argument("hidden_dim must be divisible by heads");
  }
  if (max_source_len < 2 || max_target_len < 2) {
    throw std::invalid_argument("sequence lengths must be at least 2");
  }
  if (dropout < 0 || dropout >= 1) throw std::invalid_argument("dropout must be in [0, 1)");
  for (int id : {specials.pad, specials.bos, specials.eos, specials.unk, specials.cls,
                 specials.sep}) {
    if (id < 0 || id >= vocab_size) throw std::invalid_argument("special id outside vocabulary");
  }
}

nlohmann::json ToJson(const ModelConfig& c) {
  return {
      {"vocab_size", c.vocab_size},
      {"encoder_layers", c.encoder_layers},
      {"decoder_layers", c.decoder_layers},
      {"hidden_dim", c.hidden_dim},
      {"heads", c.heads},
      {"ffn_dim", c.ffn_dim},
      {"max_source_len", c.max_source_len},
      {"max_target_len", c.max_target_len},
      {"dropout", c.dropout},
      {"specials",
       {{"pad", c.specials.pad},
        {"bos", c.specials.bos},
        {"eos", c.specials.eos},
        {"unk", c.specials.unk},
        {"cls", c.specials.cls},
        {"sep", c.specials.sep}}},
      {"vocab_fingerprint", c.vocab_fingerprint},
  };
}

ModelConfig ModelConfigFromJson(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.vocab_size = j.at("vocab_size").get<int>();
    c.encoder_layers = j.at("encoder_layers").get<int>();
    c.decoder_layers = j.at("decoder_layers").get<int>();
    c.hidden_dim = j.at("hidden_dim").get<int>();
    c.heads = j.at("heads").get<int>();
    c.ffn_dim = j.at("ffn_dim").get<int>();
    c.max_source_len = j.at("max_source_len").get<int>();
    c.max_target_len = j.at("max_target_len").get<int>();
    c.dropout = j.at("dropout").get<double>();
    const auto& s = j.at("specials");
    c.specials = {s.at("pad").get<int>(), s.at("bos").get<int>(), s.at("eos").get<int>(),
                  s.at("unk").get<int>(), s.at("cls").get<int>(), s.at("sep").get<int>()};
    c.vocab_fingerprint = j.at("vocab_fingerprint").get<std::uint64_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad model configuration: ") + e.what());
  }
}

EncodedExample BuildInput(const CorpusEntry& entry, const Vocabulary& vocab, EncodingMode mode,
                          const ModelConfig& config) {
  const SpecialIds& sp = vocab.specials();
  EncodedExample ex;
  ex.language = entry.language;
  ex.degenerate = entry.added.empty() && entry.deleted.empty();
  const auto max_source = static_cast<std::size_t>(config.max_source_len);

  if (mode == EncodingMode::kChangedLines) {
    std::vector<int> add = vocab.Encode(JoinLines(entry.added));
    std::vector<int> del = vocab.Encode(JoinLines(entry.deleted));
    const std::size_t budget = max_source >= 3 ? max_source - 3 : 0;
    if (add.size() + del.size() > budget) {
      del.resize(add.size() >= budget ? 0 : budget - add.size());
      if (add.size() > budget) add.resize(budget);
    }
    ex.source_ids.push_back(sp.cls);
    ex.source_ids.insert(ex.source_ids.end(), add.begin(), add.end());
    ex.source_ids.push_back(sp.sep);
    ex.source_ids.insert(ex.source_ids.end(), del.begin(), del.end());
    ex.source_ids.push_back(sp.sep);
  } else {
    std::vector<std::string> lines = entry.marked_lines;
    if (lines.empty()) {
      // Entries without hunk data: fall back to the changed lines, marked.
      for (const std::string& d : entry.deleted) lines.push_back("-" + d);
      for (const std::string& a : entry.added) lines.push_back("+" + a);
    }
    std::vector<int> all = vocab.Encode(JoinLines(lines));
    const std::size_t budget = max_source >= 2 ? max_source - 2 : 0;
    if (all.size() > budget) all.resize(budget);
    ex.source_ids.push_back(sp.cls);
    ex.source_ids.insert(ex.source_ids.end(), all.begin(), all.end());
    ex.source_ids.push_back(sp.sep);
  }
  if (ex.source_ids.size() > max_source) {
    ex.source_ids.resize(max_source);
    ex.source_ids.back() = sp.sep;
  }

  const std::vector<int> message = vocab.Encode(entry.message);
  ex.target_ids.push_back(sp.bos);
  ex.target_ids.insert(ex.target_ids.end(), message.begin(), message.end());
  ex.target_ids.push_back(sp.eos);
  if (ex.target_ids.size() > static_cast<std::size_t>(config.max_target_len)) {
    ex.target_ids.resize(static_cast<std::size_t>(config.max_target_len));
  }
  ex.source_mask.assign(ex.source_ids.size(), 1);
  ex.target_mask.assign(ex.target_ids.size(), 1);
  return ex;
}

std::vector<EncodedExample> BuildInputs(std::span<const CorpusEntry> entries,
                                        const Vocabulary& vocab, EncodingMode mode,
                                        const ModelConfig& config) {
  std::vector<EncodedExample> out;
  out.reserve(entries.size());
  for (const CorpusEntry& entry : entries) out.push_back(BuildInput(entry, vocab, mode, config));
  return out;
}

std::vector<EncodedExample> PadBatch(std::span<const EncodedExample> batch, int pad_id) {
  std::size_t source_len = 0;
  std::size_t target_len = 0;
  for (const EncodedExample& ex : batch) {
    source_len = std::max(source_len, ex.source_ids.size());
    target_len = std::max(target_len, ex.target_ids.size());
  }
  std::vector<EncodedExample> out(batch.begin(), batch.end());
  for (EncodedExample& ex : out) {
    ex.source_ids.resize(source_len, pad_id);
    ex.source_mask.resize(source_len, 0);
    ex.target_ids.resize(target_len, pad_id);
    ex.target_mask.resize(target_len, 0);
  }
  return out;
}

template <typename T>
Parameters<T> ZeroParameters(const ModelConfig& config) {
  config.Validate();
  const int h = config.hidden_dim;
  Parameters<T> p;
  p.token_embedding = Matrix<T>::Zero(config.vocab_size, h);
  p.source_positions = Matrix<T>::Zero(config.max_source_len, h);
  p.target_positions = Matrix<T>::Zero(config.max_target_len, h);
  p.encoder.resize(static_cast<std::size_t>(config.encoder_layers));
  for (auto& layer : p.encoder) {
    InitLayerNorm(&layer.attention_norm, h);
    InitAttention(&layer.self_attention, h);
    InitLayerNorm(&layer.feed_forward_norm, h);
    InitFeedForward(&layer.feed_forward, h, config.ffn_dim);
  }
  InitLayerNorm(&p.encoder_norm, h);
  p.decoder.resize(static_cast<std::size_t>(config.decoder_layers));
  for (auto& layer : p.decoder) {
    InitLayerNorm(&layer.self_attention_norm, h);
    InitAttention(&layer.self_attention, h);
    InitLayerNorm(&layer.cross_attention_norm, h);
    InitAttention(&layer.cross_attention, h);
    InitLayerNorm(&layer.feed_forward_norm, h);
    InitFeedForward(&layer.feed_forward, h, config.ffn_dim);
  }
  InitLayerNorm(&p.decoder_norm, h);
  p.output_bias = Matrix<T>::Zero(1, config.vocab_size);
  return p;
}

template <typename T>
Parameters<T> RandomParameters(const ModelConfig& config, std::uint64_t seed, double stddev) {
  Parameters<T> p = ZeroParameters<T>(config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  ForEachTensor(p, [&](const std::string& name, Matrix<T>& m) {
    if (EndsWith(name, ".gain")) {
      m.setOnes();
      return;
    }
    if (EndsWith(name, "bias")) return;
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(normal(rng));
  });
  return p;
}

template <typename T>
std::vector<Matrix<T>> ForwardLogProbs(const Parameters<T>& params, const ModelConfig& config,
                                       std::span<const EncodedExample> batch) {
  CheckParameters(params, config);
  for (const EncodedExample& ex : batch) CheckExample(ex, config);
  std::vector<Matrix<T>> out;
  out.reserve(batch.size());
  for (const EncodedExample& ex : batch) out.push_back(ExampleLogProbs(params, config, ex));
  return out;
}

template <typename T>
LossStats EvaluateLoss(const Parameters<T>& params, const ModelConfig& config,
                       std::span<const EncodedExample> batch) {
  CheckParameters(params, config);
  LossStats stats;
  for (const EncodedExample& ex : batch) {
    CheckExample(ex, config);
    const std::size_t labels = CountLabels(ex);
    if (labels == 0) continue;
    const Matrix<T> log_probs = ExampleLogProbs(params, config, ex);
    for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
      if (!ex.target_mask[static_cast<std::size_t>(t) + 1]) continue;
      stats.total_nll -= static_cast<double>(
          log_probs(t, ex.target_ids[static_cast<std::size_t>(t) + 1]));
    }
    stats.tokens += labels;
  }
  return stats;
}

template <typename T>
double Loss(const Parameters<T>& params, const ModelConfig& config,
            std::span<const EncodedExample> batch) {
  if (batch.empty()) throw std::invalid_argument("loss of an empty batch");
  return EvaluateLoss(params, config, batch).mean();
}

template <typename T>
double LossAndGradient(const Parameters<T>& params, const ModelConfig& config,
                       std::span<const EncodedExample> batch, Parameters<T>* grad,
                       std::mt19937_64* dropout_rng) {
  if (batch.empty()) throw std::invalid_argument("loss of an empty batch");
  CheckParameters(params, config);
  std::size_t tokens = 0;
  for (const EncodedExample& ex : batch) {
    CheckExample(ex, config);
    tokens += CountLabels(ex);
  }
  if (tokens == 0) return 0.0;
  const T scale = T(1) / static_cast<T>(tokens);
  Dropout<T> dropout{config.dropout, dropout_rng};
  double nll = 0;
  for (const EncodedExample& ex : batch) {
    nll += ExampleLossAndGradient(params, config, ex, scale, dropout, grad);
  }
  return nll / static_cast<double>(tokens);
}

template <typename T>
EncodedSource<T> EncodeSource(const Parameters<T>& params, const ModelConfig& config,
                              std::span<const int> source_ids,
                              std::span<const std::uint8_t> source_mask) {
  CheckParameters(params, config);
  EncodedExample probe;
  probe.source_ids.assign(source_ids.begin(), source_ids.end());
  probe.source_mask.assign(source_mask.begin(), source_mask.end());
  probe.target_ids = {config.specials.bos};
  probe.target_mask = {1};
  CheckExample(probe, config);
  EncodedSource<T> out;
  out.memory = EncoderForward(params, config, source_ids, source_mask, Dropout<T>{},
                              static_cast<ExampleCache<T>*>(nullptr));
  out.mask = std::move(probe.source_mask);
  return out;
}

template <typename T>
RowVector<T> NextTokenLogProbs(const Parameters<T>& params, const ModelConfig& config,
                               const EncodedSource<T>& source, std::span<const int> prefix) {
  if (prefix.empty() || static_cast<int>(prefix.size()) > config.max_target_len) {
    throw ShapeError("decoder prefix length " + std::to_string(prefix.size()) +
                     " outside [1, max_target_len]");
  }
  const std::vector<std::uint8_t> mask(prefix.size(), 1);
  const Matrix<T> y = DecoderStack(params, config, prefix, mask, source.memory, source.mask,
                                   Dropout<T>{}, static_cast<ExampleCache<T>*>(nullptr));
  const Matrix<T> last = y.bottomRows(1);
  const Matrix<T> hidden =
      LayerNormForward(last, params.decoder_norm, static_cast<LayerNormCache<T>*>(nullptr));
  return LogSoftmaxRows(OutputLogits(params, hidden)).row(0);
}

#define COMMITGEN_INSTANTIATE_MODEL(T)                                                     \
  template Parameters<T> ZeroParameters<T>(const ModelConfig&);                             \
  template Parameters<T> RandomParameters<T>(const ModelConfig&, std::uint64_t, double);    \
  template std::vector<Matrix<T>> ForwardLogProbs<T>(                                       \
      const Parameters<T>&, const ModelConfig&, std::span<const EncodedExample>);           \
  template LossStats EvaluateLoss<T>(const Parameters<T>&, const ModelConfig&,              \
                                     std::span<const EncodedExample>);                      \
  template double Loss<T>(const Parameters<T>&, const ModelConfig&,                         \
                          std::span<const EncodedExample>);                                 \
  template double LossAndGradient<T>(const Parameters<T>&, const ModelConfig&,              \
                                     std::span<const EncodedExample>, Parameters<T>*,       \
                                     std::mt19937_64*);                                     \
  template EncodedSource<T> EncodeSource<T>(const Parameters<T>&, const ModelConfig&,       \
                                            std::span<const int>,                           \
                                            std::span<const std::uint8_t>);                 \
  template RowVector<T> NextTokenLogProbs<T>(const Parameters<T>&, const ModelConfig&,      \
                                             const EncodedSource<T>&, std::span<const int>);

COMMITGEN_INSTANTIATE_MODEL(float)
COMMITGEN_INSTANTIATE_MODEL(double)

#undef COMMITGEN_INSTANTIATE_MODEL

}  // namespace commitgen
