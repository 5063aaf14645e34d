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

// Transformer encoder-decoder over the shared BPE vocabulary.
//
// The encoder reads [cls] Add [sep] Del [sep]; the decoder predicts the
// message autoregressively from <s>. Layers are pre-norm, positions are
// learned absolute embeddings, and the output projection is tied to the
// token embedding. Everything is templated on the scalar type so the
// gradient check can run in double precision while training runs in float.

#ifndef COMMITGEN_MODEL_H_
#define COMMITGEN_MODEL_H_

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "commitgen/bpe.h"
#include "commitgen/corpus.h"
#include "json.hpp"

namespace commitgen {

enum class EncodingMode { kChangedLines, kAllModification };

std::string_view EncodingModeName(EncodingMode mode);  // "changed_lines", ...
EncodingMode ParseEncodingMode(std::string_view name);

struct ModelConfig {
  int vocab_size = kBaseVocabSize;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int hidden_dim = 128;
  int heads = 4;
  int ffn_dim = 512;
  int max_source_len = 256;
  int max_target_len = 128;
  double dropout = 0.1;
  SpecialIds specials;
  std::uint64_t vocab_fingerprint = 0;

  // Desk-scale defaults sized to `vocab`.
  static ModelConfig ForVocabulary(const Vocabulary& vocab);
  // 12 encoder / 3 decoder layers, hidden 768.
  static ModelConfig FullScale(const Vocabulary& vocab);

  // Throws std::invalid_argument on a violated invariant.
  void Validate() const;

  bool operator==(const ModelConfig&) const = default;
};

nlohmann::json ToJson(const ModelConfig& config);
ModelConfig ModelConfigFromJson(const nlohmann::json& j);

struct EncodedExample {
  std::vector<int> source_ids;
  std::vector<int> target_ids;
  std::vector<std::uint8_t> source_mask;  // 1 = real token, 0 = padding
  std::vector<std::uint8_t> target_mask;
  bool degenerate = false;  // no added and no deleted lines
  Language language = Language::kPython;
};

// Builds [cls] Add [sep] Del [sep] (changed_lines) or [cls] All [sep]
// (all_modification) and [<s>] message [</s>]. Lines inside a segment are
// joined with '\n'. Over-long sources lose Del tokens first, then Add
// tokens, always from the tail; over-long targets are cut at the tail.
EncodedExample BuildInput(const CorpusEntry& entry, const Vocabulary& vocab,
                          EncodingMode mode, const ModelConfig& config);

std::vector<EncodedExample> BuildInputs(std::span<const CorpusEntry> entries,
                                        const Vocabulary& vocab, EncodingMode mode,
                                        const ModelConfig& config);

// Pads every example to the longest source and target in the batch.
std::vector<EncodedExample> PadBatch(std::span<const EncodedExample> batch, int pad_id);

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

template <typename T>
struct LayerNormWeights {
  Matrix<T> gain;  // 1 x hidden
  Matrix<T> bias;  // 1 x hidden
};

template <typename T>
struct AttentionWeights {
  Matrix<T> query, key, value, output;  // hidden x hidden
  Matrix<T> query_bias, key_bias, value_bias, output_bias;
};

template <typename T>
struct FeedForwardWeights {
  Matrix<T> inner;  // hidden x ffn
  Matrix<T> inner_bias;
  Matrix<T> outer;  // ffn x hidden
  Matrix<T> outer_bias;
};

template <typename T>
struct EncoderLayerWeights {
  LayerNormWeights<T> attention_norm;
  AttentionWeights<T> self_attention;
  LayerNormWeights<T> feed_forward_norm;
  FeedForwardWeights<T> feed_forward;
};

template <typename T>
struct DecoderLayerWeights {
  LayerNormWeights<T> self_attention_norm;
  AttentionWeights<T> self_attention;
  LayerNormWeights<T> cross_attention_norm;
  AttentionWeights<T> cross_attention;
  LayerNormWeights<T> feed_forward_norm;
  FeedForwardWeights<T> feed_forward;
};

template <typename T>
struct Parameters {
  Matrix<T> token_embedding;   // vocab x hidden, also the output projection
  Matrix<T> source_positions;  // max_source_len x hidden
  Matrix<T> target_positions;  // max_target_len x hidden
  std::vector<EncoderLayerWeights<T>> encoder;
  LayerNormWeights<T> encoder_norm;
  std::vector<DecoderLayerWeights<T>> decoder;
  LayerNormWeights<T> decoder_norm;
  Matrix<T> output_bias;  // 1 x vocab
};

namespace internal {

template <typename P, typename Fn>
void VisitLayerNorm(const std::string& prefix, P& ln, Fn& fn) {
  fn(prefix + ".gain", ln.gain);
  fn(prefix + ".bias", ln.bias);
}

template <typename P, typename Fn>
void VisitAttention(const std::string& prefix, P& a, Fn& fn) {
  fn(prefix + ".query", a.query);
  fn(prefix + ".query_bias", a.query_bias);
  fn(prefix + ".key", a.key);
  fn(prefix + ".key_bias", a.key_bias);
  fn(prefix + ".value", a.value);
  fn(prefix + ".value_bias", a.value_bias);
  fn(prefix + ".output", a.output);
  fn(prefix + ".output_bias", a.output_bias);
}

template <typename P, typename Fn>
void VisitFeedForward(const std::string& prefix, P& f, Fn& fn) {
  fn(prefix + ".inner", f.inner);
  fn(prefix + ".inner_bias", f.inner_bias);
  fn(prefix + ".outer", f.outer);
  fn(prefix + ".outer_bias", f.outer_bias);
}

}  // namespace internal

// Calls fn(name, tensor) for every tensor in a fixed order. Works for both
// const and mutable parameter sets.
template <typename P, typename Fn>
void ForEachTensor(P& params, Fn&& fn) {
  fn(std::string("token_embedding"), params.token_embedding);
  fn(std::string("source_positions"), params.source_positions);
  fn(std::string("target_positions"), params.target_positions);
  for (std::size_t i = 0; i < params.encoder.size(); ++i) {
    const std::string p = "encoder." + std::to_string(i);
    internal::VisitLayerNorm(p + ".attention_norm", params.encoder[i].attention_norm, fn);
    internal::VisitAttention(p + ".self_attention", params.encoder[i].self_attention, fn);
    internal::VisitLayerNorm(p + ".feed_forward_norm", params.encoder[i].feed_forward_norm, fn);
    internal::VisitFeedForward(p + ".feed_forward", params.encoder[i].feed_forward, fn);
  }
  internal::VisitLayerNorm("encoder_norm", params.encoder_norm, fn);
  for (std::size_t i = 0; i < params.decoder.size(); ++i) {
    const std::string p = "decoder." + std::to_string(i);
    auto& layer = params.decoder[i];
    internal::VisitLayerNorm(p + ".self_attention_norm", layer.self_attention_norm, fn);
    internal::VisitAttention(p + ".self_attention", layer.self_attention, fn);
    internal::VisitLayerNorm(p + ".cross_attention_norm", layer.cross_attention_norm, fn);
    internal::VisitAttention(p + ".cross_attention", layer.cross_attention, fn);
    internal::VisitLayerNorm(p + ".feed_forward_norm", layer.feed_forward_norm, fn);
    internal::VisitFeedForward(p + ".feed_forward", layer.feed_forward, fn);
  }
  internal::VisitLayerNorm("decoder_norm", params.decoder_norm, fn);
  fn(std::string("output_bias"), params.output_bias);
}

// All tensors shaped for `config` and filled with zeros.
template <typename T>
Parameters<T> ZeroParameters(const ModelConfig& config);

// Weights ~ N(0, stddev^2), biases 0, layer-norm gains 1.
template <typename T>
Parameters<T> RandomParameters(const ModelConfig& config, std::uint64_t seed,
                               double stddev = 0.02);

template <typename To, typename From>
Parameters<To> CastParameters(const Parameters<From>& from) {
  Parameters<To> to;
  to.encoder.resize(from.encoder.size());
  to.decoder.resize(from.decoder.size());
  std::vector<Matrix<To>*> targets;
  ForEachTensor(to, [&](const std::string&, Matrix<To>& m) { targets.push_back(&m); });
  std::size_t i = 0;
  ForEachTensor(from, [&](const std::string&, const Matrix<From>& m) {
    *targets[i++] = m.template cast<To>();
  });
  return to;
}

template <typename T>
std::size_t ParameterCount(const Parameters<T>& params) {
  std::size_t n = 0;
  ForEachTensor(params, [&](const std::string&, const Matrix<T>& m) {
    n += static_cast<std::size_t>(m.size());
  });
  return n;
}

// Per-example log-probabilities. For an example whose target has length L,
// the result is (L - 1) x vocab and row r is log p(target[r + 1] |
// target[0..r], source). Rows at padded positions are computed but
// meaningless. Throws ShapeError when the batch does not fit the config.
template <typename T>
std::vector<Matrix<T>> ForwardLogProbs(const Parameters<T>& params,
                                       const ModelConfig& config,
                                       std::span<const EncodedExample> batch);

struct LossStats {
  double total_nll = 0;
  std::size_t tokens = 0;

  double mean() const { return tokens == 0 ? 0.0 : total_nll / static_cast<double>(tokens); }
};

// Summed negative log-likelihood over non-pad target positions.
template <typename T>
LossStats EvaluateLoss(const Parameters<T>& params, const ModelConfig& config,
                       std::span<const EncodedExample> batch);

// Mean token-level negative log-likelihood; 0 when no target token is
// unmasked. Throws std::invalid_argument on an empty batch.
template <typename T>
double Loss(const Parameters<T>& params, const ModelConfig& config,
            std::span<const EncodedExample> batch);

// Mean loss and its gradient, accumulated into *grad (which must be shaped
// like params; it is not cleared). Dropout is applied only when
// `dropout_rng` is non-null and config.dropout > 0.
template <typename T>
double LossAndGradient(const Parameters<T>& params, const ModelConfig& config,
                       std::span<const EncodedExample> batch, Parameters<T>* grad,
                       std::mt19937_64* dropout_rng = nullptr);

template <typename T>
struct EncodedSource {
  Matrix<T> memory;  // source_len x hidden
  std::vector<std::uint8_t> mask;
};

template <typename T>
EncodedSource<T> EncodeSource(const Parameters<T>& params, const ModelConfig& config,
                              std::span<const int> source_ids,
                              std::span<const std::uint8_t> source_mask);

// log p(next | prefix, source) for a prefix that starts with <s>.
template <typename T>
RowVector<T> NextTokenLogProbs(const Parameters<T>& params, const ModelConfig& config,
                               const EncodedSource<T>& source, std::span<const int> prefix);

}  // namespace commitgen

#endif  // COMMITGEN_MODEL_H_
