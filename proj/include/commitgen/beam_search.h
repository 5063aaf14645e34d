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


// Beam search and greedy decoding.

#ifndef COMMITGEN_BEAM_SEARCH_H_
#define COMMITGEN_BEAM_SEARCH_H_

#include <string>
#include <vector>

#include "commitgen/bpe.h"
#include "commitgen/corpus.h"
#include "commitgen/model.h"

namespace commitgen {

struct DecodeConfig {
  int beam_size = 10;
  int max_target_len = 128;  // counts <s>; capped by the model's own limit
  double length_penalty = 0;  // GNMT alpha; 0 = rank by raw log-probability

  void Validate() const;  // throws std::invalid_argument
};

struct Hypothesis {
  std::vector<int> ids;  // starts with <s>
  double logprob = 0;
  double score = 0;  // logprob after the length penalty
  bool finished = false;

  bool operator==(const Hypothesis&) const = default;
};

// ((5 + generated) / 6) ^ alpha, where generated excludes <s>.
double LengthPenalty(std::size_t generated, double alpha);

// Every step expands all live hypotheses by every vocabulary token and keeps
// the K best candidates by cumulative log-probability; ties prefer the lower
// token id, then the earlier parent. A kept candidate that ends in </s> or
// reaches the length limit is frozen. Search stops once nothing is live.
// Returns at most K finished hypotheses, best score first.
template <typename T>
std::vector<Hypothesis> BeamSearch(const Parameters<T>& params, const ModelConfig& config,
                                   const EncodedExample& source, const DecodeConfig& decode);

// Argmax at every step (lowest id on ties) until </s> or the length limit.
template <typename T>
Hypothesis GreedyDecode(const Parameters<T>& params, const ModelConfig& config,
                        const EncodedExample& source, int max_target_len);

struct GeneratedMessage {
  std::string text;  // single line
  double score = 0;
  bool degenerate = false;  // the entry had no added and no deleted lines
  std::vector<std::pair<std::string, double>> candidates;  // ranked
};

// Decoded text with specials removed, newlines folded into spaces and
// surrounding whitespace trimmed.
std::string HypothesisText(const Hypothesis& hypothesis, const Vocabulary& vocab);

GeneratedMessage GenerateMessage(const Parameters<float>& params, const ModelConfig& config,
                                 const CorpusEntry& entry, const Vocabulary& vocab,
                                 EncodingMode mode, const DecodeConfig& decode);

}  // namespace commitgen

#endif  // COMMITGEN_BEAM_SEARCH_H_
