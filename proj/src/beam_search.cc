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

#include "commitgen/beam_search.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace commitgen {
namespace {

struct Candidate {
  double logprob;
  int token;
  std::size_t parent;
};

bool Better(const Candidate& a, const Candidate& b) {
  return std::tie(b.logprob, a.token, a.parent) < std::tie(a.logprob, b.token, b.parent);
}

int EffectiveLength(const ModelConfig& config, const DecodeConfig& decode) {
  return std::min(decode.max_target_len, config.max_target_len);
}

void Trim(std::string* s) {
  const auto first = s->find_first_not_of(" \t\r\n");
  if (first == std::string::npos) {
    s->clear();
    return;
  }
  const auto last = s->find_last_not_of(" \t\r\n");
  *s = s->substr(first, last - first + 1);
}

}  // namespace

void DecodeConfig::Validate() const {
  if (beam_size < 1) throw std::invalid_argument("beam_size must be at least 1");
  if (max_target_len < 1) throw std::invalid_argument("max_target_len must be at least 1");
  if (!std::isfinite(length_penalty)) throw std::invalid_argument("length_penalty must be finite");
}

double LengthPenalty(std::size_t generated, double alpha) {
  if (alpha == 0) return 1.0;
  return std::pow((5.0 + static_cast<double>(generated)) / 6.0, alpha);
}

template <typename T>
std::vector<Hypothesis> BeamSearch(const Parameters<T>& params, const ModelConfig& config,
                                   const EncodedExample& source, const DecodeConfig& decode) {
  decode.Validate();
  const int limit = EffectiveLength(config, decode);
  const int bos = config.specials.bos;
  const int eos = config.specials.eos;
  const auto beam = static_cast<std::size_t>(decode.beam_size);
  const EncodedSource<T> memory =
      EncodeSource(params, config, source.source_ids, source.source_mask);

  auto finish = [&](Hypothesis h) {
    h.finished = true;
    h.score = h.logprob / LengthPenalty(h.ids.size() - 1, decode.length_penalty);
    return h;
  };

  std::vector<Hypothesis> finished;
  std::vector<Hypothesis> live;
  Hypothesis start;
  start.ids = {bos};
  if (limit <= 1) {
    finished.push_back(finish(start));
    return finished;
  }
  live.push_back(start);

  std::vector<Candidate> candidates;
  while (!live.empty()) {
    candidates.clear();
    for (std::size_t p = 0; p < live.size(); ++p) {
      const RowVector<T> next = NextTokenLogProbs(params, config, memory, live[p].ids);
      for (int v = 0; v < next.size(); ++v) {
        const double logprob = live[p].logprob + static_cast<double>(next(v));
        if (std::isinf(logprob)) continue;  // probability zero
        candidates.push_back({logprob, v, p});
      }
    }
    const std::size_t keep = std::min(beam, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<long>(keep),
                      candidates.end(), Better);
    std::vector<Hypothesis> next_live;
    for (std::size_t k = 0; k < keep; ++k) {
      const Candidate& c = candidates[k];
      Hypothesis h;
      h.ids = live[c.parent].ids;
      h.ids.push_back(c.token);
      h.logprob = c.logprob;
      if (c.token == eos || static_cast<int>(h.ids.size()) >= limit) {
        finished.push_back(finish(std::move(h)));
      } else {
        h.score = h.logprob;
        next_live.push_back(std::move(h));
      }
    }
    live = std::move(next_live);
  }

  std::stable_sort(finished.begin(), finished.end(), [](const Hypothesis& a, const Hypothesis& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.ids < b.ids;
  });
  if (finished.size() > beam) finished.resize(beam);
  return finished;
}

template <typename T>
Hypothesis GreedyDecode(const Parameters<T>& params, const ModelConfig& config,
                        const EncodedExample& source, int max_target_len) {
  if (max_target_len < 1) throw std::invalid_argument("max_target_len must be at least 1");
  const int limit = std::min(max_target_len, config.max_target_len);
  const EncodedSource<T> memory =
      EncodeSource(params, config, source.source_ids, source.source_mask);
  Hypothesis h;
  h.ids = {config.specials.bos};
  while (static_cast<int>(h.ids.size()) < limit) {
    const RowVector<T> next = NextTokenLogProbs(params, config, memory, h.ids);
    int best = 0;
    for (int v = 1; v < next.size(); ++v) {
      if (next(v) > next(best)) best = v;
    }
    h.ids.push_back(best);
    h.logprob += static_cast<double>(next(best));
    if (best == config.specials.eos) break;
  }
  h.finished = true;
  h.score = h.logprob;
  return h;
}

std::string HypothesisText(const Hypothesis& hypothesis, const Vocabulary& vocab) {
  std::string text = vocab.Decode(hypothesis.ids);
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  Trim(&text);
  return text;
}

GeneratedMessage GenerateMessage(const Parameters<float>& params, const ModelConfig& config,
                                 const CorpusEntry& entry, const Vocabulary& vocab,
                                 EncodingMode mode, const DecodeConfig& decode) {
  const EncodedExample source = BuildInput(entry, vocab, mode, config);
  const std::vector<Hypothesis> ranked = BeamSearch(params, config, source, decode);
  GeneratedMessage out;
  out.degenerate = source.degenerate;
  for (const Hypothesis& h : ranked) out.candidates.emplace_back(HypothesisText(h, vocab), h.score);
  if (!out.candidates.empty()) {
    out.text = out.candidates.front().first;
    out.score = out.candidates.front().second;
  }
  return out;
}

template std::vector<Hypothesis> BeamSearch<float>(const Parameters<float>&, const ModelConfig&,
                                                   const EncodedExample&, const DecodeConfig&);
template std::vector<Hypothesis> BeamSearch<double>(const Parameters<double>&,
                                                    const ModelConfig&, const EncodedExample&,
                                                    const DecodeConfig&);
template Hypothesis GreedyDecode<float>(const Parameters<float>&, const ModelConfig&,
                                        const EncodedExample&, int);
template Hypothesis GreedyDecode<double>(const Parameters<double>&, const ModelConfig&,
                                         const EncodedExample&, int);

}  // namespace commitgen
