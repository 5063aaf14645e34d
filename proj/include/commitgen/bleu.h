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


// Corpus-level BLEU-4.

#ifndef COMMITGEN_BLEU_H_
#define COMMITGEN_BLEU_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace commitgen {

using TokenList = std::vector<std::string>;

std::vector<std::string> WhitespaceTokens(std::string_view text);

inline constexpr double kBleuEpsilon = 1e-9;

struct BleuBreakdown {
  double bleu = 0;  // 0..100
  double precisions[4] = {0, 0, 0, 0};
  double brevity_penalty = 0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
};

// Clipped n-gram counts for n = 1..4 are pooled over the corpus. An order
// with matches m out of c gives m / c; m = 0 gives 1e-9 / c; an order with
// no n-grams at all (c = 0) gives 1. The geometric mean is multiplied by
// the brevity penalty and scaled to 0..100. Throws std::invalid_argument when
// the lists differ in length.
BleuBreakdown CorpusBleu4Breakdown(std::span<const TokenList> hypotheses,
                                   std::span<const TokenList> references);

double CorpusBleu4(std::span<const TokenList> hypotheses,
                   std::span<const TokenList> references);

}  // namespace commitgen

#endif  // COMMITGEN_BLEU_H_
