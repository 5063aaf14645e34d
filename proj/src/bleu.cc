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

#include "commitgen/bleu.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace commitgen {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts CountNgrams(const TokenList& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<long>(i),
                                      tokens.begin() + static_cast<long>(i + n))];
  }
  return counts;
}

}  // namespace

std::vector<std::string> WhitespaceTokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !space(text[i])) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

BleuBreakdown CorpusBleu4Breakdown(std::span<const TokenList> hypotheses,
                                   std::span<const TokenList> references) {
  if (hypotheses.size() != references.size()) {
    throw std::invalid_argument("BLEU needs one reference per hypothesis (" +
                                std::to_string(hypotheses.size()) + " vs " +
                                std::to_string(references.size()) + ")");
  }
  BleuBreakdown out;
  std::size_t matches[4] = {0, 0, 0, 0};
  std::size_t totals[4] = {0, 0, 0, 0};
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    out.hypothesis_length += hypotheses[s].size();
    out.reference_length += references[s].size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const NgramCounts hyp = CountNgrams(hypotheses[s], n);
      const NgramCounts ref = CountNgrams(references[s], n);
      for (const auto& [gram, count] : hyp) {
        totals[n - 1] += count;
        auto it = ref.find(gram);
        if (it != ref.end()) matches[n - 1] += std::min(count, it->second);
      }
    }
  }
  double log_sum = 0;
  for (int n = 0; n < 4; ++n) {
    double p = 1.0;
    if (totals[n] > 0) {
      const double m = matches[n] > 0 ? static_cast<double>(matches[n]) : kBleuEpsilon;
      p = m / static_cast<double>(totals[n]);
    }
    out.precisions[n] = p;
    log_sum += std::log(p);
  }
  if (out.hypothesis_length == 0) {
    out.brevity_penalty = 0;
    out.bleu = 0;
    return out;
  }
  out.brevity_penalty =
      out.hypothesis_length >= out.reference_length
          ? 1.0
          : std::exp(1.0 - static_cast<double>(out.reference_length) /
                               static_cast<double>(out.hypothesis_length));
  out.bleu = 100.0 * out.brevity_penalty * std::exp(log_sum / 4.0);
  return out;
}

double CorpusBleu4(std::span<const TokenList> hypotheses, std::span<const TokenList> references) {
  return CorpusBleu4Breakdown(hypotheses, references).bleu;
}

}  // namespace commitgen
