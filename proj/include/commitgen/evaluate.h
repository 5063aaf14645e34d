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


// Perplexity, BLEU reports and the two ablation harnesses.

#ifndef COMMITGEN_EVALUATE_H_
#define COMMITGEN_EVALUATE_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "commitgen/beam_search.h"
#include "commitgen/corpus.h"
#include "commitgen/model.h"
#include "commitgen/trainer.h"
#include "json.hpp"

namespace commitgen {

struct LanguageScores {
  double bleu4 = 0;
  double ppl = 0;
  std::size_t n_examples = 0;

  bool operator==(const LanguageScores&) const = default;
};

struct EvalReport {
  double bleu4 = 0;
  double ppl = 0;
  std::size_t n_examples = 0;
  std::map<Language, LanguageScores> per_language;
  std::vector<std::string> hypotheses;  // decoded, in input order

  bool operator==(const EvalReport&) const = default;
};

nlohmann::json ToJson(const EvalReport& report);

// exp of the mean token NLL over the split. Throws std::invalid_argument on
// an empty split.
template <typename T>
double Perplexity(const Parameters<T>& params, const ModelConfig& config,
                  std::span<const EncodedExample> split);

// Decodes every entry with beam search and scores BLEU-4 against its
// message; PPL is teacher-forced on the same entries.
EvalReport Evaluate(const Parameters<float>& params, const ModelConfig& config,
                    const Vocabulary& vocab, std::span<const CorpusEntry> entries,
                    EncodingMode mode, const DecodeConfig& decode);

// Everything needed to train and score one model.
struct TrainingRecipe {
  ModelConfig model;
  TrainConfig train;
  DecodeConfig decode;
  std::uint64_t init_seed = 42;  // for random initial weights
};

struct AblationRow {
  std::string init_label;
  EncodingMode mode = EncodingMode::kChangedLines;
  EvalReport test;                     // BLEU on the test split
  double best_dev_ppl = 0;             // over all languages
  std::map<Language, double> dev_ppl;  // best model, per language
  std::vector<EpochMetrics> metrics;

  bool operator==(const AblationRow&) const = default;
};

nlohmann::json ToJson(const AblationRow& row);

// A named initialisation: random weights when `checkpoint` is empty.
struct InitialWeights {
  std::string label;
  std::optional<std::string> checkpoint;
};

// Trains and evaluates one model.
AblationRow RunRecipe(const CorpusSplits& splits, const Vocabulary& vocab,
                      const TrainingRecipe& recipe, EncodingMode mode,
                      const InitialWeights& init);

// One row per encoding mode, all-modification first, identical seeds.
std::vector<AblationRow> AblateInputMode(const CorpusSplits& splits, const Vocabulary& vocab,
                                         const TrainingRecipe& recipe,
                                         const InitialWeights& init = {"Random", std::nullopt});

// One row per initialisation. Every checkpoint is loaded and checked
// before the first training run starts.
std::vector<AblationRow> AblateInitWeight(const CorpusSplits& splits, const Vocabulary& vocab,
                                          const TrainingRecipe& recipe,
                                          std::span<const InitialWeights> inits);

// Initial Weight | Input Type | BLEU-4
std::string FormatInputModeTable(std::span<const AblationRow> rows);
// Metric | Initial Weight | one column per language; BLEU-4 (Test) block
// then PPL (Dev) block.
std::string FormatInitWeightTable(std::span<const AblationRow> rows);

}  // namespace commitgen

#endif  // COMMITGEN_EVALUATE_H_
