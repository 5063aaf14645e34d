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

#include "commitgen/evaluate.h"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "commitgen/bleu.h"
#include "commitgen/checkpoint.h"

namespace commitgen {
namespace {

std::string Fixed(double v) {
  if (!std::isfinite(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string PadLeft(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::vector<EncodedExample> Encode(std::span<const CorpusEntry> entries, const Vocabulary& vocab,
                                   EncodingMode mode, const ModelConfig& config) {
  return BuildInputs(entries, vocab, mode, config);
}

std::string InputTypeLabel(EncodingMode mode) {
  return mode == EncodingMode::kAllModification ? "All code modification"
                                                : "Only changed lines";
}

}  // namespace

template <typename T>
double Perplexity(const Parameters<T>& params, const ModelConfig& config,
                  std::span<const EncodedExample> split) {
  if (split.empty()) throw std::invalid_argument("perplexity of an empty split");
  return std::exp(EvaluateLoss(params, config, split).mean());
}

template double Perplexity<float>(const Parameters<float>&, const ModelConfig&,
                                  std::span<const EncodedExample>);
template double Perplexity<double>(const Parameters<double>&, const ModelConfig&,
                                   std::span<const EncodedExample>);

nlohmann::json ToJson(const EvalReport& r) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [lang, s] : r.per_language) {
    per[std::string(LanguageName(lang))] = {
        {"bleu4", s.bleu4}, {"ppl", s.ppl}, {"n_examples", s.n_examples}};
  }
  return {{"bleu4", r.bleu4},
          {"ppl", r.ppl},
          {"n_examples", r.n_examples},
          {"per_language", per},
          {"hypotheses", r.hypotheses}};
}

EvalReport Evaluate(const Parameters<float>& params, const ModelConfig& config,
                    const Vocabulary& vocab, std::span<const CorpusEntry> entries,
                    EncodingMode mode, const DecodeConfig& decode) {
  if (entries.empty()) throw std::invalid_argument("evaluation on an empty split");
  const std::vector<EncodedExample> encoded = Encode(entries, vocab, mode, config);
  EvalReport report;
  report.n_examples = entries.size();
  report.ppl = Perplexity(params, config, std::span<const EncodedExample>(encoded));

  std::vector<TokenList> hyps;
  std::vector<TokenList> refs;
  std::map<Language, std::vector<std::size_t>> by_language;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::vector<Hypothesis> ranked = BeamSearch(params, config, encoded[i], decode);
    std::string text = ranked.empty() ? std::string() : HypothesisText(ranked.front(), vocab);
    hyps.push_back(WhitespaceTokens(text));
    refs.push_back(WhitespaceTokens(entries[i].message));
    report.hypotheses.push_back(std::move(text));
    by_language[entries[i].language].push_back(i);
  }
  report.bleu4 = CorpusBleu4(hyps, refs);

  for (const auto& [lang, indices] : by_language) {
    std::vector<TokenList> lang_hyps;
    std::vector<TokenList> lang_refs;
    std::vector<EncodedExample> lang_encoded;
    for (std::size_t i : indices) {
      lang_hyps.push_back(hyps[i]);
      lang_refs.push_back(refs[i]);
      lang_encoded.push_back(encoded[i]);
    }
    LanguageScores scores;
    scores.n_examples = indices.size();
    scores.bleu4 = CorpusBleu4(lang_hyps, lang_refs);
    scores.ppl = Perplexity(params, config, std::span<const EncodedExample>(lang_encoded));
    report.per_language[lang] = scores;
  }
  return report;
}

nlohmann::json ToJson(const AblationRow& row) {
  nlohmann::json dev = nlohmann::json::object();
  for (const auto& [lang, ppl] : row.dev_ppl) dev[std::string(LanguageName(lang))] = ppl;
  nlohmann::json metrics = nlohmann::json::array();
  for (const EpochMetrics& m : row.metrics) metrics.push_back(ToJson(m));
  return {{"initial_weight", row.init_label},
          {"input_type", std::string(EncodingModeName(row.mode))},
          {"test", ToJson(row.test)},
          {"best_dev_ppl", row.best_dev_ppl},
          {"dev_ppl_per_language", dev},
          {"metrics", metrics}};
}

namespace {

AblationRow TrainAndScore(const CorpusSplits& splits, const Vocabulary& vocab,
                          const TrainingRecipe& recipe, EncodingMode mode,
                          const std::string& label, Parameters<float> init) {
  const ModelConfig& config = recipe.model;
  const std::vector<EncodedExample> train = Encode(splits.train, vocab, mode, config);
  const std::vector<EncodedExample> dev = Encode(splits.valid, vocab, mode, config);
  TrainResult trained = Train(std::move(init), config, train, dev, recipe.train);

  AblationRow row;
  row.init_label = label;
  row.mode = mode;
  row.best_dev_ppl = trained.best_dev_ppl;
  row.metrics = trained.metrics;
  row.test = Evaluate(trained.params, config, vocab, splits.test, mode, recipe.decode);
  std::map<Language, std::vector<EncodedExample>> dev_by_language;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    dev_by_language[splits.valid[i].language].push_back(dev[i]);
  }
  for (const auto& [lang, examples] : dev_by_language) {
    row.dev_ppl[lang] =
        Perplexity(trained.params, config, std::span<const EncodedExample>(examples));
  }
  return row;
}

Parameters<float> InitialParameters(const TrainingRecipe& recipe, const InitialWeights& init) {
  if (init.checkpoint) return LoadCheckpointFor(*init.checkpoint, recipe.model);
  return RandomParameters<float>(recipe.model, recipe.init_seed);
}

}  // namespace

AblationRow RunRecipe(const CorpusSplits& splits, const Vocabulary& vocab,
                      const TrainingRecipe& recipe, EncodingMode mode,
                      const InitialWeights& init) {
  return TrainAndScore(splits, vocab, recipe, mode, init.label, InitialParameters(recipe, init));
}

std::vector<AblationRow> AblateInputMode(const CorpusSplits& splits, const Vocabulary& vocab,
                                         const TrainingRecipe& recipe,
                                         const InitialWeights& init) {
  const Parameters<float> start = InitialParameters(recipe, init);
  std::vector<AblationRow> rows;
  for (EncodingMode mode : {EncodingMode::kAllModification, EncodingMode::kChangedLines}) {
    rows.push_back(TrainAndScore(splits, vocab, recipe, mode, init.label, start));
  }
  return rows;
}

std::vector<AblationRow> AblateInitWeight(const CorpusSplits& splits, const Vocabulary& vocab,
                                          const TrainingRecipe& recipe,
                                          std::span<const InitialWeights> inits) {
  if (inits.empty()) throw std::invalid_argument("no initial weights to compare");
  std::vector<Parameters<float>> starts;
  for (const InitialWeights& init : inits) starts.push_back(InitialParameters(recipe, init));
  std::vector<AblationRow> rows;
  for (std::size_t i = 0; i < inits.size(); ++i) {
    rows.push_back(TrainAndScore(splits, vocab, recipe, EncodingMode::kChangedLines,
                                 inits[i].label, std::move(starts[i])));
  }
  return rows;
}

std::string FormatInputModeTable(std::span<const AblationRow> rows) {
  std::size_t w0 = std::string("Initial Weight").size();
  std::size_t w1 = std::string("Input Type").size();
  for (const AblationRow& r : rows) {
    w0 = std::max(w0, r.init_label.size());
    w1 = std::max(w1, InputTypeLabel(r.mode).size() + 4);
  }
  std::ostringstream out;
  out << Pad("Initial Weight", w0) << "  " << Pad("Input Type", w1) << "  BLEU-4\n";
  std::string last_label;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const AblationRow& r = rows[i];
    const std::string tag = std::string("(") + static_cast<char>('a' + (i % 26)) + ") ";
    out << Pad(i > 0 && r.init_label == last_label ? "" : r.init_label, w0) << "  "
        << Pad(tag + InputTypeLabel(r.mode), w1) << "  " << PadLeft(Fixed(r.test.bleu4), 6)
        << "\n";
    last_label = r.init_label;
  }
  return out.str();
}

std::string FormatInitWeightTable(std::span<const AblationRow> rows) {
  std::size_t w_label = std::string("Initial Weight").size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    w_label = std::max(w_label, rows[i].init_label.size() + 4);
  }
  const std::size_t w_metric = std::string("BLEU-4 (Test)").size();
  std::ostringstream out;
  out << Pad("Metric", w_metric) << "  " << Pad("Initial Weight", w_label);
  for (Language lang : kAllLanguages) out << "  " << PadLeft(std::string(LanguageLabel(lang)), 10);
  out << "\n";
  for (int block = 0; block < 2; ++block) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const AblationRow& r = rows[i];
      const std::string metric = i > 0 ? "" : (block == 0 ? "BLEU-4 (Test)" : "PPL (Dev)");
      const std::string tag = std::string("(") + static_cast<char>('a' + (i % 26)) + ") ";
      out << Pad(metric, w_metric) << "  " << Pad(tag + r.init_label, w_label);
      for (Language lang : kAllLanguages) {
        double v = std::nan("");
        if (block == 0) {
          auto it = r.test.per_language.find(lang);
          if (it != r.test.per_language.end()) v = it->second.bleu4;
        } else {
          auto it = r.dev_ppl.find(lang);
          if (it != r.dev_ppl.end()) v = it->second;
        }
        out << "  " << PadLeft(Fixed(v), 10);
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace commitgen
