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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "commitgen/errors.h"
#include "commitgen/gradient_check.h"
#include "test_support.h"

namespace commitgen {
namespace {

using testing::RandomExample;
using testing::TinyConfig;

double LogSumExp(const Matrix<double>& m, Eigen::Index row) {
  const double max = m.row(row).maxCoeff();
  return max + std::log((m.row(row).array() - max).exp().sum());
}

std::vector<EncodedExample> RandomBatch(std::mt19937_64& rng, const ModelConfig& config,
                                        int n) {
  std::vector<EncodedExample> batch;
  for (int i = 0; i < n; ++i) batch.push_back(RandomExample(rng, config, 2 + i % 3, 1 + i % 2, 2 + i % 3));
  return batch;
}

TEST(BuildInputTest, ChangedLinesLayout) {
  const Vocabulary vocab;
  const ModelConfig config = ModelConfig::ForVocabulary(vocab);
  CorpusEntry entry;
  entry.added = {"return a - b"};
  entry.deleted = {"return a + b"};
  entry.message = "fix sub";
  const EncodedExample ex = BuildInput(entry, vocab, EncodingMode::kChangedLines, config);
  std::vector<int> want = {vocab.specials().cls};
  for (int id : vocab.Encode("return a - b")) want.push_back(id);
  want.push_back(vocab.specials().sep);
  for (int id : vocab.Encode("return a + b")) want.push_back(id);
  want.push_back(vocab.specials().sep);
  EXPECT_EQ(ex.source_ids, want);
  EXPECT_EQ(ex.target_ids.front(), vocab.specials().bos);
  EXPECT_EQ(ex.target_ids.back(), vocab.specials().eos);
  EXPECT_FALSE(ex.degenerate);
}

TEST(BuildInputTest, EmptyModificationIsDegenerate) {
  const Vocabulary vocab;
  const ModelConfig config = ModelConfig::ForVocabulary(vocab);
  CorpusEntry entry;
  entry.message = "update";
  const EncodedExample ex = BuildInput(entry, vocab, EncodingMode::kChangedLines, config);
  const SpecialIds& sp = vocab.specials();
  EXPECT_EQ(ex.source_ids, (std::vector<int>{sp.cls, sp.sep, sp.sep}));
  EXPECT_TRUE(ex.degenerate);
}

TEST(BuildInputTest, LinesJoinedWithNewline) {
  const Vocabulary vocab;
  const ModelConfig config = ModelConfig::ForVocabulary(vocab);
  CorpusEntry entry;
  entry.added = {"a", "b"};
  entry.message = "add";
  const EncodedExample ex = BuildInput(entry, vocab, EncodingMode::kChangedLines, config);
  const SpecialIds& sp = vocab.specials();
  const std::vector<int> ab = vocab.Encode("a\nb");
  std::vector<int> want = {sp.cls};
  want.insert(want.end(), ab.begin(), ab.end());
  want.push_back(sp.sep);
  want.push_back(sp.sep);
  EXPECT_EQ(ex.source_ids, want);
}

TEST(BuildInputTest, OversizeSourceTruncatedToLimitEndingInSep) {
  const Vocabulary vocab;  // bytes only: one token per character
  const ModelConfig config = ModelConfig::ForVocabulary(vocab);
  CorpusEntry entry;
  entry.added = {std::string(150, 'a')};
  entry.deleted = {std::string(147, 'd')};
  entry.message = "fix";
  // 1 + 150 + 1 + 147 + 1 = 300 before truncation.
  const EncodedExample ex = BuildInput(entry, vocab, EncodingMode::kChangedLines, config);
  ASSERT_EQ(ex.source_ids.size(), 256u);
  EXPECT_EQ(ex.source_ids.front(), vocab.specials().cls);
  EXPECT_EQ(ex.source_ids.back(), vocab.specials().sep);
  // Del loses 44 tokens; Add is intact.
  EXPECT_EQ(ex.source_ids[151], vocab.specials().sep);
  EXPECT_EQ(std::count(ex.source_ids.begin(), ex.source_ids.end(), vocab.specials().sep), 2);
}

TEST(BuildInputTest, HugeAddDropsAllOfDel) {
  const Vocabulary vocab;
  const ModelConfig config = ModelConfig::ForVocabulary(vocab);
  CorpusEntry entry;
  entry.added = {std::string(400, 'a')};
  entry.deleted = {"gone"};
  entry.message = "fix";
  const EncodedExample ex = BuildInput(entry, vocab, EncodingMode::kChangedLines, config);
  ASSERT_EQ(ex.source_ids.size(), 256u);
  EXPECT_EQ(ex.source_ids[254], vocab.specials().sep);
  EXPECT_EQ(ex.source_ids[255], vocab.specials().sep);
}

TEST(BuildInputTest, LongTargetTruncatedWithoutEos) {
  const Vocabulary vocab;
  const ModelConfig config = ModelConfig::ForVocabulary(vocab);
  CorpusEntry entry;
  entry.added = {"x"};
  entry.message = "add " + std::string(200, 'y');
  const EncodedExample ex = BuildInput(entry, vocab, EncodingMode::kChangedLines, config);
  ASSERT_EQ(ex.target_ids.size(), 128u);
  EXPECT_EQ(ex.target_ids.front(), vocab.specials().bos);
  EXPECT_NE(ex.target_ids.back(), vocab.specials().eos);
}

TEST(BuildInputTest, AllModificationUsesMarkedLines) {
  const Vocabulary vocab;
  const ModelConfig config = ModelConfig::ForVocabulary(vocab);
  CorpusEntry entry;
  entry.added = {"return a - b"};
  entry.deleted = {"return a + b"};
  entry.marked_lines = {" def f(a, b):", "-return a + b", "+return a - b"};
  entry.message = "fix";
  const EncodedExample all = BuildInput(entry, vocab, EncodingMode::kAllModification, config);
  const EncodedExample changed = BuildInput(entry, vocab, EncodingMode::kChangedLines, config);
  std::vector<int> want = {vocab.specials().cls};
  for (int id : vocab.Encode(" def f(a, b):\n-return a + b\n+return a - b")) want.push_back(id);
  want.push_back(vocab.specials().sep);
  EXPECT_EQ(all.source_ids, want);
  EXPECT_NE(all.source_ids, changed.source_ids);
}

TEST(ModelConfigTest, Validation) {
  ModelConfig c = TinyConfig();
  EXPECT_NO_THROW(c.Validate());
  c.heads = 3;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = TinyConfig();
  c.max_target_len = 1;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

TEST(ModelConfigTest, JsonRoundTrip) {
  ModelConfig c = TinyConfig(40, 16);
  c.vocab_fingerprint = 0xfedcba9876543210ULL;
  EXPECT_EQ(ModelConfigFromJson(ToJson(c)), c);
}

TEST(ForwardTest, OutputsAreNormalized) {
  const ModelConfig config = TinyConfig();
  const auto params = RandomParameters<double>(config, 3);
  std::mt19937_64 rng(5);
  const auto batch = RandomBatch(rng, config, 4);
  for (const auto& lp : ForwardLogProbs(params, config, std::span(batch))) {
    for (Eigen::Index r = 0; r < lp.rows(); ++r) EXPECT_LT(std::abs(LogSumExp(lp, r)), 1e-5);
  }
}

TEST(ForwardTest, FloatOutputsAreNormalized) {
  const ModelConfig config = TinyConfig();
  const auto params = RandomParameters<float>(config, 3);
  std::mt19937_64 rng(6);
  const auto batch = RandomBatch(rng, config, 3);
  for (const auto& lp : ForwardLogProbs(params, config, std::span(batch))) {
    const Matrix<double> d = lp.cast<double>();
    for (Eigen::Index r = 0; r < d.rows(); ++r) EXPECT_LT(std::abs(LogSumExp(d, r)), 1e-5);
  }
}

TEST(ForwardTest, BatchPermutationPermutesOutputs) {
  const ModelConfig config = TinyConfig();
  const auto params = RandomParameters<double>(config, 4);
  std::mt19937_64 rng(7);
  auto batch = RandomBatch(rng, config, 3);
  const auto a = ForwardLogProbs(params, config, std::span(batch));
  std::swap(batch[0], batch[2]);
  const auto b = ForwardLogProbs(params, config, std::span(batch));
  EXPECT_EQ(a[0], b[2]);
  EXPECT_EQ(a[1], b[1]);
  EXPECT_EQ(a[2], b[0]);
}

TEST(ForwardTest, AddAndDelSegmentsAreDistinguishable) {
  const ModelConfig config = TinyConfig();
  const auto params = RandomParameters<double>(config, 8);
  const SpecialIds& sp = config.specials;
  EncodedExample add_only;
  add_only.source_ids = {sp.cls, 9, 10, sp.sep, sp.sep};
  add_only.target_ids = {sp.bos, 7, sp.eos};
  add_only.source_mask.assign(5, 1);
  add_only.target_mask.assign(3, 1);
  EncodedExample del_only = add_only;
  del_only.source_ids = {sp.cls, sp.sep, 9, 10, sp.sep};
  const auto a = ForwardLogProbs(params, config, std::span(&add_only, 1));
  const auto b = ForwardLogProbs(params, config, std::span(&del_only, 1));
  EXPECT_GT((a[0] - b[0]).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ForwardTest, CausalMasking) {
  const ModelConfig config = TinyConfig();
  const auto params = RandomParameters<double>(config, 9);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    EncodedExample ex = RandomExample(rng, config, 3, 2, 5);
    const auto base = ForwardLogProbs(params, config, std::span(&ex, 1))[0];
    for (std::size_t t = 1; t < ex.target_ids.size(); ++t) {
      EncodedExample changed = ex;
      changed.target_ids[t] = changed.target_ids[t] == 7 ? 8 : 7;
      const auto out = ForwardLogProbs(params, config, std::span(&changed, 1))[0];
      // Row r predicts target[r + 1] from target[0..r]; rows r < t must not move.
      for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(t); ++r) {
        EXPECT_EQ(out.row(r), base.row(r)) << "trial " << trial << " position " << t;
      }
      if (t < ex.target_ids.size() - 1) {
        EXPECT_GT((out.row(static_cast<Eigen::Index>(t)) - base.row(static_cast<Eigen::Index>(t)))
                      .cwiseAbs()
                      .maxCoeff(),
                  0.0);
      }
    }
  }
}

TEST(ForwardTest, SourceChangesFirstPosition) {
  const ModelConfig config = TinyConfig();
  const auto params = RandomParameters<double>(config, 12);
  std::mt19937_64 rng(13);
  EncodedExample ex = RandomExample(rng, config, 3, 2, 3);
  EncodedExample other = ex;
  other.source_ids[1] = ex.source_ids[1] == 9 ? 10 : 9;
  const auto a = ForwardLogProbs(params, config, std::span(&ex, 1))[0];
  const auto b = ForwardLogProbs(params, config, std::span(&other, 1))[0];
  EXPECT_GT((a.row(0) - b.row(0)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ForwardTest, ShapeErrors) {
  const ModelConfig config = TinyConfig();
  const auto params = RandomParameters<double>(config, 1);
  std::mt19937_64 rng(1);
  EncodedExample ex = RandomExample(rng, config, 2, 2, 2);
  ex.source_ids[1] = config.vocab_size;
  EXPECT_THROW(ForwardLogProbs(params, config, std::span(&ex, 1)), ShapeError);
  ex = RandomExample(rng, config, 12, 2, 2);  // longer than max_source_len
  EXPECT_THROW(ForwardLogProbs(params, config, std::span(&ex, 1)), ShapeError);
  ModelConfig wider = config;
  wider.hidden_dim = 16;
  ex = RandomExample(rng, config, 2, 2, 2);
  EXPECT_THROW(ForwardLogProbs(params, wider, std::span(&ex, 1)), ShapeError);
}

TEST(LossTest, UniformModelGivesLogV) {
  const ModelConfig config = TinyConfig(16, 8);
  const auto params = ZeroParameters<double>(config);
  std::mt19937_64 rng(2);
  const auto batch = RandomBatch(rng, config, 3);
  EXPECT_NEAR(Loss(params, config, std::span(batch)), std::log(16.0), 1e-12);
}

TEST(LossTest, RepeatedBatchKeepsMean) {
  const ModelConfig config = TinyConfig();
  const auto params = RandomParameters<double>(config, 21);
  std::mt19937_64 rng(3);
  auto batch = RandomBatch(rng, config, 3);
  const double once = Loss(params, config, std::span(batch));
  auto doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());
  EXPECT_NEAR(Loss(params, config, std::span(doubled)), once, 1e-12);
}

TEST(LossTest, EmptyBatchThrows) {
  const ModelConfig config = TinyConfig();
  const auto params = RandomParameters<double>(config, 1);
  std::vector<EncodedExample> none;
  EXPECT_THROW(Loss(params, config, std::span(none)), std::invalid_argument);
}

TEST(LossTest, PaddingInvariance) {
  const ModelConfig config = TinyConfig();
  const auto params = RandomParameters<double>(config, 31);
  std::mt19937_64 rng(4);
  const auto batch = RandomBatch(rng, config, 4);
  const auto padded = PadBatch(std::span(batch), config.specials.pad);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    EXPECT_NEAR(Loss(params, config, std::span(&batch[i], 1)),
                Loss(params, config, std::span(&padded[i], 1)), 1e-6);
  }
  EXPECT_NEAR(Loss(params, config, std::span(batch)), Loss(params, config, std::span(padded)),
              1e-6);
  // Logits at real positions match exactly up to rounding.
  const auto a = ForwardLogProbs(params, config, std::span(batch));
  const auto b = ForwardLogProbs(params, config, std::span(padded));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Eigen::Index rows = a[i].rows();
    EXPECT_LT((a[i] - b[i].topRows(rows)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(LossTest, FloatTracksDouble) {
  const ModelConfig config = TinyConfig();
  const auto params = RandomParameters<double>(config, 41);
  const auto params_f = CastParameters<float>(params);
  std::mt19937_64 rng(5);
  const auto batch = RandomBatch(rng, config, 3);
  EXPECT_NEAR(Loss(params_f, config, std::span(batch)), Loss(params, config, std::span(batch)),
              1e-4);
}

TEST(GradientTest, MatchesFiniteDifferences) {
  ModelConfig config = TinyConfig(16, 8);
  config.encoder_layers = 2;
  config.decoder_layers = 2;
  const auto params = RandomParameters<double>(config, 77);
  std::mt19937_64 rng(8);
  const auto batch = RandomBatch(rng, config, 3);
  const GradientCheckResult r = BackwardCheck(params, config, std::span(batch));
  EXPECT_GE(r.checked, 100u);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_tensor << "[" << r.worst_index << "]";
  EXPECT_GT(r.analytic_norm, 0.0);
}

TEST(GradientTest, TwoSeedsBothPass) {
  const ModelConfig config = TinyConfig(12, 8);
  std::mt19937_64 rng(9);
  const auto batch = RandomBatch(rng, config, 2);
  GradientCheckOptions o1, o2;
  o1.seed = 1;
  o2.seed = 2;
  const auto a = BackwardCheck(RandomParameters<double>(config, 1), config, std::span(batch), o1);
  const auto b = BackwardCheck(RandomParameters<double>(config, 2), config, std::span(batch), o2);
  EXPECT_LT(a.max_relative_error, 1e-4);
  EXPECT_LT(b.max_relative_error, 1e-4);
  EXPECT_NE(a.analytic_norm, b.analytic_norm);
}

TEST(GradientTest, TwoPointStencilAgreesAtSmallStep) {
  const ModelConfig config = TinyConfig(14, 16);
  std::mt19937_64 rng(12);
  const auto batch = RandomBatch(rng, config, 3);
  GradientCheckOptions options;
  options.stencil = FiniteDifference::kCentral2;
  options.step = 1e-5;
  const auto r = BackwardCheck(RandomParameters<double>(config, 3), config, std::span(batch), options);
  EXPECT_LT(r.max_relative_error, 1e-3) << r.worst_tensor;
}

TEST(GradientTest, MaskedBatchHasZeroGradient) {
  const ModelConfig config = TinyConfig();
  const auto params = RandomParameters<double>(config, 5);
  std::mt19937_64 rng(10);
  auto batch = RandomBatch(rng, config, 2);
  for (auto& ex : batch) std::fill(ex.target_mask.begin() + 1, ex.target_mask.end(), 0);
  auto grad = ZeroParameters<double>(config);
  ForEachTensor(grad, [](const std::string&, Matrix<double>& m) { m.setZero(); });
  EXPECT_EQ(LossAndGradient(params, config, std::span(batch), &grad), 0.0);
  ForEachTensor(grad, [](const std::string& name, const Matrix<double>& m) {
    EXPECT_EQ(m.cwiseAbs().maxCoeff(), 0.0) << name;
  });
}

TEST(GradientTest, RejectsLargeConfig) {
  const ModelConfig config = TinyConfig(16, 32);
  std::mt19937_64 rng(1);
  const auto batch = RandomBatch(rng, config, 1);
  EXPECT_THROW(BackwardCheck(RandomParameters<double>(config, 1), config, std::span(batch)),
               std::invalid_argument);
}

TEST(ParametersTest, ShapesFollowConfig) {
  const ModelConfig config = TinyConfig(20, 8);
  const auto p = RandomParameters<float>(config, 1);
  EXPECT_EQ(p.token_embedding.rows(), 20);
  EXPECT_EQ(p.token_embedding.cols(), 8);
  EXPECT_EQ(p.encoder.size(), 1u);
  std::size_t tensors = 0;
  ForEachTensor(p, [&](const std::string&, const Matrix<float>& m) {
    ++tensors;
    EXPECT_TRUE(m.allFinite());
  });
  // 3 embeddings + encoder (4 + 8 + 4) + norm 2 + decoder (6 + 16 + 4) + norm 2 + bias.
  EXPECT_EQ(tensors, 3u + 16u + 2u + 26u + 2u + 1u);
}

}  // namespace
}  // namespace commitgen
