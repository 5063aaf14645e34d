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


// Minibatch Adam training with best-dev-perplexity model selection.

#ifndef COMMITGEN_TRAINER_H_
#define COMMITGEN_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "commitgen/model.h"
#include "json.hpp"

namespace commitgen {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0;  // decoupled; 0 = plain Adam
};

struct TrainConfig {
  double learning_rate = 5e-5;
  int batch_size = 32;
  int epochs = 10;
  AdamConfig adam;
  std::uint64_t seed = 42;
  std::optional<double> grad_clip;  // global L2 norm
  int warmup_steps = 0;             // linear ramp; 0 = off

  // Throws std::invalid_argument. A zero learning rate is allowed so that a
  // run can be checked for being a no-op.
  void Validate() const;
};

nlohmann::json ToJson(const TrainConfig& config);
// Missing keys keep their defaults; unknown keys are an error.
TrainConfig TrainConfigFromJson(const nlohmann::json& j);

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double train_loss = 0;
  double dev_ppl = 0;

  bool operator==(const EpochMetrics&) const = default;
};

nlohmann::json ToJson(const EpochMetrics& metrics);

class AdamOptimizer {
 public:
  AdamOptimizer(const AdamConfig& config, const Parameters<float>& shape_like);

  // One update with learning rate `lr`.
  void Step(Parameters<float>* params, const Parameters<float>& grad, double lr);

  long steps() const { return steps_; }

 private:
  AdamConfig config_;
  Parameters<float> first_moment_;
  Parameters<float> second_moment_;
  long steps_ = 0;
};

// Scales grad in place so that its global L2 norm is at most max_norm.
// Returns the norm before clipping.
double ClipGradientNorm(Parameters<float>* grad, double max_norm);

struct TrainResult {
  Parameters<float> params;  // best dev perplexity
  std::vector<EpochMetrics> metrics;
  int best_epoch = 0;
  double best_dev_ppl = 0;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Throws std::invalid_argument on an empty train or dev split and
// TrainingDiverged when the loss or a gradient stops being finite.
TrainResult Train(Parameters<float> params, const ModelConfig& config,
                  std::span<const EncodedExample> train, std::span<const EncodedExample> dev,
                  const TrainConfig& train_config, const EpochCallback& on_epoch = {});

}  // namespace commitgen

#endif  // COMMITGEN_TRAINER_H_
