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

#include "commitgen/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "commitgen/errors.h"

namespace commitgen {
namespace {

bool AllFinite(const Parameters<float>& p) {
  bool ok = true;
  ForEachTensor(p, [&](const std::string&, const Matrix<float>& m) {
    ok = ok && m.allFinite();
  });
  return ok;
}

void SetZero(Parameters<float>* p) {
  ForEachTensor(*p, [](const std::string&, Matrix<float>& m) { m.setZero(); });
}

}  // namespace

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be finite and non-negative");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (warmup_steps < 0) throw std::invalid_argument("warmup_steps must be non-negative");
  if (grad_clip && !(*grad_clip > 0)) throw std::invalid_argument("grad_clip must be positive");
  if (adam.beta1 < 0 || adam.beta1 >= 1 || adam.beta2 < 0 || adam.beta2 >= 1) {
    throw std::invalid_argument("Adam betas must be in [0, 1)");
  }
  if (!(adam.epsilon > 0)) throw std::invalid_argument("Adam epsilon must be positive");
  if (adam.weight_decay < 0) throw std::invalid_argument("weight_decay must be non-negative");
}

nlohmann::json ToJson(const TrainConfig& c) {
  nlohmann::json j = {
      {"learning_rate", c.learning_rate},
      {"batch_size", c.batch_size},
      {"epochs", c.epochs},
      {"beta1", c.adam.beta1},
      {"beta2", c.adam.beta2},
      {"epsilon", c.adam.epsilon},
      {"weight_decay", c.adam.weight_decay},
      {"seed", c.seed},
      {"warmup_steps", c.warmup_steps},
  };
  j["grad_clip"] = c.grad_clip ? nlohmann::json(*c.grad_clip) : nlohmann::json(nullptr);
  return j;
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  TrainConfig c;
  if (!j.is_object()) throw DataError("train configuration must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "beta1") c.adam.beta1 = value.get<double>();
      else if (key == "beta2") c.adam.beta2 = value.get<double>();
      else if (key == "epsilon") c.adam.epsilon = value.get<double>();
      else if (key == "weight_decay") c.adam.weight_decay = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "warmup_steps") c.warmup_steps = value.get<int>();
      else if (key == "grad_clip") {
        if (value.is_null()) c.grad_clip.reset();
        else c.grad_clip = value.get<double>();
      } else {
        throw DataError("unknown train configuration key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad train configuration: ") + e.what());
  }
  return c;
}

nlohmann::json ToJson(const EpochMetrics& m) {
  return {{"epoch", m.epoch}, {"train_loss", m.train_loss}, {"dev_ppl", m.dev_ppl}};
}

AdamOptimizer::AdamOptimizer(const AdamConfig& config, const Parameters<float>& shape_like)
    : config_(config), first_moment_(shape_like), second_moment_(shape_like) {
  SetZero(&first_moment_);
  SetZero(&second_moment_);
}

void AdamOptimizer::Step(Parameters<float>* params, const Parameters<float>& grad, double lr) {
  ++steps_;
  const double correction1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  const auto b1 = static_cast<float>(config_.beta1);
  const auto b2 = static_cast<float>(config_.beta2);
  const auto step = static_cast<float>(lr / correction1);
  const auto root2 = static_cast<float>(std::sqrt(correction2));
  const auto eps = static_cast<float>(config_.epsilon);
  const auto decay = static_cast<float>(lr * config_.weight_decay);

  std::vector<Matrix<float>*> m1;
  std::vector<Matrix<float>*> m2;
  std::vector<const Matrix<float>*> g;
  ForEachTensor(first_moment_, [&](const std::string&, Matrix<float>& m) { m1.push_back(&m); });
  ForEachTensor(second_moment_, [&](const std::string&, Matrix<float>& m) { m2.push_back(&m); });
  ForEachTensor(grad, [&](const std::string&, const Matrix<float>& m) { g.push_back(&m); });
  std::size_t i = 0;
  ForEachTensor(*params, [&](const std::string&, Matrix<float>& p) {
    Matrix<float>& m = *m1[i];
    Matrix<float>& v = *m2[i];
    const Matrix<float>& gi = *g[i];
    ++i;
    m = b1 * m + (1 - b1) * gi;
    v = b2 * v + (1 - b2) * gi.cwiseProduct(gi);
    if (decay != 0) p -= decay * p;
    p.array() -= step * m.array() / (v.array().sqrt() / root2 + eps);
  });
}

double ClipGradientNorm(Parameters<float>* grad, double max_norm) {
  double sq = 0;
  ForEachTensor(*grad, [&](const std::string&, const Matrix<float>& m) {
    sq += m.cast<double>().squaredNorm();
  });
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    const auto scale = static_cast<float>(max_norm / norm);
    ForEachTensor(*grad, [&](const std::string&, Matrix<float>& m) { m *= scale; });
  }
  return norm;
}

TrainResult Train(Parameters<float> params, const ModelConfig& config,
                  std::span<const EncodedExample> train, std::span<const EncodedExample> dev,
                  const TrainConfig& train_config, const EpochCallback& on_epoch) {
  train_config.Validate();
  if (train.empty()) throw std::invalid_argument("empty training split");
  if (dev.empty()) throw std::invalid_argument("empty dev split");

  std::mt19937_64 order_rng(train_config.seed);
  std::mt19937_64 dropout_rng(train_config.seed ^ 0x9e3779b97f4a7c15ULL);
  AdamOptimizer optimizer(train_config.adam, params);
  Parameters<float> grad = params;

  TrainResult result;
  result.params = params;
  result.best_dev_ppl = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch_size = static_cast<std::size_t>(train_config.batch_size);
  std::vector<EncodedExample> batch;

  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    // Reshuffle every epoch.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(order_rng)]);
    }
    double epoch_nll = 0;
    std::size_t epoch_tokens = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      batch.clear();
      std::size_t tokens = 0;
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(train[order[k]]);
        for (std::size_t t = 1; t < batch.back().target_mask.size(); ++t) {
          tokens += batch.back().target_mask[t] ? 1 : 0;
        }
      }
      SetZero(&grad);
      const double loss = LossAndGradient(params, config, std::span<const EncodedExample>(batch),
                                          &grad, &dropout_rng);
      if (!std::isfinite(loss) || !AllFinite(grad)) {
        throw TrainingDiverged("non-finite loss or gradient at epoch " + std::to_string(epoch) +
                               ", step " + std::to_string(optimizer.steps() + 1) +
                               " (loss " + std::to_string(loss) + ")");
      }
      epoch_nll += loss * static_cast<double>(tokens);
      epoch_tokens += tokens;
      if (train_config.grad_clip) ClipGradientNorm(&grad, *train_config.grad_clip);
      double lr = train_config.learning_rate;
      if (train_config.warmup_steps > 0) {
        lr *= std::min(1.0, static_cast<double>(optimizer.steps() + 1) /
                                static_cast<double>(train_config.warmup_steps));
      }
      optimizer.Step(&params, grad, lr);
      if (!AllFinite(params)) {
        throw TrainingDiverged("parameters became non-finite at epoch " +
                               std::to_string(epoch) + ", step " +
                               std::to_string(optimizer.steps()));
      }
    }

    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.train_loss =
        epoch_tokens == 0 ? 0.0 : epoch_nll / static_cast<double>(epoch_tokens);
    metrics.dev_ppl = std::exp(EvaluateLoss(params, config, dev).mean());
    if (!std::isfinite(metrics.dev_ppl)) {
      throw TrainingDiverged("dev perplexity is not finite after epoch " +
                             std::to_string(epoch));
    }
    result.metrics.push_back(metrics);
    if (metrics.dev_ppl < result.best_dev_ppl) {
      result.best_dev_ppl = metrics.dev_ppl;
      result.best_epoch = epoch;
      result.params = params;
    }
    if (on_epoch) on_epoch(metrics);
  }
  return result;
}

}  // namespace commitgen
