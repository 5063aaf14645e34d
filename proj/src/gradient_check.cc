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

#include "commitgen/gradient_check.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace commitgen {

double RelativeError(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

GradientCheckResult BackwardCheck(const Parameters<double>& params, const ModelConfig& config,
                                  std::span<const EncodedExample> batch,
                                  const GradientCheckOptions& options) {
  if (config.hidden_dim > 16) {
    throw std::invalid_argument("gradient check needs a tiny config (hidden_dim <= 16)");
  }
  Parameters<double> grad = ZeroParameters<double>(config);
  LossAndGradient(params, config, batch, &grad);

  GradientCheckResult result;
  double sq = 0;
  std::vector<std::pair<std::string, Matrix<double>*>> grads;
  ForEachTensor(grad, [&](const std::string& name, Matrix<double>& m) {
    sq += m.squaredNorm();
    grads.emplace_back(name, &m);
  });
  result.analytic_norm = std::sqrt(sq);

  // Pick entries: a fixed number per tensor, then uniformly over all
  // entries until the minimum is reached.
  std::mt19937_64 rng(options.seed);
  std::vector<std::pair<std::size_t, Eigen::Index>> picks;
  Eigen::Index total = 0;
  for (std::size_t t = 0; t < grads.size(); ++t) {
    const Eigen::Index size = grads[t].second->size();
    total += size;
    std::uniform_int_distribution<Eigen::Index> dist(0, size - 1);
    for (std::size_t k = 0; k < options.per_tensor; ++k) picks.emplace_back(t, dist(rng));
  }
  std::uniform_int_distribution<Eigen::Index> any(0, total - 1);
  while (picks.size() < options.min_samples) {
    Eigen::Index flat = any(rng);
    std::size_t t = 0;
    while (flat >= grads[t].second->size()) flat -= grads[t].second->size(), ++t;
    picks.emplace_back(t, flat);
  }

  Parameters<double> probe = params;
  std::vector<Matrix<double>*> slots;
  ForEachTensor(probe, [&](const std::string&, Matrix<double>& m) { slots.push_back(&m); });
  for (const auto& [t, index] : picks) {
    double& x = slots[t]->data()[index];
    const double saved = x;
    const double h = options.step;
    auto at = [&](double offset) {
      x = saved + offset;
      return Loss(probe, config, batch);
    };
    double numeric;
    if (options.stencil == FiniteDifference::kCentral2) {
      numeric = (at(h) - at(-h)) / (2 * h);
    } else {
      numeric = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    }
    x = saved;
    const double analytic = grads[t].second->data()[index];
    const double err = RelativeError(analytic, numeric);
    if (result.checked == 0 || err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_tensor = grads[t].first;
      result.worst_index = static_cast<std::size_t>(index);
    }
    ++result.checked;
  }
  return result;
}

}  // namespace commitgen
