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


// Finite-difference check of the analytic gradient.

#ifndef COMMITGEN_GRADIENT_CHECK_H_
#define COMMITGEN_GRADIENT_CHECK_H_

#include <cstdint>
#include <span>
#include <string>

#include "commitgen/model.h"

namespace commitgen {

enum class FiniteDifference {
  kCentral2,  // (f(x+h) - f(x-h)) / 2h, error O(h^2)
  kCentral4,  // five-point central stencil, error O(h^4)
};

struct GradientCheckOptions {
  std::size_t min_samples = 100;
  std::size_t per_tensor = 2;  // at least this many entries from every tensor
  double step = 1e-3;
  FiniteDifference stencil = FiniteDifference::kCentral4;
  std::uint64_t seed = 1;
};

struct GradientCheckResult {
  double max_relative_error = 0;
  std::size_t checked = 0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double analytic_norm = 0;  // L2 norm of the full analytic gradient
};

// Relative error used per entry: |a - n| / max(|a|, |n|, 1e-8).
double RelativeError(double analytic, double numeric);

// Compares LossAndGradient against central differences of Loss on a random
// subset of entries. Dropout is off. Requires hidden_dim <= 16.
GradientCheckResult BackwardCheck(const Parameters<double>& params, const ModelConfig& config,
                                  std::span<const EncodedExample> batch,
                                  const GradientCheckOptions& options = {});

}  // namespace commitgen

#endif  // COMMITGEN_GRADIENT_CHECK_H_
