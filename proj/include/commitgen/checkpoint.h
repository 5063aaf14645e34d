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


// Checkpoint files.
//
// Layout (all integers little-endian):
//   "CMTGCKPT"  uint32 version  uint64 header_len  header_len bytes of JSON
//   uint32 tensor_count
//   per tensor: uint32 name_len, name bytes, uint32 rows, uint32 cols,
//               rows*cols float32 values in row-major order
// The JSON header holds the model configuration, including the vocabulary
// fingerprint.

#ifndef COMMITGEN_CHECKPOINT_H_
#define COMMITGEN_CHECKPOINT_H_

#include <string>

#include "commitgen/model.h"

namespace commitgen {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  Parameters<float> params;
};

void SaveCheckpoint(const Parameters<float>& params, const ModelConfig& config,
                    const std::string& path);

// Throws DataError on a missing, truncated or malformed file.
Checkpoint LoadCheckpoint(const std::string& path);

// Loads and checks the tensors against `expected`. Throws ShapeError naming
// the first tensor whose name or shape differs, and DataError when the
// vocabulary fingerprints disagree.
Parameters<float> LoadCheckpointFor(const std::string& path, const ModelConfig& expected);

// The same check against parameters already in memory.
void CheckCompatible(const Checkpoint& checkpoint, const ModelConfig& expected);

}  // namespace commitgen

#endif  // COMMITGEN_CHECKPOINT_H_
