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

#ifndef COMMITGEN_SUBPROCESS_H_
#define COMMITGEN_SUBPROCESS_H_

#include <string>
#include <vector>

namespace commitgen {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs argv[0] (looked up on PATH) without a shell, in `working_dir` when
// non-empty, and collects both output streams. Throws std::system_error if
// the process cannot be started.
ProcessResult RunProcess(const std::vector<std::string>& argv,
                         const std::string& working_dir = {});

}  // namespace commitgen

#endif  // COMMITGEN_SUBPROCESS_H_
