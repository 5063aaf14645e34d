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

#include "commitgen/repository.h"

#include <filesystem>
#include <sstream>

#include "commitgen/errors.h"
#include "commitgen/subprocess.h"

namespace commitgen {
namespace {

constexpr char kRecordSep = '\x1e';
constexpr char kFieldSep = '\x1f';

std::vector<std::string> Split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find(sep, start);
    parts.emplace_back(text.substr(start, end == std::string_view::npos
                                              ? std::string_view::npos
                                              : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

}  // namespace

GitRepository::GitRepository(std::string id, std::string path)
    : id_(std::move(id)), path_(std::move(path)) {}

std::string GitRepository::Git(const std::vector<std::string>& args) const {
  std::vector<std::string> argv = {"git", "-C", path_, "-c", "core.quotepath=off"};
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessResult result = RunProcess(argv);
  if (result.exit_code != 0) {
    throw RepositoryError(id_ + ": git " + (args.empty() ? "" : args[0]) +
                          " failed: " + result.err);
  }
  return std::move(result.out);
}

std::vector<RawCommit> GitRepository::ListCommits() {
  Git({"rev-parse", "--git-dir"});
  const ProcessResult head =
      RunProcess({"git", "-C", path_, "rev-parse", "--verify", "-q", "HEAD"});
  if (head.exit_code != 0) return {};  // no commits yet

  const std::string log =
      Git({"log", "--format=%x1e%H%x1f%P%x1f%ct%x1f%B%x1f", "--name-only",
           "--no-renames", "HEAD"});
  std::vector<RawCommit> commits;
  for (const std::string& record : Split(log, kRecordSep)) {
    if (record.empty()) continue;
    const std::vector<std::string> fields = Split(record, kFieldSep);
    if (fields.size() < 5) {
      throw RepositoryError(id_ + ": unexpected git log record");
    }
    RawCommit commit;
    commit.hash = fields[0];
    std::istringstream parents(fields[1]);
    for (std::string p; parents >> p;) commit.parents.push_back(p);
    commit.timestamp = std::stoll(fields[2]);
    commit.message = fields[3];
    std::istringstream files(fields[4]);
    for (std::string line; std::getline(files, line);) {
      if (!line.empty()) commit.files.push_back(line);
    }
    commits.push_back(std::move(commit));
  }
  return commits;
}

std::string GitRepository::CommitDiff(const std::string& hash) {
  return Git({"show", "--format=", "--no-color", "--no-ext-diff", "-M",
              "--diff-merges=first-parent",
              "--unified=3", hash});
}

void InMemoryRepository::AddCommit(RawCommit commit, std::string diff) {
  diffs_[commit.hash] = std::move(diff);
  commits_.push_back(std::move(commit));
}

std::string InMemoryRepository::CommitDiff(const std::string& hash) {
  auto it = diffs_.find(hash);
  if (it == diffs_.end()) throw RepositoryError(id_ + ": unknown commit " + hash);
  return it->second;
}

std::unique_ptr<Repository> OpenRepository(const std::string& id,
                                           const std::string& clone_dir,
                                           const std::string& url_prefix) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_directory(id, ec)) {
    return std::make_unique<GitRepository>(id, id);
  }
  if (clone_dir.empty()) {
    throw RepositoryError(id + ": not a local directory and no clone directory set");
  }
  std::string name = id;
  for (char& c : name) {
    if (c == '/') c = '_';
  }
  const fs::path target = fs::path(clone_dir) / name;
  if (!fs::is_directory(target / ".git", ec)) {
    fs::create_directories(clone_dir, ec);
    const ProcessResult clone = RunProcess(
        {"git", "clone", "--quiet", url_prefix + id, target.string()});
    if (clone.exit_code != 0) {
      throw RepositoryError(id + ": clone failed: " + clone.err);
    }
  }
  return std::make_unique<GitRepository>(id, target.string());
}

}  // namespace commitgen
