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

// Read access to commit history, backed by the git command line or by an
// in-memory fixture.

#ifndef COMMITGEN_REPOSITORY_H_
#define COMMITGEN_REPOSITORY_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace commitgen {

struct RawCommit {
  std::string hash;
  std::vector<std::string> parents;
  std::int64_t timestamp = 0;  // committer time, seconds since epoch
  std::string message;
  std::vector<std::string> files;  // paths touched; empty for merges

  bool is_merge() const { return parents.size() > 1; }
};

class Repository {
 public:
  virtual ~Repository() = default;

  virtual const std::string& id() const = 0;

  // Every commit reachable from the default branch head, merges included.
  virtual std::vector<RawCommit> ListCommits() = 0;

  // Multi-file unified diff of a non-merge commit against its first parent
  // (or the empty tree for a root commit).
  virtual std::string CommitDiff(const std::string& hash) = 0;
};

// A working copy on disk. HEAD is taken as the default branch, which is
// what `git clone` checks out.
class GitRepository : public Repository {
 public:
  GitRepository(std::string id, std::string path);

  const std::string& id() const override { return id_; }
  const std::string& path() const { return path_; }
  std::vector<RawCommit> ListCommits() override;
  std::string CommitDiff(const std::string& hash) override;

 private:
  std::string Git(const std::vector<std::string>& args) const;

  std::string id_;
  std::string path_;
};

// Test and fixture double: commits and their diffs supplied up front.
class InMemoryRepository : public Repository {
 public:
  explicit InMemoryRepository(std::string id) : id_(std::move(id)) {}

  void AddCommit(RawCommit commit, std::string diff);

  const std::string& id() const override { return id_; }
  std::vector<RawCommit> ListCommits() override { return commits_; }
  std::string CommitDiff(const std::string& hash) override;

 private:
  std::string id_;
  std::vector<RawCommit> commits_;
  std::map<std::string, std::string> diffs_;
};

// Resolves a repository identifier. An existing local directory is used in
// place; anything else is cloned from `url_prefix + id` into `clone_dir`.
// Throws RepositoryError on failure.
std::unique_ptr<Repository> OpenRepository(const std::string& id,
                                           const std::string& clone_dir,
                                           const std::string& url_prefix);

}  // namespace commitgen

#endif  // COMMITGEN_REPOSITORY_H_
