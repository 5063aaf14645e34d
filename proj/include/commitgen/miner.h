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

// Repository mining: enumerate qualifying commits, extract per-file
// modifications, and apply the curation rules to each commit.

#ifndef COMMITGEN_MINER_H_
#define COMMITGEN_MINER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "commitgen/bpe.h"
#include "commitgen/diff.h"
#include "commitgen/repository.h"
#include "json.hpp"

namespace commitgen {

enum class BranchPolicy { kDefaultBranchOnly };

struct MinerConfig {
  std::vector<std::string> repo_list;
  int max_commits_per_repo = 50;
  std::set<std::string> allowed_extensions = {".py", ".php", ".js",
                                              ".java", ".go", ".rb"};
  BranchPolicy branch_policy = BranchPolicy::kDefaultBranchOnly;
  bool exclude_merges = true;
  int max_files_changed = 2;
  int max_code_tokens = 32;
  std::vector<std::string> verb_whitelist;  // lowercase lemmas
  int clone_workers = 4;
  std::string clone_dir;
  std::string clone_url_prefix = "https://github.com/";

  MinerConfig();

  // Throws std::invalid_argument on a violated invariant.
  void Validate() const;
};

enum class RejectRule {
  kRepoCap,             // R1
  kFileCount,           // R2
  kIssueNumber,         // R3
  kNonEnglish,          // R4
  kTokenLength,         // R6
  kNotVerbStart,        // R7
  kVerbNotWhitelisted,  // R8
  kMergeCommit,
  kNoQualifyingFiles,
};

inline constexpr RejectRule kAllRejectRules[] = {
    RejectRule::kRepoCap,       RejectRule::kFileCount,
    RejectRule::kIssueNumber,   RejectRule::kNonEnglish,
    RejectRule::kTokenLength,   RejectRule::kNotVerbStart,
    RejectRule::kVerbNotWhitelisted, RejectRule::kMergeCommit,
    RejectRule::kNoQualifyingFiles};

// "R1_repo_cap", "R2_file_count", ..., "MERGE_COMMIT".
std::string_view RejectRuleName(RejectRule rule);

struct FilterDecision {
  std::optional<RejectRule> rejected_by;

  bool accepted() const { return !rejected_by.has_value(); }
  bool operator==(const FilterDecision&) const = default;
};

// Non-merge commits of the default branch that touch at least one allowed
// extension, ordered by commit time then hash, capped at
// max_commits_per_repo.
std::vector<RawCommit> GetCommits(Repository& repo, const MinerConfig& config);

struct CommitModifications {
  int files_changed = 0;
  std::vector<CodeModification> modifications;
  std::vector<std::string> skipped_binary;  // allowed-extension binaries
};

// Splits a commit diff into per-file modifications for allowed extensions.
// Binary files, pure renames and mode changes produce no modification.
CommitModifications ExtractModifications(std::string_view diff_text,
                                         const MinerConfig& config);

CommitModifications GetModifications(Repository& repo, const RawCommit& commit,
                                     const MinerConfig& config);

// True if the message references an issue ("#123", "GH-123").
bool HasIssueReference(std::string_view message);

// At least 90% ASCII code points, and the first word is ASCII-alphabetic.
bool LooksEnglish(std::string_view message);

// Applies R2, R3, R4, normalization, R6, R7 and R8 in that order and
// reports the first rule that fails. R1 and merge exclusion depend on the
// repository walk and are applied by Mine.
FilterDecision FilterCommit(const CommitRecord& record, const MinerConfig& config,
                            const TokenCounter& count_tokens);

struct LanguageTally {
  std::int64_t accepted_modifications = 0;
  std::int64_t rejected_commits = 0;
};

struct MiningReport {
  std::int64_t repos_total = 0;
  std::vector<std::pair<std::string, std::string>> repos_failed;  // id, error
  std::int64_t commits_examined = 0;
  std::int64_t commits_accepted = 0;
  std::int64_t modifications_accepted = 0;
  std::map<RejectRule, std::int64_t> rejected;
  std::map<Language, LanguageTally> per_language;
  std::int64_t binary_files_skipped = 0;

  MiningReport();
  void Merge(const MiningReport& other);
  std::int64_t total_rejected() const;
};

nlohmann::json ToJson(const MiningReport& report);

struct MiningResult {
  std::vector<CommitRecord> accepted;  // repo-list order, then commit order
  MiningReport report;
};

// Mines one already-opened repository. Commits are examined oldest first.
MiningResult MineRepository(Repository& repo, const MinerConfig& config,
                            const TokenCounter& count_tokens);

using RepositoryOpener =
    std::function<std::unique_ptr<Repository>(const std::string& id)>;

// Opens every repository in config.repo_list on up to clone_workers threads
// and mines it. Per-repository failures are recorded in the report and do
// not stop the run. The default opener clones through OpenRepository.
MiningResult Mine(const MinerConfig& config, const TokenCounter& count_tokens,
                  const RepositoryOpener& open = {});

}  // namespace commitgen

#endif  // COMMITGEN_MINER_H_
