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

#include "commitgen/miner.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <regex>
#include <stdexcept>
#include <thread>

#include "commitgen/errors.h"
#include "commitgen/verbs.h"

namespace commitgen {
namespace {

std::string Join(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  return out;
}

bool IsAllowed(std::string_view path, const MinerConfig& config) {
  return config.allowed_extensions.contains(std::string(PathExtension(path)));
}

std::optional<Language> FirstQualifyingLanguage(const RawCommit& commit,
                                                const MinerConfig& config) {
  for (const std::string& file : commit.files) {
    if (IsAllowed(file, config)) return LanguageFromExtension(PathExtension(file));
  }
  return std::nullopt;
}

std::vector<RawCommit> OrderedHistory(Repository& repo) {
  std::vector<RawCommit> history = repo.ListCommits();
  std::sort(history.begin(), history.end(),
            [](const RawCommit& a, const RawCommit& b) {
              if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
              return a.hash < b.hash;
            });
  return history;
}

// Decodes one UTF-8 sequence length from its lead byte; invalid bytes count
// as a single non-ASCII code point.
std::size_t Utf8Length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;
}

}  // namespace

MinerConfig::MinerConfig() : verb_whitelist(DefaultVerbWhitelist()) {}

void MinerConfig::Validate() const {
  if (max_commits_per_repo < 1) {
    throw std::invalid_argument("max_commits_per_repo must be >= 1");
  }
  if (max_files_changed < 1) {
    throw std::invalid_argument("max_files_changed must be >= 1");
  }
  if (max_code_tokens < 1) {
    throw std::invalid_argument("max_code_tokens must be >= 1");
  }
  if (clone_workers < 1) throw std::invalid_argument("clone_workers must be >= 1");
  if (verb_whitelist.empty()) {
    throw std::invalid_argument("verb_whitelist must not be empty");
  }
  for (const std::string& verb : verb_whitelist) {
    if (verb.empty() ||
        std::any_of(verb.begin(), verb.end(), [](unsigned char c) {
          return !std::islower(c);
        })) {
      throw std::invalid_argument("verb_whitelist entries must be lowercase words: '" +
                                  verb + "'");
    }
  }
  for (const std::string& ext : allowed_extensions) {
    if (!LanguageFromExtension(ext)) {
      throw std::invalid_argument("extension " + ext + " maps to no supported language");
    }
  }
}

std::string_view RejectRuleName(RejectRule rule) {
  switch (rule) {
    case RejectRule::kRepoCap:
      return "R1_repo_cap";
    case RejectRule::kFileCount:
      return "R2_file_count";
    case RejectRule::kIssueNumber:
      return "R3_issue_number";
    case RejectRule::kNonEnglish:
      return "R4_non_english";
    case RejectRule::kTokenLength:
      return "R6_token_length";
    case RejectRule::kNotVerbStart:
      return "R7_not_verb_start";
    case RejectRule::kVerbNotWhitelisted:
      return "R8_verb_not_whitelisted";
    case RejectRule::kMergeCommit:
      return "MERGE_COMMIT";
    case RejectRule::kNoQualifyingFiles:
      return "NO_QUALIFYING_FILES";
  }
  return "UNKNOWN";
}

std::vector<RawCommit> GetCommits(Repository& repo, const MinerConfig& config) {
  std::vector<RawCommit> out;
  for (RawCommit& commit : OrderedHistory(repo)) {
    if (static_cast<int>(out.size()) >= config.max_commits_per_repo) break;
    if (commit.is_merge() && config.exclude_merges) continue;
    if (!FirstQualifyingLanguage(commit, config)) continue;
    out.push_back(std::move(commit));
  }
  return out;
}

CommitModifications ExtractModifications(std::string_view diff_text,
                                         const MinerConfig& config) {
  CommitModifications result;
  const std::vector<FileDiff> files = ParseMultiFileDiff(diff_text);
  result.files_changed = static_cast<int>(files.size());
  for (const FileDiff& file : files) {
    if (!IsAllowed(file.path(), config)) continue;
    if (file.binary) {
      result.skipped_binary.push_back(file.path());
      continue;
    }
    ChangedLines changed = ExtractChangedLines(file.hunks);
    if (changed.added.empty() && changed.deleted.empty()) continue;
    CodeModification mod;
    mod.file_path = file.path();
    mod.language = *LanguageFromExtension(PathExtension(file.path()));
    mod.added = std::move(changed.added);
    mod.deleted = std::move(changed.deleted);
    mod.hunks = file.hunks;
    result.modifications.push_back(std::move(mod));
  }
  return result;
}

CommitModifications GetModifications(Repository& repo, const RawCommit& commit,
                                     const MinerConfig& config) {
  return ExtractModifications(repo.CommitDiff(commit.hash), config);
}

bool HasIssueReference(std::string_view message) {
  static const std::regex kIssue(R"((#[0-9]+)|(\bGH-[0-9]+))", std::regex::icase);
  return std::regex_search(message.begin(), message.end(), kIssue);
}

bool LooksEnglish(std::string_view message) {
  std::size_t total = 0;
  std::size_t ascii = 0;
  for (std::size_t i = 0; i < message.size();) {
    const auto lead = static_cast<unsigned char>(message[i]);
    ++total;
    if (lead < 0x80) ++ascii;
    i += Utf8Length(lead);
  }
  if (total == 0) return false;
  if (ascii * 10 < total * 9) return false;
  std::string_view word = FirstWord(message);
  auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (!word.empty() && is_punct(word.front())) word.remove_prefix(1);
  while (!word.empty() && is_punct(word.back())) word.remove_suffix(1);
  if (word.empty()) return false;
  return std::all_of(word.begin(), word.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return (u < 0x80 && std::isalpha(u)) || c == '-' || c == '\'';
  });
}

FilterDecision FilterCommit(const CommitRecord& record, const MinerConfig& config,
                            const TokenCounter& count_tokens) {
  auto reject = [](RejectRule rule) { return FilterDecision{rule}; };
  if (record.files_changed < 1 || record.files_changed > config.max_files_changed) {
    return reject(RejectRule::kFileCount);
  }
  if (HasIssueReference(record.message_raw)) return reject(RejectRule::kIssueNumber);
  if (!LooksEnglish(record.message_raw)) return reject(RejectRule::kNonEnglish);

  const std::string subject = FirstLine(record.message_raw);
  for (const CodeModification& mod : record.modifications) {
    const std::size_t tokens =
        count_tokens(Join(mod.added)) + count_tokens(Join(mod.deleted));
    if (tokens > static_cast<std::size_t>(config.max_code_tokens)) {
      return reject(RejectRule::kTokenLength);
    }
  }
  const std::string lemma = LemmatizeVerb(FirstWord(subject));
  const bool whitelisted =
      std::find(config.verb_whitelist.begin(), config.verb_whitelist.end(), lemma) !=
      config.verb_whitelist.end();
  if (lemma.empty() || !(IsKnownVerb(lemma) || whitelisted)) {
    return reject(RejectRule::kNotVerbStart);
  }
  if (!whitelisted) return reject(RejectRule::kVerbNotWhitelisted);
  return {};
}

MiningReport::MiningReport() {
  for (RejectRule rule : kAllRejectRules) rejected[rule] = 0;
  for (Language language : kAllLanguages) per_language[language] = {};
}

void MiningReport::Merge(const MiningReport& other) {
  repos_total += other.repos_total;
  repos_failed.insert(repos_failed.end(), other.repos_failed.begin(),
                      other.repos_failed.end());
  commits_examined += other.commits_examined;
  commits_accepted += other.commits_accepted;
  modifications_accepted += other.modifications_accepted;
  for (const auto& [rule, n] : other.rejected) rejected[rule] += n;
  for (const auto& [language, tally] : other.per_language) {
    per_language[language].accepted_modifications += tally.accepted_modifications;
    per_language[language].rejected_commits += tally.rejected_commits;
  }
  binary_files_skipped += other.binary_files_skipped;
}

std::int64_t MiningReport::total_rejected() const {
  std::int64_t total = 0;
  for (const auto& [rule, n] : rejected) total += n;
  return total;
}

nlohmann::json ToJson(const MiningReport& report) {
  nlohmann::json j;
  j["repos_total"] = report.repos_total;
  j["repos_failed"] = nlohmann::json::array();
  for (const auto& [repo, error] : report.repos_failed) {
    j["repos_failed"].push_back({{"repo", repo}, {"error", error}});
  }
  j["commits_examined"] = report.commits_examined;
  j["commits_accepted"] = report.commits_accepted;
  j["modifications_accepted"] = report.modifications_accepted;
  j["binary_files_skipped"] = report.binary_files_skipped;
  for (const auto& [rule, n] : report.rejected) {
    j["rejected"][std::string(RejectRuleName(rule))] = n;
  }
  for (const auto& [language, tally] : report.per_language) {
    j["per_language"][std::string(LanguageName(language))] = {
        {"accepted_modifications", tally.accepted_modifications},
        {"rejected_commits", tally.rejected_commits}};
  }
  return j;
}

MiningResult MineRepository(Repository& repo, const MinerConfig& config,
                            const TokenCounter& count_tokens) {
  MiningResult result;
  MiningReport& report = result.report;
  report.repos_total = 1;
  int candidates = 0;
  for (const RawCommit& commit : OrderedHistory(repo)) {
    ++report.commits_examined;
    const std::optional<Language> language = FirstQualifyingLanguage(commit, config);
    auto reject = [&](RejectRule rule) {
      ++report.rejected[rule];
      if (language) ++report.per_language[*language].rejected_commits;
    };
    if (commit.is_merge() && config.exclude_merges) {
      reject(RejectRule::kMergeCommit);
      continue;
    }
    if (!language) {
      reject(RejectRule::kNoQualifyingFiles);
      continue;
    }
    if (candidates >= config.max_commits_per_repo) {
      reject(RejectRule::kRepoCap);
      continue;
    }
    ++candidates;

    CommitModifications mods = GetModifications(repo, commit, config);
    report.binary_files_skipped += static_cast<std::int64_t>(mods.skipped_binary.size());
    if (mods.modifications.empty()) {
      reject(RejectRule::kNoQualifyingFiles);
      continue;
    }
    CommitRecord record;
    record.repo = repo.id();
    record.hash = commit.hash;
    record.timestamp = commit.timestamp;
    record.message_raw = commit.message;
    record.message = FirstLine(commit.message);
    record.files_changed = mods.files_changed;
    record.modifications = std::move(mods.modifications);

    const FilterDecision decision = FilterCommit(record, config, count_tokens);
    if (!decision.accepted()) {
      reject(*decision.rejected_by);
      continue;
    }
    ++report.commits_accepted;
    for (const CodeModification& mod : record.modifications) {
      ++report.modifications_accepted;
      ++report.per_language[mod.language].accepted_modifications;
    }
    result.accepted.push_back(std::move(record));
  }
  return result;
}

MiningResult Mine(const MinerConfig& config, const TokenCounter& count_tokens,
                  const RepositoryOpener& open) {
  config.Validate();
  const RepositoryOpener opener =
      open ? open : [&config](const std::string& id) {
        return OpenRepository(id, config.clone_dir, config.clone_url_prefix);
      };
  const std::size_t n = config.repo_list.size();
  std::vector<MiningResult> per_repo(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const std::string& id = config.repo_list[i];
      try {
        std::unique_ptr<Repository> repo = opener(id);
        per_repo[i] = MineRepository(*repo, config, count_tokens);
      } catch (const std::exception& e) {
        per_repo[i] = MiningResult{};
        per_repo[i].report.repos_total = 1;
        per_repo[i].report.repos_failed.emplace_back(id, e.what());
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.clone_workers), n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t i = 0; i < workers; ++i) threads.emplace_back(worker);
  }

  MiningResult merged;
  for (MiningResult& r : per_repo) {
    merged.report.Merge(r.report);
    for (CommitRecord& record : r.accepted) merged.accepted.push_back(std::move(record));
  }
  return merged;
}

}  // namespace commitgen
