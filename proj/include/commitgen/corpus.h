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

// Curated (modification, message) pairs: storage, splits and statistics.

#ifndef COMMITGEN_CORPUS_H_
#define COMMITGEN_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "commitgen/bpe.h"
#include "commitgen/diff.h"
#include "commitgen/language.h"
#include "json.hpp"

namespace commitgen {

struct CorpusEntry {
  std::string id;
  std::string repo;
  std::string commit;
  std::string path;
  Language language = Language::kPython;
  std::vector<std::string> added;
  std::vector<std::string> deleted;
  std::string message;
  // Every hunk line with its marker, context included. Optional; used by
  // the all-modification encoding.
  std::vector<std::string> marked_lines;

  bool operator==(const CorpusEntry&) const = default;
};

// Stable 16-hex-digit FNV-1a digest of (repo, commit, path).
std::string MakeEntryId(std::string_view repo, std::string_view commit,
                        std::string_view path);

// One entry per modification of an accepted commit.
std::vector<CorpusEntry> EntriesFromRecord(const CommitRecord& record);

nlohmann::json ToJson(const CorpusEntry& entry);
CorpusEntry EntryFromJson(const nlohmann::json& j);

class CorpusWriteError : public std::runtime_error {
 public:
  CorpusWriteError(const std::string& what, std::size_t written)
      : std::runtime_error(what), written_(written) {}
  std::size_t written() const { return written_; }

 private:
  std::size_t written_;
};

// One JSON object per line. Returns the number of records written.
std::size_t WriteCorpus(std::span<const CorpusEntry> entries, std::ostream& out);
std::size_t WriteCorpus(std::span<const CorpusEntry> entries, const std::string& path);

// Throws DataError on malformed lines, empty messages or duplicate ids.
std::vector<CorpusEntry> ReadCorpus(std::istream& in);
std::vector<CorpusEntry> ReadCorpus(const std::string& path);

struct SplitSpec {
  double train_frac = 0.8;
  double valid_frac = 0.1;
  double test_frac = 0.1;
  std::uint64_t seed = 42;
  bool group_by_repo = false;

  void Validate() const;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;

  bool operator==(const SplitSizes&) const = default;
};

// valid = floor(n * valid_frac), test = floor(n * test_frac), and the
// remainder goes to train.
SplitSizes ComputeSplitSizes(std::size_t n, const SplitSpec& spec);

// Seeded Fisher-Yates permutation of [0, n).
std::vector<std::size_t> ShuffledIndices(std::size_t n, std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};

// Index-level split; each part lists indices in ascending order. With
// group_by_repo, whole repositories are assigned to a part and the sizes
// only approximate ComputeSplitSizes.
SplitIndices SplitIndexSets(std::span<const CorpusEntry> entries, const SplitSpec& spec);

struct CorpusSplits {
  std::vector<CorpusEntry> train;
  std::vector<CorpusEntry> valid;
  std::vector<CorpusEntry> test;
};

// Throws std::invalid_argument on an empty corpus.
CorpusSplits Split(std::span<const CorpusEntry> entries, const SplitSpec& spec);

struct Percentiles {
  std::size_t p50 = 0;
  std::size_t p90 = 0;
  std::size_t p99 = 0;
  std::size_t max = 0;
};

struct StatisticsReport {
  std::size_t total = 0;
  std::size_t repos = 0;
  std::map<Language, std::size_t> per_language;
  std::map<Language, std::size_t> repos_per_language;
  std::map<std::string, std::size_t> verbs;  // lemma of the first word
  Percentiles code_tokens;     // added + deleted, per entry
  Percentiles message_tokens;  // whitespace words
};

// `count_tokens` defaults to byte counting when empty.
StatisticsReport ComputeStats(std::span<const CorpusEntry> entries,
                              const TokenCounter& count_tokens = {});

nlohmann::json ToJson(const StatisticsReport& report);

// Plain-text per-language table of pair and repository counts.
std::string FormatStatsTable(const StatisticsReport& report);

// Train / Validation / Test / Repositories per language, with a total row.
std::string FormatSplitTable(std::span<const CorpusEntry> train,
                             std::span<const CorpusEntry> valid,
                             std::span<const CorpusEntry> test);

}  // namespace commitgen

#endif  // COMMITGEN_CORPUS_H_
