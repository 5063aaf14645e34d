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

#include "commitgen/corpus.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "commitgen/errors.h"
#include "test_support.h"

namespace commitgen {
namespace {

CorpusEntry Entry(int i, Language language = Language::kPython, std::string repo = "r/a") {
  CorpusEntry e;
  e.repo = std::move(repo);
  e.commit = "c" + std::to_string(i);
  e.path = "f" + std::to_string(i);
  e.id = MakeEntryId(e.repo, e.commit, e.path);
  e.language = language;
  e.added = {"    x = " + std::to_string(i)};
  e.deleted = {"\tx = 0"};
  e.message = "Fix thing " + std::to_string(i);
  return e;
}

std::vector<std::string> SortedIds(const std::vector<CorpusEntry>& entries) {
  std::vector<std::string> ids;
  for (const auto& e : entries) ids.push_back(e.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Stream buffer that accepts `limit` bytes and then fails.
class FailingBuffer : public std::streambuf {
 public:
  explicit FailingBuffer(std::size_t limit) : limit_(limit) {}

 protected:
  int_type overflow(int_type c) override {
    if (written_ >= limit_) return traits_type::eof();
    ++written_;
    return c;
  }

 private:
  std::size_t limit_;
  std::size_t written_ = 0;
};

TEST(CorpusIoTest, EmptyCorpus) {
  std::ostringstream out;
  EXPECT_EQ(WriteCorpus(std::vector<CorpusEntry>{}, out), 0u);
  EXPECT_EQ(out.str(), "");
  std::istringstream in(out.str());
  EXPECT_TRUE(ReadCorpus(in).empty());
}

TEST(CorpusIoTest, ThreeEntriesRoundTrip) {
  std::vector<CorpusEntry> entries = {Entry(1), Entry(2, Language::kGo), Entry(3, Language::kRuby)};
  entries[1].marked_lines = {" ctx", "-\tx = 0", "+    x = 2"};
  std::ostringstream out;
  EXPECT_EQ(WriteCorpus(entries, out), 3u);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  std::istringstream in(out.str());
  EXPECT_EQ(ReadCorpus(in), entries);
}

TEST(CorpusIoTest, RecordHasDocumentedFields) {
  const nlohmann::json j = ToJson(Entry(7, Language::kJavaScript));
  for (const char* key : {"id", "language", "added", "deleted", "message"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["language"], "javascript");
  EXPECT_EQ(j["added"][0], "    x = 7");
}

TEST(CorpusIoTest, TenThousandEntriesRoundTripAsMultiset) {
  std::mt19937_64 rng(41);
  std::vector<CorpusEntry> entries;
  for (int i = 0; i < 10000; ++i) {
    CorpusEntry e = Entry(i, kAllLanguages[i % 6], "repo/" + std::to_string(i % 37));
    e.added.push_back("  日本 🙂 \"quoted\" \\ back");
    if (i % 3 == 0) e.deleted.clear();
    entries.push_back(std::move(e));
  }
  std::shuffle(entries.begin(), entries.end(), rng);
  testing::TempDir tmp;
  EXPECT_EQ(WriteCorpus(entries, tmp.File("c.jsonl")), entries.size());
  std::vector<CorpusEntry> back = ReadCorpus(tmp.File("c.jsonl"));
  auto by_id = [](const CorpusEntry& a, const CorpusEntry& b) { return a.id < b.id; };
  std::sort(back.begin(), back.end(), by_id);
  std::sort(entries.begin(), entries.end(), by_id);
  EXPECT_EQ(back, entries);
}

TEST(CorpusIoTest, WriteFailureReportsPartialCount) {
  const std::vector<CorpusEntry> entries = {Entry(1), Entry(2), Entry(3)};
  std::ostringstream probe;
  WriteCorpus(std::span(entries).first(1), probe);
  FailingBuffer buffer(probe.str().size() + 5);
  std::ostream out(&buffer);
  try {
    WriteCorpus(entries, out);
    FAIL() << "expected CorpusWriteError";
  } catch (const CorpusWriteError& e) {
    EXPECT_EQ(e.written(), 1u);
  }
}

TEST(CorpusIoTest, ReadRejectsBadRecords) {
  std::istringstream bad_json("{\"id\": 1\n");
  EXPECT_THROW(ReadCorpus(bad_json), DataError);
  std::ostringstream dup;
  WriteCorpus(std::vector<CorpusEntry>{Entry(1), Entry(1)}, dup);
  std::istringstream dup_in(dup.str());
  EXPECT_THROW(ReadCorpus(dup_in), DataError);
  nlohmann::json j = ToJson(Entry(1));
  j["message"] = "";
  EXPECT_THROW(EntryFromJson(j), DataError);
  j["message"] = "two\nlines";
  EXPECT_THROW(EntryFromJson(j), DataError);
  j["message"] = "ok";
  j["language"] = "cobol";
  EXPECT_THROW(EntryFromJson(j), DataError);
  EXPECT_THROW(ReadCorpus(std::string("/nonexistent/corpus.jsonl")), DataError);
}

TEST(CorpusEntryTest, FromRecordKeepsOneEntryPerFile) {
  CommitRecord record;
  record.repo = "o/r";
  record.hash = "abc";
  record.message_raw = "Fix parser\n\nbody";
  record.message = "Fix parser";
  for (const char* path : {"a.py", "b.py"}) {
    CodeModification m;
    m.file_path = path;
    m.added = {"x"};
    m.hunks = ParseUnifiedDiff("@@ -1,2 +1,2 @@\n ctx\n-y\n+x\n");
    record.modifications.push_back(m);
  }
  const auto entries = EntriesFromRecord(record);
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_NE(entries[0].id, entries[1].id);
  EXPECT_EQ(entries[0].id, MakeEntryId("o/r", "abc", "a.py"));
  EXPECT_EQ(entries[0].message, "Fix parser");
  EXPECT_EQ(entries[0].marked_lines, (std::vector<std::string>{" ctx", "-y", "+x"}));
}

TEST(CorpusEntryTest, IdSeparatesFields) {
  EXPECT_NE(MakeEntryId("ab", "c", "d"), MakeEntryId("a", "bc", "d"));
  EXPECT_EQ(MakeEntryId("a", "b", "c").size(), 16u);
}

// floor(n * k / 10) for the tenths used below, in integer arithmetic.
std::size_t Tenths(std::size_t n, std::size_t k) { return n * k / 10; }

TEST(SplitTest, SizesFollowFloorRemainderRule) {
  const SplitSpec spec;
  EXPECT_EQ(ComputeSplitSizes(10, spec), (SplitSizes{8, 1, 1}));
  for (std::size_t n : {1u, 2u, 9u, 10u, 11u, 19u, 30u, 101u, 999u, 345759u}) {
    const SplitSizes s = ComputeSplitSizes(n, spec);
    EXPECT_EQ(s.valid, Tenths(n, 1)) << n;
    EXPECT_EQ(s.test, Tenths(n, 1)) << n;
    EXPECT_EQ(s.train, n - 2 * Tenths(n, 1)) << n;
  }
  SplitSpec uneven;
  uneven.train_frac = 0.7;
  uneven.valid_frac = 0.2;
  uneven.test_frac = 0.1;
  EXPECT_EQ(ComputeSplitSizes(101, uneven), (SplitSizes{71, 20, 10}));
}

TEST(SplitTest, PartitionIsDisjointExhaustiveAndSeeded) {
  std::vector<CorpusEntry> entries;
  for (int i = 0; i < 101; ++i) entries.push_back(Entry(i));
  SplitSpec spec;
  spec.seed = 9;
  const CorpusSplits a = Split(entries, spec);
  EXPECT_EQ(a.train.size(), 81u);
  EXPECT_EQ(a.valid.size(), 10u);
  EXPECT_EQ(a.test.size(), 10u);
  std::vector<CorpusEntry> all = a.train;
  all.insert(all.end(), a.valid.begin(), a.valid.end());
  all.insert(all.end(), a.test.begin(), a.test.end());
  EXPECT_EQ(SortedIds(all), SortedIds(entries));
  const CorpusSplits b = Split(entries, spec);
  EXPECT_EQ(SortedIds(a.valid), SortedIds(b.valid));
  EXPECT_EQ(SortedIds(a.test), SortedIds(b.test));
  spec.seed = 10;
  EXPECT_NE(SortedIds(Split(entries, spec).valid), SortedIds(a.valid));
}

TEST(SplitTest, ShuffleIsAPermutation) {
  for (std::size_t n : {0u, 1u, 2u, 50u}) {
    auto order = ShuffledIndices(n, 3);
    std::sort(order.begin(), order.end());
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(order[i], i);
  }
}

TEST(SplitTest, GroupByRepoKeepsRepositoriesTogether) {
  std::vector<CorpusEntry> entries;
  for (int i = 0; i < 200; ++i) entries.push_back(Entry(i, Language::kPython, "r" + std::to_string(i % 23)));
  SplitSpec spec;
  spec.group_by_repo = true;
  const CorpusSplits s = Split(entries, spec);
  EXPECT_EQ(s.train.size() + s.valid.size() + s.test.size(), 200u);
  auto repos = [](const std::vector<CorpusEntry>& part) {
    std::set<std::string> out;
    for (const auto& e : part) out.insert(e.repo);
    return out;
  };
  const auto tr = repos(s.train), va = repos(s.valid), te = repos(s.test);
  for (const auto& r : va) {
    EXPECT_FALSE(tr.contains(r));
    EXPECT_FALSE(te.contains(r));
  }
  for (const auto& r : te) EXPECT_FALSE(tr.contains(r));
  EXPECT_FALSE(va.empty());
  EXPECT_FALSE(te.empty());
}

TEST(SplitTest, RejectsEmptyInputAndBadFractions) {
  EXPECT_THROW(Split(std::vector<CorpusEntry>{}, SplitSpec()), std::invalid_argument);
  SplitSpec bad;
  bad.train_frac = 0.9;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
  bad.train_frac = 0.8;
  bad.test_frac = 0;
  bad.valid_frac = 0.2;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
}

TEST(StatsTest, EmptyCorpusIsAllZero) {
  const StatisticsReport r = ComputeStats(std::vector<CorpusEntry>{});
  EXPECT_EQ(r.total, 0u);
  EXPECT_EQ(r.repos, 0u);
  for (const auto& [language, n] : r.per_language) EXPECT_EQ(n, 0u);
  EXPECT_TRUE(r.verbs.empty());
  EXPECT_EQ(r.code_tokens.max, 0u);
}

TEST(StatsTest, OneEntryPerLanguage) {
  std::vector<CorpusEntry> entries;
  for (int i = 0; i < 6; ++i) entries.push_back(Entry(i, kAllLanguages[i], "r" + std::to_string(i)));
  const StatisticsReport r = ComputeStats(entries);
  EXPECT_EQ(r.total, 6u);
  EXPECT_EQ(r.repos, 6u);
  for (Language language : kAllLanguages) {
    EXPECT_EQ(r.per_language.at(language), 1u);
    EXPECT_EQ(r.repos_per_language.at(language), 1u);
  }
  const std::string table = FormatStatsTable(r);
  EXPECT_NE(table.find("Python"), std::string::npos);
  EXPECT_NE(table.find("Total"), std::string::npos);
}

TEST(StatsTest, VerbHistogramMatchesConstruction) {
  const std::map<std::string, int> wanted = {{"add", 7}, {"fix", 12}, {"update", 3}, {"use", 1}};
  std::vector<CorpusEntry> entries;
  int i = 0;
  for (const auto& [verb, count] : wanted) {
    for (int k = 0; k < count; ++k, ++i) {
      CorpusEntry e = Entry(i);
      // Mixed case and inflection fold to the same lemma.
      e.message = (k % 2 ? verb : std::string(1, static_cast<char>(std::toupper(verb[0]))) +
                                      verb.substr(1)) + " item";
      entries.push_back(e);
    }
  }
  const StatisticsReport r = ComputeStats(entries);
  std::map<std::string, int> got;
  for (const auto& [verb, n] : r.verbs) got[verb] = static_cast<int>(n);
  EXPECT_EQ(got, wanted);
  EXPECT_EQ(r.total, entries.size());
}

TEST(StatsTest, TokenPercentilesUseCounter) {
  std::vector<CorpusEntry> entries;
  for (int i = 1; i <= 10; ++i) {
    CorpusEntry e = Entry(i);
    e.added = {std::string(i, 'a')};
    e.deleted = {};
    entries.push_back(e);
  }
  const StatisticsReport r = ComputeStats(entries, [](std::string_view s) { return s.size(); });
  EXPECT_EQ(r.code_tokens.p50, 5u);
  EXPECT_EQ(r.code_tokens.p90, 9u);
  EXPECT_EQ(r.code_tokens.max, 10u);
  EXPECT_EQ(r.message_tokens.max, 3u);
}

TEST(StatsTest, SplitTableMirrorsColumns) {
  std::vector<CorpusEntry> entries;
  for (int i = 0; i < 20; ++i) entries.push_back(Entry(i));
  const CorpusSplits s = Split(entries, SplitSpec());
  const std::string table = FormatSplitTable(s.train, s.valid, s.test);
  for (const char* col : {"Train", "Validation", "Test", "Repositories"}) {
    EXPECT_NE(table.find(col), std::string::npos) << col;
  }
}

}  // namespace
}  // namespace commitgen
