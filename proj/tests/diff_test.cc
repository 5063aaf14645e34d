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

#include "commitgen/diff.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "commitgen/errors.h"
#include "json.hpp"
#include "test_support.h"

namespace commitgen {
namespace {

using testing::FixturePath;
using testing::ReadText;

std::vector<FileDiff> ParseFixture(const std::string& text) {
  if (text.rfind("@@", 0) == 0) {
    FileDiff single;
    single.hunks = ParseUnifiedDiff(text);
    return {single};
  }
  return ParseMultiFileDiff(text);
}

std::vector<std::string> FixtureNames() {
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(FixturePath("diffs"))) {
    if (entry.path().extension() == ".diff") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

class DiffFixtureTest : public ::testing::TestWithParam<std::string> {};

TEST_P(DiffFixtureTest, MatchesHandParsedOracle) {
  const std::string base = FixturePath("diffs/" + GetParam());
  const std::vector<FileDiff> files = ParseFixture(ReadText(base + ".diff"));
  const nlohmann::json oracle = nlohmann::json::parse(ReadText(base + ".json"));
  ASSERT_EQ(files.size(), oracle["files"].size());
  for (std::size_t f = 0; f < files.size(); ++f) {
    const FileDiff& got = files[f];
    const nlohmann::json& want = oracle["files"][f];
    SCOPED_TRACE("file " + std::to_string(f));
    EXPECT_EQ(got.path(), want["path"].get<std::string>());
    EXPECT_EQ(got.binary, want["binary"].get<bool>());
    EXPECT_EQ(got.renamed, want["renamed"].get<bool>());
    EXPECT_EQ(got.new_file, want["new_file"].get<bool>());
    EXPECT_EQ(got.deleted_file, want["deleted_file"].get<bool>());
    if (want.contains("old_path")) EXPECT_EQ(got.old_path, want["old_path"].get<std::string>());
    ASSERT_EQ(got.hunks.size(), want["hunks"].size());
    std::vector<std::string> all_added, all_deleted;
    for (std::size_t h = 0; h < got.hunks.size(); ++h) {
      const DiffHunk& hunk = got.hunks[h];
      const nlohmann::json& wh = want["hunks"][h];
      SCOPED_TRACE("hunk " + std::to_string(h));
      EXPECT_EQ(hunk.old_start, wh["old"][0].get<int>());
      EXPECT_EQ(hunk.old_count, wh["old"][1].get<int>());
      EXPECT_EQ(hunk.new_start, wh["new"][0].get<int>());
      EXPECT_EQ(hunk.new_count, wh["new"][1].get<int>());
      EXPECT_EQ(hunk.section, wh["section"].get<std::string>());
      const ChangedLines changed = ExtractChangedLines(std::span(&hunk, 1));
      EXPECT_EQ(changed.added, wh["added"].get<std::vector<std::string>>());
      EXPECT_EQ(changed.deleted, wh["deleted"].get<std::vector<std::string>>());
      const auto context = std::count_if(hunk.lines.begin(), hunk.lines.end(), [](const DiffLine& l) {
        return l.marker == LineMarker::kContext;
      });
      EXPECT_EQ(context, wh["context"].get<long>());
      for (const auto& s : wh["added"]) all_added.push_back(s.get<std::string>());
      for (const auto& s : wh["deleted"]) all_deleted.push_back(s.get<std::string>());
    }
    const ChangedLines whole = ExtractChangedLines(got.hunks);
    EXPECT_EQ(whole.added, all_added);
    EXPECT_EQ(whole.deleted, all_deleted);
  }
}

TEST_P(DiffFixtureTest, HunkCountsAgreeWithBodies) {
  for (const FileDiff& f : ParseFixture(ReadText(FixturePath("diffs/" + GetParam() + ".diff")))) {
    for (const DiffHunk& h : f.hunks) {
      int old_lines = 0, new_lines = 0;
      for (const DiffLine& l : h.lines) {
        if (l.marker != LineMarker::kAdded) ++old_lines;
        if (l.marker != LineMarker::kDeleted) ++new_lines;
      }
      EXPECT_EQ(old_lines, h.old_count);
      EXPECT_EQ(new_lines, h.new_count);
    }
  }
}

TEST_P(DiffFixtureTest, SerializeThenParseIsIdentity) {
  for (const FileDiff& f : ParseFixture(ReadText(FixturePath("diffs/" + GetParam() + ".diff")))) {
    EXPECT_EQ(ParseUnifiedDiff(SerializeHunks(f.hunks)), f.hunks);
  }
}

INSTANTIATE_TEST_SUITE_P(Fixtures, DiffFixtureTest, ::testing::ValuesIn(FixtureNames()),
                         [](const auto& info) { return "f" + info.param.substr(0, 2); });

TEST(DiffFixtures, AtLeastTwentyWithOracles) {
  const auto names = FixtureNames();
  EXPECT_GE(names.size(), 20u);
  for (const auto& n : names) {
    EXPECT_TRUE(std::filesystem::exists(FixturePath("diffs/" + n + ".json"))) << n;
  }
}

TEST(ParseUnifiedDiffTest, SpecExample) {
  const auto hunks = ParseUnifiedDiff("@@ -1 +1 @@\n-return a + b\n+return a - b\n");
  ASSERT_EQ(hunks.size(), 1u);
  const ChangedLines c = ExtractChangedLines(hunks);
  EXPECT_EQ(c.deleted, std::vector<std::string>{"return a + b"});
  EXPECT_EQ(c.added, std::vector<std::string>{"return a - b"});
}

TEST(ParseUnifiedDiffTest, EmptyInput) {
  EXPECT_TRUE(ParseUnifiedDiff("").empty());
}

TEST(ParseUnifiedDiffTest, BodyRoundTripsVerbatim) {
  const std::string body =
      "@@ -1,3 +1,3 @@ ctx\n a\n-b\n+c\n d\n@@ -10,2 +10,1 @@\n-x\n y\n";
  EXPECT_EQ(SerializeHunks(ParseUnifiedDiff(body)), body);
}

TEST(ParseUnifiedDiffTest, ContextLineOnlyInAllModification) {
  const std::vector<FileDiff> files =
      ParseMultiFileDiff(ReadText(FixturePath("diffs/02_context_between_changes.diff")));
  ASSERT_EQ(files.size(), 1u);
  const ChangedLines changed = ExtractChangedLines(files[0].hunks);
  const auto all = ExtractAllModificationLines(files[0].hunks);
  const std::string line = "    return a - b";
  EXPECT_EQ(std::count(changed.added.begin(), changed.added.end(), line), 0);
  EXPECT_EQ(std::count(changed.deleted.begin(), changed.deleted.end(), line), 0);
  EXPECT_EQ(std::count(all.begin(), all.end(), " " + line), 1);
}

TEST(ParseUnifiedDiffTest, MalformedHeaderReportsLine) {
  try {
    ParseUnifiedDiff("@@ -1,1 +1,1 @@\n-a\n+b\n@@ -x +1 @@\n");
    FAIL() << "expected DiffParseError";
  } catch (const DiffParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(ParseUnifiedDiffTest, BadMarkerReportsLine) {
  try {
    ParseUnifiedDiff("@@ -1,2 +1,2 @@\n a\n*b\n");
    FAIL() << "expected DiffParseError";
  } catch (const DiffParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseUnifiedDiffTest, CountMismatchIsAnError) {
  EXPECT_THROW(ParseUnifiedDiff("@@ -1,2 +1,2 @@\n a\n"), DiffParseError);
  EXPECT_THROW(ParseUnifiedDiff("@@ -1,1 +1,1 @@\n-a\n-b\n+c\n"), DiffParseError);
}

TEST(ParseUnifiedDiffTest, StrayLineOutsideHunk) {
  EXPECT_THROW(ParseUnifiedDiff("+a\n"), DiffParseError);
}

TEST(ParseUnifiedDiffTest, NoNewlineMarkerIsDropped) {
  const auto hunks = ParseUnifiedDiff("@@ -1 +1 @@\n-a\n\\ No newline at end of file\n+b\n");
  ASSERT_EQ(hunks.size(), 1u);
  EXPECT_EQ(hunks[0].lines.size(), 2u);
}

// Random hunks survive serialize/parse, and changed lines never include a
// context line.
TEST(DiffPropertyTest, RandomHunksRoundTrip) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> marker(0, 2), len(0, 6), chr(32, 126);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<DiffHunk> hunks;
    int old_line = 1, new_line = 1;
    const int n = 1 + trial % 4;
    for (int h = 0; h < n; ++h) {
      DiffHunk hunk;
      hunk.old_start = old_line;
      hunk.new_start = new_line;
      const int lines = 1 + len(rng);
      for (int i = 0; i < lines; ++i) {
        std::string text;
        for (int k = len(rng); k > 0; --k) text.push_back(static_cast<char>(chr(rng)));
        const int m = marker(rng);
        const LineMarker mk = m == 0 ? LineMarker::kAdded : m == 1 ? LineMarker::kDeleted : LineMarker::kContext;
        hunk.lines.push_back({mk, text});
        if (mk != LineMarker::kAdded) ++hunk.old_count;
        if (mk != LineMarker::kDeleted) ++hunk.new_count;
      }
      old_line += hunk.old_count + 3;
      new_line += hunk.new_count + 3;
      hunks.push_back(std::move(hunk));
    }
    const auto parsed = ParseUnifiedDiff(SerializeHunks(hunks));
    ASSERT_EQ(parsed, hunks) << "trial " << trial;
    const ChangedLines changed = ExtractChangedLines(parsed);
    std::size_t added = 0, deleted = 0;
    for (const DiffHunk& h : parsed) {
      for (const DiffLine& l : h.lines) {
        added += l.marker == LineMarker::kAdded;
        deleted += l.marker == LineMarker::kDeleted;
      }
    }
    EXPECT_EQ(changed.added.size(), added);
    EXPECT_EQ(changed.deleted.size(), deleted);
  }
}

TEST(MultiFileDiffTest, DevNullPathsAreEmpty) {
  const auto files = ParseMultiFileDiff(ReadText(FixturePath("diffs/05_added_only_new_file.diff")));
  ASSERT_EQ(files.size(), 1u);
  EXPECT_TRUE(files[0].old_path.empty());
  EXPECT_EQ(files[0].new_path, "hello.go");
}

TEST(FirstLineTest, TrimsAndSkipsBlankLines) {
  EXPECT_EQ(FirstLine("\n  Fix bug  \nbody\n"), "Fix bug");
  EXPECT_EQ(FirstLine(""), "");
}

}  // namespace
}  // namespace commitgen
