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

// Unified diff parsing and the per-file (added, deleted) line model.
//
// A single parser feeds both source encodings: the changed-lines encoding
// reads only '+' and '-' lines, while the all-modification encoding keeps
// context lines with their markers.

#ifndef COMMITGEN_DIFF_H_
#define COMMITGEN_DIFF_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "commitgen/language.h"

namespace commitgen {

enum class LineMarker : char {
  kAdded = '+',
  kDeleted = '-',
  kContext = ' ',
};

struct DiffLine {
  LineMarker marker;
  std::string text;  // without the marker character

  bool operator==(const DiffLine&) const = default;
};

struct DiffHunk {
  int old_start = 0;
  int old_count = 0;
  int new_start = 0;
  int new_count = 0;
  std::string section;  // text after the closing "@@", if any
  std::vector<DiffLine> lines;

  bool operator==(const DiffHunk&) const = default;
};

// Parses the hunks of a single-file unified diff. Optional "---"/"+++" file
// header lines before a hunk are accepted and ignored. "\ No newline at end
// of file" lines are dropped. Throws DiffParseError on malformed headers,
// unknown markers, or hunks whose bodies disagree with their line counts.
std::vector<DiffHunk> ParseUnifiedDiff(std::string_view text);

// Inverse of ParseUnifiedDiff on the hunk region: headers plus marked lines,
// each terminated by '\n'.
std::string SerializeHunks(std::span<const DiffHunk> hunks);

struct ChangedLines {
  std::vector<std::string> added;
  std::vector<std::string> deleted;

  bool operator==(const ChangedLines&) const = default;
};

// Added and deleted line texts in document order; context lines never appear.
ChangedLines ExtractChangedLines(std::span<const DiffHunk> hunks);

// Every hunk line in document order, prefixed with its marker character.
std::vector<std::string> ExtractAllModificationLines(
    std::span<const DiffHunk> hunks);

// One file section of `git diff` / `git show` output.
struct FileDiff {
  std::string old_path;  // empty for added files
  std::string new_path;  // empty for deleted files
  bool new_file = false;
  bool deleted_file = false;
  bool renamed = false;
  bool binary = false;
  std::vector<DiffHunk> hunks;

  // The path the change is attributed to: the new path unless deleted.
  const std::string& path() const {
    return new_path.empty() ? old_path : new_path;
  }
};

// Splits multi-file diff output into per-file sections. Binary sections
// carry `binary = true` and no hunks.
std::vector<FileDiff> ParseMultiFileDiff(std::string_view text);

// The (added, deleted) pair for one changed file of a commit.
struct CodeModification {
  std::string file_path;
  Language language = Language::kPython;
  std::vector<std::string> added;
  std::vector<std::string> deleted;
  std::vector<DiffHunk> hunks;  // retained for the all-modification encoding
};

struct CommitRecord {
  std::string repo;
  std::string hash;
  std::int64_t timestamp = 0;
  std::string message_raw;
  std::string message;  // normalized first line, filled by the filter
  std::vector<CodeModification> modifications;
  int files_changed = 0;  // every file touched, before extension filtering
};

// First line of a commit message with surrounding whitespace trimmed.
std::string FirstLine(std::string_view message);

}  // namespace commitgen

#endif  // COMMITGEN_DIFF_H_
