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

#include <charconv>
#include <cstddef>
#include <optional>
#include <string>

#include "commitgen/errors.h"

namespace commitgen {
namespace {

std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

bool StartsWith(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Parses "<start>[,<count>]". Returns false on any deviation.
bool ParseRange(std::string_view text, int* start, int* count) {
  const auto comma = text.find(',');
  const std::string_view first = text.substr(0, comma);
  if (first.empty()) return false;
  auto [p, ec] = std::from_chars(first.data(), first.data() + first.size(), *start);
  if (ec != std::errc() || p != first.data() + first.size()) return false;
  if (comma == std::string_view::npos) {
    *count = 1;
    return true;
  }
  const std::string_view second = text.substr(comma + 1);
  if (second.empty()) return false;
  auto [q, ec2] =
      std::from_chars(second.data(), second.data() + second.size(), *count);
  return ec2 == std::errc() && q == second.data() + second.size();
}

// "@@ -a,b +c,d @@ section"
std::optional<DiffHunk> ParseHunkHeader(std::string_view line) {
  if (!StartsWith(line, "@@ -")) return std::nullopt;
  std::string_view rest = line.substr(4);
  const auto space = rest.find(' ');
  if (space == std::string_view::npos) return std::nullopt;
  DiffHunk hunk;
  if (!ParseRange(rest.substr(0, space), &hunk.old_start, &hunk.old_count)) {
    return std::nullopt;
  }
  rest = rest.substr(space + 1);
  if (!StartsWith(rest, "+")) return std::nullopt;
  rest = rest.substr(1);
  const auto space2 = rest.find(' ');
  if (space2 == std::string_view::npos) return std::nullopt;
  if (!ParseRange(rest.substr(0, space2), &hunk.new_start, &hunk.new_count)) {
    return std::nullopt;
  }
  rest = rest.substr(space2 + 1);
  if (!StartsWith(rest, "@@")) return std::nullopt;
  rest = rest.substr(2);
  if (!rest.empty()) {
    if (rest.front() != ' ') return std::nullopt;
    hunk.section = std::string(rest.substr(1));
  }
  return hunk;
}

// Reads one hunk starting at lines[*pos] (the header). Leaves *pos on the
// first line after the hunk body.
DiffHunk ReadHunk(const std::vector<std::string_view>& lines, std::size_t* pos) {
  const std::size_t header_line = *pos + 1;
  std::optional<DiffHunk> parsed = ParseHunkHeader(lines[*pos]);
  if (!parsed) {
    throw DiffParseError(header_line, "malformed hunk header: " +
                                          std::string(lines[*pos]));
  }
  DiffHunk hunk = std::move(*parsed);
  if (hunk.old_count < 0 || hunk.new_count < 0) {
    throw DiffParseError(header_line, "negative hunk line count");
  }
  int old_left = hunk.old_count;
  int new_left = hunk.new_count;
  ++*pos;
  while (*pos < lines.size()) {
    const std::string_view line = lines[*pos];
    if (!line.empty() && line.front() == '\\') {
      ++*pos;
      continue;
    }
    if (old_left == 0 && new_left == 0) break;
    const std::size_t line_no = *pos + 1;
    if (line.empty()) {
      // Some tools strip the lone space of an empty context line.
      if (old_left == 0 || new_left == 0) {
        throw DiffParseError(line_no, "empty line exceeds hunk line counts");
      }
      hunk.lines.push_back({LineMarker::kContext, ""});
      --old_left;
      --new_left;
      ++*pos;
      continue;
    }
    const char marker = line.front();
    std::string text(line.substr(1));
    switch (marker) {
      case '+':
        if (new_left == 0) {
          throw DiffParseError(line_no, "added line exceeds hunk new count");
        }
        hunk.lines.push_back({LineMarker::kAdded, std::move(text)});
        --new_left;
        break;
      case '-':
        if (old_left == 0) {
          throw DiffParseError(line_no, "deleted line exceeds hunk old count");
        }
        hunk.lines.push_back({LineMarker::kDeleted, std::move(text)});
        --old_left;
        break;
      case ' ':
        if (old_left == 0 || new_left == 0) {
          throw DiffParseError(line_no, "context line exceeds hunk counts");
        }
        hunk.lines.push_back({LineMarker::kContext, std::move(text)});
        --old_left;
        --new_left;
        break;
      default:
        throw DiffParseError(line_no, std::string("invalid line marker '") +
                                          marker + "'");
    }
    ++*pos;
  }
  if (old_left != 0 || new_left != 0) {
    throw DiffParseError(header_line,
                         "hunk body ends before its declared line counts");
  }
  return hunk;
}

std::string StripPathPrefix(std::string_view path) {
  // "--- a/foo.py\t2020-01-01 ..." from non-git tools carries a timestamp.
  const auto tab = path.find('\t');
  if (tab != std::string_view::npos) path = path.substr(0, tab);
  if (path == "/dev/null") return {};
  if (StartsWith(path, "a/") || StartsWith(path, "b/")) path = path.substr(2);
  return std::string(path);
}

void ParseGitHeaderPaths(std::string_view rest, FileDiff* file) {
  // "a/<old> b/<new>"; paths may contain " b/", so prefer the split that
  // yields identical halves.
  if (!StartsWith(rest, "a/")) return;
  std::size_t chosen = std::string_view::npos;
  for (std::size_t at = rest.find(" b/"); at != std::string_view::npos;
       at = rest.find(" b/", at + 1)) {
    if (chosen == std::string_view::npos) chosen = at;
    if (rest.substr(2, at - 2) == rest.substr(at + 3)) {
      chosen = at;
      break;
    }
  }
  if (chosen == std::string_view::npos) return;
  file->old_path = std::string(rest.substr(2, chosen - 2));
  file->new_path = std::string(rest.substr(chosen + 3));
}

}  // namespace

std::vector<DiffHunk> ParseUnifiedDiff(std::string_view text) {
  const std::vector<std::string_view> lines = SplitLines(text);
  std::vector<DiffHunk> hunks;
  std::size_t pos = 0;
  while (pos < lines.size()) {
    const std::string_view line = lines[pos];
    if (StartsWith(line, "@@")) {
      hunks.push_back(ReadHunk(lines, &pos));
    } else if (StartsWith(line, "--- ") || StartsWith(line, "+++ ")) {
      if (!hunks.empty()) {
        throw DiffParseError(pos + 1, "file header after hunks in single-file diff");
      }
      ++pos;
    } else if (line.empty() && pos + 1 == lines.size()) {
      ++pos;
    } else {
      const char marker = line.empty() ? ' ' : line.front();
      if (marker == '+' || marker == '-' || marker == ' ' || marker == '\\') {
        throw DiffParseError(pos + 1, "marked line outside of any hunk");
      }
      throw DiffParseError(pos + 1, std::string("invalid line marker '") +
                                        marker + "'");
    }
  }
  return hunks;
}

std::string SerializeHunks(std::span<const DiffHunk> hunks) {
  std::string out;
  for (const DiffHunk& hunk : hunks) {
    out += "@@ -" + std::to_string(hunk.old_start) + "," +
           std::to_string(hunk.old_count) + " +" +
           std::to_string(hunk.new_start) + "," +
           std::to_string(hunk.new_count) + " @@";
    if (!hunk.section.empty()) out += " " + hunk.section;
    out += '\n';
    for (const DiffLine& line : hunk.lines) {
      out += static_cast<char>(line.marker);
      out += line.text;
      out += '\n';
    }
  }
  return out;
}

ChangedLines ExtractChangedLines(std::span<const DiffHunk> hunks) {
  ChangedLines changed;
  for (const DiffHunk& hunk : hunks) {
    for (const DiffLine& line : hunk.lines) {
      if (line.marker == LineMarker::kAdded) {
        changed.added.push_back(line.text);
      } else if (line.marker == LineMarker::kDeleted) {
        changed.deleted.push_back(line.text);
      }
    }
  }
  return changed;
}

std::vector<std::string> ExtractAllModificationLines(
    std::span<const DiffHunk> hunks) {
  std::vector<std::string> out;
  for (const DiffHunk& hunk : hunks) {
    for (const DiffLine& line : hunk.lines) {
      out.push_back(static_cast<char>(line.marker) + line.text);
    }
  }
  return out;
}

std::vector<FileDiff> ParseMultiFileDiff(std::string_view text) {
  const std::vector<std::string_view> lines = SplitLines(text);
  std::vector<FileDiff> files;
  FileDiff* current = nullptr;
  bool in_binary_patch = false;
  std::size_t pos = 0;
  while (pos < lines.size()) {
    const std::string_view line = lines[pos];
    if (StartsWith(line, "diff ")) {
      files.emplace_back();
      current = &files.back();
      in_binary_patch = false;
      if (StartsWith(line, "diff --git ")) {
        ParseGitHeaderPaths(line.substr(11), current);
      }
      ++pos;
      continue;
    }
    if (StartsWith(line, "--- ") && pos + 1 < lines.size() &&
        StartsWith(lines[pos + 1], "+++ ")) {
      // Plain `diff -u` output has no "diff" line; start a section here
      // unless this header belongs to the current git section.
      if (current == nullptr || !current->hunks.empty()) {
        files.emplace_back();
        current = &files.back();
      }
      current->old_path = StripPathPrefix(line.substr(4));
      current->new_path = StripPathPrefix(lines[pos + 1].substr(4));
      if (current->old_path.empty()) current->new_file = true;
      if (current->new_path.empty()) current->deleted_file = true;
      pos += 2;
      continue;
    }
    if (current == nullptr) {
      ++pos;
      continue;
    }
    if (StartsWith(line, "@@")) {
      if (current->binary) {
        throw DiffParseError(pos + 1, "hunk inside a binary file section");
      }
      current->hunks.push_back(ReadHunk(lines, &pos));
      continue;
    }
    if (in_binary_patch) {
      ++pos;
      continue;
    }
    if (StartsWith(line, "new file mode")) {
      current->new_file = true;
      current->old_path.clear();
    } else if (StartsWith(line, "deleted file mode")) {
      current->deleted_file = true;
      current->new_path.clear();
    } else if (StartsWith(line, "rename from ")) {
      current->renamed = true;
      current->old_path = std::string(line.substr(12));
    } else if (StartsWith(line, "rename to ")) {
      current->renamed = true;
      current->new_path = std::string(line.substr(10));
    } else if (StartsWith(line, "Binary files ")) {
      current->binary = true;
    } else if (StartsWith(line, "GIT binary patch")) {
      current->binary = true;
      in_binary_patch = true;
    }
    ++pos;
  }
  return files;
}

std::string FirstLine(std::string_view message) {
  // Leading blank lines are not part of the subject.
  std::size_t start = 0;
  while (start < message.size()) {
    const std::size_t end = message.find('\n', start);
    std::string_view line = message.substr(
        start, end == std::string_view::npos ? std::string_view::npos
                                             : end - start);
    const auto first = line.find_first_not_of(" \t\r\f\v");
    if (first != std::string_view::npos) {
      const auto last = line.find_last_not_of(" \t\r\f\v");
      return std::string(line.substr(first, last - first + 1));
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return {};
}

}  // namespace commitgen
