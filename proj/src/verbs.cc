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

#include "commitgen/verbs.h"

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_set>

namespace commitgen {
namespace {

// Base forms of verbs that commonly open a commit subject. Nouns that are
// also verbs ("update", "change") are included; determiners and pronouns
// are not.
const std::unordered_set<std::string_view>& Lexicon() {
  static const auto* lexicon = new std::unordered_set<std::string_view>{
      "accept",    "access",     "adapt",     "add",        "adjust",
      "align",     "allow",      "alter",     "annotate",   "append",
      "apply",     "archive",    "assert",    "assign",     "attach",
      "avoid",     "backport",   "bind",      "block",      "bootstrap",
      "break",     "bring",      "build",     "bump",       "cache",
      "calculate", "call",       "cancel",    "capture",    "catch",
      "change",    "check",      "choose",    "clarify",    "clean",
      "cleanup",   "clear",      "clone",     "close",      "collect",
      "combine",   "comment",    "commit",    "compare",    "compile",
      "complete",  "compute",    "configure", "connect",    "consolidate",
      "convert",   "copy",       "correct",   "create",     "debug",
      "declare",   "decouple",   "decrease",  "define",     "delete",
      "deprecate", "describe",   "detect",    "disable",    "display",
      "document",  "downgrade",  "drop",      "dump",       "duplicate",
      "edit",      "eliminate",  "emit",      "enable",     "encode",
      "enforce",   "enhance",    "ensure",    "escape",     "exclude",
      "execute",   "expand",     "explain",   "export",     "expose",
      "extend",    "extract",    "fetch",     "fill",       "filter",
      "finalize",  "finish",     "fix",       "flatten",    "flush",
      "force",     "format",     "forward",   "generate",   "get",
      "give",      "guard",      "handle",    "hide",       "highlight",
      "hook",      "ignore",     "implement", "import",     "improve",
      "include",   "increase",   "increment", "indent",     "inherit",
      "init",      "initialize", "inject",    "inline",     "insert",
      "install",   "integrate",  "introduce", "invert",     "invoke",
      "isolate",   "keep",       "kill",      "launch",     "let",
      "limit",     "link",       "lint",      "list",       "load",
      "localize",  "lock",       "log",       "lower",      "maintain",
      "make",      "mark",       "match",     "merge",      "migrate",
      "minimize",  "mock",       "modify",    "move",       "normalize",
      "note",      "omit",       "open",      "optimize",   "order",
      "organize",  "override",   "parse",     "pass",       "patch",
      "pin",       "polish",     "populate",  "port",       "prefer",
      "prepare",   "preserve",   "prevent",   "print",      "process",
      "provide",   "publish",    "pull",      "push",       "put",
      "raise",     "read",       "rebase",    "rebuild",    "record",
      "reduce",    "refactor",   "refine",    "reformat",   "refresh",
      "register",  "reimplement","reject",    "release",    "reload",
      "remove",    "rename",     "render",    "reorder",    "reorganize",
      "repair",    "replace",    "report",    "require",    "reset",
      "resolve",   "restore",    "restrict",  "restructure","retry",
      "return",    "reuse",      "revert",    "review",     "rework",
      "rewrite",   "run",        "save",      "scale",      "select",
      "send",      "separate",   "set",       "setup",      "show",
      "simplify",  "skip",       "sort",      "specify",    "split",
      "start",     "stop",       "store",     "streamline", "strip",
      "support",   "suppress",   "switch",    "sync",       "take",
      "test",      "throw",      "tidy",      "toggle",     "track",
      "translate", "trim",       "tune",      "tweak",      "undo",
      "unify",     "update",     "upgrade",   "use",        "validate",
      "verify",    "wrap",       "write",
  };
  return *lexicon;
}

bool IsConsonant(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) &&
         std::string_view("aeiou").find(c) == std::string_view::npos;
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

// Candidate base forms for a stem left after removing -ed or -ing.
std::vector<std::string> StemCandidates(std::string_view stem) {
  std::vector<std::string> out{std::string(stem), std::string(stem) + "e"};
  if (stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
      IsConsonant(stem.back())) {
    out.emplace_back(stem.substr(0, stem.size() - 1));  // "dropped" -> "drop"
  }
  if (EndsWith(stem, "i")) {
    out.push_back(std::string(stem.substr(0, stem.size() - 1)) + "y");  // "applied"
  }
  return out;
}

}  // namespace

std::string LemmatizeVerb(std::string_view word) {
  std::string w;
  for (char c : word) w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto is_punct = [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
  };
  while (!w.empty() && is_punct(w.back())) w.pop_back();
  w.erase(w.begin(), std::find_if_not(w.begin(), w.end(), is_punct));
  if (w.empty() || IsKnownVerb(w)) return w;

  std::vector<std::string> candidates;
  if (EndsWith(w, "ing") && w.size() > 4) {
    candidates = StemCandidates(std::string_view(w).substr(0, w.size() - 3));
  } else if (EndsWith(w, "ed") && w.size() > 3) {
    candidates = StemCandidates(std::string_view(w).substr(0, w.size() - 2));
  } else if (EndsWith(w, "ies") && w.size() > 4) {
    candidates.push_back(w.substr(0, w.size() - 3) + "y");
  } else if (EndsWith(w, "es") && w.size() > 3) {
    candidates.push_back(w.substr(0, w.size() - 2));
    candidates.push_back(w.substr(0, w.size() - 1));
  } else if (EndsWith(w, "s") && !EndsWith(w, "ss") && w.size() > 2) {
    candidates.push_back(w.substr(0, w.size() - 1));
  }
  for (const std::string& c : candidates) {
    if (IsKnownVerb(c)) return c;
  }
  return w;
}

bool IsKnownVerb(std::string_view lemma) { return Lexicon().contains(lemma); }

std::string_view FirstWord(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_first_of(" \t\r\n", begin);
  return text.substr(begin, end == std::string_view::npos ? std::string_view::npos
                                                          : end - begin);
}

const std::vector<std::string>& DefaultVerbWhitelist() {
  static const auto* verbs = new std::vector<std::string>{
      "add",  "fix",    "use",     "update",    "remove", "make",    "change",
      "move", "allow",  "improve", "implement", "create", "upgrade",
  };
  return *verbs;
}

}  // namespace commitgen
