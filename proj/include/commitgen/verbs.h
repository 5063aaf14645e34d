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

// Deterministic first-word verb detection for commit subjects.

#ifndef COMMITGEN_VERBS_H_
#define COMMITGEN_VERBS_H_

#include <string>
#include <string_view>
#include <vector>

namespace commitgen {

// Lowercases a word, strips surrounding punctuation, and reduces inflected
// forms ("fixing", "added", "fixes", "applies") to a base verb when the
// base is in the verb lexicon. Unknown words come back lowercased and
// stripped but otherwise unchanged.
std::string LemmatizeVerb(std::string_view word);

// True if `lemma` is in the built-in lexicon of common English verbs.
bool IsKnownVerb(std::string_view lemma);

// First whitespace-delimited token of `text`, or empty.
std::string_view FirstWord(std::string_view text);

// The default first-word whitelist. Only part of the 13-verb set is
// recoverable from prose; the rest are high-frequency commit verbs.
const std::vector<std::string>& DefaultVerbWhitelist();

}  // namespace commitgen

#endif  // COMMITGEN_VERBS_H_
