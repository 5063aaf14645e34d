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

#ifndef COMMITGEN_LANGUAGE_H_
#define COMMITGEN_LANGUAGE_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace commitgen {

enum class Language { kPython, kPhp, kGo, kJava, kJavaScript, kRuby };

inline constexpr std::array<Language, 6> kAllLanguages = {
    Language::kPython, Language::kPhp,  Language::kJavaScript,
    Language::kJava,   Language::kGo,   Language::kRuby};

// Lowercase identifier used in corpus files ("python", "javascript", ...).
std::string_view LanguageName(Language language);

// Human-facing label used in report tables ("Python", "JavaScript", ...).
std::string_view LanguageLabel(Language language);

std::optional<Language> ParseLanguage(std::string_view name);

// Maps a file extension including the dot (".py") to a language.
std::optional<Language> LanguageFromExtension(std::string_view extension);

// Extension of the last path component, including the dot; empty if none.
std::string_view PathExtension(std::string_view path);

}  // namespace commitgen

#endif  // COMMITGEN_LANGUAGE_H_
