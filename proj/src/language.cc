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

#include "commitgen/language.h"

namespace commitgen {

std::string_view LanguageName(Language language) {
  switch (language) {
    case Language::kPython:
      return "python";
    case Language::kPhp:
      return "php";
    case Language::kGo:
      return "go";
    case Language::kJava:
      return "java";
    case Language::kJavaScript:
      return "javascript";
    case Language::kRuby:
      return "ruby";
  }
  return "unknown";
}

std::string_view LanguageLabel(Language language) {
  switch (language) {
    case Language::kPython:
      return "Python";
    case Language::kPhp:
      return "PHP";
    case Language::kGo:
      return "Go";
    case Language::kJava:
      return "Java";
    case Language::kJavaScript:
      return "JavaScript";
    case Language::kRuby:
      return "Ruby";
  }
  return "Unknown";
}

std::optional<Language> ParseLanguage(std::string_view name) {
  for (Language language : kAllLanguages) {
    if (LanguageName(language) == name) return language;
  }
  return std::nullopt;
}

std::optional<Language> LanguageFromExtension(std::string_view extension) {
  if (extension == ".py") return Language::kPython;
  if (extension == ".php") return Language::kPhp;
  if (extension == ".go") return Language::kGo;
  if (extension == ".java") return Language::kJava;
  if (extension == ".js") return Language::kJavaScript;
  if (extension == ".rb") return Language::kRuby;
  return std::nullopt;
}

std::string_view PathExtension(std::string_view path) {
  const auto slash = path.find_last_of('/');
  const std::string_view base =
      slash == std::string_view::npos ? path : path.substr(slash + 1);
  const auto dot = base.find_last_of('.');
  if (dot == std::string_view::npos || dot == 0) return {};
  return base.substr(dot);
}

}  // namespace commitgen
