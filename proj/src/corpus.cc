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

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "commitgen/errors.h"
#include "commitgen/verbs.h"

namespace commitgen {
namespace {

std::uint64_t Bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

std::string Join(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  return out;
}

Percentiles ComputePercentiles(std::vector<std::size_t> values) {
  Percentiles p;
  if (values.empty()) return p;
  std::sort(values.begin(), values.end());
  // Nearest-rank percentile.
  auto rank = [&](double q) {
    const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[std::max<std::size_t>(r, 1) - 1];
  };
  p.p50 = rank(0.50);
  p.p90 = rank(0.90);
  p.p99 = rank(0.99);
  p.max = values.back();
  return p;
}

nlohmann::json ToJson(const Percentiles& p) {
  return {{"p50", p.p50}, {"p90", p.p90}, {"p99", p.p99}, {"max", p.max}};
}

}  // namespace

std::string MakeEntryId(std::string_view repo, std::string_view commit,
                        std::string_view path) {
  std::uint64_t hash = 14695981039346656037ull;
  auto mix = [&hash](std::string_view s) {
    for (unsigned char c : s) {
      hash ^= c;
      hash *= 1099511628211ull;
    }
    hash ^= 0xff;  // field separator that cannot appear in UTF-8 text
    hash *= 1099511628211ull;
  };
  mix(repo);
  mix(commit);
  mix(path);
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

std::vector<CorpusEntry> EntriesFromRecord(const CommitRecord& record) {
  std::vector<CorpusEntry> entries;
  for (const CodeModification& mod : record.modifications) {
    CorpusEntry entry;
    entry.id = MakeEntryId(record.repo, record.hash, mod.file_path);
    entry.repo = record.repo;
    entry.commit = record.hash;
    entry.path = mod.file_path;
    entry.language = mod.language;
    entry.added = mod.added;
    entry.deleted = mod.deleted;
    entry.message = record.message.empty() ? FirstLine(record.message_raw) : record.message;
    entry.marked_lines = ExtractAllModificationLines(mod.hunks);
    entries.push_back(std::move(entry));
  }
  return entries;
}

nlohmann::json ToJson(const CorpusEntry& entry) {
  nlohmann::json j = {
      {"id", entry.id},
      {"language", std::string(LanguageName(entry.language))},
      {"added", entry.added},
      {"deleted", entry.deleted},
      {"message", entry.message},
  };
  if (!entry.repo.empty()) j["repo"] = entry.repo;
  if (!entry.commit.empty()) j["commit"] = entry.commit;
  if (!entry.path.empty()) j["path"] = entry.path;
  if (!entry.marked_lines.empty()) j["marked_lines"] = entry.marked_lines;
  return j;
}

CorpusEntry EntryFromJson(const nlohmann::json& j) {
  CorpusEntry entry;
  try {
    entry.id = j.at("id").get<std::string>();
    const std::string language = j.at("language").get<std::string>();
    const auto parsed = ParseLanguage(language);
    if (!parsed) throw DataError("unknown language '" + language + "'");
    entry.language = *parsed;
    entry.added = j.at("added").get<std::vector<std::string>>();
    entry.deleted = j.at("deleted").get<std::vector<std::string>>();
    entry.message = j.at("message").get<std::string>();
    entry.repo = j.value("repo", "");
    entry.commit = j.value("commit", "");
    entry.path = j.value("path", "");
    entry.marked_lines = j.value("marked_lines", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad corpus record: ") + e.what());
  }
  if (entry.message.empty()) throw DataError("corpus record " + entry.id + " has an empty message");
  if (entry.message.find('\n') != std::string::npos) {
    throw DataError("corpus record " + entry.id + " has a multi-line message");
  }
  return entry;
}

std::size_t WriteCorpus(std::span<const CorpusEntry> entries, std::ostream& out) {
  std::size_t written = 0;
  for (const CorpusEntry& entry : entries) {
    out << ToJson(entry).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    if (!out) throw CorpusWriteError("corpus write failed", written);
    ++written;
  }
  out.flush();
  if (!out) throw CorpusWriteError("corpus flush failed", written);
  return written;
}

std::size_t WriteCorpus(std::span<const CorpusEntry> entries, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusWriteError("cannot open " + path + " for writing", 0);
  return WriteCorpus(entries, out);
}

std::vector<CorpusEntry> ReadCorpus(std::istream& in) {
  std::vector<CorpusEntry> entries;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    CorpusEntry entry = EntryFromJson(j);
    if (!ids.insert(entry.id).second) {
      throw DataError("corpus line " + std::to_string(line_no) + ": duplicate id " + entry.id);
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<CorpusEntry> ReadCorpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus " + path);
  return ReadCorpus(in);
}

void SplitSpec::Validate() const {
  if (!(train_frac > 0 && valid_frac > 0 && test_frac > 0)) {
    throw std::invalid_argument("split fractions must all be positive");
  }
  if (std::abs(train_frac + valid_frac + test_frac - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }
}

SplitSizes ComputeSplitSizes(std::size_t n, const SplitSpec& spec) {
  spec.Validate();
  // The epsilon keeps exact products such as 30 * 0.1 from flooring down.
  auto part = [n](double frac) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * frac + 1e-9));
  };
  SplitSizes sizes;
  sizes.valid = part(spec.valid_frac);
  sizes.test = part(spec.test_frac);
  sizes.train = n - sizes.valid - sizes.test;
  return sizes;
}

std::vector<std::size_t> ShuffledIndices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[Bounded(rng, i)]);
  }
  return order;
}

SplitIndices SplitIndexSets(std::span<const CorpusEntry> entries, const SplitSpec& spec) {
  if (entries.empty()) throw std::invalid_argument("cannot split an empty corpus");
  const SplitSizes sizes = ComputeSplitSizes(entries.size(), spec);
  SplitIndices out;
  if (!spec.group_by_repo) {
    const std::vector<std::size_t> order = ShuffledIndices(entries.size(), spec.seed);
    out.valid.assign(order.begin(), order.begin() + sizes.valid);
    out.test.assign(order.begin() + sizes.valid, order.begin() + sizes.valid + sizes.test);
    out.train.assign(order.begin() + sizes.valid + sizes.test, order.end());
  } else {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < entries.size(); ++i) groups[entries[i].repo].push_back(i);
    std::vector<const std::vector<std::size_t>*> ordered;
    for (const auto& [repo, members] : groups) ordered.push_back(&members);
    for (std::size_t g : ShuffledIndices(ordered.size(), spec.seed)) {
      const auto& members = *ordered[g];
      std::vector<std::size_t>* target = &out.train;
      if (out.valid.size() < sizes.valid) {
        target = &out.valid;
      } else if (out.test.size() < sizes.test) {
        target = &out.test;
      }
      target->insert(target->end(), members.begin(), members.end());
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.valid.begin(), out.valid.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

CorpusSplits Split(std::span<const CorpusEntry> entries, const SplitSpec& spec) {
  const SplitIndices indices = SplitIndexSets(entries, spec);
  CorpusSplits splits;
  for (std::size_t i : indices.train) splits.train.push_back(entries[i]);
  for (std::size_t i : indices.valid) splits.valid.push_back(entries[i]);
  for (std::size_t i : indices.test) splits.test.push_back(entries[i]);
  return splits;
}

StatisticsReport ComputeStats(std::span<const CorpusEntry> entries,
                              const TokenCounter& count_tokens) {
  StatisticsReport report;
  for (Language language : kAllLanguages) {
    report.per_language[language] = 0;
    report.repos_per_language[language] = 0;
  }
  std::set<std::string> repos;
  std::map<Language, std::set<std::string>> language_repos;
  std::vector<std::size_t> code_lengths;
  std::vector<std::size_t> message_lengths;
  for (const CorpusEntry& entry : entries) {
    ++report.total;
    ++report.per_language[entry.language];
    repos.insert(entry.repo);
    language_repos[entry.language].insert(entry.repo);
    const std::string lemma = LemmatizeVerb(FirstWord(entry.message));
    if (!lemma.empty()) ++report.verbs[lemma];
    const std::string added = Join(entry.added);
    const std::string deleted = Join(entry.deleted);
    code_lengths.push_back(count_tokens ? count_tokens(added) + count_tokens(deleted)
                                        : added.size() + deleted.size());
    std::istringstream words(entry.message);
    std::size_t n = 0;
    for (std::string w; words >> w;) ++n;
    message_lengths.push_back(n);
  }
  report.repos = repos.size();
  for (const auto& [language, set] : language_repos) {
    report.repos_per_language[language] = set.size();
  }
  report.code_tokens = ComputePercentiles(std::move(code_lengths));
  report.message_tokens = ComputePercentiles(std::move(message_lengths));
  return report;
}

nlohmann::json ToJson(const StatisticsReport& report) {
  nlohmann::json j;
  j["total"] = report.total;
  j["repos"] = report.repos;
  for (const auto& [language, n] : report.per_language) {
    j["per_language"][std::string(LanguageName(language))] = {
        {"pairs", n}, {"repos", report.repos_per_language.at(language)}};
  }
  j["verbs"] = nlohmann::json::object();
  for (const auto& [verb, n] : report.verbs) j["verbs"][verb] = n;
  j["code_tokens"] = ToJson(report.code_tokens);
  j["message_tokens"] = ToJson(report.message_tokens);
  return j;
}

std::string FormatStatsTable(const StatisticsReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "Language" << std::right << std::setw(10) << "Pairs"
      << std::setw(14) << "Repositories" << '\n';
  for (Language language : kAllLanguages) {
    out << std::left << std::setw(12) << LanguageLabel(language) << std::right
        << std::setw(10) << report.per_language.at(language) << std::setw(14)
        << report.repos_per_language.at(language) << '\n';
  }
  out << std::left << std::setw(12) << "Total" << std::right << std::setw(10) << report.total
      << std::setw(14) << report.repos << '\n';
  return out.str();
}

std::string FormatSplitTable(std::span<const CorpusEntry> train,
                             std::span<const CorpusEntry> valid,
                             std::span<const CorpusEntry> test) {
  std::map<Language, std::array<std::size_t, 3>> counts;
  std::map<Language, std::set<std::string>> repos;
  std::set<std::string> all_repos;
  const std::span<const CorpusEntry> parts[3] = {train, valid, test};
  for (int p = 0; p < 3; ++p) {
    for (const CorpusEntry& entry : parts[p]) {
      ++counts[entry.language][p];
      repos[entry.language].insert(entry.repo);
      all_repos.insert(entry.repo);
    }
  }
  std::ostringstream out;
  out << std::left << std::setw(12) << "Language" << std::right << std::setw(10) << "Train"
      << std::setw(12) << "Validation" << std::setw(10) << "Test" << std::setw(14)
      << "Repositories" << '\n';
  for (Language language : kAllLanguages) {
    const auto c = counts[language];
    out << std::left << std::setw(12) << LanguageLabel(language) << std::right
        << std::setw(10) << c[0] << std::setw(12) << c[1] << std::setw(10) << c[2]
        << std::setw(14) << repos[language].size() << '\n';
  }
  out << "Total : " << train.size() + valid.size() + test.size()
      << "  Repositories : " << all_repos.size() << '\n';
  return out.str();
}

}  // namespace commitgen
