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

#include "test_support.h"

#include <stdlib.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "commitgen/subprocess.h"

#ifndef COMMITGEN_FIXTURE_DIR
#error "COMMITGEN_FIXTURE_DIR must be defined"
#endif

namespace commitgen::testing {

std::string FixturePath(const std::string& relative) {
  return std::string(COMMITGEN_FIXTURE_DIR) + "/" + relative;
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteText(const std::string& path, const std::string& text) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

TempDir::TempDir() {
  std::string pattern = (std::filesystem::temp_directory_path() / "commitgen-XXXXXX").string();
  if (mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

ModelConfig TinyConfig(int vocab_size, int hidden) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.hidden_dim = hidden;
  c.heads = 2;
  c.ffn_dim = 2 * hidden;
  c.max_source_len = 12;
  c.max_target_len = 8;
  c.dropout = 0;
  return c;
}

EncodedExample RandomExample(std::mt19937_64& rng, const ModelConfig& config, int add_len,
                             int del_len, int message_len) {
  std::uniform_int_distribution<int> token(kNumSpecialTokens, config.vocab_size - 1);
  const SpecialIds& sp = config.specials;
  EncodedExample ex;
  ex.source_ids.push_back(sp.cls);
  for (int i = 0; i < add_len; ++i) ex.source_ids.push_back(token(rng));
  ex.source_ids.push_back(sp.sep);
  for (int i = 0; i < del_len; ++i) ex.source_ids.push_back(token(rng));
  ex.source_ids.push_back(sp.sep);
  ex.target_ids.push_back(sp.bos);
  for (int i = 0; i < message_len; ++i) ex.target_ids.push_back(token(rng));
  ex.target_ids.push_back(sp.eos);
  ex.source_mask.assign(ex.source_ids.size(), 1);
  ex.target_mask.assign(ex.target_ids.size(), 1);
  return ex;
}

std::string Git(const std::string& dir, const std::vector<std::string>& args) {
  std::vector<std::string> argv = {"git", "-C", dir};
  argv.insert(argv.end(), args.begin(), args.end());
  const ProcessResult r = RunProcess(argv);
  if (r.exit_code != 0) {
    std::string cmd;
    for (const auto& a : args) cmd += " " + a;
    throw std::runtime_error("git" + cmd + " failed: " + r.err);
  }
  return r.out;
}

void InitRepository(const std::string& dir) {
  std::filesystem::create_directories(dir);
  Git(dir, {"init", "--quiet", "--initial-branch=main"});
  Git(dir, {"config", "user.name", "Fixture"});
  Git(dir, {"config", "user.email", "fixture@example.com"});
  Git(dir, {"config", "commit.gpgsign", "false"});
}

std::string CommitFiles(const std::string& dir,
                        const std::map<std::string, std::optional<std::string>>& files,
                        const std::string& message, std::int64_t time) {
  for (const auto& [name, content] : files) {
    const std::string path = dir + "/" + name;
    if (content) {
      WriteText(path, *content);
    } else {
      std::filesystem::remove(path);
    }
  }
  Git(dir, {"add", "--all"});
  const std::string date = "@" + std::to_string(time) + " +0000";
  const ProcessResult r = RunProcess({"env", "GIT_AUTHOR_DATE=" + date,
                                      "GIT_COMMITTER_DATE=" + date, "git", "-C", dir, "commit",
                                      "--quiet", "--allow-empty", "-m", message});
  if (r.exit_code != 0) throw std::runtime_error("git commit failed: " + r.err);
  std::string hash = Git(dir, {"rev-parse", "HEAD"});
  while (!hash.empty() && (hash.back() == '\n' || hash.back() == '\r')) hash.pop_back();
  return hash;
}

std::vector<CorpusEntry> ToyCorpus(std::size_t n) {
  static const char* kVerbs[] = {"add", "fix", "update", "remove", "use", "change", "move", "allow"};
  static const char* kNouns[] = {"parser", "cache", "logger", "config", "router", "buffer",
                                 "client", "schema"};
  std::vector<CorpusEntry> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string verb = kVerbs[i % 8];
    const std::string noun = kNouns[(i / 8 + i) % 8];
    CorpusEntry e;
    e.repo = "toy/repo" + std::to_string(i % 3);
    e.commit = std::to_string(1000 + i);
    e.path = noun + ".py";
    e.language = Language::kPython;
    e.added = {verb + "_" + noun + "(" + std::to_string(i % 5) + ")"};
    e.deleted = {noun + "." + std::to_string(i % 4)};
    e.message = verb + " " + noun;
    e.marked_lines = {" def " + noun + "():", "-" + e.deleted[0], "+" + e.added[0]};
    e.id = MakeEntryId(e.repo, e.commit, e.path);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ScoredSequence> ExhaustiveSequences(const Parameters<double>& params,
                                                const ModelConfig& config,
                                                const EncodedExample& source, int limit) {
  std::vector<std::vector<int>> complete;
  std::vector<std::vector<int>> frontier = {{config.specials.bos}};
  while (!frontier.empty()) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : frontier) {
      for (int v = 0; v < config.vocab_size; ++v) {
        std::vector<int> ids = prefix;
        ids.push_back(v);
        const bool done = v == config.specials.eos || static_cast<int>(ids.size()) >= limit;
        (done ? complete : next).push_back(std::move(ids));
      }
    }
    frontier = std::move(next);
  }
  std::vector<ScoredSequence> out;
  for (auto& ids : complete) {
    EncodedExample ex = source;
    ex.target_ids = ids;
    ex.target_mask.assign(ids.size(), 1);
    const auto logprobs = ForwardLogProbs(params, config, std::span<const EncodedExample>(&ex, 1));
    ScoredSequence s;
    for (std::size_t t = 1; t < ids.size(); ++t) s.logprob += logprobs[0](t - 1, ids[t]);
    s.ids = std::move(ids);
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const ScoredSequence& a, const ScoredSequence& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.ids < b.ids;
  });
  return out;
}

namespace {

std::size_t Occurrences(const TokenList& tokens, const TokenList& gram) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + gram.size() <= tokens.size(); ++i) {
    bool same = true;
    for (std::size_t k = 0; k < gram.size() && same; ++k) same = tokens[i + k] == gram[k];
    n += same;
  }
  return n;
}

}  // namespace

double NaiveBleu4(const std::vector<TokenList>& hypotheses,
                  const std::vector<TokenList>& references) {
  double c = 0, r = 0;
  double product = 1;
  for (std::size_t n = 1; n <= 4; ++n) {
    double matched = 0, total = 0;
    for (std::size_t s = 0; s < hypotheses.size(); ++s) {
      const TokenList& h = hypotheses[s];
      std::vector<TokenList> seen;
      for (std::size_t i = 0; i + n <= h.size(); ++i) {
        const TokenList gram(h.begin() + i, h.begin() + i + n);
        total += 1;
        if (std::find(seen.begin(), seen.end(), gram) != seen.end()) continue;
        seen.push_back(gram);
        matched += static_cast<double>(
            std::min(Occurrences(h, gram), Occurrences(references[s], gram)));
      }
    }
    if (total > 0) product *= (matched > 0 ? matched : 1e-9) / total;
  }
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    c += static_cast<double>(hypotheses[s].size());
    r += static_cast<double>(references[s].size());
  }
  if (c == 0) return 0;
  const double brevity = c >= r ? 1.0 : std::exp(1 - r / c);
  return 100 * brevity * std::pow(product, 0.25);
}

void RandomBleuCorpus(std::mt19937_64& rng, std::vector<TokenList>* hypotheses,
                      std::vector<TokenList>* references) {
  static const char* kWords[] = {"fix", "add", "the", "a", "bug", "in", "parser",
                                 "test", "update", "docs", ".", "of"};
  std::uniform_int_distribution<int> pairs(1, 12), length(0, 14), word(0, 11), keep(0, 3);
  hypotheses->clear();
  references->clear();
  for (int n = pairs(rng); n > 0; --n) {
    TokenList ref, hyp;
    for (int k = length(rng); k > 0; --k) ref.push_back(kWords[word(rng)]);
    // Hypotheses share a prefix-ish slice with the reference so that
    // higher orders match sometimes.
    for (const auto& w : ref) {
      if (keep(rng) != 0) hyp.push_back(w);
      if (keep(rng) == 0) hyp.push_back(kWords[word(rng)]);
    }
    hypotheses->push_back(std::move(hyp));
    references->push_back(std::move(ref));
  }
}

OverfitSetup MakeOverfitSetup() {
  OverfitSetup setup;
  setup.entries = ToyCorpus(32);
  std::vector<std::string> texts;
  for (const CorpusEntry& e : setup.entries) {
    texts.push_back(e.message);
    texts.insert(texts.end(), e.added.begin(), e.added.end());
    texts.insert(texts.end(), e.deleted.begin(), e.deleted.end());
  }
  setup.vocab = Vocabulary::Train(texts, kBaseVocabSize + 64);
  ModelConfig& c = setup.config;
  c = ModelConfig::ForVocabulary(setup.vocab);
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.hidden_dim = 32;
  c.heads = 4;
  c.ffn_dim = 64;
  c.max_source_len = 32;
  c.max_target_len = 12;
  c.dropout = 0;
  TrainConfig& t = setup.train;
  t.learning_rate = 3e-3;
  t.batch_size = 8;
  t.epochs = 200;
  t.seed = 1;
  setup.examples = BuildInputs(setup.entries, setup.vocab, EncodingMode::kChangedLines, c);
  return setup;
}

FixtureRepositories BuildFixtureRepositories(const std::string& root, int changes_per_repo) {
  static const char* kExtensions[] = {".py", ".js", ".go"};
  static const char* kComments[] = {"#", "//", "//"};
  static const char* kNouns[] = {"parser", "cache", "router", "client"};
  static const char* kVerbs[] = {"update", "change", "fix", "use"};
  FixtureRepositories out;
  std::int64_t time = 1600000000;
  for (int r = 0; r < 3; ++r) {
    const std::string dir = root + "/repo" + std::to_string(r);
    InitRepository(dir);
    const std::string ext = kExtensions[r];
    auto body = [&](const std::string& noun, int value) {
      return std::string(kComments[r]) + " " + noun + " settings\n" + noun +
             "_n = " + std::to_string(value) + "\n" + noun + "_on = 1\n";
    };
    int values[4] = {0, 0, 0, 0};
    std::map<std::string, std::optional<std::string>> initial = {{"README.md", "fixture\n"}};
    for (int k = 0; k < 4; ++k) initial[std::string(kNouns[k]) + ext] = body(kNouns[k], 0);
    CommitFiles(dir, initial, "Add initial modules", time++);
    for (int i = 0; i < changes_per_repo; ++i) {
      const int k = i % 4;
      const std::string noun = kNouns[k];
      values[k] = (values[k] + 1 + i / 4) % 50;
      CommitFiles(dir, {{noun + ext, body(noun, values[k])}},
                  std::string(kVerbs[(i + r) % 4]) + " " + noun + " count", time++);
      if (i % 8 == 3) {
        CommitFiles(dir, {{"README.md", "fixture " + std::to_string(i) + "\n"}},
                    "Update readme", time++);
      }
      if (i % 8 == 5) {
        std::map<std::string, std::optional<std::string>> many;
        for (int j = 0; j < 3; ++j) {
          values[j] = (values[j] + 7) % 50;
          many[std::string(kNouns[j]) + ext] = body(kNouns[j], values[j]);
        }
        CommitFiles(dir, many, "Change several modules", time++);
      }
    }
    out.paths.push_back(dir);
  }
  const std::string& first = out.paths[0];
  WriteText(first + "/client.py", "# client settings\nclient_n = 41\nclient_on = 1\n");
  Git(first, {"add", "client.py"});
  out.held_out_diff = Git(first, {"diff", "--cached", "--no-color"});
  out.repo_list = root + "/repos.txt";
  std::string list;
  for (const std::string& p : out.paths) list += p + "\n";
  WriteText(out.repo_list, list);
  return out;
}

std::string FuzzString(std::mt19937_64& rng) {
  static const char* kPieces[] = {"return", " a", " - ", "b", "\t", "\n", "  ", "x_1",
                                  "(", "))", "é", "日本", "🙂", "\r\n", "#", "Fix"};
  std::uniform_int_distribution<int> length(0, 24), kind(0, 9), piece(0, 15), byte(0, 255),
      control(0, 31);
  std::string out;
  for (int n = length(rng); n > 0; --n) {
    const int k = kind(rng);
    if (k < 6) {
      out += kPieces[piece(rng)];
    } else if (k < 8) {
      out.push_back(static_cast<char>(control(rng)));
    } else {
      out.push_back(static_cast<char>(byte(rng)));
    }
  }
  return out;
}

}  // namespace commitgen::testing
