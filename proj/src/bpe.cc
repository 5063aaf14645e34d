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

#include "commitgen/bpe.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "commitgen/errors.h"

namespace commitgen {
namespace {

constexpr const char* kSpecialNames[kNumSpecialTokens] = {
    "<pad>", "<s>", "</s>", "<unk>", "[cls]", "[sep]"};

enum class ByteClass { kWord, kSpace, kNewline, kPunct };

ByteClass Classify(unsigned char c) {
  if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') return ByteClass::kSpace;
  if (c == '\n') return ByteClass::kNewline;
  if (c >= 0x80 || std::isalnum(c) || c == '_') return ByteClass::kWord;
  return ByteClass::kPunct;
}

std::string Escape(std::string_view bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    if (c > 0x20 && c < 0x7f && c != '\\') {
      out += static_cast<char>(c);
    } else {
      out += "\\x";
      out += kHex[c >> 4];
      out += kHex[c & 0xf];
    }
  }
  return out;
}

std::string Unescape(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out += text[i];
      continue;
    }
    if (i + 3 >= text.size()) {
      throw DataError("truncated escape in vocabulary file");
    }
    if (text[i + 1] != 'x') throw DataError("bad escape in vocabulary file");
    out += static_cast<char>(std::stoi(std::string(text.substr(i + 2, 2)), nullptr, 16));
    i += 3;
  }
  return out;
}

struct PairCount {
  std::int64_t count;
  std::uint64_t key;
};

struct PairOrder {
  // Max-heap on count; ties pop the smaller key first.
  bool operator()(const PairCount& a, const PairCount& b) const {
    if (a.count != b.count) return a.count < b.count;
    return a.key > b.key;
  }
};

}  // namespace

std::vector<std::string_view> PreTokenize(std::string_view text) {
  std::vector<std::string_view> chunks;
  const std::size_t n = text.size();
  auto cls = [&](std::size_t i) { return Classify(static_cast<unsigned char>(text[i])); };
  auto run_end = [&](std::size_t i) {
    const ByteClass c = cls(i);
    while (i < n && cls(i) == c) ++i;
    return i;
  };
  std::size_t i = 0;
  while (i < n) {
    const std::size_t start = i;
    const ByteClass c = cls(i);
    if (text[i] == ' ' && i + 1 < n &&
        (cls(i + 1) == ByteClass::kWord || cls(i + 1) == ByteClass::kPunct)) {
      i = run_end(i + 1);
    } else if (c == ByteClass::kSpace) {
      i = run_end(i);
      // Leave one trailing space to lead the next word.
      if (i < n && i - start > 1 && text[i - 1] == ' ' &&
          (cls(i) == ByteClass::kWord || cls(i) == ByteClass::kPunct)) {
        --i;
      }
    } else {
      i = run_end(i);
    }
    chunks.push_back(text.substr(start, i - start));
  }
  return chunks;
}

Vocabulary::Vocabulary() {
  tokens_.reserve(kBaseVocabSize);
  for (const char* name : kSpecialNames) tokens_.emplace_back(name);
  for (int b = 0; b < kNumByteTokens; ++b) {
    tokens_.emplace_back(1, static_cast<char>(b));
    byte_token_ids_.emplace(tokens_.back(), kNumSpecialTokens + b);
  }
}

void Vocabulary::AppendMerge(int left, int right) {
  const int id = size();
  merge_rank_.emplace(PairKey(left, right), static_cast<int>(merges_.size()));
  merges_.emplace_back(left, right);
  tokens_.push_back(tokens_[left] + tokens_[right]);
  byte_token_ids_.emplace(tokens_.back(), id);
}

Vocabulary Vocabulary::Train(std::span<const std::string> texts, int vocab_size) {
  if (texts.empty()) throw std::invalid_argument("cannot train BPE on an empty corpus");
  if (vocab_size < kBaseVocabSize) {
    throw std::invalid_argument("vocab_size must be at least " +
                                std::to_string(kBaseVocabSize));
  }
  Vocabulary vocab;

  std::map<std::string_view, std::int64_t> chunk_counts;
  for (const std::string& text : texts) {
    for (std::string_view chunk : PreTokenize(text)) ++chunk_counts[chunk];
  }
  std::vector<std::vector<int>> words;
  std::vector<std::int64_t> freqs;
  for (const auto& [chunk, count] : chunk_counts) {
    std::vector<int> symbols;
    for (unsigned char c : chunk) symbols.push_back(kNumSpecialTokens + c);
    words.push_back(std::move(symbols));
    freqs.push_back(count);
  }

  std::unordered_map<std::uint64_t, std::int64_t> pair_counts;
  std::unordered_map<std::uint64_t, std::vector<int>> pair_words;
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (std::size_t i = 0; i + 1 < words[w].size(); ++i) {
      const std::uint64_t key = PairKey(words[w][i], words[w][i + 1]);
      pair_counts[key] += freqs[w];
      auto& list = pair_words[key];
      if (list.empty() || list.back() != static_cast<int>(w)) list.push_back(static_cast<int>(w));
    }
  }
  std::priority_queue<PairCount, std::vector<PairCount>, PairOrder> heap;
  for (const auto& [key, count] : pair_counts) heap.push({count, key});

  std::unordered_set<std::uint64_t> forbidden;
  while (vocab.size() < vocab_size && !heap.empty()) {
    const PairCount top = heap.top();
    heap.pop();
    auto it = pair_counts.find(top.key);
    if (it == pair_counts.end() || it->second != top.count || top.count <= 0) continue;
    if (forbidden.contains(top.key)) continue;
    const int left = static_cast<int>(top.key >> 32);
    const int right = static_cast<int>(top.key & 0xffffffffu);
    if (vocab.byte_token_ids_.contains(vocab.tokens_[left] + vocab.tokens_[right])) {
      forbidden.insert(top.key);
      continue;
    }
    const int merged = vocab.size();
    vocab.AppendMerge(left, right);

    std::vector<int> affected = std::move(pair_words[top.key]);
    pair_words.erase(top.key);
    std::sort(affected.begin(), affected.end());
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
    std::unordered_set<std::uint64_t> touched;
    for (int w : affected) {
      std::vector<int>& symbols = words[w];
      bool present = false;
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        if (symbols[i] == left && symbols[i + 1] == right) {
          present = true;
          break;
        }
      }
      if (!present) continue;
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        const std::uint64_t key = PairKey(symbols[i], symbols[i + 1]);
        pair_counts[key] -= freqs[w];
        touched.insert(key);
      }
      std::vector<int> next;
      next.reserve(symbols.size());
      for (std::size_t i = 0; i < symbols.size();) {
        if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
          next.push_back(merged);
          i += 2;
        } else {
          next.push_back(symbols[i]);
          ++i;
        }
      }
      symbols = std::move(next);
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        const std::uint64_t key = PairKey(symbols[i], symbols[i + 1]);
        pair_counts[key] += freqs[w];
        touched.insert(key);
        auto& list = pair_words[key];
        if (list.empty() || list.back() != w) list.push_back(w);
      }
    }
    for (std::uint64_t key : touched) {
      const std::int64_t count = pair_counts[key];
      if (count > 0) heap.push({count, key});
    }
  }
  return vocab;
}

const std::string& Vocabulary::TokenText(int id) const {
  if (id < 0 || id >= size()) throw DataError("token id out of range: " + std::to_string(id));
  return tokens_[id];
}

std::optional<int> Vocabulary::TokenId(std::string_view bytes) const {
  auto it = byte_token_ids_.find(std::string(bytes));
  if (it == byte_token_ids_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::EncodeChunk(std::string_view chunk, std::vector<int>* out) const {
  std::vector<int> symbols;
  symbols.reserve(chunk.size());
  for (unsigned char c : chunk) symbols.push_back(kNumSpecialTokens + c);
  while (symbols.size() > 1) {
    int best_rank = -1;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = merge_rank_.find(PairKey(symbols[i], symbols[i + 1]));
      if (it != merge_rank_.end() && (best_rank < 0 || it->second < best_rank)) {
        best_rank = it->second;
      }
    }
    if (best_rank < 0) break;
    const auto [left, right] = merges_[best_rank];
    const int merged = kBaseVocabSize + best_rank;
    std::size_t write = 0;
    for (std::size_t i = 0; i < symbols.size();) {
      if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
        symbols[write++] = merged;
        i += 2;
      } else {
        symbols[write++] = symbols[i++];
      }
    }
    symbols.resize(write);
  }
  out->insert(out->end(), symbols.begin(), symbols.end());
}

std::vector<int> Vocabulary::Encode(std::string_view text) const {
  std::vector<int> ids;
  for (std::string_view chunk : PreTokenize(text)) EncodeChunk(chunk, &ids);
  return ids;
}

std::string Vocabulary::Decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || id >= size()) {
      throw DataError("token id out of range: " + std::to_string(id));
    }
    if (!IsSpecial(id)) out += tokens_[id];
  }
  return out;
}

Vocabulary Vocabulary::WithMergePrefix(std::size_t count) const {
  Vocabulary vocab;
  for (std::size_t i = 0; i < std::min(count, merges_.size()); ++i) {
    vocab.AppendMerge(merges_[i].first, merges_[i].second);
  }
  return vocab;
}

std::uint64_t Vocabulary::Fingerprint() const {
  std::uint64_t hash = 14695981039346656037ull;
  auto mix = [&hash](std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
      hash ^= (value >> (8 * i)) & 0xff;
      hash *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(size()));
  for (const auto& [left, right] : merges_) mix(PairKey(left, right));
  return hash;
}

void Vocabulary::Save(const std::string& prefix) const {
  std::ofstream merges(prefix + ".merges.txt", std::ios::binary);
  std::ofstream table(prefix + ".vocab.txt", std::ios::binary);
  if (!merges || !table) throw std::runtime_error("cannot write vocabulary " + prefix);
  for (const auto& [left, right] : merges_) {
    merges << Escape(tokens_[left]) << ' ' << Escape(tokens_[right]) << '\n';
  }
  for (int id = 0; id < size(); ++id) {
    table << id << '\t' << (IsSpecial(id) ? "special" : "bytes") << '\t'
          << (IsSpecial(id) ? tokens_[id] : Escape(tokens_[id])) << '\n';
  }
  if (!merges || !table) throw std::runtime_error("failed writing vocabulary " + prefix);
}

Vocabulary Vocabulary::Load(const std::string& prefix) {
  std::ifstream merges(prefix + ".merges.txt", std::ios::binary);
  std::ifstream table(prefix + ".vocab.txt", std::ios::binary);
  if (!merges || !table) throw DataError("cannot read vocabulary " + prefix);
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(merges, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos) {
      throw DataError(prefix + ".merges.txt:" + std::to_string(line_no) + ": expected two tokens");
    }
    const auto left = vocab.TokenId(Unescape(std::string_view(line).substr(0, space)));
    const auto right = vocab.TokenId(Unescape(std::string_view(line).substr(space + 1)));
    if (!left || !right) {
      throw DataError(prefix + ".merges.txt:" + std::to_string(line_no) +
                      ": merge refers to an unknown token");
    }
    vocab.AppendMerge(*left, *right);
  }
  int expected_id = 0;
  line_no = 0;
  while (std::getline(table, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    int id = -1;
    std::string kind;
    std::string token;
    fields >> id >> kind >> token;
    const bool special = kind == "special";
    if (id != expected_id || id >= vocab.size() || special != vocab.IsSpecial(id) ||
        (special ? token : Unescape(token)) != vocab.tokens_[id]) {
      throw DataError(prefix + ".vocab.txt:" + std::to_string(line_no) +
                      ": token table disagrees with merges");
    }
    ++expected_id;
  }
  if (expected_id != vocab.size()) {
    throw DataError(prefix + ".vocab.txt: expected " + std::to_string(vocab.size()) +
                    " tokens, found " + std::to_string(expected_id));
  }
  return vocab;
}

}  // namespace commitgen
