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

// Byte-level byte-pair-encoding vocabulary shared by the code and message
// sides of the model.
//
// Id layout: six special tokens, then the 256 single bytes, then one id per
// learned merge in merge order. Every byte string is encodable, so no input
// ever maps to the unknown token.

#ifndef COMMITGEN_BPE_H_
#define COMMITGEN_BPE_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace commitgen {

struct SpecialIds {
  int pad = 0;
  int bos = 1;
  int eos = 2;
  int unk = 3;
  int cls = 4;
  int sep = 5;

  bool operator==(const SpecialIds&) const = default;
};

// Counts code tokens, e.g. for the mining length rule.
using TokenCounter = std::function<std::size_t(std::string_view)>;

inline constexpr int kNumSpecialTokens = 6;
inline constexpr int kNumByteTokens = 256;
inline constexpr int kBaseVocabSize = kNumSpecialTokens + kNumByteTokens;

// Splits text into the chunks BPE operates on: word runs and punctuation
// runs, each optionally carrying one leading space, and whitespace runs.
// Concatenating the chunks gives back the input.
std::vector<std::string_view> PreTokenize(std::string_view text);

class Vocabulary {
 public:
  // Byte-level vocabulary with no merges.
  Vocabulary();

  // Learns merges greedily, most frequent adjacent pair first (ties broken
  // by lower (left, right) id), until the vocabulary holds `vocab_size`
  // tokens or no adjacent pair remains. A merge that would duplicate an
  // existing token string is skipped. Throws
  // std::invalid_argument for an empty corpus or vocab_size below
  // kBaseVocabSize.
  static Vocabulary Train(std::span<const std::string> texts, int vocab_size);

  const SpecialIds& specials() const { return specials_; }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::pair<int, int>>& merges() const { return merges_; }

  bool IsSpecial(int id) const { return id >= 0 && id < kNumSpecialTokens; }

  // Raw bytes of a non-special token, or the bracketed name of a special.
  const std::string& TokenText(int id) const;
  std::optional<int> TokenId(std::string_view bytes) const;

  std::vector<int> Encode(std::string_view text) const;
  std::size_t CountTokens(std::string_view text) const { return Encode(text).size(); }

  // Concatenates token bytes, skipping special ids. Throws DataError for
  // ids outside [0, size()).
  std::string Decode(std::span<const int> ids) const;

  // Same vocabulary restricted to its first `count` merges.
  Vocabulary WithMergePrefix(std::size_t count) const;

  // Stable 64-bit digest of the merge list, stored in checkpoints.
  std::uint64_t Fingerprint() const;

  // Writes <prefix>.merges.txt and <prefix>.vocab.txt.
  void Save(const std::string& prefix) const;
  static Vocabulary Load(const std::string& prefix);

  bool operator==(const Vocabulary& other) const {
    return merges_ == other.merges_ && tokens_ == other.tokens_;
  }

 private:
  static std::uint64_t PairKey(int left, int right) {
    return (static_cast<std::uint64_t>(left) << 32) | static_cast<std::uint32_t>(right);
  }
  void AppendMerge(int left, int right);
  void EncodeChunk(std::string_view chunk, std::vector<int>* out) const;

  SpecialIds specials_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> byte_token_ids_;
  std::vector<std::pair<int, int>> merges_;
  std::unordered_map<std::uint64_t, int> merge_rank_;
};

}  // namespace commitgen

#endif  // COMMITGEN_BPE_H_
