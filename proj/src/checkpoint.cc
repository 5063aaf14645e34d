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

#include "commitgen/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "commitgen/errors.h"

namespace commitgen {
namespace {

constexpr char kMagic[8] = {'C', 'M', 'T', 'G', 'C', 'K', 'P', 'T'};

void PutU32(std::string* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU64(std::string* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  std::string_view Bytes(std::size_t n, const char* what) {
    if (data_.size() - pos_ < n) throw DataError(std::string("checkpoint truncated in ") + what);
    std::string_view out(data_.data() + pos_, n);
    pos_ += n;
    return out;
  }

  std::uint64_t Unsigned(int width, const char* what) {
    const std::string_view b = Bytes(static_cast<std::size_t>(width), what);
    std::uint64_t v = 0;
    for (int i = width - 1; i >= 0; --i) {
      v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    }
    return v;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

std::string Shape(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace

void SaveCheckpoint(const Parameters<float>& params, const ModelConfig& config,
                    const std::string& path) {
  std::string out(kMagic, sizeof(kMagic));
  PutU32(&out, kCheckpointVersion);
  const std::string header = nlohmann::json{{"config", ToJson(config)}}.dump();
  PutU64(&out, header.size());
  out += header;
  std::uint32_t count = 0;
  ForEachTensor(params, [&](const std::string&, const Matrix<float>&) { ++count; });
  PutU32(&out, count);
  ForEachTensor(params, [&](const std::string& name, const Matrix<float>& m) {
    PutU32(&out, static_cast<std::uint32_t>(name.size()));
    out += name;
    PutU32(&out, static_cast<std::uint32_t>(m.rows()));
    PutU32(&out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) PutU32(&out, std::bit_cast<std::uint32_t>(m.data()[i]));
  });
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw std::runtime_error("failed writing " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open checkpoint " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  Reader in(buffer.str());

  if (in.Bytes(sizeof(kMagic), "magic") != std::string_view(kMagic, sizeof(kMagic))) {
    throw DataError(path + " is not a checkpoint file");
  }
  const auto version = in.Unsigned(4, "version");
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = in.Unsigned(8, "header length");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.Bytes(header_len, "header"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad checkpoint header: ") + e.what());
  }
  if (!header.contains("config")) throw DataError("checkpoint header has no config");
  Checkpoint ckpt;
  ckpt.config = ModelConfigFromJson(header["config"]);
  try {
    ckpt.config.Validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint config invalid: ") + e.what());
  }

  ckpt.params = ZeroParameters<float>(ckpt.config);
  std::vector<std::pair<std::string, Matrix<float>*>> slots;
  ForEachTensor(ckpt.params, [&](const std::string& name, Matrix<float>& m) {
    slots.emplace_back(name, &m);
  });
  const auto count = in.Unsigned(4, "tensor count");
  if (count != slots.size()) {
    throw ShapeError("checkpoint holds " + std::to_string(count) + " tensors, its config implies " +
                     std::to_string(slots.size()));
  }
  for (auto& [expected_name, slot] : slots) {
    const auto name_len = in.Unsigned(4, "tensor name");
    const std::string name(in.Bytes(name_len, "tensor name"));
    const auto rows = static_cast<Eigen::Index>(in.Unsigned(4, "tensor shape"));
    const auto cols = static_cast<Eigen::Index>(in.Unsigned(4, "tensor shape"));
    if (name != expected_name || rows != slot->rows() || cols != slot->cols()) {
      throw ShapeError("tensor '" + name + "' " + Shape(rows, cols) + " does not match '" +
                       expected_name + "' " + Shape(slot->rows(), slot->cols()));
    }
    for (Eigen::Index i = 0; i < slot->size(); ++i) {
      slot->data()[i] = std::bit_cast<float>(static_cast<std::uint32_t>(in.Unsigned(4, name.c_str())));
    }
  }
  if (!in.done()) throw DataError("trailing bytes after the last tensor in " + path);
  return ckpt;
}

void CheckCompatible(const Checkpoint& checkpoint, const ModelConfig& expected) {
  const Parameters<float> want = ZeroParameters<float>(expected);
  std::vector<std::pair<std::string, const Matrix<float>*>> have;
  ForEachTensor(checkpoint.params, [&](const std::string& name, const Matrix<float>& m) {
    have.emplace_back(name, &m);
  });
  std::size_t i = 0;
  ForEachTensor(want, [&](const std::string& name, const Matrix<float>& m) {
    if (i >= have.size()) throw ShapeError("checkpoint lacks tensor '" + name + "'");
    const auto& [have_name, have_m] = have[i++];
    if (have_name != name || have_m->rows() != m.rows() || have_m->cols() != m.cols()) {
      throw ShapeError("shape mismatch at tensor '" + name + "': checkpoint has '" + have_name +
                       "' " + Shape(have_m->rows(), have_m->cols()) + ", expected " +
                       Shape(m.rows(), m.cols()));
    }
  });
  if (i != have.size()) {
    throw ShapeError("checkpoint has extra tensor '" + have[i].first + "'");
  }
  if (checkpoint.config.vocab_fingerprint != expected.vocab_fingerprint) {
    throw DataError("checkpoint was trained with a different vocabulary");
  }
}

Parameters<float> LoadCheckpointFor(const std::string& path, const ModelConfig& expected) {
  Checkpoint ckpt = LoadCheckpoint(path);
  CheckCompatible(ckpt, expected);
  return std::move(ckpt.params);
}

}  // namespace commitgen
