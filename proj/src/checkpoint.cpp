//  Copyright 2026 The Typhoon Joint Authors. All Rights Reserved.
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.


#include "typhoon/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "typhoon/errors.hpp"

namespace typhoon {

namespace {

constexpr char kMagic[8] = {'T', 'Y', 'P', 'H', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t.tensor;
  }
  return nullptr;
}

void save_checkpoint(const std::filesystem::path& path, const ParamList& params,
                     const nlohmann::json& meta) {
  nlohmann::json header;
  header["format"] = 1;
  header["meta"] = meta;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& p : params) {
    header["tensors"].push_back({{"name", p.name},
                                 {"shape", p.tensor.shape()},
                                 {"offset", offset},
                                 {"count", p.tensor.size()}});
    offset += p.tensor.size();
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : params) {
    auto d = p.tensor.data();
    out.write(reinterpret_cast<const char*>(d.data()),
              static_cast<std::streamsize>(d.size() * sizeof(double)));
  }
  if (!out) throw DataError("short write on checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw DataError(path.string() + " is not a checkpoint file");
  }
  const std::uint64_t header_len = read_u64(in);
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw DataError("truncated checkpoint header in " + path.string());
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad checkpoint header in " + path.string() + ": " + e.what());
  }
  if (header.value("format", 0) != 1) {
    throw DataError("unsupported checkpoint format in " + path.string());
  }
  std::uint64_t total = 0;
  for (const auto& t : header.at("tensors")) {
    total = std::max<std::uint64_t>(
        total, t.at("offset").get<std::uint64_t>() + t.at("count").get<std::uint64_t>());
  }
  std::vector<double> block(total);
  in.read(reinterpret_cast<char*>(block.data()),
          static_cast<std::streamsize>(total * sizeof(double)));
  if (!in) throw DataError("truncated checkpoint data in " + path.string());

  Checkpoint ckpt;
  ckpt.meta = header.value("meta", nlohmann::json::object());
  for (const auto& t : header.at("tensors")) {
    const auto offset = t.at("offset").get<std::size_t>();
    const auto count = t.at("count").get<std::size_t>();
    Shape shape = t.at("shape").get<Shape>();
    std::vector<double> values(block.begin() + static_cast<std::ptrdiff_t>(offset),
                               block.begin() + static_cast<std::ptrdiff_t>(offset + count));
    ckpt.tensors.push_back(
        {t.at("name").get<std::string>(), Tensor::from(shape, std::move(values))});
  }
  return ckpt;
}

void restore_params(const Checkpoint& ckpt, ParamList& params) {
  for (auto& p : params) {
    const Tensor* src = ckpt.find(p.name);
    if (!src) throw DataError("checkpoint lacks parameter " + p.name);
    if (src->shape() != p.tensor.shape()) {
      throw DataError("checkpoint parameter " + p.name + " has shape " +
                      shape_string(src->shape()) + ", expected " +
                      shape_string(p.tensor.shape()));
    }
    std::copy(src->data().begin(), src->data().end(),
              p.tensor.mutable_data().begin());
  }
}

}  // namespace typhoon
