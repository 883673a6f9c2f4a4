// Copyright 2026 The tgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tgen/nn.hpp"

#include <bit>
#include <cstring>
#include <sstream>

namespace tgen
{

namespace
{

constexpr char kMagic[] = "tgen-weights 1";

uint32_t to_le(uint32_t v)
{
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
  }
  return v;
}

}  // namespace

std::string write_weights_blob(const ParamStore & store,
                               const std::map<std::string, std::string> & meta)
{
  std::string out;
  out += kMagic;
  out += '\n';
  for (const auto & [key, value] : meta) {
    out += "meta " + key + " " + value + "\n";
  }
  int64_t total = 0;
  for (const auto & [name, e] : store.entries()) {
    out += "param " + name + " " + std::to_string(e.value.rows()) + " " +
           std::to_string(e.value.cols()) + "\n";
    total += e.value.numel();
  }
  out += "blob " + std::to_string(total * 4) + "\n";
  out.reserve(out.size() + static_cast<size_t>(total) * 4);
  for (const auto & [name, e] : store.entries()) {
    for (float v : e.value.data) {
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      bits = to_le(bits);
      char raw[4];
      std::memcpy(raw, &bits, 4);
      out.append(raw, 4);
    }
  }
  return out;
}

void read_weights_blob(const std::string & bytes, ParamStore & store,
                       std::map<std::string, std::string> & meta)
{
  size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) {
      throw SchemaError("weights file: unexpected end of header");
    }
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };

  if (next_line() != kMagic) {
    throw SchemaError("weights file: bad magic");
  }
  store = ParamStore();
  meta.clear();
  std::vector<std::string> order;
  int64_t declared_bytes = -1;
  while (true) {
    const std::string line = next_line();
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "meta") {
      std::string key;
      ss >> key;
      std::string value;
      std::getline(ss, value);
      if (!value.empty() && value[0] == ' ') {
        value.erase(0, 1);
      }
      meta[key] = value;
    } else if (tag == "param") {
      std::string name;
      int rows = 0, cols = 0;
      ss >> name >> rows >> cols;
      if (name.empty() || rows <= 0 || cols <= 0) {
        throw SchemaError("weights file: bad param line '" + line + "'");
      }
      store.create(name, rows, cols);
      order.push_back(name);
    } else if (tag == "blob") {
      ss >> declared_bytes;
      break;
    } else {
      throw SchemaError("weights file: unknown header line '" + line + "'");
    }
  }
  const int64_t expected = store.total_elements() * 4;
  if (declared_bytes != expected) {
    throw SchemaError("weights file: blob declares " + std::to_string(declared_bytes) +
                      " bytes, manifest needs " + std::to_string(expected));
  }
  if (bytes.size() - pos != static_cast<size_t>(expected)) {
    throw SchemaError("weights file: blob holds " + std::to_string(bytes.size() - pos) +
                      " bytes, manifest needs " + std::to_string(expected));
  }
  for (const std::string & name : order) {
    auto & e = store.at(name);
    for (float & v : e.value.data) {
      uint32_t bits;
      std::memcpy(&bits, bytes.data() + pos, 4);
      bits = to_le(bits);
      std::memcpy(&v, &bits, 4);
      pos += 4;
    }
  }
}

}  // namespace tgen
