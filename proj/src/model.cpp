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

#include "tgen/model.hpp"

#include <fstream>
#include <sstream>

#include "tgen/error.hpp"

namespace tgen
{

std::map<std::string, std::string> ModelConfig::to_meta() const
{
  std::map<std::string, std::string> meta;
  meta["embed_dim"] = std::to_string(embed_dim);
  meta["encoder_blocks"] = std::to_string(encoder_blocks);
  meta["mixture_components"] = std::to_string(mixture_components);
  meta["traj_len"] = std::to_string(traj_len);
  std::string hidden;
  for (size_t i = 0; i < head_hidden.size(); ++i) {
    if (i > 0) {
      hidden += ",";
    }
    hidden += std::to_string(head_hidden[i]);
  }
  meta["head_hidden"] = hidden;
  return meta;
}

ModelConfig ModelConfig::from_meta(const std::map<std::string, std::string> & meta)
{
  ModelConfig cfg;
  auto get_int = [&](const char * key, int & out) {
    auto it = meta.find(key);
    if (it == meta.end()) {
      throw SchemaError(std::string("weights file: missing meta key '") + key + "'");
    }
    out = std::stoi(it->second);
  };
  get_int("embed_dim", cfg.embed_dim);
  get_int("encoder_blocks", cfg.encoder_blocks);
  get_int("mixture_components", cfg.mixture_components);
  get_int("traj_len", cfg.traj_len);
  auto it = meta.find("head_hidden");
  if (it == meta.end()) {
    throw SchemaError("weights file: missing meta key 'head_hidden'");
  }
  cfg.head_hidden.clear();
  std::istringstream ss(it->second);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) {
      cfg.head_hidden.push_back(std::stoi(token));
    }
  }
  return cfg;
}

void save_model(const ModelParams & model, const std::string & path)
{
  const std::string bytes = write_weights_blob(model.store, model.cfg.to_meta());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open '" + path + "' for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ModelParams load_model(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open weights file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  ModelParams model;
  std::map<std::string, std::string> meta;
  read_weights_blob(buf.str(), model.store, meta);
  model.cfg = ModelConfig::from_meta(meta);
  return model;
}

}  // namespace tgen
