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

#ifndef TGEN__MODEL_HPP_
#define TGEN__MODEL_HPP_

#include <map>
#include <string>
#include <vector>

#include "tgen/nn.hpp"
#include "tgen/vectorize.hpp"

namespace tgen
{

/// Architecture hyperparameters. Defaults are the full-scale configuration;
/// tests and the desk profile shrink embed_dim / head widths.
struct ModelConfig
{
  int embed_dim = 1024;                          // D
  int encoder_blocks = 5;
  int mixture_components = 10;                   // K, shared by GMM heads and modes
  int traj_len = 90;                             // L, waypoints per mode
  std::vector<int> head_hidden = {2048, 1024, 256};

  MlpSpec proj_spec() const { return {kFeatureWidth, {}, embed_dim, Activation::kIdentity}; }
  MlpSpec block_spec() const { return {embed_dim, {embed_dim}, embed_dim, Activation::kRelu}; }
  MlpSpec place_spec() const { return {embed_dim, head_hidden, 1, Activation::kRelu}; }
  MlpSpec bivariate_spec() const
  {
    return {embed_dim, head_hidden, mixture_components * 6, Activation::kRelu};
  }
  MlpSpec univariate_spec() const
  {
    return {embed_dim, head_hidden, mixture_components * 3, Activation::kRelu};
  }
  MlpSpec traj_spec() const
  {
    return {2 * embed_dim, head_hidden, mixture_components * (2 * traj_len + 1),
            Activation::kRelu};
  }

  std::map<std::string, std::string> to_meta() const;
  static ModelConfig from_meta(const std::map<std::string, std::string> & meta);
};

/// Encoder stack plus every decoder head, in one registry. One shared encoder
/// feeds both decoders.
template <class T>
struct ModelParamsT
{
  ModelConfig cfg;
  ParamStoreT<T> store;
};

using ModelParams = ModelParamsT<float>;

template <class T>
void init_model_params(ModelParamsT<T> & model, const ModelConfig & cfg, uint64_t seed)
{
  model.cfg = cfg;
  model.store = ParamStoreT<T>();
  init_mlp(model.store, "enc.proj", cfg.proj_spec(), seed);
  for (int b = 0; b < cfg.encoder_blocks; ++b) {
    const std::string p = "enc.b" + std::to_string(b);
    init_mlp(model.store, p + ".elem", cfg.block_spec(), seed);
    init_mlp(model.store, p + ".ctx", cfg.block_spec(), seed);
  }
  init_mlp(model.store, "head.place", cfg.place_spec(), seed);
  init_mlp(model.store, "head.pos", cfg.bivariate_spec(), seed);
  init_mlp(model.store, "head.heading", cfg.univariate_spec(), seed);
  init_mlp(model.store, "head.speed", cfg.univariate_spec(), seed);
  init_mlp(model.store, "head.size", cfg.bivariate_spec(), seed);
  init_mlp(model.store, "head.traj", cfg.traj_spec(), seed);
}

// Checkpoint io (float32 blob regardless of the compute type used upstream).
void save_model(const ModelParams & model, const std::string & path);
ModelParams load_model(const std::string & path);

/// Fixed per-column normalization applied ahead of the input projection.
/// Positions are scaled by the crop half-side, speeds and sizes by nominal
/// maxima; indicator columns pass through.
template <class T>
TensorT<T> feature_scale_row()
{
  TensorT<T> row = TensorT<T>::full(1, kFeatureWidth, T(1));
  row.data[0] = row.data[1] = row.data[2] = row.data[3] = T(1.0 / 60.0);  // p_s, p_e
  row.data[13] = row.data[14] = T(1.0 / 3.0);                             // q
  row.data[15] = T(1.0 / 1.5707963267948966);                             // h
  row.data[16] = T(1.0 / 30.0);                                           // vel
  row.data[17] = T(1.0 / 15.0);                                           // bbox length
  row.data[18] = T(1.0 / 4.0);                                            // bbox width
  return row;
}

}  // namespace tgen

#endif  // TGEN__MODEL_HPP_
