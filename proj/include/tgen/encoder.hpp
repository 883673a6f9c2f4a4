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

#ifndef TGEN__ENCODER_HPP_
#define TGEN__ENCODER_HPP_

#include <string>
#include <utility>

#include "tgen/model.hpp"
#include "tgen/tensor.hpp"

namespace tgen
{

/// One multi-context-gating block:
///   s_i = elemMLP(v_i), g = ctxMLP(c), v'_i = s_i * g + v_i, c' = max_i v'_i.
/// Returns (V' node, c' node). Gating by the pooled context stands in for
/// cross attention over the region set.
template <class T, class Store>
std::pair<int, int> mcg_block(TapeT<T> & tape, Store & store, const ModelConfig & cfg,
                              const std::string & prefix, int v, int c)
{
  const int s = mlp_apply(tape, store, prefix + ".elem", cfg.block_spec(), v);
  const int g = mlp_apply(tape, store, prefix + ".ctx", cfg.block_spec(), c);
  const int gated = tape.mul(s, g);  // g broadcasts over the region rows
  const int v_out = tape.add(gated, v);
  const int c_out = tape.max_over_rows(v_out);
  return {v_out, c_out};
}

/// Full context encoding: fixed column scaling, 19 -> D projection, then the
/// stacked MCG blocks with c initialized to all-ones. Returns (V' I x D node,
/// c' 1 x D node).
template <class T, class Store>
std::pair<int, int> encode_context(TapeT<T> & tape, Store & store, const ModelConfig & cfg,
                                   int features)
{
  if (tape.val(features).cols() != kFeatureWidth) {
    throw ShapeError("encode_context: features must be I x 19");
  }
  if (tape.val(features).rows() < 1) {
    throw ShapeError("encode_context: need at least one region");
  }
  const int scale = tape.leaf(feature_scale_row<T>());
  int v = tape.mul(features, scale);
  v = mlp_apply(tape, store, "enc.proj", cfg.proj_spec(), v);
  int c = tape.leaf(TensorT<T>::full(1, cfg.embed_dim, T(1)));
  for (int b = 0; b < cfg.encoder_blocks; ++b) {
    auto [v_next, c_next] = mcg_block(tape, store, cfg, "enc.b" + std::to_string(b), v, c);
    v = v_next;
    c = c_next;
  }
  return {v, c};
}

}  // namespace tgen

#endif  // TGEN__ENCODER_HPP_
