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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>

#include "test_support.hpp"
#include "tgen/encoder.hpp"

using namespace tgen;

namespace
{

TensorT<float> random_features(int rows, Rng & rng)
{
  TensorT<float> t = TensorT<float>::zeros(rows, kFeatureWidth);
  for (int i = 0; i < rows; ++i) {
    t.at(i, 0) = static_cast<float>(rng.uniform(-60.0, 60.0));
    t.at(i, 1) = static_cast<float>(rng.uniform(-60.0, 60.0));
    t.at(i, 2) = t.at(i, 0) + 5.0f;
    t.at(i, 3) = t.at(i, 1);
    t.at(i, 4 + rng.uniform_index(4)) = 1.0f;
    t.at(i, 8 + rng.uniform_index(4)) = 1.0f;
    if (rng.uniform() < 0.5) {
      t.at(i, 12) = 1.0f;
      t.at(i, 13) = static_cast<float>(rng.uniform(-2.5, 2.5));
      t.at(i, 14) = static_cast<float>(rng.uniform(0.0, 5.0));
      t.at(i, 15) = static_cast<float>(rng.uniform(-1.5, 1.5));
      t.at(i, 16) = static_cast<float>(rng.uniform(0.0, 25.0));
      t.at(i, 17) = 4.5f;
      t.at(i, 18) = 2.0f;
    }
  }
  return t;
}

}  // namespace

TEST_CASE("mcg_block: singleton c' equals the only row of v'")
{
  ModelParams model;
  const ModelConfig cfg = test::tiny_config(8);
  init_model_params(model, cfg, 3);
  Rng rng(5);
  TapeT<float> tape;
  const int v = tape.leaf(test::random_tensor(1, cfg.embed_dim, rng).cast<float>());
  const int c = tape.leaf(TensorT<float>::full(1, cfg.embed_dim, 1.0f));
  auto [v_out, c_out] = mcg_block(tape, model.store, cfg, "enc.b0", v, c);
  CHECK(tape.val(v_out).data == tape.val(c_out).data);
}

TEST_CASE("mcg_block: all-zero context MLP passes rows through")
{
  ModelParams model;
  const ModelConfig cfg = test::tiny_config(8);
  init_model_params(model, cfg, 3);
  for (const char * layer : {"enc.b0.ctx.l0", "enc.b0.ctx.l1"}) {
    auto & w = model.store.at(std::string(layer) + ".w");
    std::fill(w.value.data.begin(), w.value.data.end(), 0.0f);
    auto & b = model.store.at(std::string(layer) + ".b");
    std::fill(b.value.data.begin(), b.value.data.end(), 0.0f);
  }
  Rng rng(6);
  TapeT<float> tape;
  const TensorT<float> input = test::random_tensor(5, cfg.embed_dim, rng).cast<float>();
  const int v = tape.leaf(input);
  const int c = tape.leaf(TensorT<float>::full(1, cfg.embed_dim, 1.0f));
  auto [v_out, c_out] = mcg_block(tape, model.store, cfg, "enc.b0", v, c);
  (void)c_out;
  CHECK(tape.val(v_out).data == input.data);
}

TEST_CASE("encode_context: shape contract for a single region")
{
  ModelParams model;
  const ModelConfig cfg = test::tiny_config(16);
  init_model_params(model, cfg, 9);
  Rng rng(2);
  TapeT<float> tape;
  const int features = tape.leaf(random_features(1, rng));
  auto [v, c] = encode_context(tape, model.store, cfg, features);
  CHECK(tape.val(v).rows() == 1);
  CHECK(tape.val(v).cols() == 16);
  CHECK(tape.val(c).rows() == 1);
  CHECK(tape.val(c).cols() == 16);
}

TEST_CASE("encode_context: duplicated rows produce identical embeddings")
{
  ModelParams model;
  const ModelConfig cfg = test::tiny_config(16);
  init_model_params(model, cfg, 9);
  Rng rng(3);
  TensorT<float> features = random_features(4, rng);
  for (int j = 0; j < kFeatureWidth; ++j) {
    features.at(2, j) = features.at(0, j);
  }
  TapeT<float> tape;
  auto [v, c] = encode_context(tape, model.store, cfg, tape.leaf(features));
  (void)c;
  for (int j = 0; j < 16; ++j) {
    CHECK(tape.val(v).at(0, j) == tape.val(v).at(2, j));
  }
}

TEST_CASE("encode_context: exact permutation equivariance and invariance")
{
  ModelParams model;
  const ModelConfig cfg = test::tiny_config(16, 3, 5, 5);
  init_model_params(model, cfg, 11);
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = 2 + static_cast<int>(rng.uniform_index(12));
    const TensorT<float> features = random_features(rows, rng);

    std::vector<int> perm(rows);
    for (int i = 0; i < rows; ++i) {
      perm[i] = i;
    }
    for (int i = rows - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    }
    TensorT<float> shuffled = TensorT<float>::zeros(rows, kFeatureWidth);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < kFeatureWidth; ++j) {
        shuffled.at(i, j) = features.at(perm[i], j);
      }
    }

    TapeT<float> tape_a, tape_b;
    auto [va, ca] = encode_context(tape_a, model.store, cfg, tape_a.leaf(features));
    auto [vb, cb] = encode_context(tape_b, model.store, cfg, tape_b.leaf(shuffled));

    // c' bit-identical under permutation
    CHECK(tape_a.val(ca).data == tape_b.val(cb).data);
    // v' permuted exactly like the input
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cfg.embed_dim; ++j) {
        CHECK(tape_b.val(vb).at(i, j) == tape_a.val(va).at(perm[i], j));
      }
    }
  }
}

TEST_CASE("encode_context: gradients through the full stack match finite differences")
{
  ModelConfig cfg = test::tiny_config(6, 2, 3, 5);  // 5 stacked blocks
  ParamStoreT<double> store;
  {
    ModelParamsT<double> model;
    init_model_params(model, cfg, 21);
    store = model.store;
  }
  Rng rng(22);
  const TensorT<double> features = random_features(4, rng).cast<double>();

  auto build = [&](TapeT<double> & tape) {
    auto [v, c] = encode_context(tape, store, cfg, tape.leaf(features));
    return tape.add(tape.mean_all(v), tape.mean_all(tape.square(c)));
  };
  CHECK(test::max_grad_rel_error(store, build, 1e-3, 40) < 1e-4);
}

TEST_CASE("encode_context: 1000 regions at D=64 within the time budget")
{
  ModelParams model;
  ModelConfig cfg;
  cfg.embed_dim = 64;
  cfg.encoder_blocks = 5;
  cfg.mixture_components = 3;
  cfg.head_hidden = {64};
  init_model_params(model, cfg, 1);
  Rng rng(1);
  const TensorT<float> features = random_features(1000, rng);

  double best_ms = 1e9;
  for (int rep = 0; rep < 3; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    TapeT<float> tape;
    auto [v, c] = encode_context(tape, model.store, cfg, tape.leaf(features));
    (void)v;
    (void)c;
    const auto stop = std::chrono::steady_clock::now();
    best_ms = std::min(
      best_ms, std::chrono::duration<double, std::milli>(stop - start).count());
  }
  double budget_ms = 50.0;
#if defined(__SANITIZE_ADDRESS__) || defined(__SANITIZE_THREAD__)
  budget_ms *= 10.0;  // instrumented builds are not the performance target
#endif
  CHECK(best_ms < budget_ms);
}
