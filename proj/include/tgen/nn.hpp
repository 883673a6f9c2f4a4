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

#ifndef TGEN__NN_HPP_
#define TGEN__NN_HPP_

#include <cmath>
#include <map>
#include <string>
#include <type_traits>
#include <vector>

#include "tgen/error.hpp"
#include "tgen/rng.hpp"
#include "tgen/tensor.hpp"

namespace tgen
{

enum class Activation { kRelu, kTanh, kIdentity };

struct MlpSpec
{
  int input = 0;
  std::vector<int> hidden;
  int output = 0;
  Activation activation = Activation::kRelu;

  int layer_count() const { return static_cast<int>(hidden.size()) + 1; }
};

/// Named parameter registry with gradient and Adam moment slots. Ordered map:
/// iteration order defines the weights-file layout and must stay stable.
template <class T>
class ParamStoreT
{
public:
  struct Entry
  {
    TensorT<T> value;
    TensorT<T> grad;
    TensorT<T> m;  // Adam first moment
    TensorT<T> v;  // Adam second moment
  };

  bool contains(const std::string & name) const { return entries_.count(name) > 0; }

  Entry & create(const std::string & name, int rows, int cols)
  {
    Entry & e = entries_[name];
    e.value = TensorT<T>::zeros(rows, cols);
    e.grad = TensorT<T>::zeros(rows, cols);
    e.m = TensorT<T>::zeros(rows, cols);
    e.v = TensorT<T>::zeros(rows, cols);
    return e;
  }

  Entry & at(const std::string & name)
  {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
      throw ShapeError("unknown parameter '" + name + "'");
    }
    return it->second;
  }

  const Entry & at(const std::string & name) const
  {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
      throw ShapeError("unknown parameter '" + name + "'");
    }
    return it->second;
  }

  void zero_grad()
  {
    for (auto & [name, e] : entries_) {
      std::fill(e.grad.data.begin(), e.grad.data.end(), T(0));
    }
  }

  void scale_grad(T factor)
  {
    for (auto & [name, e] : entries_) {
      for (T & g : e.grad.data) {
        g *= factor;
      }
    }
  }

  std::map<std::string, Entry> & entries() { return entries_; }
  const std::map<std::string, Entry> & entries() const { return entries_; }

  int64_t total_elements() const
  {
    int64_t n = 0;
    for (const auto & [name, e] : entries_) {
      n += e.value.numel();
    }
    return n;
  }

  template <class U>
  ParamStoreT<U> cast() const
  {
    ParamStoreT<U> out;
    for (const auto & [name, e] : entries_) {
      auto & ne = out.create(name, e.value.rows(), e.value.cols());
      ne.value = e.value.template cast<U>();
    }
    return out;
  }

private:
  std::map<std::string, Entry> entries_;
};

using ParamStore = ParamStoreT<float>;

/// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero. The draw
/// stream is derived from (seed, parameter name) so creation order does not
/// matter.
template <class T>
void init_linear(ParamStoreT<T> & store, const std::string & prefix, int fan_in, int fan_out,
                 uint64_t seed)
{
  auto & w = store.create(prefix + ".w", fan_in, fan_out);
  store.create(prefix + ".b", 1, fan_out);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Rng rng = derive_stream(seed, {hash_string(prefix + ".w")});
  for (T & v : w.value.data) {
    v = static_cast<T>(rng.uniform(-bound, bound));
  }
}

template <class T>
void init_mlp(ParamStoreT<T> & store, const std::string & prefix, const MlpSpec & spec,
              uint64_t seed)
{
  if (spec.input <= 0 || spec.output <= 0) {
    throw ShapeError("mlp '" + prefix + "': widths must be positive");
  }
  int in = spec.input;
  for (size_t i = 0; i < spec.hidden.size(); ++i) {
    if (spec.hidden[i] <= 0) {
      throw ShapeError("mlp '" + prefix + "': widths must be positive");
    }
    init_linear(store, prefix + ".l" + std::to_string(i), in, spec.hidden[i], seed);
    in = spec.hidden[i];
  }
  init_linear(store, prefix + ".l" + std::to_string(spec.hidden.size()), in, spec.output, seed);
}

/// Affine-activation chain on the tape; the final layer is linear. A mutable
/// store registers trainable parameter nodes; a const store (inference) uses
/// constant leaves and skips gradient tracking.
template <class T, class Store>
int mlp_apply(TapeT<T> & tape, Store & store, const std::string & prefix, const MlpSpec & spec,
              int input)
{
  static_assert(std::is_same_v<std::remove_const_t<Store>, ParamStoreT<T>>);
  if (tape.val(input).cols() != spec.input) {
    throw ShapeError("mlp '" + prefix + "': input width " +
                     std::to_string(tape.val(input).cols()) + ", spec wants " +
                     std::to_string(spec.input));
  }
  int x = input;
  const int layers = spec.layer_count();
  for (int i = 0; i < layers; ++i) {
    const std::string name = prefix + ".l" + std::to_string(i);
    auto & w = store.at(name + ".w");
    auto & b = store.at(name + ".b");
    int wi, bi;
    if constexpr (std::is_const_v<Store>) {
      wi = tape.leaf(w.value);
      bi = tape.leaf(b.value);
    } else {
      wi = tape.param(w.value, &w.grad);
      bi = tape.param(b.value, &b.grad);
    }
    x = tape.add(tape.matmul(x, wi), bi);
    if (i + 1 < layers) {
      switch (spec.activation) {
        case Activation::kRelu: x = tape.relu(x); break;
        case Activation::kTanh: x = tape.tanh_op(x); break;
        case Activation::kIdentity: break;
      }
    }
  }
  return x;
}

struct AdamConfig
{
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Standard Adam update with bias correction; step counter t starts at 1.
template <class T>
void adam_step(ParamStoreT<T> & store, const AdamConfig & cfg, int64_t t)
{
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T corr1 = static_cast<T>(1.0 - std::pow(cfg.beta1, static_cast<double>(t)));
  const T corr2 = static_cast<T>(1.0 - std::pow(cfg.beta2, static_cast<double>(t)));
  const T lr = static_cast<T>(cfg.lr);
  const T eps = static_cast<T>(cfg.eps);
  for (auto & [name, e] : store.entries()) {
    for (size_t i = 0; i < e.value.data.size(); ++i) {
      const T g = e.grad.data[i];
      e.m.data[i] = b1 * e.m.data[i] + (T(1) - b1) * g;
      e.v.data[i] = b2 * e.v.data[i] + (T(1) - b2) * g * g;
      const T mhat = e.m.data[i] / corr1;
      const T vhat = e.v.data[i] / corr2;
      e.value.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Weights file: text manifest (name + shape per line, plus free-form meta
// lines) followed by one little-endian float32 blob in manifest order.
// ---------------------------------------------------------------------------

std::string write_weights_blob(const ParamStore & store,
                               const std::map<std::string, std::string> & meta);
void read_weights_blob(const std::string & bytes, ParamStore & store,
                       std::map<std::string, std::string> & meta);

}  // namespace tgen

#endif  // TGEN__NN_HPP_
