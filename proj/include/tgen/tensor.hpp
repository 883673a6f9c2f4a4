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

#ifndef TGEN__TENSOR_HPP_
#define TGEN__TENSOR_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tgen/error.hpp"

namespace tgen
{

/// Dense row-major tensor of up to 3 axes. Production code instantiates
/// T = float (32-bit); gradient checks instantiate the same graph code with
/// T = double as the 64-bit shadow evaluation.
template <class T>
struct TensorT
{
  std::array<int, 3> dims{1, 1, 1};
  int ndim = 0;
  std::vector<T> data;

  TensorT() = default;

  static TensorT zeros(int r, int c)
  {
    TensorT t;
    t.ndim = 2;
    t.dims = {r, c, 1};
    t.data.assign(static_cast<size_t>(r) * c, T(0));
    return t;
  }

  static TensorT zeros3(int a, int b, int c)
  {
    TensorT t;
    t.ndim = 3;
    t.dims = {a, b, c};
    t.data.assign(static_cast<size_t>(a) * b * c, T(0));
    return t;
  }

  static TensorT full(int r, int c, T v)
  {
    TensorT t = zeros(r, c);
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }

  static TensorT from_rows(int r, int c, const std::vector<T> & values)
  {
    if (static_cast<size_t>(r) * c != values.size()) {
      throw ShapeError("from_rows: element count does not match shape");
    }
    TensorT t;
    t.ndim = 2;
    t.dims = {r, c, 1};
    t.data = values;
    return t;
  }

  static TensorT scalar(T v) { return full(1, 1, v); }

  int rows() const { return dims[0]; }
  int cols() const { return ndim >= 2 ? dims[1] : 1; }
  int64_t numel() const { return static_cast<int64_t>(data.size()); }

  T & at(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
  T at(int r, int c) const { return data[static_cast<size_t>(r) * cols() + c]; }

  bool same_shape(const TensorT & o) const
  {
    return rows() == o.rows() && cols() == o.cols() && numel() == o.numel();
  }

  std::string shape_str() const
  {
    std::string s = "(" + std::to_string(dims[0]);
    for (int i = 1; i < std::max(ndim, 1); ++i) {
      s += "x" + std::to_string(dims[i]);
    }
    return s + ")";
  }

  template <class U>
  TensorT<U> cast() const
  {
    TensorT<U> out;
    out.dims = dims;
    out.ndim = ndim;
    out.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
      out.data[i] = static_cast<U>(data[i]);
    }
    return out;
  }
};

using Tensor = TensorT<float>;

namespace detail
{

// Overflow guards: exp saturates instead of producing inf, log floors its
// argument. Both behaviors are part of the op contracts.
template <class T>
T safe_exp(T x)
{
  const T cap = sizeof(T) == 4 ? T(87) : T(700);
  return std::exp(std::min(x, cap));
}

template <class T>
T safe_log(T x)
{
  return std::log(std::max(x, T(1e-12)));
}

}  // namespace detail

/// Reverse-mode autodiff tape over TensorT<T>. Nodes are referenced by index;
/// creation order is a topological order, so backward() is a single reverse
/// sweep. One tape evaluates one graph; intended use is one tape per example.
template <class T>
class TapeT
{
public:
  using Ten = TensorT<T>;

  struct Node
  {
    Ten val;
    Ten grad;                       // allocated lazily by backward()
    bool needs_grad = false;
    Ten * grad_sink = nullptr;      // external accumulator (parameters)
    std::function<void(TapeT &, int)> back;  // nullptr for leaves
  };

  const Ten & val(int id) const { return nodes_[id].val; }
  const Ten & grad(int id) const { return nodes_[id].grad; }
  size_t size() const { return nodes_.size(); }

  /// Constant input; no gradient is tracked.
  int leaf(Ten v)
  {
    Node n;
    n.val = std::move(v);
    n.needs_grad = false;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  /// Trainable input. After backward(), d loss / d value is accumulated (+=)
  /// into *grad_sink, which must match the value's shape and outlive the tape.
  int param(const Ten & value, Ten * grad_sink)
  {
    Node n;
    n.val = value;
    n.needs_grad = true;
    n.grad_sink = grad_sink;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  // -- elementwise binary -------------------------------------------------

  int add(int a, int b) { return binary(a, b, BinOp::kAdd); }
  int sub(int a, int b) { return binary(a, b, BinOp::kSub); }
  int mul(int a, int b) { return binary(a, b, BinOp::kMul); }
  int div(int a, int b) { return binary(a, b, BinOp::kDiv); }

  // -- matmul ---------------------------------------------------------------

  int matmul(int a, int b)
  {
    const Ten & A = nodes_[a].val;
    const Ten & B = nodes_[b].val;
    if (A.cols() != B.rows()) {
      throw ShapeError("matmul: " + A.shape_str() + " x " + B.shape_str());
    }
    const int m = A.rows(), k = A.cols(), n = B.cols();
    Ten C = Ten::zeros(m, n);
    matmul_raw(A.data.data(), B.data.data(), C.data.data(), m, k, n);
    return emit(std::move(C), {a, b}, [m, k, n, a, b](TapeT & t, int self) {
      const Ten & g = t.nodes_[self].grad;
      const Ten & A2 = t.nodes_[a].val;
      const Ten & B2 = t.nodes_[b].val;
      if (t.nodes_[a].needs_grad) {
        // dA = g . B^T
        Ten & da = t.nodes_[a].grad;
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < n; ++j) {
            const T gv = g.data[static_cast<size_t>(i) * n + j];
            if (gv == T(0)) continue;
            for (int p = 0; p < k; ++p) {
              da.data[static_cast<size_t>(i) * k + p] +=
                gv * B2.data[static_cast<size_t>(p) * n + j];
            }
          }
        }
      }
      if (t.nodes_[b].needs_grad) {
        // dB = A^T . g
        Ten & db = t.nodes_[b].grad;
        for (int i = 0; i < m; ++i) {
          for (int p = 0; p < k; ++p) {
            const T av = A2.data[static_cast<size_t>(i) * k + p];
            if (av == T(0)) continue;
            for (int j = 0; j < n; ++j) {
              db.data[static_cast<size_t>(p) * n + j] +=
                av * g.data[static_cast<size_t>(i) * n + j];
            }
          }
        }
      }
    });
  }

  // -- elementwise unary ----------------------------------------------------

  int relu(int a)
  {
    return unary(a, [](T x) { return x > T(0) ? x : T(0); },
                 [](T x, T) { return x > T(0) ? T(1) : T(0); });
  }

  int tanh_op(int a)
  {
    return unary(a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
  }

  int sigmoid(int a)
  {
    return unary(a, [](T x) { return T(1) / (T(1) + detail::safe_exp(-x)); },
                 [](T, T y) { return y * (T(1) - y); });
  }

  int exp_op(int a)
  {
    return unary(a, [](T x) { return detail::safe_exp(x); }, [](T, T y) { return y; });
  }

  int log_op(int a)
  {
    return unary(a, [](T x) { return detail::safe_log(x); },
                 [](T x, T) { return T(1) / std::max(x, T(1e-12)); });
  }

  int neg(int a)
  {
    return unary(a, [](T x) { return -x; }, [](T, T) { return T(-1); });
  }

  int square(int a)
  {
    return unary(a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; });
  }

  int clamp(int a, T lo, T hi)
  {
    return unary(a, [lo, hi](T x) { return std::clamp(x, lo, hi); },
                 [lo, hi](T x, T) { return (x >= lo && x <= hi) ? T(1) : T(0); });
  }

  int scale(int a, T c)
  {
    return unary(a, [c](T x) { return c * x; }, [c](T, T) { return c; });
  }

  int add_scalar(int a, T c)
  {
    return unary(a, [c](T x) { return x + c; }, [](T, T) { return T(1); });
  }

  // -- row-wise reductions / normalizations ----------------------------------

  /// Softmax along the last axis; rows sum to 1 within float tolerance.
  int softmax_rows(int a)
  {
    const Ten & A = nodes_[a].val;
    const int r = A.rows(), c = A.cols();
    Ten Y = Ten::zeros(r, c);
    for (int i = 0; i < r; ++i) {
      T mx = A.at(i, 0);
      for (int j = 1; j < c; ++j) mx = std::max(mx, A.at(i, j));
      T sum = T(0);
      for (int j = 0; j < c; ++j) {
        const T e = detail::safe_exp(A.at(i, j) - mx);
        Y.at(i, j) = e;
        sum += e;
      }
      for (int j = 0; j < c; ++j) Y.at(i, j) /= sum;
    }
    return emit(std::move(Y), {a}, [a, r, c](TapeT & t, int self) {
      if (!t.nodes_[a].needs_grad) return;
      const Ten & g = t.nodes_[self].grad;
      const Ten & y = t.nodes_[self].val;
      Ten & da = t.nodes_[a].grad;
      for (int i = 0; i < r; ++i) {
        T dot = T(0);
        for (int j = 0; j < c; ++j) dot += g.at(i, j) * y.at(i, j);
        for (int j = 0; j < c; ++j) da.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
      }
    });
  }

  int log_softmax_rows(int a)
  {
    const Ten & A = nodes_[a].val;
    const int r = A.rows(), c = A.cols();
    Ten Y = Ten::zeros(r, c);
    for (int i = 0; i < r; ++i) {
      T mx = A.at(i, 0);
      for (int j = 1; j < c; ++j) mx = std::max(mx, A.at(i, j));
      T sum = T(0);
      for (int j = 0; j < c; ++j) sum += detail::safe_exp(A.at(i, j) - mx);
      const T lse = mx + std::log(sum);
      for (int j = 0; j < c; ++j) Y.at(i, j) = A.at(i, j) - lse;
    }
    return emit(std::move(Y), {a}, [a, r, c](TapeT & t, int self) {
      if (!t.nodes_[a].needs_grad) return;
      const Ten & g = t.nodes_[self].grad;
      const Ten & y = t.nodes_[self].val;
      Ten & da = t.nodes_[a].grad;
      for (int i = 0; i < r; ++i) {
        T gsum = T(0);
        for (int j = 0; j < c; ++j) gsum += g.at(i, j);
        for (int j = 0; j < c; ++j) {
          da.at(i, j) += g.at(i, j) - detail::safe_exp(y.at(i, j)) * gsum;
        }
      }
    });
  }

  /// Row-wise log-sum-exp: (r x c) -> (r x 1).
  int logsumexp_rows(int a)
  {
    const Ten & A = nodes_[a].val;
    const int r = A.rows(), c = A.cols();
    Ten Y = Ten::zeros(r, 1);
    for (int i = 0; i < r; ++i) {
      T mx = A.at(i, 0);
      for (int j = 1; j < c; ++j) mx = std::max(mx, A.at(i, j));
      T sum = T(0);
      for (int j = 0; j < c; ++j) sum += detail::safe_exp(A.at(i, j) - mx);
      Y.at(i, 0) = mx + std::log(sum);
    }
    return emit(std::move(Y), {a}, [a, r, c](TapeT & t, int self) {
      if (!t.nodes_[a].needs_grad) return;
      const Ten & g = t.nodes_[self].grad;
      const Ten & y = t.nodes_[self].val;
      const Ten & x = t.nodes_[a].val;
      Ten & da = t.nodes_[a].grad;
      for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) {
          da.at(i, j) += g.at(i, 0) * detail::safe_exp(x.at(i, j) - y.at(i, 0));
        }
      }
    });
  }

  /// Max-pool over the set axis (rows): (r x c) -> (1 x c). Gradient flows to
  /// the first maximal row per column.
  int max_over_rows(int a)
  {
    const Ten & A = nodes_[a].val;
    const int r = A.rows(), c = A.cols();
    if (r < 1) {
      throw ShapeError("max_over_rows: empty input");
    }
    Ten Y = Ten::zeros(1, c);
    std::vector<int> arg(c, 0);
    for (int j = 0; j < c; ++j) {
      T best = A.at(0, j);
      int bi = 0;
      for (int i = 1; i < r; ++i) {
        if (A.at(i, j) > best) {
          best = A.at(i, j);
          bi = i;
        }
      }
      Y.at(0, j) = best;
      arg[j] = bi;
    }
    return emit(std::move(Y), {a}, [a, c, arg](TapeT & t, int self) {
      if (!t.nodes_[a].needs_grad) return;
      const Ten & g = t.nodes_[self].grad;
      Ten & da = t.nodes_[a].grad;
      for (int j = 0; j < c; ++j) {
        da.at(arg[j], j) += g.at(0, j);
      }
    });
  }

  int sum_all(int a)
  {
    const Ten & A = nodes_[a].val;
    T s = T(0);
    for (T v : A.data) s += v;
    return emit(Ten::scalar(s), {a}, [a](TapeT & t, int self) {
      if (!t.nodes_[a].needs_grad) return;
      const T g = t.nodes_[self].grad.data[0];
      for (T & v : t.nodes_[a].grad.data) v += g;
    });
  }

  int mean_all(int a)
  {
    const Ten & A = nodes_[a].val;
    T s = T(0);
    for (T v : A.data) s += v;
    const T inv = T(1) / static_cast<T>(A.numel());
    return emit(Ten::scalar(s * inv), {a}, [a, inv](TapeT & t, int self) {
      if (!t.nodes_[a].needs_grad) return;
      const T g = t.nodes_[self].grad.data[0] * inv;
      for (T & v : t.nodes_[a].grad.data) v += g;
    });
  }

  /// Row means: (r x c) -> (r x 1).
  int mean_rows(int a)
  {
    const Ten & A = nodes_[a].val;
    const int r = A.rows(), c = A.cols();
    Ten Y = Ten::zeros(r, 1);
    const T inv = T(1) / static_cast<T>(c);
    for (int i = 0; i < r; ++i) {
      T s = T(0);
      for (int j = 0; j < c; ++j) s += A.at(i, j);
      Y.at(i, 0) = s * inv;
    }
    return emit(std::move(Y), {a}, [a, r, c, inv](TapeT & t, int self) {
      if (!t.nodes_[a].needs_grad) return;
      const Ten & g = t.nodes_[self].grad;
      Ten & da = t.nodes_[a].grad;
      for (int i = 0; i < r; ++i) {
        const T gv = g.at(i, 0) * inv;
        for (int j = 0; j < c; ++j) da.at(i, j) += gv;
      }
    });
  }

  // -- structural -------------------------------------------------------------

  int concat_cols(int a, int b)
  {
    const Ten & A = nodes_[a].val;
    const Ten & B = nodes_[b].val;
    if (A.rows() != B.rows()) {
      throw ShapeError("concat_cols: " + A.shape_str() + " vs " + B.shape_str());
    }
    const int r = A.rows(), ca = A.cols(), cb = B.cols();
    Ten Y = Ten::zeros(r, ca + cb);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < ca; ++j) Y.at(i, j) = A.at(i, j);
      for (int j = 0; j < cb; ++j) Y.at(i, ca + j) = B.at(i, j);
    }
    return emit(std::move(Y), {a, b}, [a, b, r, ca, cb](TapeT & t, int self) {
      const Ten & g = t.nodes_[self].grad;
      if (t.nodes_[a].needs_grad) {
        Ten & da = t.nodes_[a].grad;
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < ca; ++j) da.at(i, j) += g.at(i, j);
      }
      if (t.nodes_[b].needs_grad) {
        Ten & db = t.nodes_[b].grad;
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < cb; ++j) db.at(i, j) += g.at(i, ca + j);
      }
    });
  }

  /// Columns [begin, end).
  int slice_cols(int a, int begin, int end)
  {
    const Ten & A = nodes_[a].val;
    const int r = A.rows(), c = A.cols();
    if (begin < 0 || end > c || begin >= end) {
      throw ShapeError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) +
                       ") of " + A.shape_str());
    }
    const int w = end - begin;
    Ten Y = Ten::zeros(r, w);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < w; ++j) Y.at(i, j) = A.at(i, begin + j);
    return emit(std::move(Y), {a}, [a, r, w, begin](TapeT & t, int self) {
      if (!t.nodes_[a].needs_grad) return;
      const Ten & g = t.nodes_[self].grad;
      Ten & da = t.nodes_[a].grad;
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < w; ++j) da.at(i, begin + j) += g.at(i, j);
    });
  }

  int gather_rows(int a, std::vector<int> rows)
  {
    const Ten & A = nodes_[a].val;
    const int c = A.cols();
    Ten Y = Ten::zeros(static_cast<int>(rows.size()), c);
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] < 0 || rows[i] >= A.rows()) {
        throw ShapeError("gather_rows: index out of range");
      }
      for (int j = 0; j < c; ++j) Y.at(static_cast<int>(i), j) = A.at(rows[i], j);
    }
    return emit(std::move(Y), {a}, [a, c, rows](TapeT & t, int self) {
      if (!t.nodes_[a].needs_grad) return;
      const Ten & g = t.nodes_[self].grad;
      Ten & da = t.nodes_[a].grad;
      for (size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < c; ++j) da.at(rows[i], j) += g.at(static_cast<int>(i), j);
    });
  }

  int reshape(int a, int r, int c)
  {
    const Ten & A = nodes_[a].val;
    if (static_cast<int64_t>(r) * c != A.numel()) {
      throw ShapeError("reshape: " + A.shape_str() + " to (" + std::to_string(r) + "x" +
                       std::to_string(c) + ")");
    }
    Ten Y = Ten::zeros(r, c);
    Y.data = A.data;
    return emit(std::move(Y), {a}, [a](TapeT & t, int self) {
      if (!t.nodes_[a].needs_grad) return;
      const Ten & g = t.nodes_[self].grad;
      Ten & da = t.nodes_[a].grad;
      for (size_t i = 0; i < g.data.size(); ++i) da.data[i] += g.data[i];
    });
  }

  // -- losses -----------------------------------------------------------------

  /// Mean squared error over all elements -> scalar.
  int mse(int a, int b)
  {
    const Ten & A = nodes_[a].val;
    const Ten & B = nodes_[b].val;
    if (!A.same_shape(B)) {
      throw ShapeError("mse: " + A.shape_str() + " vs " + B.shape_str());
    }
    T s = T(0);
    for (size_t i = 0; i < A.data.size(); ++i) {
      const T d = A.data[i] - B.data[i];
      s += d * d;
    }
    const T inv = T(1) / static_cast<T>(A.numel());
    return emit(Ten::scalar(s * inv), {a, b}, [a, b, inv](TapeT & t, int self) {
      const T g = t.nodes_[self].grad.data[0];
      const Ten & A2 = t.nodes_[a].val;
      const Ten & B2 = t.nodes_[b].val;
      for (size_t i = 0; i < A2.data.size(); ++i) {
        const T d = T(2) * (A2.data[i] - B2.data[i]) * inv * g;
        if (t.nodes_[a].needs_grad) t.nodes_[a].grad.data[i] += d;
        if (t.nodes_[b].needs_grad) t.nodes_[b].grad.data[i] -= d;
      }
    });
  }

  /// Numerically stable binary cross entropy with logits, mean over all
  /// elements -> scalar. bce(0, 1) = ln 2.
  int bce_with_logits(int logits, int targets)
  {
    const Ten & X = nodes_[logits].val;
    const Ten & Z = nodes_[targets].val;
    if (!X.same_shape(Z)) {
      throw ShapeError("bce_with_logits: " + X.shape_str() + " vs " + Z.shape_str());
    }
    T s = T(0);
    for (size_t i = 0; i < X.data.size(); ++i) {
      const T x = X.data[i];
      const T z = Z.data[i];
      s += std::max(x, T(0)) - x * z + std::log1p(detail::safe_exp(-std::abs(x)));
    }
    const T inv = T(1) / static_cast<T>(X.numel());
    return emit(Ten::scalar(s * inv), {logits, targets},
                [logits, targets, inv](TapeT & t, int self) {
      const T g = t.nodes_[self].grad.data[0];
      const Ten & X2 = t.nodes_[logits].val;
      const Ten & Z2 = t.nodes_[targets].val;
      for (size_t i = 0; i < X2.data.size(); ++i) {
        const T x = X2.data[i];
        const T z = Z2.data[i];
        const T sig = T(1) / (T(1) + detail::safe_exp(-x));
        if (t.nodes_[logits].needs_grad) {
          t.nodes_[logits].grad.data[i] += g * (sig - z) * inv;
        }
        if (t.nodes_[targets].needs_grad) {
          t.nodes_[targets].grad.data[i] += g * (-x) * inv;
        }
      }
    });
  }

  // -- backward ---------------------------------------------------------------

  /// Reverse sweep from a scalar loss node. Parameter gradients are
  /// accumulated into their grad sinks.
  void backward(int loss)
  {
    if (nodes_[loss].val.numel() != 1) {
      throw ShapeError("backward: loss must be scalar, got " + nodes_[loss].val.shape_str());
    }
    for (Node & n : nodes_) {
      n.grad.dims = n.val.dims;
      n.grad.ndim = n.val.ndim;
      n.grad.data.assign(n.val.data.size(), T(0));
    }
    nodes_[loss].grad.data[0] = T(1);
    for (int i = loss; i >= 0; --i) {
      if (nodes_[i].back) {
        nodes_[i].back(*this, i);
      }
      if (nodes_[i].grad_sink != nullptr) {
        Ten & sink = *nodes_[i].grad_sink;
        for (size_t k = 0; k < sink.data.size(); ++k) {
          sink.data[k] += nodes_[i].grad.data[k];
        }
      }
    }
  }

  static void matmul_raw(const T * a, const T * b, T * c, int m, int k, int n)
  {
    for (int i = 0; i < m; ++i) {
      T * crow = c + static_cast<size_t>(i) * n;
      for (int p = 0; p < k; ++p) {
        const T av = a[static_cast<size_t>(i) * k + p];
        if (av == T(0)) continue;
        const T * brow = b + static_cast<size_t>(p) * n;
        for (int j = 0; j < n; ++j) {
          crow[j] += av * brow[j];
        }
      }
    }
  }

private:
  enum class BinOp { kAdd, kSub, kMul, kDiv };

  // Broadcasting: shapes equal, or b is a 1 x cols row vector, or b is 1 x 1.
  enum class Bcast { kSame, kRow, kScalar };

  Bcast broadcast_kind(const Ten & A, const Ten & B, const char * op) const
  {
    if (A.same_shape(B)) return Bcast::kSame;
    if (B.rows() == 1 && B.cols() == A.cols()) return Bcast::kRow;
    if (B.numel() == 1) return Bcast::kScalar;
    throw ShapeError(std::string(op) + ": incompatible shapes " + A.shape_str() + " vs " +
                     B.shape_str());
  }

  int binary(int a, int b, BinOp op)
  {
    const Ten & A = nodes_[a].val;
    const Ten & B = nodes_[b].val;
    const Bcast bc = broadcast_kind(A, B, op_name(op));
    const int r = A.rows(), c = A.cols();
    Ten Y = Ten::zeros(r, c);
    Y.dims = A.dims;
    Y.ndim = A.ndim;
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) {
        const T x = A.at(i, j);
        const T y = bc == Bcast::kSame ? B.at(i, j) : (bc == Bcast::kRow ? B.at(0, j) : B.data[0]);
        Y.at(i, j) = apply(op, x, y);
      }
    }
    return emit(std::move(Y), {a, b}, [a, b, op, bc, r, c](TapeT & t, int self) {
      const Ten & g = t.nodes_[self].grad;
      const Ten & A2 = t.nodes_[a].val;
      const Ten & B2 = t.nodes_[b].val;
      const bool ga = t.nodes_[a].needs_grad;
      const bool gb = t.nodes_[b].needs_grad;
      if (!ga && !gb) return;
      for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) {
          const T gv = g.at(i, j);
          if (gv == T(0)) continue;
          const T x = A2.at(i, j);
          const T y =
            bc == Bcast::kSame ? B2.at(i, j) : (bc == Bcast::kRow ? B2.at(0, j) : B2.data[0]);
          T dx = T(0), dy = T(0);
          switch (op) {
            case BinOp::kAdd: dx = gv; dy = gv; break;
            case BinOp::kSub: dx = gv; dy = -gv; break;
            case BinOp::kMul: dx = gv * y; dy = gv * x; break;
            case BinOp::kDiv: dx = gv / y; dy = -gv * x / (y * y); break;
          }
          if (ga) t.nodes_[a].grad.at(i, j) += dx;
          if (gb) {
            if (bc == Bcast::kSame) {
              t.nodes_[b].grad.at(i, j) += dy;
            } else if (bc == Bcast::kRow) {
              t.nodes_[b].grad.at(0, j) += dy;
            } else {
              t.nodes_[b].grad.data[0] += dy;
            }
          }
        }
      }
    });
  }

  static const char * op_name(BinOp op)
  {
    switch (op) {
      case BinOp::kAdd: return "add";
      case BinOp::kSub: return "sub";
      case BinOp::kMul: return "mul";
      case BinOp::kDiv: return "div";
    }
    return "?";
  }

  static T apply(BinOp op, T x, T y)
  {
    switch (op) {
      case BinOp::kAdd: return x + y;
      case BinOp::kSub: return x - y;
      case BinOp::kMul: return x * y;
      case BinOp::kDiv: return x / y;
    }
    return T(0);
  }

  template <class Fwd, class Bwd>
  int unary(int a, Fwd fwd, Bwd dfdx)
  {
    const Ten & A = nodes_[a].val;
    Ten Y = A;
    for (T & v : Y.data) v = fwd(v);
    return emit(std::move(Y), {a}, [a, dfdx](TapeT & t, int self) {
      if (!t.nodes_[a].needs_grad) return;
      const Ten & g = t.nodes_[self].grad;
      const Ten & x = t.nodes_[a].val;
      const Ten & y = t.nodes_[self].val;
      Ten & da = t.nodes_[a].grad;
      for (size_t i = 0; i < x.data.size(); ++i) {
        da.data[i] += g.data[i] * dfdx(x.data[i], y.data[i]);
      }
    });
  }

  int emit(Ten value, std::initializer_list<int> parents,
           std::function<void(TapeT &, int)> back)
  {
    Node n;
    n.val = std::move(value);
    for (int p : parents) {
      if (nodes_[p].needs_grad) {
        n.needs_grad = true;
      }
    }
    if (n.needs_grad) {
      n.back = std::move(back);
    }
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  std::vector<Node> nodes_;
};

using Tape = TapeT<float>;

}  // namespace tgen

#endif  // TGEN__TENSOR_HPP_
