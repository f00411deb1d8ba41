// Copyright 2026 The segatt Authors.
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

#pragma once

// Reverse-mode autodiff over a dynamically recorded tape. Nodes are created
// per forward pass (the tape is rebuilt for every sequence); parameters are
// long-lived leaf nodes whose gradients accumulate across backward calls
// until zero_grad. Tapes are single-owner: one thread records and replays a
// given graph. backward() replays nodes in strictly decreasing creation
// order, so gradient accumulation order is deterministic.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace segatt {

class TensorNode;
using Tensor = std::shared_ptr<TensorNode>;

class TensorNode {
 public:
  std::vector<int> shape;
  std::vector<double> data;   // row-major
  std::vector<double> grad;   // empty until first accumulation

  bool requires_grad = false;
  std::uint64_t seq = 0;  // creation index on the thread-local tape

  std::vector<Tensor> parents;
  std::function<void(TensorNode&)> backward_fn;
  std::vector<double> aux;  // op-specific forward cache
  std::vector<int> iaux;    // op-specific index cache (argmax routes)

  int numel() const { return static_cast<int>(data.size()); }
  int rows() const { return shape.size() == 2 ? shape[0] : 1; }
  int cols() const { return shape.empty() ? 1 : shape.back(); }
  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
  }
};

Tensor make_tensor(std::vector<int> shape, std::vector<double> data, bool requires_grad = false);
Tensor zeros(std::vector<int> shape, bool requires_grad = false);
Tensor scalar(double v);

// Disables graph recording in a scope (pure inference). Nestable.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};
bool grad_enabled();

// --- ops -----------------------------------------------------------------

// a[m,k] * b[k,n]; vector operands are treated as a single row ([k]*[k,n])
// or a single column ([m,k]*[k]) and the unit dimension is dropped.
Tensor matmul(const Tensor& a, const Tensor& b);

// y = x*W + b. x: [k] or [m,k]; W: [k,n]; b: [n].
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor add_rowwise(const Tensor& m, const Tensor& v);
Tensor affine(const Tensor& x, double scale, double shift);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor tanh_op(const Tensor& x);
Tensor sigmoid_op(const Tensor& x);
Tensor exp_op(const Tensor& x);
Tensor log_op(const Tensor& x);

// Masked softmax over a vector; masked positions are exactly 0 in the
// output. Throws if every position is masked.
Tensor softmax_op(const Tensor& e, const std::vector<unsigned char>* mask = nullptr);

// Pairwise max over adjacent pairs (pool size 2); last dim must be even.
// Gradient routes to the argmax, ties to the lower index.
Tensor maxout_op(const Tensor& x);

// One LSTM step; returns (h', c'). Gate packing documented in kernels.hpp.
std::pair<Tensor, Tensor> lstm_step(const Tensor& x, const Tensor& h, const Tensor& c,
                                    const Tensor& w, const Tensor& r, const Tensor& b);

Tensor slice_rows(const Tensor& m, int row_begin, int row_end);  // [begin, end)
Tensor slice_vec(const Tensor& v, int begin, int len);
Tensor concat_vec(const Tensor& a, const Tensor& b);
Tensor stack_rows(const std::vector<Tensor>& rows);
Tensor pick(const Tensor& v, int index);    // scalar element
Tensor pick_row(const Tensor& m, int row);  // embedding lookup
Tensor time_max_pool_op(const Tensor& m, int factor);
Tensor sum_all(const Tensor& x);

// Backpropagate from a scalar root through the recorded tape.
void backward(const Tensor& root);

// --- parameters & optimizer ----------------------------------------------

struct Parameter {
  std::string name;
  Tensor value;
  bool trainable = true;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  long step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  void init(const std::vector<Parameter>& params);
};

// Standard Adam with bias correction. Missing gradients count as zero.
void adam_step(std::vector<Parameter>& params, AdamState& state, const AdamConfig& cfg);

void zero_grad(std::vector<Parameter>& params);
double grad_norm(const std::vector<Parameter>& params);
void clip_grad_norm(std::vector<Parameter>& params, double max_norm);

}  // namespace segatt
