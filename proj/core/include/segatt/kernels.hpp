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

// Raw numeric routines shared by the autodiff graph (forward passes) and
// the pure-inference decoder path. Keeping one implementation of each
// computation guarantees training-time scores and search-time scores are
// bit-identical. Accumulation order inside each routine is fixed; do not
// reorder loops.

#include <cstddef>

namespace segatt::kernels {

// out[m,n] = a[m,k] * b[k,n], row-major, out overwritten.
void matmul(const double* a, int m, int k, const double* b, int n, double* out);

// out[i] = a[i] + b[i]
void add(const double* a, const double* b, int n, double* out);

// out[r,c] = m[r,c] + v[c]
void add_rowwise(const double* m, int rows, int cols, const double* v, double* out);

// out[i] = scale * x[i] + shift
void affine(const double* x, int n, double scale, double shift, double* out);

// out[i] = a[i] * b[i]
void mul(const double* a, const double* b, int n, double* out);

void tanh_v(const double* x, int n, double* out);
void sigmoid_v(const double* x, int n, double* out);
void exp_v(const double* x, int n, double* out);
void log_v(const double* x, int n, double* out);

// Masked softmax with max-subtraction. mask may be null (all active);
// masked-out entries get exactly 0. Returns false if no position is
// active. Writing happens only on success.
bool softmax_masked(const double* e, int n, const unsigned char* mask, double* out);

// Pairwise max over adjacent pairs: out[i] = max(x[2i], x[2i+1]).
// Ties route to the lower index. argmax (length n_out) may be null.
void maxout2(const double* x, int n_out, double* out, int* argmax);

// One LSTM cell step. Packed gate order in W/R/b is [i, f, g, o]:
//   z = x*W + h*R + b           (z has 4*dim entries)
//   i = sigmoid(z_i), f = sigmoid(z_f), g = tanh(z_g), o = sigmoid(z_o)
//   c' = f.c + i.g,  h' = o.tanh(c')
// cache, when non-null, receives [i f g o tanh(c')] (5*dim values) for the
// backward pass.
void lstm_cell(int in_dim, int dim, const double* x, const double* h, const double* c,
               const double* w, const double* r, const double* b,
               double* h_out, double* c_out, double* cache);

// Max over time groups of `factor` rows; remainder rows are dropped.
// in[t_in, cols] -> out[t_in/factor, cols]. Ties route to the earliest
// frame. argmax (t_out*cols entries, row indices into `in`) may be null.
void time_max_pool(const double* in, int t_in, int cols, int factor, double* out, int* argmax);

}  // namespace segatt::kernels
