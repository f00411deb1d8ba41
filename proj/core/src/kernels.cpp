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

#include "segatt/kernels.hpp"

#include <alloca.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace segatt::kernels {

void matmul(const double* a, int m, int k, const double* b, int n, double* out) {
  std::memset(out, 0, sizeof(double) * static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* orow = out + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      double av = arow[p];
      const double* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

void add(const double* a, const double* b, int n, double* out) {
  for (int i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void add_rowwise(const double* m, int rows, int cols, const double* v, double* out) {
  for (int r = 0; r < rows; ++r) {
    const double* mr = m + static_cast<std::size_t>(r) * cols;
    double* orow = out + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) orow[c] = mr[c] + v[c];
  }
}

void affine(const double* x, int n, double scale, double shift, double* out) {
  for (int i = 0; i < n; ++i) out[i] = scale * x[i] + shift;
}

void mul(const double* a, const double* b, int n, double* out) {
  for (int i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void tanh_v(const double* x, int n, double* out) {
  for (int i = 0; i < n; ++i) out[i] = std::tanh(x[i]);
}

void sigmoid_v(const double* x, int n, double* out) {
  for (int i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void exp_v(const double* x, int n, double* out) {
  for (int i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void log_v(const double* x, int n, double* out) {
  for (int i = 0; i < n; ++i) out[i] = std::log(x[i]);
}

bool softmax_masked(const double* e, int n, const unsigned char* mask, double* out) {
  double mx = -std::numeric_limits<double>::infinity();
  int active = 0;
  for (int i = 0; i < n; ++i) {
    if (mask && !mask[i]) continue;
    ++active;
    if (e[i] > mx) mx = e[i];
  }
  if (active == 0) return false;
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    if (mask && !mask[i]) {
      out[i] = 0.0;
    } else {
      out[i] = std::exp(e[i] - mx);
      z += out[i];
    }
  }
  double inv = 1.0 / z;
  for (int i = 0; i < n; ++i) out[i] *= inv;
  return true;
}

void maxout2(const double* x, int n_out, double* out, int* argmax) {
  for (int i = 0; i < n_out; ++i) {
    double a = x[2 * i], b = x[2 * i + 1];
    int pick = (b > a) ? 2 * i + 1 : 2 * i;  // tie keeps the lower index
    out[i] = x[pick];
    if (argmax) argmax[i] = pick;
  }
}

void lstm_cell(int in_dim, int dim, const double* x, const double* h, const double* c,
               const double* w, const double* r, const double* b,
               double* h_out, double* c_out, double* cache) {
  int n4 = 4 * dim;
  double* z = static_cast<double*>(alloca(sizeof(double) * static_cast<std::size_t>(n4)));
  std::memcpy(z, b, sizeof(double) * static_cast<std::size_t>(n4));
  for (int p = 0; p < in_dim; ++p) {
    double xv = x[p];
    const double* wrow = w + static_cast<std::size_t>(p) * n4;
    for (int j = 0; j < n4; ++j) z[j] += xv * wrow[j];
  }
  for (int p = 0; p < dim; ++p) {
    double hv = h[p];
    const double* rrow = r + static_cast<std::size_t>(p) * n4;
    for (int j = 0; j < n4; ++j) z[j] += hv * rrow[j];
  }
  for (int j = 0; j < dim; ++j) {
    double ig = 1.0 / (1.0 + std::exp(-z[j]));
    double fg = 1.0 / (1.0 + std::exp(-z[dim + j]));
    double gg = std::tanh(z[2 * dim + j]);
    double og = 1.0 / (1.0 + std::exp(-z[3 * dim + j]));
    double cn = fg * c[j] + ig * gg;
    double tc = std::tanh(cn);
    c_out[j] = cn;
    h_out[j] = og * tc;
    if (cache) {
      cache[j] = ig;
      cache[dim + j] = fg;
      cache[2 * dim + j] = gg;
      cache[3 * dim + j] = og;
      cache[4 * dim + j] = tc;
    }
  }
}

void time_max_pool(const double* in, int t_in, int cols, int factor, double* out, int* argmax) {
  int t_out = t_in / factor;
  for (int t = 0; t < t_out; ++t) {
    double* orow = out + static_cast<std::size_t>(t) * cols;
    int* arow = argmax ? argmax + static_cast<std::size_t>(t) * cols : nullptr;
    int base = t * factor;
    for (int c = 0; c < cols; ++c) {
      double best = in[static_cast<std::size_t>(base) * cols + c];
      int besti = base;
      for (int g = 1; g < factor; ++g) {
        double v = in[static_cast<std::size_t>(base + g) * cols + c];
        if (v > best) {  // strict: ties keep the earliest frame
          best = v;
          besti = base + g;
        }
      }
      orow[c] = best;
      if (arow) arow[c] = besti;
    }
  }
}

}  // namespace segatt::kernels
