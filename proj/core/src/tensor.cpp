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

#include "segatt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "segatt/kernels.hpp"
#include "segatt/util.hpp"

namespace segatt {

namespace {

thread_local std::uint64_t g_seq_counter = 0;
thread_local int g_no_grad_depth = 0;

int numel_of(const std::vector<int>& shape) {
  int n = 1;
  for (int d : shape) {
    if (d <= 0) fail("tensor shape must be positive, got " + shape_str(shape));
    n *= d;
  }
  return n;
}

Tensor new_node(std::vector<int> shape, std::vector<double> data) {
  auto t = std::make_shared<TensorNode>();
  t->shape = std::move(shape);
  t->data = std::move(data);
  t->seq = ++g_seq_counter;
  return t;
}

bool want_grad(std::initializer_list<const Tensor*> parents) {
  if (g_no_grad_depth > 0) return false;
  for (const Tensor* p : parents) {
    if (*p && (*p)->requires_grad) return true;
  }
  return false;
}

void attach(Tensor& out, std::initializer_list<Tensor> parents,
            std::function<void(TensorNode&)> fn) {
  out->requires_grad = true;
  out->parents.assign(parents.begin(), parents.end());
  out->backward_fn = std::move(fn);
}

void acc(Tensor& t, int i, double v) {
  t->ensure_grad();
  t->grad[static_cast<std::size_t>(i)] += v;
}

}  // namespace

Tensor make_tensor(std::vector<int> shape, std::vector<double> data, bool requires_grad) {
  int n = numel_of(shape);
  if (n != static_cast<int>(data.size()))
    fail("tensor data length " + std::to_string(data.size()) + " does not match shape " +
         shape_str(shape));
  Tensor t = new_node(std::move(shape), std::move(data));
  t->requires_grad = requires_grad && g_no_grad_depth == 0;
  return t;
}

Tensor zeros(std::vector<int> shape, bool requires_grad) {
  int n = numel_of(shape);
  return make_tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0),
                     requires_grad);
}

Tensor scalar(double v) { return make_tensor({1}, {v}); }

NoGradGuard::NoGradGuard() { ++g_no_grad_depth; }
NoGradGuard::~NoGradGuard() { --g_no_grad_depth; }
bool grad_enabled() { return g_no_grad_depth == 0; }

// --- ops -------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  bool a_vec = a->shape.size() == 1;
  bool b_vec = b->shape.size() == 1;
  if (a->shape.size() > 2 || b->shape.size() > 2 || (a_vec && b_vec))
    fail("matmul: unsupported ranks " + shape_str(a->shape) + " x " + shape_str(b->shape));
  int m = a_vec ? 1 : a->shape[0];
  int k = a_vec ? a->shape[0] : a->shape[1];
  int kb = b_vec ? b->shape[0] : b->shape[0];
  int n = b_vec ? 1 : b->shape[1];
  if (k != kb)
    fail("matmul: inner dimensions differ: " + shape_str(a->shape) + " x " + shape_str(b->shape));

  std::vector<double> out(static_cast<std::size_t>(m) * n);
  kernels::matmul(a->data.data(), m, k, b->data.data(), n, out.data());

  std::vector<int> oshape;
  if (a_vec)
    oshape = {n};
  else if (b_vec)
    oshape = {m};
  else
    oshape = {m, n};
  Tensor y = new_node(std::move(oshape), std::move(out));

  if (want_grad({&a, &b})) {
    Tensor pa = a, pb = b;
    attach(y, {a, b}, [pa, pb, m, k, n](TensorNode& node) {
      const double* g = node.grad.data();
      if (pa->requires_grad) {
        pa->ensure_grad();
        // da[m,k] += g[m,n] * b^T[n,k]
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < k; ++p) {
            double s = 0.0;
            for (int j = 0; j < n; ++j)
              s += g[static_cast<std::size_t>(i) * n + j] * pb->data[static_cast<std::size_t>(p) * n + j];
            pa->grad[static_cast<std::size_t>(i) * k + p] += s;
          }
      }
      if (pb->requires_grad) {
        pb->ensure_grad();
        // db[k,n] += a^T[k,m] * g[m,n]
        for (int p = 0; p < k; ++p)
          for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < m; ++i)
              s += pa->data[static_cast<std::size_t>(i) * k + p] * g[static_cast<std::size_t>(i) * n + j];
            pb->grad[static_cast<std::size_t>(p) * n + j] += s;
          }
      }
    });
  }
  return y;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (w->shape.size() != 2)
    fail("linear: weight must be rank 2, got " + shape_str(w->shape));
  int in = x->shape.back();
  if (in != w->shape[0])
    fail("linear: input shape " + shape_str(x->shape) + " does not match weight shape " +
         shape_str(w->shape));
  if (b->shape.size() != 1 || b->shape[0] != w->shape[1])
    fail("linear: bias shape " + shape_str(b->shape) + " does not match weight shape " +
         shape_str(w->shape));
  Tensor y = matmul(x, w);
  if (y->shape.size() == 1) return add(y, b);
  return add_rowwise(y, b);
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a->shape != b->shape)
    fail("add: shape mismatch " + shape_str(a->shape) + " vs " + shape_str(b->shape));
  std::vector<double> out(a->data.size());
  kernels::add(a->data.data(), b->data.data(), a->numel(), out.data());
  Tensor y = new_node(a->shape, std::move(out));
  if (want_grad({&a, &b})) {
    Tensor pa = a, pb = b;
    attach(y, {a, b}, [pa, pb](TensorNode& node) {
      for (auto* p : {&pa, &pb}) {
        if ((*p)->requires_grad) {
          (*p)->ensure_grad();
          for (std::size_t i = 0; i < node.grad.size(); ++i) (*p)->grad[i] += node.grad[i];
        }
      }
    });
  }
  return y;
}

Tensor add_rowwise(const Tensor& m, const Tensor& v) {
  if (m->shape.size() != 2 || v->shape.size() != 1 || m->shape[1] != v->shape[0])
    fail("add_rowwise: shapes " + shape_str(m->shape) + " and " + shape_str(v->shape));
  int rows = m->shape[0], cols = m->shape[1];
  std::vector<double> out(m->data.size());
  kernels::add_rowwise(m->data.data(), rows, cols, v->data.data(), out.data());
  Tensor y = new_node(m->shape, std::move(out));
  if (want_grad({&m, &v})) {
    Tensor pm = m, pv = v;
    attach(y, {m, v}, [pm, pv, rows, cols](TensorNode& node) {
      if (pm->requires_grad) {
        pm->ensure_grad();
        for (std::size_t i = 0; i < node.grad.size(); ++i) pm->grad[i] += node.grad[i];
      }
      if (pv->requires_grad) {
        pv->ensure_grad();
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c)
            pv->grad[static_cast<std::size_t>(c)] += node.grad[static_cast<std::size_t>(r) * cols + c];
      }
    });
  }
  return y;
}

Tensor affine(const Tensor& x, double scale, double shift) {
  std::vector<double> out(x->data.size());
  kernels::affine(x->data.data(), x->numel(), scale, shift, out.data());
  Tensor y = new_node(x->shape, std::move(out));
  if (want_grad({&x})) {
    Tensor px = x;
    attach(y, {x}, [px, scale](TensorNode& node) {
      px->ensure_grad();
      for (std::size_t i = 0; i < node.grad.size(); ++i) px->grad[i] += scale * node.grad[i];
    });
  }
  return y;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a->shape != b->shape)
    fail("mul: shape mismatch " + shape_str(a->shape) + " vs " + shape_str(b->shape));
  std::vector<double> out(a->data.size());
  kernels::mul(a->data.data(), b->data.data(), a->numel(), out.data());
  Tensor y = new_node(a->shape, std::move(out));
  if (want_grad({&a, &b})) {
    Tensor pa = a, pb = b;
    attach(y, {a, b}, [pa, pb](TensorNode& node) {
      if (pa->requires_grad) {
        pa->ensure_grad();
        for (std::size_t i = 0; i < node.grad.size(); ++i) pa->grad[i] += node.grad[i] * pb->data[i];
      }
      if (pb->requires_grad) {
        pb->ensure_grad();
        for (std::size_t i = 0; i < node.grad.size(); ++i) pb->grad[i] += node.grad[i] * pa->data[i];
      }
    });
  }
  return y;
}

namespace {

template <typename Fwd, typename Dfn>
Tensor elementwise(const Tensor& x, Fwd fwd, Dfn dfn) {
  std::vector<double> out(x->data.size());
  fwd(x->data.data(), x->numel(), out.data());
  Tensor y = new_node(x->shape, std::move(out));
  if (want_grad({&x})) {
    Tensor px = x;
    attach(y, {x}, [px, dfn](TensorNode& node) {
      px->ensure_grad();
      for (std::size_t i = 0; i < node.grad.size(); ++i)
        px->grad[i] += node.grad[i] * dfn(px->data[i], node.data[i]);
    });
  }
  return y;
}

}  // namespace

Tensor tanh_op(const Tensor& x) {
  return elementwise(x, kernels::tanh_v, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid_op(const Tensor& x) {
  return elementwise(x, kernels::sigmoid_v, [](double, double y) { return y * (1.0 - y); });
}

Tensor exp_op(const Tensor& x) {
  return elementwise(x, kernels::exp_v, [](double, double y) { return y; });
}

Tensor log_op(const Tensor& x) {
  return elementwise(x, kernels::log_v, [](double xi, double) { return 1.0 / xi; });
}

Tensor softmax_op(const Tensor& e, const std::vector<unsigned char>* mask) {
  if (e->shape.size() != 1) fail("softmax_op: expected a vector, got " + shape_str(e->shape));
  int n = e->numel();
  if (mask && static_cast<int>(mask->size()) != n)
    fail("softmax_op: mask length " + std::to_string(mask->size()) + " does not match input " +
         shape_str(e->shape));
  std::vector<double> out(static_cast<std::size_t>(n));
  if (!kernels::softmax_masked(e->data.data(), n, mask ? mask->data() : nullptr, out.data()))
    fail("softmax_op: all positions masked");
  Tensor y = new_node(e->shape, std::move(out));
  if (want_grad({&e})) {
    Tensor pe = e;
    attach(y, {e}, [pe](TensorNode& node) {
      pe->ensure_grad();
      double dot = 0.0;
      for (std::size_t i = 0; i < node.grad.size(); ++i) dot += node.grad[i] * node.data[i];
      for (std::size_t i = 0; i < node.grad.size(); ++i)
        pe->grad[i] += node.data[i] * (node.grad[i] - dot);  // zero where masked
    });
  }
  return y;
}

Tensor maxout_op(const Tensor& x) {
  int last = x->shape.back();
  if (last % 2 != 0)
    fail("maxout_op: last dimension must be even, got " + shape_str(x->shape));
  int n_out = x->numel() / 2;
  std::vector<double> out(static_cast<std::size_t>(n_out));
  std::vector<int> arg(static_cast<std::size_t>(n_out));
  kernels::maxout2(x->data.data(), n_out, out.data(), arg.data());
  std::vector<int> oshape = x->shape;
  oshape.back() /= 2;
  Tensor y = new_node(std::move(oshape), std::move(out));
  y->iaux = std::move(arg);
  if (want_grad({&x})) {
    Tensor px = x;
    attach(y, {x}, [px](TensorNode& node) {
      px->ensure_grad();
      for (std::size_t i = 0; i < node.grad.size(); ++i)
        px->grad[static_cast<std::size_t>(node.iaux[i])] += node.grad[i];
    });
  }
  return y;
}

std::pair<Tensor, Tensor> lstm_step(const Tensor& x, const Tensor& h, const Tensor& c,
                                    const Tensor& w, const Tensor& r, const Tensor& b) {
  int in_dim = x->shape.back();
  if (h->shape.size() != 1 || c->shape != h->shape)
    fail("lstm_step: bad state shapes " + shape_str(h->shape) + " / " + shape_str(c->shape));
  int dim = h->shape[0];
  if (w->shape != std::vector<int>{in_dim, 4 * dim})
    fail("lstm_step: W shape " + shape_str(w->shape) + " does not match input " +
         shape_str(x->shape) + " and state size " + std::to_string(dim));
  if (r->shape != std::vector<int>{dim, 4 * dim})
    fail("lstm_step: R shape " + shape_str(r->shape) + " does not match state size " +
         std::to_string(dim));
  if (b->shape != std::vector<int>{4 * dim})
    fail("lstm_step: bias shape " + shape_str(b->shape));

  std::vector<double> hc(static_cast<std::size_t>(2 * dim));
  std::vector<double> cache(static_cast<std::size_t>(5 * dim));
  kernels::lstm_cell(in_dim, dim, x->data.data(), h->data.data(), c->data.data(),
                     w->data.data(), r->data.data(), b->data.data(), hc.data(), hc.data() + dim,
                     cache.data());
  Tensor node = new_node({2 * dim}, std::move(hc));
  node->aux = std::move(cache);

  if (want_grad({&x, &h, &c, &w, &r, &b})) {
    Tensor px = x, ph = h, pc = c, pw = w, pr = r, pb = b;
    attach(node, {x, h, c, w, r, b}, [px, ph, pc, pw, pr, pb, in_dim, dim](TensorNode& nd) {
      const double* gate_i = nd.aux.data();
      const double* gate_f = nd.aux.data() + dim;
      const double* gate_g = nd.aux.data() + 2 * dim;
      const double* gate_o = nd.aux.data() + 3 * dim;
      const double* tan_c = nd.aux.data() + 4 * dim;
      std::vector<double> dz(static_cast<std::size_t>(4 * dim));
      std::vector<double> dc_prev(static_cast<std::size_t>(dim));
      for (int j = 0; j < dim; ++j) {
        double gh = nd.grad[static_cast<std::size_t>(j)];
        double gc = nd.grad[static_cast<std::size_t>(dim + j)];
        double dcn = gc + gh * gate_o[j] * (1.0 - tan_c[j] * tan_c[j]);
        double dov = gh * tan_c[j];
        double dfv = dcn * pc->data[static_cast<std::size_t>(j)];
        double div = dcn * gate_g[j];
        double dgv = dcn * gate_i[j];
        dz[static_cast<std::size_t>(j)] = div * gate_i[j] * (1.0 - gate_i[j]);
        dz[static_cast<std::size_t>(dim + j)] = dfv * gate_f[j] * (1.0 - gate_f[j]);
        dz[static_cast<std::size_t>(2 * dim + j)] = dgv * (1.0 - gate_g[j] * gate_g[j]);
        dz[static_cast<std::size_t>(3 * dim + j)] = dov * gate_o[j] * (1.0 - gate_o[j]);
        dc_prev[static_cast<std::size_t>(j)] = dcn * gate_f[j];
      }
      int n4 = 4 * dim;
      if (px->requires_grad) {
        px->ensure_grad();
        for (int p = 0; p < in_dim; ++p) {
          double s = 0.0;
          for (int j = 0; j < n4; ++j)
            s += pw->data[static_cast<std::size_t>(p) * n4 + j] * dz[static_cast<std::size_t>(j)];
          px->grad[static_cast<std::size_t>(p)] += s;
        }
      }
      if (ph->requires_grad) {
        ph->ensure_grad();
        for (int p = 0; p < dim; ++p) {
          double s = 0.0;
          for (int j = 0; j < n4; ++j)
            s += pr->data[static_cast<std::size_t>(p) * n4 + j] * dz[static_cast<std::size_t>(j)];
          ph->grad[static_cast<std::size_t>(p)] += s;
        }
      }
      if (pc->requires_grad) {
        pc->ensure_grad();
        for (int j = 0; j < dim; ++j) pc->grad[static_cast<std::size_t>(j)] += dc_prev[static_cast<std::size_t>(j)];
      }
      if (pw->requires_grad) {
        pw->ensure_grad();
        for (int p = 0; p < in_dim; ++p) {
          double xv = px->data[static_cast<std::size_t>(p)];
          for (int j = 0; j < n4; ++j)
            pw->grad[static_cast<std::size_t>(p) * n4 + j] += xv * dz[static_cast<std::size_t>(j)];
        }
      }
      if (pr->requires_grad) {
        pr->ensure_grad();
        for (int p = 0; p < dim; ++p) {
          double hv = ph->data[static_cast<std::size_t>(p)];
          for (int j = 0; j < n4; ++j)
            pr->grad[static_cast<std::size_t>(p) * n4 + j] += hv * dz[static_cast<std::size_t>(j)];
        }
      }
      if (pb->requires_grad) {
        pb->ensure_grad();
        for (int j = 0; j < n4; ++j) pb->grad[static_cast<std::size_t>(j)] += dz[static_cast<std::size_t>(j)];
      }
    });
  }
  Tensor h_out = slice_vec(node, 0, dim);
  Tensor c_out = slice_vec(node, dim, dim);
  return {h_out, c_out};
}

Tensor slice_rows(const Tensor& m, int row_begin, int row_end) {
  if (m->shape.size() != 2) fail("slice_rows: expected a matrix, got " + shape_str(m->shape));
  int rows = m->shape[0], cols = m->shape[1];
  if (row_begin < 0 || row_end > rows || row_begin >= row_end)
    fail("slice_rows: bad range [" + std::to_string(row_begin) + "," + std::to_string(row_end) +
         ") for " + shape_str(m->shape));
  int out_rows = row_end - row_begin;
  std::vector<double> out(m->data.begin() + static_cast<std::ptrdiff_t>(row_begin) * cols,
                          m->data.begin() + static_cast<std::ptrdiff_t>(row_end) * cols);
  Tensor y = new_node({out_rows, cols}, std::move(out));
  if (want_grad({&m})) {
    Tensor pm = m;
    attach(y, {m}, [pm, row_begin, cols](TensorNode& node) {
      pm->ensure_grad();
      std::size_t base = static_cast<std::size_t>(row_begin) * cols;
      for (std::size_t i = 0; i < node.grad.size(); ++i) pm->grad[base + i] += node.grad[i];
    });
  }
  return y;
}

Tensor slice_vec(const Tensor& v, int begin, int len) {
  if (v->shape.size() != 1) fail("slice_vec: expected a vector, got " + shape_str(v->shape));
  if (begin < 0 || begin + len > v->shape[0] || len <= 0)
    fail("slice_vec: bad range for " + shape_str(v->shape));
  std::vector<double> out(v->data.begin() + begin, v->data.begin() + begin + len);
  Tensor y = new_node({len}, std::move(out));
  if (want_grad({&v})) {
    Tensor pv = v;
    attach(y, {v}, [pv, begin](TensorNode& node) {
      pv->ensure_grad();
      for (std::size_t i = 0; i < node.grad.size(); ++i)
        pv->grad[static_cast<std::size_t>(begin) + i] += node.grad[i];
    });
  }
  return y;
}

Tensor concat_vec(const Tensor& a, const Tensor& b) {
  if (a->shape.size() != 1 || b->shape.size() != 1)
    fail("concat_vec: expected vectors, got " + shape_str(a->shape) + " and " + shape_str(b->shape));
  std::vector<double> out;
  out.reserve(a->data.size() + b->data.size());
  out.insert(out.end(), a->data.begin(), a->data.end());
  out.insert(out.end(), b->data.begin(), b->data.end());
  Tensor y = new_node({a->shape[0] + b->shape[0]}, std::move(out));
  if (want_grad({&a, &b})) {
    Tensor pa = a, pb = b;
    int na = a->shape[0];
    attach(y, {a, b}, [pa, pb, na](TensorNode& node) {
      if (pa->requires_grad) {
        pa->ensure_grad();
        for (int i = 0; i < na; ++i) pa->grad[static_cast<std::size_t>(i)] += node.grad[static_cast<std::size_t>(i)];
      }
      if (pb->requires_grad) {
        pb->ensure_grad();
        for (std::size_t i = na; i < node.grad.size(); ++i) pb->grad[i - na] += node.grad[i];
      }
    });
  }
  return y;
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) fail("stack_rows: no rows");
  int cols = rows[0]->shape.back();
  std::vector<double> out;
  out.reserve(rows.size() * static_cast<std::size_t>(cols));
  for (const auto& r : rows) {
    if (r->shape.size() != 1 || r->shape[0] != cols)
      fail("stack_rows: inconsistent row shape " + shape_str(r->shape));
    out.insert(out.end(), r->data.begin(), r->data.end());
  }
  Tensor y = new_node({static_cast<int>(rows.size()), cols}, std::move(out));
  bool any = false;
  if (g_no_grad_depth == 0)
    for (const auto& r : rows)
      if (r->requires_grad) any = true;
  if (any) {
    std::vector<Tensor> parents = rows;
    y->requires_grad = true;
    y->parents = parents;
    y->backward_fn = [parents, cols](TensorNode& node) {
      for (std::size_t ri = 0; ri < parents.size(); ++ri) {
        if (!parents[ri]->requires_grad) continue;
        parents[ri]->ensure_grad();
        for (int c = 0; c < cols; ++c)
          parents[ri]->grad[static_cast<std::size_t>(c)] += node.grad[ri * cols + c];
      }
    };
  }
  return y;
}

Tensor pick(const Tensor& v, int index) {
  if (v->shape.size() != 1) fail("pick: expected a vector, got " + shape_str(v->shape));
  if (index < 0 || index >= v->shape[0])
    fail("pick: index " + std::to_string(index) + " out of range for " + shape_str(v->shape));
  Tensor y = new_node({1}, {v->data[static_cast<std::size_t>(index)]});
  if (want_grad({&v})) {
    Tensor pv = v;
    attach(y, {v}, [pv, index](TensorNode& node) {
      pv->ensure_grad();
      pv->grad[static_cast<std::size_t>(index)] += node.grad[0];
    });
  }
  return y;
}

Tensor pick_row(const Tensor& m, int row) {
  if (m->shape.size() != 2) fail("pick_row: expected a matrix, got " + shape_str(m->shape));
  if (row < 0 || row >= m->shape[0])
    fail("pick_row: row " + std::to_string(row) + " out of range for " + shape_str(m->shape));
  int cols = m->shape[1];
  std::vector<double> out(m->data.begin() + static_cast<std::ptrdiff_t>(row) * cols,
                          m->data.begin() + static_cast<std::ptrdiff_t>(row + 1) * cols);
  Tensor y = new_node({cols}, std::move(out));
  if (want_grad({&m})) {
    Tensor pm = m;
    attach(y, {m}, [pm, row, cols](TensorNode& node) {
      pm->ensure_grad();
      std::size_t base = static_cast<std::size_t>(row) * cols;
      for (int c = 0; c < cols; ++c) pm->grad[base + c] += node.grad[static_cast<std::size_t>(c)];
    });
  }
  return y;
}

Tensor time_max_pool_op(const Tensor& m, int factor) {
  if (m->shape.size() != 2) fail("time_max_pool: expected a matrix, got " + shape_str(m->shape));
  if (factor < 1) fail("time_max_pool: factor must be >= 1");
  int t_in = m->shape[0], cols = m->shape[1];
  int t_out = t_in / factor;
  if (t_out < 1)
    fail("time_max_pool: input length " + std::to_string(t_in) + " shorter than factor " +
         std::to_string(factor));
  std::vector<double> out(static_cast<std::size_t>(t_out) * cols);
  std::vector<int> arg(static_cast<std::size_t>(t_out) * cols);
  kernels::time_max_pool(m->data.data(), t_in, cols, factor, out.data(), arg.data());
  Tensor y = new_node({t_out, cols}, std::move(out));
  y->iaux = std::move(arg);
  if (want_grad({&m})) {
    Tensor pm = m;
    attach(y, {m}, [pm, cols](TensorNode& node) {
      pm->ensure_grad();
      int t_out_rows = node.shape[0];
      for (int t = 0; t < t_out_rows; ++t)
        for (int c = 0; c < cols; ++c) {
          int src_row = node.iaux[static_cast<std::size_t>(t) * cols + c];
          pm->grad[static_cast<std::size_t>(src_row) * cols + c] +=
              node.grad[static_cast<std::size_t>(t) * cols + c];
        }
    });
  }
  return y;
}

Tensor sum_all(const Tensor& x) {
  double s = 0.0;
  for (double v : x->data) s += v;
  Tensor y = new_node({1}, {s});
  if (want_grad({&x})) {
    Tensor px = x;
    attach(y, {x}, [px](TensorNode& node) {
      px->ensure_grad();
      for (std::size_t i = 0; i < px->grad.size(); ++i) px->grad[i] += node.grad[0];
    });
  }
  return y;
}

void backward(const Tensor& root) {
  if (!root) fail("backward: null root");
  if (root->numel() != 1) fail("backward: root must be scalar, got " + shape_str(root->shape));
  if (!root->requires_grad) fail("backward: root does not require grad");

  // Collect the reachable subgraph, then replay in reverse creation order.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<TensorNode*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    TensorNode* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents)
      if (seen.insert(p.get()).second) stack.push_back(p.get());
  }
  std::sort(order.begin(), order.end(),
            [](const TensorNode* a, const TensorNode* b) { return a->seq > b->seq; });

  root->ensure_grad();
  root->grad[0] += 1.0;
  for (TensorNode* n : order) {
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

// --- optimizer ---------------------------------------------------------------

void AdamState::init(const std::vector<Parameter>& params) {
  step = 0;
  m.assign(params.size(), {});
  v.assign(params.size(), {});
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i].assign(params[i].value->data.size(), 0.0);
    v[i].assign(params[i].value->data.size(), 0.0);
  }
}

void adam_step(std::vector<Parameter>& params, AdamState& state, const AdamConfig& cfg) {
  if (state.m.size() != params.size()) fail("adam_step: state not initialized for these params");
  state.step += 1;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    auto& val = params[i].value->data;
    auto& grd = params[i].value->grad;
    auto& mi = state.m[i];
    auto& vi = state.v[i];
    if (mi.size() != val.size()) fail("adam_step: moment shape mismatch for " + params[i].name);
    for (std::size_t j = 0; j < val.size(); ++j) {
      double g = j < grd.size() ? grd[j] : 0.0;
      mi[j] = cfg.beta1 * mi[j] + (1.0 - cfg.beta1) * g;
      vi[j] = cfg.beta2 * vi[j] + (1.0 - cfg.beta2) * g * g;
      double mhat = mi[j] / bc1;
      double vhat = vi[j] / bc2;
      val[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

void zero_grad(std::vector<Parameter>& params) {
  for (auto& p : params) p.value->grad.clear();
}

double grad_norm(const std::vector<Parameter>& params) {
  double s = 0.0;
  for (const auto& p : params)
    for (double g : p.value->grad) s += g * g;
  return std::sqrt(s);
}

void clip_grad_norm(std::vector<Parameter>& params, double max_norm) {
  double n = grad_norm(params);
  if (n <= max_norm || n == 0.0) return;
  double scale = max_norm / n;
  for (auto& p : params)
    for (double& g : p.value->grad) g *= scale;
}

}  // namespace segatt
