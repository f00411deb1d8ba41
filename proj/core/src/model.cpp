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

#include "segatt/model.hpp"

#include <cmath>
#include <cstring>

#include "segatt/kernels.hpp"
#include "segatt/util.hpp"

namespace segatt {

int ModelConfig::total_downsample() const {
  int f = 1;
  for (int p : pool_factors) f *= p;
  return f;
}

void ModelConfig::validate() const {
  if (input_dim < 1) fail("model config: input_dim must be positive");
  if (enc_layers < 1) fail("model config: enc_layers must be positive");
  if (enc_dim < 1 || dec_dim < 1 || att_dim < 1) fail("model config: dims must be positive");
  if (static_cast<int>(pool_factors.size()) != enc_layers)
    fail("model config: pool_factors must have one entry per encoder layer (" +
         std::to_string(pool_factors.size()) + " for " + std::to_string(enc_layers) + " layers)");
  for (int p : pool_factors)
    if (p < 1) fail("model config: pool factors must be >= 1");
  if (vocab_size < 2) fail("model config: vocab_size must be >= 2");
  if (readout_dim < 0) fail("model config: readout_dim must be >= 0");
  if (length_model == LengthModelKind::kNeural && (len_dim < 1 || len_emb_dim < 1))
    fail("model config: neural length model dims must be positive");
  if (silence_id != -1 && (silence_id < 0 || silence_id >= vocab_size))
    fail("model config: silence_id out of range");
  if (eos_id != -1 && (eos_id < 0 || eos_id >= vocab_size))
    fail("model config: eos_id out of range");
  if (window_mode == WindowMode::kGlobal && eos_id == -1)
    fail("model config: global attention mode requires an end-of-sequence label");
}

bool ModelConfig::compatible_for_import(const ModelConfig& other) const {
  return input_dim == other.input_dim && enc_layers == other.enc_layers &&
         enc_dim == other.enc_dim && pool_factors == other.pool_factors &&
         dec_dim == other.dec_dim && att_dim == other.att_dim &&
         readout_hidden() == other.readout_hidden() && vocab_size == other.vocab_size &&
         ctx_dependency == other.ctx_dependency && silence_id == other.silence_id &&
         eos_id == other.eos_id;
}

const Tensor& Model::p(const std::string& name) const {
  auto it = index.find(name);
  if (it == index.end()) fail("model has no parameter '" + name + "'");
  return params[static_cast<std::size_t>(it->second)].value;
}

long Model::num_values() const {
  long n = 0;
  for (const auto& p : params) n += p.value->numel();
  return n;
}

namespace {

std::vector<double> uniform_init(int n, double r, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = rng.uniform(-r, r);
  return v;
}

void add_param(Model& m, const std::string& name, std::vector<int> shape, int fan_in, Rng& rng) {
  int n = 1;
  for (int d : shape) n *= d;
  double r = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : 1));
  Tensor t = make_tensor(std::move(shape), uniform_init(n, r, rng), /*requires_grad=*/true);
  m.index[name] = static_cast<int>(m.params.size());
  m.params.push_back({name, t, true});
}

void add_zero_param(Model& m, const std::string& name, std::vector<int> shape) {
  Tensor t = zeros(std::move(shape), /*requires_grad=*/true);
  m.index[name] = static_cast<int>(m.params.size());
  m.params.push_back({name, t, true});
}

}  // namespace

Model build_model(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  Model m;
  m.cfg = cfg;
  int e = cfg.enc_dim;
  int e2 = cfg.enc_out_dim();
  int d = cfg.dec_dim;
  int k = cfg.readout_hidden();
  int v1 = cfg.vocab_size + 1;  // extra row: BOS / blank

  for (int l = 0; l < cfg.enc_layers; ++l) {
    int in = l == 0 ? cfg.input_dim : e2;
    for (const char* dir : {"fwd", "bwd"}) {
      std::string base = "enc.l" + std::to_string(l) + "." + dir;
      add_param(m, base + ".W", {in, 4 * e}, in, rng);
      add_param(m, base + ".R", {e, 4 * e}, e, rng);
      add_zero_param(m, base + ".b", {4 * e});
    }
  }

  add_param(m, "dec.emb", {v1, d}, d, rng);
  int dec_in = d + e2;
  add_param(m, "dec.lstm.W", {dec_in, 4 * d}, dec_in, rng);
  add_param(m, "dec.lstm.R", {d, 4 * d}, d, rng);
  add_zero_param(m, "dec.lstm.b", {4 * d});

  add_param(m, "att.enc_proj.W", {e2, cfg.att_dim}, e2, rng);
  add_param(m, "att.dec_proj.W", {d, cfg.att_dim}, d, rng);
  add_zero_param(m, "att.dec_proj.b", {cfg.att_dim});
  // Outer energy layer has no bias: a constant shift cancels in the softmax.
  add_param(m, "att.v", {cfg.att_dim}, cfg.att_dim, rng);

  add_param(m, "readout.l1.W", {d + e2, 2 * k}, d + e2, rng);
  add_zero_param(m, "readout.l1.b", {2 * k});
  add_param(m, "readout.l2.W", {k, cfg.vocab_size}, k, rng);
  add_zero_param(m, "readout.l2.b", {cfg.vocab_size});

  if (cfg.length_model == LengthModelKind::kNeural) {
    add_param(m, "len.emb", {v1, cfg.len_emb_dim}, cfg.len_emb_dim, rng);
    int len_in = e2 + cfg.len_emb_dim;
    add_param(m, "len.lstm.W", {len_in, 4 * cfg.len_dim}, len_in, rng);
    add_param(m, "len.lstm.R", {cfg.len_dim, 4 * cfg.len_dim}, cfg.len_dim, rng);
    add_zero_param(m, "len.lstm.b", {4 * cfg.len_dim});
    add_param(m, "len.out.W", {cfg.len_dim, 1}, cfg.len_dim, rng);
    add_zero_param(m, "len.out.b", {1});
  }
  return m;
}

// --- tape path ---------------------------------------------------------------

EncoderOutput encode(const Model& m, FeatureView x) {
  const ModelConfig& cfg = m.cfg;
  if (x.dim != cfg.input_dim)
    fail("encode: feature dim " + std::to_string(x.dim) + " does not match model input_dim " +
         std::to_string(cfg.input_dim));
  if (x.t_input < cfg.total_downsample())
    fail("encode: input too short: " + std::to_string(x.t_input) + " frames < total pool factor " +
         std::to_string(cfg.total_downsample()));

  Tensor cur = make_tensor({x.t_input, x.dim},
                           std::vector<double>(x.data, x.data + static_cast<std::size_t>(x.t_input) * x.dim));
  int e = cfg.enc_dim;
  for (int l = 0; l < cfg.enc_layers; ++l) {
    int t_rows = cur->shape[0];
    const Tensor& wf = m.p("enc.l" + std::to_string(l) + ".fwd.W");
    const Tensor& rf = m.p("enc.l" + std::to_string(l) + ".fwd.R");
    const Tensor& bf = m.p("enc.l" + std::to_string(l) + ".fwd.b");
    const Tensor& wb = m.p("enc.l" + std::to_string(l) + ".bwd.W");
    const Tensor& rb = m.p("enc.l" + std::to_string(l) + ".bwd.R");
    const Tensor& bb = m.p("enc.l" + std::to_string(l) + ".bwd.b");

    std::vector<Tensor> fwd(static_cast<std::size_t>(t_rows));
    {
      Tensor h = zeros({e}), c = zeros({e});
      for (int t = 0; t < t_rows; ++t) {
        auto [h2, c2] = lstm_step(pick_row(cur, t), h, c, wf, rf, bf);
        fwd[static_cast<std::size_t>(t)] = h2;
        h = h2;
        c = c2;
      }
    }
    std::vector<Tensor> bwd(static_cast<std::size_t>(t_rows));
    {
      Tensor h = zeros({e}), c = zeros({e});
      for (int t = t_rows - 1; t >= 0; --t) {
        auto [h2, c2] = lstm_step(pick_row(cur, t), h, c, wb, rb, bb);
        bwd[static_cast<std::size_t>(t)] = h2;
        h = h2;
        c = c2;
      }
    }
    std::vector<Tensor> rows(static_cast<std::size_t>(t_rows));
    for (int t = 0; t < t_rows; ++t)
      rows[static_cast<std::size_t>(t)] =
          concat_vec(fwd[static_cast<std::size_t>(t)], bwd[static_cast<std::size_t>(t)]);
    Tensor stacked = stack_rows(rows);
    int factor = cfg.pool_factors[static_cast<std::size_t>(l)];
    cur = factor > 1 ? time_max_pool_op(stacked, factor) : stacked;
  }
  return {cur, cur->shape[0], x.t_input};
}

AttentionContext prepare_attention(const Model& m, const EncoderOutput& enc) {
  return {enc.h, matmul(enc.h, m.p("att.enc_proj.W")), enc.T};
}

TapeDecState initial_dec_state(const Model& m) {
  return {zeros({m.cfg.dec_dim}), zeros({m.cfg.dec_dim}), zeros({m.cfg.enc_out_dim()})};
}

namespace {

void check_window(int lo, int hi, int T) {
  if (lo < 1 || hi > T || lo > hi)
    fail("invalid attention window [" + std::to_string(lo) + "," + std::to_string(hi) +
         "] for T=" + std::to_string(T));
}

void check_label(const ModelConfig& cfg, int label, bool allow_bos) {
  int hi = allow_bos ? cfg.vocab_size : cfg.vocab_size - 1;
  if (label < 0 || label > hi)
    fail("label id " + std::to_string(label) + " out of vocab range [0," + std::to_string(hi) + "]");
}

}  // namespace

AttendResult attend(const Model& m, const AttentionContext& att, const Tensor& dec_out,
                    int lo, int hi) {
  check_window(lo, hi, att.T);
  Tensor s_proj = linear(dec_out, m.p("att.dec_proj.W"), m.p("att.dec_proj.b"));
  Tensor e_win = slice_rows(att.h_proj, lo - 1, hi);
  Tensor u = tanh_op(add_rowwise(e_win, s_proj));
  Tensor energies = matmul(u, m.p("att.v"));
  Tensor weights = softmax_op(energies);
  Tensor h_win = slice_rows(att.h, lo - 1, hi);
  Tensor context = matmul(weights, h_win);
  return {context, weights};
}

LabelStepResult label_step(const Model& m, const AttentionContext& att,
                           const TapeDecState& state, int a_prev, int lo, int hi) {
  const ModelConfig& cfg = m.cfg;
  check_label(cfg, a_prev, /*allow_bos=*/true);
  Tensor emb = pick_row(m.p("dec.emb"), a_prev);
  Tensor ctx_in = cfg.ctx_dependency ? state.context : zeros({cfg.enc_out_dim()});
  Tensor x = concat_vec(emb, ctx_in);
  auto [h, c] = lstm_step(x, state.h, state.c, m.p("dec.lstm.W"), m.p("dec.lstm.R"),
                          m.p("dec.lstm.b"));
  AttendResult a = attend(m, att, h, lo, hi);
  Tensor rin = concat_vec(h, a.context);
  Tensor r1 = linear(rin, m.p("readout.l1.W"), m.p("readout.l1.b"));
  Tensor mo = maxout_op(r1);
  Tensor logits = linear(mo, m.p("readout.l2.W"), m.p("readout.l2.b"));
  Tensor probs = softmax_op(logits);
  TapeDecState next{h, c, cfg.ctx_dependency ? a.context : zeros({cfg.enc_out_dim()})};
  return {probs, a.weights, next};
}

SeqLogProb seq_log_prob(const Model& m, const AttentionContext& att,
                        const std::vector<int>& labels, const Segmentation& seg) {
  if (static_cast<int>(labels.size()) != seg.num_segments())
    fail("seq_log_prob: " + std::to_string(labels.size()) + " labels vs " +
         std::to_string(seg.num_segments()) + " segments");
  if (seg.total_frames() != att.T)
    fail("seq_log_prob: segmentation T=" + std::to_string(seg.total_frames()) +
         " does not match encoder T=" + std::to_string(att.T));
  SeqLogProb out;
  TapeDecState state = initial_dec_state(m);
  int a_prev = m.cfg.bos_id();
  Tensor total;
  for (int s = 0; s < seg.num_segments(); ++s) {
    check_label(m.cfg, labels[static_cast<std::size_t>(s)], /*allow_bos=*/false);
    LabelStepResult step = label_step(m, att, state, a_prev, seg.start_frame(s), seg.end_frame(s));
    Tensor lp = log_op(pick(step.probs, labels[static_cast<std::size_t>(s)]));
    out.per_label.push_back(lp);
    total = total ? add(total, lp) : lp;
    state = step.state;
    a_prev = labels[static_cast<std::size_t>(s)];
  }
  out.total = total;
  return out;
}

// --- raw path ----------------------------------------------------------------

EncodedSequence encode_raw(const Model& m, FeatureView x) {
  NoGradGuard ng;
  EncoderOutput enc = encode(m, x);
  EncodedSequence out;
  out.T = enc.T;
  out.T_input = enc.T_input;
  out.enc_dim2 = m.cfg.enc_out_dim();
  out.att_dim = m.cfg.att_dim;
  out.h = enc.h->data;
  out.h_proj.resize(static_cast<std::size_t>(out.T) * out.att_dim);
  kernels::matmul(out.h.data(), out.T, out.enc_dim2, m.p("att.enc_proj.W")->data.data(),
                  out.att_dim, out.h_proj.data());
  return out;
}

DecoderState initial_dec_state_raw(const Model& m) {
  DecoderState st;
  st.lstm_h.assign(static_cast<std::size_t>(m.cfg.dec_dim), 0.0);
  st.lstm_c.assign(static_cast<std::size_t>(m.cfg.dec_dim), 0.0);
  st.prev_context.assign(static_cast<std::size_t>(m.cfg.enc_out_dim()), 0.0);
  st.prev_label = m.cfg.bos_id();
  return st;
}

void dec_advance_raw(const Model& m, const DecoderState& in, DecoderState& out) {
  const ModelConfig& cfg = m.cfg;
  check_label(cfg, in.prev_label, /*allow_bos=*/true);
  int d = cfg.dec_dim;
  int e2 = cfg.enc_out_dim();
  std::vector<double> x(static_cast<std::size_t>(d + e2), 0.0);
  const double* emb = m.p("dec.emb")->data.data() + static_cast<std::size_t>(in.prev_label) * d;
  std::memcpy(x.data(), emb, sizeof(double) * static_cast<std::size_t>(d));
  if (cfg.ctx_dependency)
    std::memcpy(x.data() + d, in.prev_context.data(), sizeof(double) * static_cast<std::size_t>(e2));
  out.lstm_h.resize(static_cast<std::size_t>(d));
  out.lstm_c.resize(static_cast<std::size_t>(d));
  kernels::lstm_cell(d + e2, d, x.data(), in.lstm_h.data(), in.lstm_c.data(),
                     m.p("dec.lstm.W")->data.data(), m.p("dec.lstm.R")->data.data(),
                     m.p("dec.lstm.b")->data.data(), out.lstm_h.data(), out.lstm_c.data(), nullptr);
  out.prev_context = in.prev_context;
  out.prev_label = in.prev_label;
}

void attend_raw(const Model& m, const EncodedSequence& enc, const std::vector<double>& dec_h,
                int lo, int hi, std::vector<double>& context, std::vector<double>& weights) {
  check_window(lo, hi, enc.T);
  const ModelConfig& cfg = m.cfg;
  int att = cfg.att_dim;
  int e2 = cfg.enc_out_dim();
  int win = hi - lo + 1;

  std::vector<double> s_proj(static_cast<std::size_t>(att));
  kernels::matmul(dec_h.data(), 1, cfg.dec_dim, m.p("att.dec_proj.W")->data.data(), att,
                  s_proj.data());
  kernels::add(s_proj.data(), m.p("att.dec_proj.b")->data.data(), att, s_proj.data());

  std::vector<double> u(static_cast<std::size_t>(win) * att);
  kernels::add_rowwise(enc.h_proj.data() + static_cast<std::size_t>(lo - 1) * att, win, att,
                       s_proj.data(), u.data());
  kernels::tanh_v(u.data(), win * att, u.data());

  std::vector<double> e(static_cast<std::size_t>(win));
  kernels::matmul(u.data(), win, att, m.p("att.v")->data.data(), 1, e.data());

  weights.resize(static_cast<std::size_t>(win));
  if (!kernels::softmax_masked(e.data(), win, nullptr, weights.data()))
    fail("attend: empty attention window");

  context.resize(static_cast<std::size_t>(e2));
  kernels::matmul(weights.data(), 1, win, enc.h.data() + static_cast<std::size_t>(lo - 1) * e2, e2,
                  context.data());
}

void readout_raw(const Model& m, const std::vector<double>& dec_h,
                 const std::vector<double>& context, std::vector<double>& probs) {
  const ModelConfig& cfg = m.cfg;
  int d = cfg.dec_dim;
  int e2 = cfg.enc_out_dim();
  int k = cfg.readout_hidden();
  std::vector<double> rin(static_cast<std::size_t>(d + e2));
  std::memcpy(rin.data(), dec_h.data(), sizeof(double) * static_cast<std::size_t>(d));
  std::memcpy(rin.data() + d, context.data(), sizeof(double) * static_cast<std::size_t>(e2));

  std::vector<double> r1(static_cast<std::size_t>(2 * k));
  kernels::matmul(rin.data(), 1, d + e2, m.p("readout.l1.W")->data.data(), 2 * k, r1.data());
  kernels::add(r1.data(), m.p("readout.l1.b")->data.data(), 2 * k, r1.data());

  std::vector<double> mo(static_cast<std::size_t>(k));
  kernels::maxout2(r1.data(), k, mo.data(), nullptr);

  std::vector<double> logits(static_cast<std::size_t>(cfg.vocab_size));
  kernels::matmul(mo.data(), 1, k, m.p("readout.l2.W")->data.data(), cfg.vocab_size, logits.data());
  kernels::add(logits.data(), m.p("readout.l2.b")->data.data(), cfg.vocab_size, logits.data());

  probs.resize(static_cast<std::size_t>(cfg.vocab_size));
  kernels::softmax_masked(logits.data(), cfg.vocab_size, nullptr, probs.data());
}

RawStepResult label_step_raw(const Model& m, const EncodedSequence& enc,
                             const DecoderState& state, int lo, int hi) {
  RawStepResult out;
  dec_advance_raw(m, state, out.state);
  std::vector<double> ctx;
  attend_raw(m, enc, out.state.lstm_h, lo, hi, ctx, out.weights);
  readout_raw(m, out.state.lstm_h, ctx, out.probs);
  out.state.prev_context = m.cfg.ctx_dependency
                               ? ctx
                               : std::vector<double>(static_cast<std::size_t>(m.cfg.enc_out_dim()), 0.0);
  return out;
}

SeqScore seq_log_prob_raw(const Model& m, const EncodedSequence& enc,
                          const std::vector<int>& labels, const Segmentation& seg) {
  if (static_cast<int>(labels.size()) != seg.num_segments())
    fail("seq_log_prob_raw: " + std::to_string(labels.size()) + " labels vs " +
         std::to_string(seg.num_segments()) + " segments");
  if (seg.total_frames() != enc.T)
    fail("seq_log_prob_raw: segmentation T=" + std::to_string(seg.total_frames()) +
         " does not match encoder T=" + std::to_string(enc.T));
  SeqScore out;
  DecoderState state = initial_dec_state_raw(m);
  for (int s = 0; s < seg.num_segments(); ++s) {
    int a = labels[static_cast<std::size_t>(s)];
    check_label(m.cfg, a, /*allow_bos=*/false);
    RawStepResult step = label_step_raw(m, enc, state, seg.start_frame(s), seg.end_frame(s));
    double lp = std::log(step.probs[static_cast<std::size_t>(a)]);
    out.label_log_probs.push_back(lp);
    out.total += lp;
    state = step.state;
    state.prev_label = a;
  }
  return out;
}

}  // namespace segatt
