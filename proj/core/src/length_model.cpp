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

#include "segatt/length_model.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "segatt/kernels.hpp"
#include "segatt/util.hpp"

namespace segatt {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::vector<int> encode_blank_alignment(const std::vector<int>& labels, const Segmentation& seg,
                                        int blank_id) {
  if (static_cast<int>(labels.size()) != seg.num_segments())
    fail("blank alignment: " + std::to_string(labels.size()) + " labels vs " +
         std::to_string(seg.num_segments()) + " segments");
  std::vector<int> omega(static_cast<std::size_t>(seg.total_frames()), blank_id);
  for (int s = 0; s < seg.num_segments(); ++s)
    omega[static_cast<std::size_t>(seg.end_frame(s)) - 1] = labels[static_cast<std::size_t>(s)];
  return omega;
}

std::pair<std::vector<int>, std::vector<int>> decode_blank_alignment(const std::vector<int>& omega,
                                                                     int blank_id) {
  std::vector<int> labels, boundaries;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] != blank_id) {
      labels.push_back(omega[i]);
      boundaries.push_back(static_cast<int>(i) + 1);
    }
  }
  if (boundaries.empty() || boundaries.back() != static_cast<int>(omega.size()))
    fail("blank alignment: last frame must carry a label");
  return {labels, boundaries};
}

double StaticLengthTable::log_prob(int label, int delta) const {
  if (label < 0 || label >= vocab_size)
    fail("static length model: label " + std::to_string(label) + " out of range");
  if (delta < 1 || delta > delta_max) return kNegInf;
  return -std::abs(mu[static_cast<std::size_t>(label)] - static_cast<double>(delta)) -
         log_z[static_cast<std::size_t>(label)];
}

StaticLengthTable estimate_static_length(
    const std::vector<std::pair<std::vector<int>, std::vector<int>>>& alignments, int vocab_size,
    int delta_max) {
  if (alignments.empty()) fail("static length model: empty corpus");
  if (delta_max < 1) fail("static length model: delta_max must be >= 1");

  std::vector<double> sum(static_cast<std::size_t>(vocab_size), 0.0);
  std::vector<long> count(static_cast<std::size_t>(vocab_size), 0);
  double global_sum = 0.0;
  long global_count = 0;
  for (const auto& [labels, boundaries] : alignments) {
    int prev = 0;
    for (std::size_t s = 0; s < labels.size(); ++s) {
      int len = boundaries[s] - prev;
      prev = boundaries[s];
      int a = labels[s];
      if (a < 0 || a >= vocab_size)
        fail("static length model: label " + std::to_string(a) + " out of range");
      sum[static_cast<std::size_t>(a)] += len;
      count[static_cast<std::size_t>(a)] += 1;
      global_sum += len;
      global_count += 1;
    }
  }
  if (global_count == 0) fail("static length model: no segments in corpus");
  double global_mean = global_sum / static_cast<double>(global_count);

  StaticLengthTable table;
  table.vocab_size = vocab_size;
  table.delta_max = delta_max;
  table.mu.resize(static_cast<std::size_t>(vocab_size));
  table.log_z.resize(static_cast<std::size_t>(vocab_size));
  for (int a = 0; a < vocab_size; ++a) {
    double mu = count[static_cast<std::size_t>(a)] > 0
                    ? sum[static_cast<std::size_t>(a)] / static_cast<double>(count[static_cast<std::size_t>(a)])
                    : global_mean;
    double z = 0.0;
    for (int dt = 1; dt <= delta_max; ++dt) z += std::exp(-std::abs(mu - static_cast<double>(dt)));
    table.mu[static_cast<std::size_t>(a)] = mu;
    table.log_z[static_cast<std::size_t>(a)] = std::log(z);
  }
  return table;
}

// --- neural --------------------------------------------------------------------

LengthState initial_length_state(const Model& m) {
  if (m.cfg.length_model != LengthModelKind::kNeural)
    fail("length model: model has no neural length component");
  LengthState st;
  st.h.assign(static_cast<std::size_t>(m.cfg.len_dim), 0.0);
  st.c.assign(static_cast<std::size_t>(m.cfg.len_dim), 0.0);
  return st;
}

double length_q_raw(const Model& m, const EncodedSequence& enc, int frame_1b, int omega_prev,
                    LengthState& state) {
  const ModelConfig& cfg = m.cfg;
  if (frame_1b < 1 || frame_1b > enc.T)
    fail("length model: frame " + std::to_string(frame_1b) + " out of range [1," +
         std::to_string(enc.T) + "]");
  if (omega_prev < 0 || omega_prev > cfg.blank_id())
    fail("length model: alignment symbol " + std::to_string(omega_prev) + " out of range");
  int e2 = cfg.enc_out_dim();
  int emb_d = cfg.len_emb_dim;
  int d = cfg.len_dim;

  std::vector<double> x(static_cast<std::size_t>(e2 + emb_d));
  std::memcpy(x.data(), enc.frame(frame_1b), sizeof(double) * static_cast<std::size_t>(e2));
  const double* emb = m.p("len.emb")->data.data() + static_cast<std::size_t>(omega_prev) * emb_d;
  std::memcpy(x.data() + e2, emb, sizeof(double) * static_cast<std::size_t>(emb_d));

  std::vector<double> h_new(static_cast<std::size_t>(d)), c_new(static_cast<std::size_t>(d));
  kernels::lstm_cell(e2 + emb_d, d, x.data(), state.h.data(), state.c.data(),
                     m.p("len.lstm.W")->data.data(), m.p("len.lstm.R")->data.data(),
                     m.p("len.lstm.b")->data.data(), h_new.data(), c_new.data(), nullptr);
  state.h = std::move(h_new);
  state.c = std::move(c_new);

  std::vector<double> u(static_cast<std::size_t>(d));
  kernels::tanh_v(state.h.data(), d, u.data());
  double logit[1];
  kernels::matmul(u.data(), 1, d, m.p("len.out.W")->data.data(), 1, logit);
  kernels::add(logit, m.p("len.out.b")->data.data(), 1, logit);
  double q;
  kernels::sigmoid_v(logit, 1, &q);
  return q;
}

std::vector<double> length_q_sequence_raw(const Model& m, const EncodedSequence& enc,
                                          const std::vector<int>& labels, const Segmentation& seg) {
  std::vector<int> omega = encode_blank_alignment(labels, seg, m.cfg.blank_id());
  std::vector<double> q(static_cast<std::size_t>(enc.T));
  LengthState st = initial_length_state(m);
  for (int t = 1; t <= enc.T; ++t) {
    int prev = t == 1 ? m.cfg.blank_id() : omega[static_cast<std::size_t>(t) - 2];
    q[static_cast<std::size_t>(t) - 1] = length_q_raw(m, enc, t, prev, st);
  }
  return q;
}

double neural_segment_log_prob(const std::vector<double>& q, int t_prev, int t) {
  if (t < t_prev + 1) return kNegInf;
  if (t_prev < 0 || t > static_cast<int>(q.size()))
    fail("neural_segment_log_prob: frames [" + std::to_string(t_prev + 1) + "," +
         std::to_string(t) + "] out of range");
  double acc = 0.0;
  for (int u = t_prev + 1; u < t; ++u) acc += std::log(1.0 - q[static_cast<std::size_t>(u) - 1]);
  return acc + std::log(q[static_cast<std::size_t>(t) - 1]);
}

TapeLengthState initial_length_state_tape(const Model& m) {
  if (m.cfg.length_model != LengthModelKind::kNeural)
    fail("length model: model has no neural length component");
  return {zeros({m.cfg.len_dim}), zeros({m.cfg.len_dim})};
}

std::pair<Tensor, TapeLengthState> length_q_step(const Model& m, const AttentionContext& att,
                                                 int frame_1b, int omega_prev,
                                                 const TapeLengthState& state) {
  const ModelConfig& cfg = m.cfg;
  if (frame_1b < 1 || frame_1b > att.T)
    fail("length model: frame " + std::to_string(frame_1b) + " out of range [1," +
         std::to_string(att.T) + "]");
  if (omega_prev < 0 || omega_prev > cfg.blank_id())
    fail("length model: alignment symbol " + std::to_string(omega_prev) + " out of range");
  Tensor frame = pick_row(att.h, frame_1b - 1);
  Tensor emb = pick_row(m.p("len.emb"), omega_prev);
  Tensor x = concat_vec(frame, emb);
  auto [h, c] = lstm_step(x, state.h, state.c, m.p("len.lstm.W"), m.p("len.lstm.R"),
                          m.p("len.lstm.b"));
  Tensor u = tanh_op(h);
  Tensor logit = linear(u, m.p("len.out.W"), m.p("len.out.b"));
  Tensor q = sigmoid_op(logit);
  return {q, {h, c}};
}

}  // namespace segatt
