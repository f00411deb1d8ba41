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

// Encoder + attention label model. The attention window is what separates
// the two operating modes: global attention always attends over [1, T],
// segmental attention over the open segment [t_{s-1}+1, t_s]. Everything
// else (encoder, decoder LSTM, readout) is shared, which is also what makes
// parameter import between the two modes possible.
//
// Two forward paths exist:
//  - a tape path (Tensor graph) used for training,
//  - a raw path on plain buffers used for decoding and scoring.
// Both call the same kernels in the same order, so their outputs are
// bit-identical; tests pin this down.

#include <string>
#include <unordered_map>
#include <vector>

#include "segatt/rng.hpp"
#include "segatt/tensor.hpp"
#include "segatt/types.hpp"

namespace segatt {

struct ModelConfig {
  int input_dim = 8;
  int enc_layers = 2;
  int enc_dim = 64;                     // per direction
  std::vector<int> pool_factors = {2, 3};  // one per encoder layer
  int dec_dim = 64;
  int att_dim = 64;
  int readout_dim = 0;                  // maxout output size; 0 means dec_dim
  int vocab_size = 0;                   // all softmax classes incl. optional silence/EOS
  WindowMode window_mode = WindowMode::kSegmental;
  bool ctx_dependency = true;           // feed previous attention context into the decoder LSTM
  SilenceVariant silence_variant = SilenceVariant::kNone;
  LengthModelKind length_model = LengthModelKind::kNone;
  int len_dim = 32;
  int len_emb_dim = 16;
  int silence_id = -1;                  // -1 when silence is not in the vocabulary
  int eos_id = -1;                      // -1 when there is no explicit end-of-sequence label

  int enc_out_dim() const { return 2 * enc_dim; }
  int readout_hidden() const { return readout_dim > 0 ? readout_dim : dec_dim; }
  // Extra embedding row ids. Both tables have vocab_size+1 rows; the last
  // row is begin-of-sequence for the decoder and blank for the length model.
  int bos_id() const { return vocab_size; }
  int blank_id() const { return vocab_size; }
  int total_downsample() const;

  void validate() const;
  bool compatible_for_import(const ModelConfig& other) const;
};

struct Model {
  ModelConfig cfg;
  std::vector<Parameter> params;
  std::unordered_map<std::string, int> index;

  const Tensor& p(const std::string& name) const;
  bool has(const std::string& name) const { return index.count(name) != 0; }
  long num_values() const;
};

// Allocates and initializes all parameters. Weights are uniform(-r, r) with
// r = 1/sqrt(fan_in); biases start at zero. Creation order is fixed, which
// also fixes the checkpoint layout and optimizer-state alignment.
Model build_model(const ModelConfig& cfg, Rng& rng);

// Non-owning view of an input feature sequence.
struct FeatureView {
  const double* data = nullptr;  // [t_input, dim], row-major
  int t_input = 0;
  int dim = 0;
};

// --- tape (training) path --------------------------------------------------

struct EncoderOutput {
  Tensor h;  // [T, 2*enc_dim]
  int T = 0;
  int T_input = 0;
};

EncoderOutput encode(const Model& m, FeatureView x);

// Per-sequence attention context: encoder output plus its projection into
// the energy space (computed once, reused by every step).
struct AttentionContext {
  Tensor h;       // [T, 2e]
  Tensor h_proj;  // [T, att]
  int T = 0;
};
AttentionContext prepare_attention(const Model& m, const EncoderOutput& enc);

struct TapeDecState {
  Tensor h;        // [dec_dim]
  Tensor c;        // [dec_dim]
  Tensor context;  // [2e]; identically zero when ctx_dependency=false
};
TapeDecState initial_dec_state(const Model& m);

struct AttendResult {
  Tensor context;  // [2e]
  Tensor weights;  // [window length]
};
// Soft attention restricted to 1-based inclusive window [lo, hi].
// [1, T] reproduces global attention exactly.
AttendResult attend(const Model& m, const AttentionContext& att, const Tensor& dec_out,
                    int lo, int hi);

struct LabelStepResult {
  Tensor probs;    // [vocab_size]
  Tensor weights;  // attention weights over the window
  TapeDecState state;
};
// Advances the decoder LSTM on (embed(a_prev), prev context), attends over
// the window and applies the readout stack.
LabelStepResult label_step(const Model& m, const AttentionContext& att,
                           const TapeDecState& state, int a_prev, int lo, int hi);

struct SeqLogProb {
  std::vector<Tensor> per_label;  // scalar nodes, log p(a_s | ...)
  Tensor total;                   // scalar node
};
// Teacher-forced label-model pass over one segmentation.
SeqLogProb seq_log_prob(const Model& m, const AttentionContext& att,
                        const std::vector<int>& labels, const Segmentation& seg);

// --- raw (decode/scoring) path ----------------------------------------------

struct EncodedSequence {
  int T = 0;
  int T_input = 0;
  int enc_dim2 = 0;              // 2*enc_dim
  int att_dim = 0;
  std::vector<double> h;         // [T, 2e]
  std::vector<double> h_proj;    // [T, att]
  const double* frame(int t_1b) const { return h.data() + static_cast<std::size_t>(t_1b - 1) * enc_dim2; }
};
EncodedSequence encode_raw(const Model& m, FeatureView x);

// Spec'd decoder state: LSTM carry, previous attention context and the
// previously emitted label.
struct DecoderState {
  std::vector<double> lstm_h;
  std::vector<double> lstm_c;
  std::vector<double> prev_context;  // zero vector when ctx_dependency=false
  int prev_label = -1;               // BOS before the first step
};
DecoderState initial_dec_state_raw(const Model& m);

// LSTM advance on (embed(state.prev_label), state.prev_context). The
// context input is replaced by zeros when ctx_dependency=false.
void dec_advance_raw(const Model& m, const DecoderState& in, DecoderState& out);

// Attention over [lo, hi] (1-based inclusive); fills context [2e] and
// weights [hi-lo+1].
void attend_raw(const Model& m, const EncodedSequence& enc, const std::vector<double>& dec_h,
                int lo, int hi, std::vector<double>& context, std::vector<double>& weights);

// Readout stack: probabilities over the vocabulary.
void readout_raw(const Model& m, const std::vector<double>& dec_h,
                 const std::vector<double>& context, std::vector<double>& probs);

struct RawStepResult {
  std::vector<double> probs;
  std::vector<double> weights;
  DecoderState state;  // advanced LSTM state; prev_label left for the caller
};
RawStepResult label_step_raw(const Model& m, const EncodedSequence& enc,
                             const DecoderState& state, int lo, int hi);

struct SeqScore {
  std::vector<double> label_log_probs;
  double total = 0.0;
};
SeqScore seq_log_prob_raw(const Model& m, const EncodedSequence& enc,
                          const std::vector<int>& labels, const Segmentation& seg);

}  // namespace segatt
