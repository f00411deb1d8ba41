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

// Segment-length models. Three kinds share one scoring interface in the
// decoders: "none" contributes a constant 0 log-prob, "static" scores
// p(dt|a) = exp(-|mu_a - dt|)/Z_a on [1, delta_max], and "neural" predicts
// a per-frame end probability q_t from the encoder frames and the
// blank-encoded alignment so far.

#include <utility>
#include <vector>

#include "segatt/model.hpp"
#include "segatt/types.hpp"

namespace segatt {

// --- blank alignment (omega) -------------------------------------------------

// Frame-wise encoding of (labels, boundaries): the label at its boundary
// frame, blank everywhere else. Index i holds the symbol of 1-based frame
// i+1.
std::vector<int> encode_blank_alignment(const std::vector<int>& labels, const Segmentation& seg,
                                        int blank_id);

// Inverse of encode_blank_alignment; the last frame must carry a label.
std::pair<std::vector<int>, std::vector<int>> decode_blank_alignment(const std::vector<int>& omega,
                                                                     int blank_id);

// --- static length model -------------------------------------------------------

struct StaticLengthTable {
  int vocab_size = 0;
  int delta_max = 0;
  std::vector<double> mu;     // per label, mean segment length in encoder frames
  std::vector<double> log_z;  // per label, log normalizer over [1, delta_max]

  bool empty() const { return mu.empty(); }
  // -|mu_a - dt| - log Z_a inside the support, -inf outside.
  double log_prob(int label, int delta) const;
};

// mu_a = mean observed segment length for label a over the given
// (labels, boundaries) alignments; unseen labels fall back to the global
// mean over all segments.
StaticLengthTable estimate_static_length(
    const std::vector<std::pair<std::vector<int>, std::vector<int>>>& alignments, int vocab_size,
    int delta_max);

// --- neural length model --------------------------------------------------------

// Recurrent state of the per-frame end predictor; one per search hypothesis.
struct LengthState {
  std::vector<double> h;
  std::vector<double> c;
};
LengthState initial_length_state(const Model& m);

// Advances the length LSTM by one frame and returns q_t (probability that
// the open segment ends at `frame`). omega_prev is the alignment symbol at
// frame-1 (blank for frame 1 and for segment-interior frames, the previous
// label at its boundary).
double length_q_raw(const Model& m, const EncodedSequence& enc, int frame_1b, int omega_prev,
                    LengthState& state);

// q values for all frames 1..T under a teacher-forced alignment.
std::vector<double> length_q_sequence_raw(const Model& m, const EncodedSequence& enc,
                                          const std::vector<int>& labels, const Segmentation& seg);

// log p(t_s = t | t_{s-1}) = sum_{t'=t_prev+1}^{t-1} log(1-q_{t'}) + log q_t;
// -inf for t <= t_prev. q[i] holds q for 1-based frame i+1.
double neural_segment_log_prob(const std::vector<double>& q, int t_prev, int t);

// Tape-path step for training: returns (q scalar node, next state).
struct TapeLengthState {
  Tensor h;
  Tensor c;
};
TapeLengthState initial_length_state_tape(const Model& m);
std::pair<Tensor, TapeLengthState> length_q_step(const Model& m, const AttentionContext& att,
                                                 int frame_1b, int omega_prev,
                                                 const TapeLengthState& state);

}  // namespace segatt
