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

// Synthetic corpus with exact ground-truth alignments. Each label emits a
// run of frames around a label-specific prototype vector plus noise;
// silence emits near-zero-energy frames. Alignments are drawn directly at
// encoder-frame resolution and expanded by the downsampling factor to raw
// frames, so boundary rounding never comes up.

#include <cstdint>
#include <string>
#include <vector>

#include "segatt/types.hpp"

namespace segatt {

struct FeatureSequence {
  std::string id;
  int input_dim = 0;
  std::vector<double> frames;  // [t_input, input_dim]
  int t_input() const { return input_dim == 0 ? 0 : static_cast<int>(frames.size()) / input_dim; }
};

struct Utterance {
  FeatureSequence features;
  std::vector<int> labels;                 // one per segment
  std::vector<int> boundaries;             // 1-based, encoder-frame resolution, last == T
  std::vector<unsigned char> is_silence;   // one flag per segment
  int t_down() const { return boundaries.empty() ? 0 : boundaries.back(); }
};

struct CorpusSpec {
  int vocab_size = 8;        // content labels, excluding silence
  int input_dim = 8;
  int num_train = 100;
  int num_dev = 20;
  int num_eval = 20;
  int min_labels = 2;
  int max_labels = 6;
  double len_mean_lo = 2.0;  // per-label mean segment length range (encoder frames)
  double len_mean_hi = 5.0;
  double len_stddev = 1.0;
  double silence_prob = 0.0;
  double sil_len_mean = 4.0;
  double sil_len_stddev = 2.0;
  double noise_level = 0.0;
  int downsample_factor = 6;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Corpus {
  CorpusSpec spec;
  SilenceVariant variant = SilenceVariant::kNone;
  int silence_id = -1;  // -1 when silence is not a label
  std::vector<Utterance> train;
  std::vector<Utterance> dev;
  std::vector<Utterance> eval;

  // Content labels + optional silence (excludes EOS/BOS bookkeeping).
  int label_vocab_size() const { return spec.vocab_size + (silence_id >= 0 ? 1 : 0); }
  const std::vector<Utterance>& split(const std::string& name) const;
};

// Per-label prototype vectors, [vocab_size, input_dim]. Orthogonal unit
// vectors while vocab_size <= input_dim, seeded unit Gaussians otherwise.
std::vector<double> label_prototypes(const CorpusSpec& spec);

// Generates all three splits with the silence variant already applied.
// delta_max only matters for the split variant.
Corpus generate(const CorpusSpec& spec, SilenceVariant variant, int delta_max);

// Silence handling on one utterance whose silence segments are marked:
//   none:     silence frames merge into the following label's segment
//             (trailing silence merges into the last label)
//   no_split: silence becomes a regular label, one segment per span
//   split:    like no_split, but spans longer than delta_max are cut into
//             consecutive segments of at most delta_max frames
Utterance apply_silence_variant(const Utterance& raw, SilenceVariant variant, int delta_max,
                                int silence_id);

// Concatenates groups of C consecutive utterances (recognition-time long
// sequence protocol). A smaller trailing group is kept.
std::vector<Utterance> concat_sequences(const std::vector<Utterance>& utts, int c);

void write_corpus(const Corpus& corpus, const std::string& dir);
Corpus read_corpus(const std::string& dir);

}  // namespace segatt
