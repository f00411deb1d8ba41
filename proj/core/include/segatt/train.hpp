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

// Framewise cross-entropy training against given alignments:
//   L = sum_s -log p(t_s | ...) - log p(a_s | ...)
// The length term expands to a per-frame binary cross entropy over the end
// predictor q (target 1 at boundary frames, 0 elsewhere), which telescopes
// back to -log p(t_s | ...) exactly.

#include <cstdint>
#include <string>
#include <vector>

#include "segatt/data.hpp"
#include "segatt/model.hpp"

namespace segatt {

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 1e-3;
  int batch_size = 8;
  std::uint64_t seed = 1;
  bool length_loss = true;  // include the length model term (neural models only)
  double clip_norm = 5.0;

  void validate() const;
};

struct LossBreakdown {
  Tensor total;             // scalar graph node (label + length CE, summed)
  double label_ce = 0.0;    // sum over labels
  double length_ce = 0.0;   // sum over frames
  int num_labels = 0;
  int num_frames = 0;
};

// Teacher-forced loss of one utterance. Global-attention models ignore the
// alignment boundaries and append an end-of-sequence step instead.
LossBreakdown sequence_loss(const Model& m, const Utterance& utt, bool with_length);

struct EpochMetrics {
  int epoch = 0;
  std::string split;
  double loss = 0.0;        // (label CE + length CE) / total labels
  double label_loss = 0.0;  // label CE / total labels
  double length_loss = 0.0; // length CE / total frames (0 without length model)
};
std::string format_metrics_line(const EpochMetrics& m);

struct TrainResult {
  std::vector<EpochMetrics> metrics;
  std::string best_checkpoint;
  std::string last_checkpoint;
  double best_dev_loss = 0.0;
};

// Trains in place, writing last/best checkpoints, optimizer state and a
// metrics file under out_dir. Resumes deterministically from an existing
// last checkpoint in out_dir. Aborts with a diagnostic if the loss turns
// non-finite.
TrainResult train_model(Model& m, const Corpus& corpus, const TrainConfig& cfg,
                        const std::string& out_dir);

// Builds a model for target_cfg, copying every shared parameter from the
// trained global model; length model parameters (absent in the global
// model) keep their fresh initialization.
Model import_global(const Model& global, const ModelConfig& target_cfg, Rng& rng);

}  // namespace segatt
