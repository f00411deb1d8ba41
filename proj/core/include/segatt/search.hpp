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

// Decoders for the segmental model plus a label-synchronous decoder for the
// global-attention model.
//
// The decision rule scores a sequence as
//     [ sum_s alpha * log p(t_s|...) + log p(a_s|...) ] * S^(-gamma)
// All decoders are deterministic: ties break toward the lexicographically
// smaller label sequence, then smaller boundary sequence.
//
// segmental_search: time-synchronous; only hypotheses reaching a segment
//   end at the current frame are pruned against each other; open segments
//   pass through until delta_max. Viterbi recombination merges segment-ended
//   hypotheses with the same label history.
// simple_search: time-synchronous; all hypotheses pruned jointly per frame
//   using framewise length scores (neural length model only); no
//   recombination.
// oracle_search: exact argmax by exhaustive enumeration over all
//   segmentations (parts <= delta_max) and label assignments; guarded to
//   tiny instances.

#include <string>
#include <vector>

#include "segatt/data.hpp"
#include "segatt/length_model.hpp"
#include "segatt/model.hpp"

namespace segatt {

enum class Recombination { kOff, kLabelHistory };
std::string to_string(Recombination r);
Recombination recombination_from_string(const std::string& s);

struct SearchConfig {
  SearchMode mode = SearchMode::kSegmental;
  int beam_size = 8;
  double alpha = 1.0;
  int gamma = 0;  // 0 or 1; 1 divides the log score by the label count
  int delta_max = 20;
  LengthModelKind length_model = LengthModelKind::kNone;
  Recombination recombination = Recombination::kLabelHistory;

  void validate() const;
};

struct DecodeResult {
  std::vector<int> labels;
  std::vector<int> boundaries;            // empty for global decoding
  double score = 0.0;                     // gamma-normalized decision score
  double raw_sum = 0.0;
  std::vector<double> label_scores;       // log p(a_s|...) per output step
  std::vector<double> length_scores;      // log p(t_s|...) per segment (unscaled)
};

struct ScoreBreakdown {
  std::vector<double> label_log_probs;
  std::vector<double> length_log_probs;
  double raw_sum = 0.0;
  double score = 0.0;  // gamma-normalized
};

// Teacher-forced decision-rule score of one (labels, segmentation) pair.
// table is required for the static length model; alpha=0 ignores the
// length model entirely.
ScoreBreakdown score_sequence(const Model& m, const EncodedSequence& enc,
                              const std::vector<int>& labels, const Segmentation& seg,
                              const SearchConfig& cfg, const StaticLengthTable* table);

// Global-attention scoring: label model over full windows plus the final
// end-of-sequence step.
ScoreBreakdown global_score_sequence(const Model& m, const EncodedSequence& enc,
                                     const std::vector<int>& labels, int gamma);

DecodeResult segmental_search(const Model& m, const EncodedSequence& enc, const SearchConfig& cfg,
                              const StaticLengthTable* table);
DecodeResult simple_search(const Model& m, const EncodedSequence& enc, const SearchConfig& cfg);
DecodeResult oracle_search(const Model& m, const EncodedSequence& enc, const SearchConfig& cfg,
                           const StaticLengthTable* table);
DecodeResult global_search(const Model& m, const EncodedSequence& enc, int beam_size, int gamma,
                           int max_labels);

// --- corpus-level driver -----------------------------------------------------

struct DecodeRun {
  SearchConfig search;
  int jobs = 1;
  int concat = 1;
};

struct SequenceResult {
  std::string id;
  std::vector<int> ref_labels;
  std::vector<int> ref_boundaries;
  DecodeResult hyp;
  double truth_score = 0.0;
  double hyp_score = 0.0;
  bool search_error = false;  // truth scored better than the recognized sequence
};

// Decodes every utterance (optionally concatenated in groups of `concat`),
// scoring ground truth and hypothesis with the same decision rule. Global
// models use global_search; segmental models use cfg.search.mode. jobs > 1
// decodes sequences in parallel over a shared read-only model.
std::vector<SequenceResult> decode_corpus(const Model& m, const std::vector<Utterance>& utts,
                                          const DecodeRun& run, const StaticLengthTable* table);

// Fraction of sequences where the ground truth outscored the recognized
// sequence under the same decision rule.
double count_search_errors(const std::vector<SequenceResult>& results);

}  // namespace segatt
