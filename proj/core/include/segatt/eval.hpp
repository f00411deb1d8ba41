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

// WER with substitution/deletion/insertion breakdown, per-label score
// analysis and the length-model scale sweep. Every table is written twice:
// an aligned plain-text view and a machine-readable line-record twin.

#include <string>
#include <vector>

#include "segatt/search.hpp"

namespace segatt {

struct ErrorCounts {
  long sub = 0;
  long del = 0;
  long ins = 0;
  long ref_len = 0;

  long total() const { return sub + del + ins; }
  double wer() const { return ref_len > 0 ? static_cast<double>(total()) / ref_len : 0.0; }
  ErrorCounts& operator+=(const ErrorCounts& o);
};

// Levenshtein with unit costs. Among minimal alignments the backtrace
// prefers diagonal (match/substitution) over up (deletion) over left
// (insertion), so substitutions win over deletion+insertion pairs.
ErrorCounts edit_distance(const std::vector<int>& ref, const std::vector<int>& hyp);

// Edit-distance alignment as (ref index, hyp index) pairs; -1 marks a gap
// (deletion when hyp side is -1, insertion when ref side is -1).
std::vector<std::pair<int, int>> align_labels(const std::vector<int>& ref,
                                              const std::vector<int>& hyp);

// Silence labels are scored nowhere: both sides are stripped before WER.
std::vector<int> strip_silence(const std::vector<int>& labels, int silence_id);

struct WerReport {
  ErrorCounts counts;
  double search_error_fraction = 0.0;
  int num_sequences = 0;
};
WerReport corpus_wer(const std::vector<SequenceResult>& results, int silence_id);

// Per-label score comparison of ground truth vs recognized sequence
// (deletion/insertion rows marked), plus totals and per-label means.
struct ScoreTable {
  struct Row {
    std::string ref_label;   // "" for insertions
    std::string hyp_label;   // "" for deletions
    double ref_score = 0.0;
    double hyp_score = 0.0;
    bool deletion = false;
    bool insertion = false;
  };
  std::vector<Row> rows;
  double ref_total = 0.0, hyp_total = 0.0;
  double ref_mean = 0.0, hyp_mean = 0.0;
};
ScoreTable score_table(const std::vector<int>& ref_labels, const std::vector<double>& ref_scores,
                       const std::vector<int>& hyp_labels, const std::vector<double>& hyp_scores);

std::string render_score_table(const ScoreTable& t);
std::string score_table_records(const std::string& id, const ScoreTable& t);

// One decode pass per length-model scale; reports WER per alpha and the
// best alpha.
struct SweepRow {
  double alpha = 0.0;
  WerReport report;
};
struct SweepResult {
  std::vector<SweepRow> rows;
  double best_alpha = 0.0;
};
SweepResult sweep(const Model& m, const std::vector<Utterance>& utts,
                  const std::vector<double>& alphas, const DecodeRun& base,
                  const StaticLengthTable* table, int silence_id);

std::string render_sweep(const SweepResult& s);
std::string sweep_records(const SweepResult& s);

}  // namespace segatt
