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

#include "segatt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "segatt/util.hpp"

namespace segatt {

ErrorCounts& ErrorCounts::operator+=(const ErrorCounts& o) {
  sub += o.sub;
  del += o.del;
  ins += o.ins;
  ref_len += o.ref_len;
  return *this;
}

namespace {

// Full DP table; backtrace preference: diagonal, up (deletion), left
// (insertion).
std::vector<std::pair<int, int>> align_impl(const std::vector<int>& ref,
                                            const std::vector<int>& hyp) {
  std::size_t n = ref.size(), m = hyp.size();
  std::vector<int> dp((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& { return dp[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      int diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      int up = at(i - 1, j) + 1;
      int left = at(i, j - 1) + 1;
      at(i, j) = std::min(diag, std::min(up, left));
    }

  std::vector<std::pair<int, int>> pairs;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        at(i, j) == at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      pairs.emplace_back(static_cast<int>(i) - 1, static_cast<int>(j) - 1);
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      pairs.emplace_back(static_cast<int>(i) - 1, -1);
      --i;
    } else {
      pairs.emplace_back(-1, static_cast<int>(j) - 1);
      --j;
    }
  }
  std::reverse(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace

std::vector<std::pair<int, int>> align_labels(const std::vector<int>& ref,
                                              const std::vector<int>& hyp) {
  return align_impl(ref, hyp);
}

ErrorCounts edit_distance(const std::vector<int>& ref, const std::vector<int>& hyp) {
  ErrorCounts c;
  c.ref_len = static_cast<long>(ref.size());
  for (const auto& [ri, hi] : align_impl(ref, hyp)) {
    if (ri < 0)
      c.ins += 1;
    else if (hi < 0)
      c.del += 1;
    else if (ref[static_cast<std::size_t>(ri)] != hyp[static_cast<std::size_t>(hi)])
      c.sub += 1;
  }
  return c;
}

std::vector<int> strip_silence(const std::vector<int>& labels, int silence_id) {
  if (silence_id < 0) return labels;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int a : labels)
    if (a != silence_id) out.push_back(a);
  return out;
}

WerReport corpus_wer(const std::vector<SequenceResult>& results, int silence_id) {
  WerReport rep;
  rep.num_sequences = static_cast<int>(results.size());
  long errors = 0;
  for (const auto& r : results) {
    rep.counts += edit_distance(strip_silence(r.ref_labels, silence_id),
                                strip_silence(r.hyp.labels, silence_id));
    errors += r.search_error ? 1 : 0;
  }
  rep.search_error_fraction =
      results.empty() ? 0.0 : static_cast<double>(errors) / static_cast<double>(results.size());
  return rep;
}

ScoreTable score_table(const std::vector<int>& ref_labels, const std::vector<double>& ref_scores,
                       const std::vector<int>& hyp_labels, const std::vector<double>& hyp_scores) {
  if (ref_labels.size() != ref_scores.size() || hyp_labels.size() != hyp_scores.size())
    fail("score_table: labels and scores must align");
  ScoreTable t;
  for (const auto& [ri, hi] : align_impl(ref_labels, hyp_labels)) {
    ScoreTable::Row row;
    if (ri >= 0) {
      row.ref_label = std::to_string(ref_labels[static_cast<std::size_t>(ri)]);
      row.ref_score = ref_scores[static_cast<std::size_t>(ri)];
      t.ref_total += row.ref_score;
    }
    if (hi >= 0) {
      row.hyp_label = std::to_string(hyp_labels[static_cast<std::size_t>(hi)]);
      row.hyp_score = hyp_scores[static_cast<std::size_t>(hi)];
      t.hyp_total += row.hyp_score;
    }
    row.deletion = hi < 0;
    row.insertion = ri < 0;
    t.rows.push_back(row);
  }
  t.ref_mean = ref_labels.empty() ? 0.0 : t.ref_total / static_cast<double>(ref_labels.size());
  t.hyp_mean = hyp_labels.empty() ? 0.0 : t.hyp_total / static_cast<double>(hyp_labels.size());
  return t;
}

std::string render_score_table(const ScoreTable& t) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s %12s | %-10s %12s\n", "ref", "log p(a|..)", "hyp",
                "log p(a|..)");
  os << buf;
  os << std::string(50, '-') << "\n";
  for (const auto& r : t.rows) {
    std::string ref = r.insertion ? "(ins)" : r.ref_label;
    std::string hyp = r.deletion ? "(del)" : r.hyp_label;
    std::snprintf(buf, sizeof(buf), "%-10s %12s | %-10s %12s\n", ref.c_str(),
                  r.insertion ? "" : format_double(r.ref_score).substr(0, 12).c_str(), hyp.c_str(),
                  r.deletion ? "" : format_double(r.hyp_score).substr(0, 12).c_str());
    os << buf;
  }
  os << std::string(50, '-') << "\n";
  os << "sum      ref=" << format_double(t.ref_total) << " hyp=" << format_double(t.hyp_total)
     << "\n";
  os << "sum/S    ref=" << format_double(t.ref_mean) << " hyp=" << format_double(t.hyp_mean)
     << "\n";
  return os.str();
}

std::string score_table_records(const std::string& id, const ScoreTable& t) {
  std::ostringstream os;
  for (const auto& r : t.rows) {
    os << "score id=" << id << " ref=" << (r.insertion ? "-" : r.ref_label)
       << " hyp=" << (r.deletion ? "-" : r.hyp_label)
       << " ref_lp=" << (r.insertion ? "-" : format_double(r.ref_score))
       << " hyp_lp=" << (r.deletion ? "-" : format_double(r.hyp_score)) << "\n";
  }
  os << "score_total id=" << id << " ref_sum=" << format_double(t.ref_total)
     << " hyp_sum=" << format_double(t.hyp_total) << " ref_mean=" << format_double(t.ref_mean)
     << " hyp_mean=" << format_double(t.hyp_mean) << "\n";
  return os.str();
}

SweepResult sweep(const Model& m, const std::vector<Utterance>& utts,
                  const std::vector<double>& alphas, const DecodeRun& base,
                  const StaticLengthTable* table, int silence_id) {
  if (alphas.empty()) fail("sweep: no length-model scales given");
  SweepResult out;
  double best_wer = std::numeric_limits<double>::infinity();
  for (double alpha : alphas) {
    DecodeRun run = base;
    run.search.alpha = alpha;
    // alpha = 0 is exactly the no-length-model condition.
    if (alpha == 0.0) run.search.length_model = LengthModelKind::kNone;
    std::vector<SequenceResult> results = decode_corpus(m, utts, run, table);
    SweepRow row;
    row.alpha = alpha;
    row.report = corpus_wer(results, silence_id);
    if (row.report.counts.wer() < best_wer) {
      best_wer = row.report.counts.wer();
      out.best_alpha = alpha;
    }
    out.rows.push_back(row);
  }
  return out;
}

std::string render_sweep(const SweepResult& s) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%8s %8s %6s %6s %6s %8s\n", "alpha", "WER%", "S", "D", "I",
                "SE%");
  os << buf;
  for (const auto& r : s.rows) {
    std::snprintf(buf, sizeof(buf), "%8.3f %8.2f %6ld %6ld %6ld %8.2f\n", r.alpha,
                  100.0 * r.report.counts.wer(), r.report.counts.sub, r.report.counts.del,
                  r.report.counts.ins, 100.0 * r.report.search_error_fraction);
    os << buf;
  }
  os << "best_alpha " << format_double(s.best_alpha) << "\n";
  return os.str();
}

std::string sweep_records(const SweepResult& s) {
  std::ostringstream os;
  for (const auto& r : s.rows) {
    os << "sweep alpha=" << format_double(r.alpha)
       << " wer=" << format_double(r.report.counts.wer()) << " sub=" << r.report.counts.sub
       << " del=" << r.report.counts.del << " ins=" << r.report.counts.ins
       << " se=" << format_double(r.report.search_error_fraction) << "\n";
  }
  os << "sweep_best alpha=" << format_double(s.best_alpha) << "\n";
  return os.str();
}

}  // namespace segatt
