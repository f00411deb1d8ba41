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

#include "segatt/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <thread>
#include <unordered_map>

#include "segatt/util.hpp"

namespace segatt {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One decision-rule term. Keeping the association identical everywhere
// (score_sequence, both beam searches at segment end, oracle) makes their
// accumulated scores bit-comparable.
inline double step_term(double alpha, double len_lp, double label_lp) {
  return (alpha != 0.0 ? alpha * len_lp : 0.0) + label_lp;
}

}  // namespace

std::string to_string(Recombination r) {
  return r == Recombination::kOff ? "off" : "label_history";
}

Recombination recombination_from_string(const std::string& s) {
  if (s == "off") return Recombination::kOff;
  if (s == "label_history") return Recombination::kLabelHistory;
  fail("unknown recombination setting: '" + s + "' (expected off|label_history)");
}

void SearchConfig::validate() const {
  if (beam_size < 1) fail("search config: beam_size must be >= 1");
  if (delta_max < 1) fail("search config: delta_max must be >= 1");
  if (gamma != 0 && gamma != 1) fail("search config: gamma must be 0 or 1");
  if (!std::isfinite(alpha)) fail("search config: alpha must be finite");
  if (mode == SearchMode::kSimple && length_model != LengthModelKind::kNeural)
    fail("simple search requires the neural length model (got " + to_string(length_model) + ")");
}

// --- scoring -------------------------------------------------------------------

ScoreBreakdown score_sequence(const Model& m, const EncodedSequence& enc,
                              const std::vector<int>& labels, const Segmentation& seg,
                              const SearchConfig& cfg, const StaticLengthTable* table) {
  if (cfg.length_model == LengthModelKind::kStatic && (!table || table->empty()))
    fail("score_sequence: static length model requested but no table given");

  SeqScore label_part = seq_log_prob_raw(m, enc, labels, seg);

  ScoreBreakdown out;
  out.label_log_probs = label_part.label_log_probs;
  out.length_log_probs.assign(labels.size(), 0.0);
  if (cfg.length_model == LengthModelKind::kStatic) {
    for (int s = 0; s < seg.num_segments(); ++s)
      out.length_log_probs[static_cast<std::size_t>(s)] =
          table->log_prob(labels[static_cast<std::size_t>(s)], seg.length(s));
  } else if (cfg.length_model == LengthModelKind::kNeural) {
    std::vector<double> q = length_q_sequence_raw(m, enc, labels, seg);
    for (int s = 0; s < seg.num_segments(); ++s)
      out.length_log_probs[static_cast<std::size_t>(s)] =
          neural_segment_log_prob(q, seg.start_frame(s) - 1, seg.end_frame(s));
  }

  out.raw_sum = 0.0;
  for (std::size_t s = 0; s < labels.size(); ++s)
    out.raw_sum += step_term(cfg.alpha, out.length_log_probs[s], out.label_log_probs[s]);
  out.score = cfg.gamma == 1 ? out.raw_sum / static_cast<double>(labels.size()) : out.raw_sum;
  return out;
}

ScoreBreakdown global_score_sequence(const Model& m, const EncodedSequence& enc,
                                     const std::vector<int>& labels, int gamma) {
  if (m.cfg.eos_id < 0) fail("global_score_sequence: model has no end-of-sequence label");
  ScoreBreakdown out;
  DecoderState state = initial_dec_state_raw(m);
  out.raw_sum = 0.0;
  for (int a : labels) {
    RawStepResult step = label_step_raw(m, enc, state, 1, enc.T);
    double lp = std::log(step.probs[static_cast<std::size_t>(a)]);
    out.label_log_probs.push_back(lp);
    out.raw_sum += lp;
    state = step.state;
    state.prev_label = a;
  }
  RawStepResult eos_step = label_step_raw(m, enc, state, 1, enc.T);
  double eos_lp = std::log(eos_step.probs[static_cast<std::size_t>(m.cfg.eos_id)]);
  out.label_log_probs.push_back(eos_lp);
  out.raw_sum += eos_lp;
  out.score = gamma == 1 ? out.raw_sum / std::max<double>(1.0, static_cast<double>(labels.size()))
                         : out.raw_sum;
  return out;
}

// --- time-synchronous decoding ---------------------------------------------------

namespace {

struct TraceNode {
  std::shared_ptr<const TraceNode> prev;
  int label = -1;
  int boundary = 0;
  double label_lp = 0.0;
  double length_lp = 0.0;
};
using TracePtr = std::shared_ptr<const TraceNode>;

void trace_to_vectors(const TracePtr& trace, std::vector<int>& labels, std::vector<int>& boundaries,
                      std::vector<double>* label_lps, std::vector<double>* length_lps) {
  std::vector<const TraceNode*> chain;
  for (const TraceNode* n = trace.get(); n; n = n->prev.get()) chain.push_back(n);
  std::reverse(chain.begin(), chain.end());
  for (const TraceNode* n : chain) {
    labels.push_back(n->label);
    boundaries.push_back(n->boundary);
    if (label_lps) label_lps->push_back(n->label_lp);
    if (length_lps) length_lps->push_back(n->length_lp);
  }
}

std::vector<int> trace_labels(const TracePtr& trace) {
  std::vector<int> labels, boundaries;
  trace_to_vectors(trace, labels, boundaries, nullptr, nullptr);
  return labels;
}

struct Hyp {
  double score = 0.0;
  int num_labels = 0;
  int seg_start = 0;        // t_{s-1}: boundary that opened the current segment
  double open_len_acc = 0;  // neural: accumulated log(1-q) inside the open segment
  TracePtr trace;
  DecoderState dec;
  bool dec_ready = false;  // dec.lstm_h already consumed dec.prev_label
  LengthState len;
};

double normalized_score(const Hyp& h, int gamma) {
  return gamma == 1 ? h.score / std::max(1, h.num_labels) : h.score;
}

// Total order: higher normalized score first, then lexicographically
// smaller label sequence, then smaller boundary sequence.
bool better_hyp(const Hyp& a, const Hyp& b, int gamma) {
  double na = normalized_score(a, gamma);
  double nb = normalized_score(b, gamma);
  if (na != nb) return na > nb;
  std::vector<int> la, ba, lb, bb;
  trace_to_vectors(a.trace, la, ba, nullptr, nullptr);
  trace_to_vectors(b.trace, lb, bb, nullptr, nullptr);
  if (la != lb) return la < lb;
  return ba < bb;
}

void prune_to_beam(std::vector<Hyp>& hyps, int beam, int gamma) {
  if (static_cast<int>(hyps.size()) <= beam) return;
  std::sort(hyps.begin(), hyps.end(),
            [gamma](const Hyp& a, const Hyp& b) { return better_hyp(a, b, gamma); });
  hyps.resize(static_cast<std::size_t>(beam));
}

// Ensures the decoder LSTM has consumed the hypothesis' previous label.
void ensure_dec_ready(const Model& m, Hyp& h) {
  if (h.dec_ready) return;
  DecoderState advanced;
  dec_advance_raw(m, h.dec, advanced);
  h.dec = std::move(advanced);
  h.dec_ready = true;
}

std::uint64_t label_history_key(const TracePtr& trace) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const TraceNode* n = trace.get(); n; n = n->prev.get()) {
    std::uint64_t x = static_cast<std::uint64_t>(n->label) + 1;
    h ^= x;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Viterbi recombination: among segment-ended hypotheses with the same label
// history keep the best-scoring one (ties: smaller boundary sequence).
void recombine_label_history(std::vector<Hyp>& hyps, int gamma) {
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  buckets.reserve(hyps.size());
  std::vector<char> keep(hyps.size(), 1);
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    std::uint64_t key = label_history_key(hyps[i].trace);
    auto& bucket = buckets[key];
    bool merged = false;
    for (std::size_t& j : bucket) {
      if (trace_labels(hyps[j].trace) != trace_labels(hyps[i].trace)) continue;  // hash collision
      if (better_hyp(hyps[i], hyps[j], gamma)) {
        keep[j] = 0;
        j = i;
      } else {
        keep[i] = 0;
      }
      merged = true;
      break;
    }
    if (!merged) bucket.push_back(i);
  }
  std::vector<Hyp> out;
  out.reserve(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i)
    if (keep[i]) out.push_back(std::move(hyps[i]));
  hyps = std::move(out);
}

DecodeResult result_from_hyp(const Hyp& h, int gamma) {
  DecodeResult out;
  trace_to_vectors(h.trace, out.labels, out.boundaries, &out.label_scores, &out.length_scores);
  out.raw_sum = h.score;
  out.score = normalized_score(h, gamma);
  return out;
}

// Shared frame loop of the two time-synchronous decoders. `joint_pruning`
// selects the simple-search variant (all hypotheses pruned together,
// framewise length contribution, no recombination).
DecodeResult time_sync_search(const Model& m, const EncodedSequence& enc, const SearchConfig& cfg,
                              const StaticLengthTable* table, bool joint_pruning) {
  cfg.validate();
  bool neural = cfg.length_model == LengthModelKind::kNeural;
  if (neural && m.cfg.length_model != LengthModelKind::kNeural)
    fail("search: neural length model requested but the model has none");
  if (cfg.length_model == LengthModelKind::kStatic && (!table || table->empty()))
    fail("search: static length model requested but no table given");

  int blank = m.cfg.blank_id();
  std::vector<Hyp> active;
  {
    Hyp init;
    init.dec = initial_dec_state_raw(m);
    if (neural) init.len = initial_length_state(m);
    active.push_back(std::move(init));
  }

  std::vector<double> ctx, weights, probs;
  for (int t = 1; t <= enc.T; ++t) {
    std::vector<Hyp> closed;
    std::vector<Hyp> open;
    for (Hyp& h : active) {
      // All active hypotheses are at the same frame (time-synchronous).
      double q_t = 0.0;
      if (neural) {
        int omega_prev = (h.num_labels > 0 && h.seg_start == t - 1) ? h.trace->label : blank;
        q_t = length_q_raw(m, enc, t, omega_prev, h.len);
      }
      int delta = t - h.seg_start;

      // End the open segment at t and emit a label.
      ensure_dec_ready(m, h);
      attend_raw(m, enc, h.dec.lstm_h, h.seg_start + 1, t, ctx, weights);
      readout_raw(m, h.dec.lstm_h, ctx, probs);
      for (int a = 0; a < m.cfg.vocab_size; ++a) {
        if (a == m.cfg.eos_id) continue;
        double len_lp;
        switch (cfg.length_model) {
          case LengthModelKind::kNone: len_lp = 0.0; break;
          case LengthModelKind::kStatic: len_lp = table->log_prob(a, delta); break;
          default: len_lp = h.open_len_acc + std::log(q_t); break;
        }
        double label_lp = std::log(probs[static_cast<std::size_t>(a)]);
        // In joint (simple) pruning the framewise log(1-q) part already sits
        // in h.score; only the end-frame term is added here.
        double add = joint_pruning ? step_term(cfg.alpha, std::log(q_t), label_lp)
                                   : step_term(cfg.alpha, len_lp, label_lp);
        double score = h.score + add;
        if (!std::isfinite(score)) continue;
        Hyp child;
        child.score = score;
        child.num_labels = h.num_labels + 1;
        child.seg_start = t;
        child.open_len_acc = 0.0;
        auto node = std::make_shared<TraceNode>();
        node->prev = h.trace;
        node->label = a;
        node->boundary = t;
        node->label_lp = label_lp;
        node->length_lp = len_lp;
        child.trace = std::move(node);
        child.dec.lstm_h = h.dec.lstm_h;
        child.dec.lstm_c = h.dec.lstm_c;
        child.dec.prev_context = m.cfg.ctx_dependency
                                     ? ctx
                                     : std::vector<double>(static_cast<std::size_t>(m.cfg.enc_out_dim()), 0.0);
        child.dec.prev_label = a;
        child.dec_ready = false;
        if (neural) child.len = h.len;
        closed.push_back(std::move(child));
      }

      // Keep the segment open past t (not at the last frame, not past delta_max).
      if (t < enc.T && delta < cfg.delta_max) {
        Hyp cont = std::move(h);
        if (neural) {
          double lg = std::log(1.0 - q_t);
          cont.open_len_acc += lg;
          if (joint_pruning && cfg.alpha != 0.0) cont.score += cfg.alpha * lg;
        }
        if (std::isfinite(cont.score) && std::isfinite(cont.open_len_acc))
          open.push_back(std::move(cont));
      }
    }

    if (joint_pruning) {
      active = std::move(closed);
      active.insert(active.end(), std::make_move_iterator(open.begin()),
                    std::make_move_iterator(open.end()));
      prune_to_beam(active, cfg.beam_size, cfg.gamma);
    } else {
      if (cfg.recombination == Recombination::kLabelHistory) recombine_label_history(closed, cfg.gamma);
      prune_to_beam(closed, cfg.beam_size, cfg.gamma);
      active = std::move(closed);
      active.insert(active.end(), std::make_move_iterator(open.begin()),
                    std::make_move_iterator(open.end()));
    }
    if (active.empty())
      fail("search: empty beam at frame " + std::to_string(t) + " (no finite hypothesis)");
  }

  // Only hypotheses whose segment closed at T are final.
  const Hyp* best = nullptr;
  for (const Hyp& h : active) {
    if (h.seg_start != enc.T) continue;
    if (!best || better_hyp(h, *best, cfg.gamma)) best = &h;
  }
  if (!best) fail("search: no final hypothesis reached frame T with a closed segment");
  return result_from_hyp(*best, cfg.gamma);
}

}  // namespace

DecodeResult segmental_search(const Model& m, const EncodedSequence& enc, const SearchConfig& cfg,
                              const StaticLengthTable* table) {
  if (cfg.mode != SearchMode::kSegmental)
    fail("segmental_search called with mode " + to_string(cfg.mode));
  return time_sync_search(m, enc, cfg, table, /*joint_pruning=*/false);
}

DecodeResult simple_search(const Model& m, const EncodedSequence& enc, const SearchConfig& cfg) {
  if (cfg.mode != SearchMode::kSimple) fail("simple_search called with mode " + to_string(cfg.mode));
  return time_sync_search(m, enc, cfg, nullptr, /*joint_pruning=*/true);
}

// --- oracle ----------------------------------------------------------------------

namespace {

struct OracleBest {
  bool found = false;
  double raw_sum = kNegInf;
  double score = kNegInf;
  std::vector<int> labels;
  std::vector<int> boundaries;
  std::vector<double> label_lps;
  std::vector<double> length_lps;
};

struct OracleCtx {
  const Model& m;
  const EncodedSequence& enc;
  const SearchConfig& cfg;
  const StaticLengthTable* table;
  bool neural;
  OracleBest best;
  std::vector<int> labels;
  std::vector<int> boundaries;
  std::vector<double> label_lps;
  std::vector<double> length_lps;
};

void oracle_rec(OracleCtx& o, int t, const DecoderState& dec, const LengthState& len,
                double score) {
  DecoderState advanced;
  dec_advance_raw(o.m, dec, advanced);

  int blank = o.m.cfg.blank_id();
  int last_label = o.labels.empty() ? -1 : o.labels.back();
  LengthState len_cursor = len;
  double len_acc = 0.0;

  std::vector<double> ctx, weights, probs;
  int hi_max = std::min(o.enc.T, t + o.cfg.delta_max);
  for (int hi = t + 1; hi <= hi_max; ++hi) {
    double q_hi = 0.0;
    if (o.neural) {
      int omega_prev = (hi == t + 1 && !o.labels.empty()) ? last_label : blank;
      q_hi = length_q_raw(o.m, o.enc, hi, omega_prev, len_cursor);
    }
    attend_raw(o.m, o.enc, advanced.lstm_h, t + 1, hi, ctx, weights);
    readout_raw(o.m, advanced.lstm_h, ctx, probs);

    for (int a = 0; a < o.m.cfg.vocab_size; ++a) {
      if (a == o.m.cfg.eos_id) continue;
      double len_lp;
      switch (o.cfg.length_model) {
        case LengthModelKind::kNone: len_lp = 0.0; break;
        case LengthModelKind::kStatic: len_lp = o.table->log_prob(a, hi - t); break;
        default: len_lp = len_acc + std::log(q_hi); break;
      }
      double label_lp = std::log(probs[static_cast<std::size_t>(a)]);
      double child_score = score + step_term(o.cfg.alpha, len_lp, label_lp);
      if (!std::isfinite(child_score)) continue;

      o.labels.push_back(a);
      o.boundaries.push_back(hi);
      o.label_lps.push_back(label_lp);
      o.length_lps.push_back(len_lp);
      if (hi == o.enc.T) {
        double norm = o.cfg.gamma == 1
                          ? child_score / static_cast<double>(o.labels.size())
                          : child_score;
        bool take = !o.best.found || norm > o.best.score ||
                    (norm == o.best.score &&
                     (o.labels < o.best.labels ||
                      (o.labels == o.best.labels && o.boundaries < o.best.boundaries)));
        if (take) {
          o.best.found = true;
          o.best.raw_sum = child_score;
          o.best.score = norm;
          o.best.labels = o.labels;
          o.best.boundaries = o.boundaries;
          o.best.label_lps = o.label_lps;
          o.best.length_lps = o.length_lps;
        }
      } else {
        DecoderState child_dec;
        child_dec.lstm_h = advanced.lstm_h;
        child_dec.lstm_c = advanced.lstm_c;
        child_dec.prev_context =
            o.m.cfg.ctx_dependency
                ? ctx
                : std::vector<double>(static_cast<std::size_t>(o.m.cfg.enc_out_dim()), 0.0);
        child_dec.prev_label = a;
        oracle_rec(o, hi, child_dec, len_cursor, child_score);
      }
      o.labels.pop_back();
      o.boundaries.pop_back();
      o.label_lps.pop_back();
      o.length_lps.pop_back();
    }
    if (o.neural) len_acc += std::log(1.0 - q_hi);
  }
}

}  // namespace

DecodeResult oracle_search(const Model& m, const EncodedSequence& enc, const SearchConfig& cfg,
                           const StaticLengthTable* table) {
  cfg.validate();
  int usable_vocab = m.cfg.vocab_size - (m.cfg.eos_id >= 0 ? 1 : 0);
  if (enc.T > 8 || usable_vocab > 4 || cfg.delta_max > 4)
    fail("oracle search: instance too large (T=" + std::to_string(enc.T) + ", vocab=" +
         std::to_string(usable_vocab) + ", delta_max=" + std::to_string(cfg.delta_max) +
         "); limits are T<=8, vocab<=4, delta_max<=4");
  if (cfg.length_model == LengthModelKind::kStatic && (!table || table->empty()))
    fail("oracle search: static length model requested but no table given");
  bool neural = cfg.length_model == LengthModelKind::kNeural;
  if (neural && m.cfg.length_model != LengthModelKind::kNeural)
    fail("oracle search: neural length model requested but the model has none");

  OracleCtx o{m, enc, cfg, table, neural, {}, {}, {}, {}, {}};
  DecoderState dec = initial_dec_state_raw(m);
  LengthState len;
  if (neural) len = initial_length_state(m);
  oracle_rec(o, 0, dec, len, 0.0);
  if (!o.best.found) fail("oracle search: no finite-score sequence exists");

  DecodeResult out;
  out.labels = o.best.labels;
  out.boundaries = o.best.boundaries;
  out.raw_sum = o.best.raw_sum;
  out.score = o.best.score;
  out.label_scores = o.best.label_lps;
  out.length_scores = o.best.length_lps;
  return out;
}

// --- global label-synchronous decoding ---------------------------------------------

DecodeResult global_search(const Model& m, const EncodedSequence& enc, int beam_size, int gamma,
                           int max_labels) {
  if (m.cfg.eos_id < 0) fail("global search: model has no end-of-sequence label");
  if (beam_size < 1) fail("global search: beam_size must be >= 1");

  struct GHyp {
    double score = 0.0;
    std::vector<int> labels;
    std::vector<double> label_lps;
    DecoderState dec;
  };
  auto norm = [gamma](double score, std::size_t n) {
    return gamma == 1 ? score / std::max<double>(1.0, static_cast<double>(n)) : score;
  };
  auto better = [&](double sa, const std::vector<int>& la, double sb, const std::vector<int>& lb) {
    if (sa != sb) return sa > sb;
    return la < lb;
  };

  std::vector<GHyp> open;
  {
    GHyp init;
    init.dec = initial_dec_state_raw(m);
    open.push_back(std::move(init));
  }
  bool have_final = false;
  GHyp final_best;
  double final_norm = kNegInf;

  for (int step = 0; step <= max_labels && !open.empty(); ++step) {
    std::vector<GHyp> next;
    for (GHyp& h : open) {
      RawStepResult sr = label_step_raw(m, enc, h.dec, 1, enc.T);
      // end-of-sequence branch finalizes the hypothesis
      double eos_lp = std::log(sr.probs[static_cast<std::size_t>(m.cfg.eos_id)]);
      double fs = h.score + eos_lp;
      if (std::isfinite(fs)) {
        double fn = norm(fs, h.labels.size());
        if (!have_final || better(fn, h.labels, final_norm, final_best.labels)) {
          have_final = true;
          final_norm = fn;
          final_best = h;
          final_best.score = fs;
          final_best.label_lps.push_back(eos_lp);
        }
      }
      if (step == max_labels) continue;  // length cap: only EOS allowed
      for (int a = 0; a < m.cfg.vocab_size; ++a) {
        if (a == m.cfg.eos_id) continue;
        double lp = std::log(sr.probs[static_cast<std::size_t>(a)]);
        double score = h.score + lp;
        if (!std::isfinite(score)) continue;
        GHyp child;
        child.score = score;
        child.labels = h.labels;
        child.labels.push_back(a);
        child.label_lps = h.label_lps;
        child.label_lps.push_back(lp);
        child.dec = sr.state;
        child.dec.prev_label = a;
        next.push_back(std::move(child));
      }
    }
    std::sort(next.begin(), next.end(), [&](const GHyp& a, const GHyp& b) {
      double na = norm(a.score, a.labels.size());
      double nb = norm(b.score, b.labels.size());
      if (na != nb) return na > nb;
      return a.labels < b.labels;
    });
    if (static_cast<int>(next.size()) > beam_size) next.resize(static_cast<std::size_t>(beam_size));
    open = std::move(next);
  }
  if (!have_final) fail("global search: no finished hypothesis");

  DecodeResult out;
  out.labels = final_best.labels;
  out.label_scores = final_best.label_lps;  // includes the final EOS step
  out.raw_sum = final_best.score;
  out.score = final_norm;
  return out;
}

// --- corpus driver ------------------------------------------------------------------

std::vector<SequenceResult> decode_corpus(const Model& m, const std::vector<Utterance>& utts,
                                          const DecodeRun& run, const StaticLengthTable* table) {
  std::vector<Utterance> work = concat_sequences(utts, run.concat);
  std::vector<SequenceResult> results(work.size());

  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= work.size()) return;
      const Utterance& u = work[i];
      SequenceResult& r = results[i];
      r.id = u.features.id;
      r.ref_labels = u.labels;
      r.ref_boundaries = u.boundaries;

      FeatureView view{u.features.frames.data(), u.features.t_input(), u.features.input_dim};
      EncodedSequence enc = encode_raw(m, view);
      if (m.cfg.window_mode == WindowMode::kGlobal) {
        int cap = 2 * enc.T + 5;
        r.hyp = global_search(m, enc, run.search.beam_size, run.search.gamma, cap);
        r.truth_score = global_score_sequence(m, enc, r.ref_labels, run.search.gamma).score;
        r.hyp_score = global_score_sequence(m, enc, r.hyp.labels, run.search.gamma).score;
      } else {
        if (u.t_down() != enc.T)
          fail("decode: alignment length " + std::to_string(u.t_down()) +
               " does not match encoder length " + std::to_string(enc.T) + " for " + u.features.id);
        switch (run.search.mode) {
          case SearchMode::kSegmental: r.hyp = segmental_search(m, enc, run.search, table); break;
          case SearchMode::kSimple: r.hyp = simple_search(m, enc, run.search); break;
          case SearchMode::kOracle: r.hyp = oracle_search(m, enc, run.search, table); break;
        }
        Segmentation ref_seg(u.boundaries, enc.T);
        r.truth_score = score_sequence(m, enc, u.labels, ref_seg, run.search, table).score;
        Segmentation hyp_seg(r.hyp.boundaries, enc.T);
        r.hyp_score = score_sequence(m, enc, r.hyp.labels, hyp_seg, run.search, table).score;
      }
      r.search_error = r.truth_score > r.hyp_score;
    }
  };

  int jobs = std::max(1, run.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return results;
}

double count_search_errors(const std::vector<SequenceResult>& results) {
  if (results.empty()) return 0.0;
  long errors = 0;
  for (const auto& r : results) errors += r.search_error ? 1 : 0;
  return static_cast<double>(errors) / static_cast<double>(results.size());
}

}  // namespace segatt
