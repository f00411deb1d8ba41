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

#include "segatt/verify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "segatt/checkpoint.hpp"
#include "segatt/length_model.hpp"
#include "segatt/search.hpp"
#include "segatt/train.hpp"
#include "segatt/util.hpp"

namespace segatt {

ModelConfig tiny_model_config(int vocab, LengthModelKind kind, bool ctx_dependency) {
  ModelConfig cfg;
  cfg.input_dim = 3;
  cfg.enc_layers = 1;
  cfg.enc_dim = 3;
  cfg.pool_factors = {1};
  cfg.dec_dim = 4;
  cfg.att_dim = 4;
  cfg.readout_dim = 4;
  cfg.vocab_size = vocab;
  cfg.window_mode = WindowMode::kSegmental;
  cfg.ctx_dependency = ctx_dependency;
  cfg.length_model = kind;
  cfg.len_dim = 4;
  cfg.len_emb_dim = 3;
  return cfg;
}

Model tiny_model(int vocab, LengthModelKind kind, bool ctx_dependency, std::uint64_t seed) {
  Rng rng = SeedStreams(seed).stream("init");
  return build_model(tiny_model_config(vocab, kind, ctx_dependency), rng);
}

std::vector<double> random_features(int t_input, int dim, std::uint64_t seed) {
  Rng rng = SeedStreams(seed).stream("features");
  std::vector<double> x(static_cast<std::size_t>(t_input) * dim);
  for (auto& v : x) v = rng.normal();
  return x;
}

double max_grad_rel_error(Model& m, const std::function<Tensor()>& loss_fn, double eps) {
  zero_grad(m.params);
  Tensor loss = loss_fn();
  backward(loss);

  double worst = 0.0;
  for (auto& p : m.params) {
    if (!p.trainable) continue;
    p.value->ensure_grad();
    for (std::size_t i = 0; i < p.value->data.size(); ++i) {
      double saved = p.value->data[i];
      p.value->data[i] = saved + eps;
      double up = loss_fn()->data[0];
      p.value->data[i] = saved - eps;
      double down = loss_fn()->data[0];
      p.value->data[i] = saved;
      double fd = (up - down) / (2.0 * eps);
      double bp = p.value->grad[i];
      double denom = std::max({std::abs(fd), std::abs(bp), 1e-6});
      worst = std::max(worst, std::abs(fd - bp) / denom);
    }
  }
  return worst;
}

namespace {

Utterance tiny_utterance(const Model& m, int t, std::uint64_t seed) {
  Rng rng = SeedStreams(seed).stream("utt");
  Utterance u;
  u.features.id = "tiny";
  u.features.input_dim = m.cfg.input_dim;
  int t_input = t * m.cfg.total_downsample();
  u.features.frames.resize(static_cast<std::size_t>(t_input) * m.cfg.input_dim);
  for (auto& v : u.features.frames) v = rng.normal();
  int pos = 0;
  while (pos < t) {
    int len = std::min(t - pos, rng.uniform_int(1, 3));
    pos += len;
    u.labels.push_back(rng.uniform_int(0, m.cfg.vocab_size - 1));
    u.boundaries.push_back(pos);
    u.is_silence.push_back(0);
  }
  return u;
}

struct GridStats {
  int total = 0;
  int matches = 0;
  std::string first_mismatch;
};

bool scores_close(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

// Beam-vs-oracle equivalence over small instances. Saturating beams make
// both decoders explore the full (delta_max-capped) hypothesis space.
GridStats oracle_grid(LengthModelKind kind, SearchMode mode, Recombination recomb,
                      const std::vector<int>& ts, const std::vector<int>& vocabs,
                      const std::vector<int>& deltas, int seeds) {
  GridStats stats;
  for (int t : ts)
    for (int vocab : vocabs)
      for (int delta : deltas)
        for (int seed = 0; seed < seeds; ++seed) {
          std::uint64_t s = fnv1a("grid") + static_cast<std::uint64_t>(seed) * 7919 + t * 131 +
                            vocab * 17 + delta;
          Model m = tiny_model(vocab, kind, /*ctx_dependency=*/false, s);
          std::vector<double> x = random_features(t, m.cfg.input_dim, s ^ 0x5eedULL);
          EncodedSequence enc =
              encode_raw(m, FeatureView{x.data(), t, m.cfg.input_dim});

          StaticLengthTable table;
          if (kind == LengthModelKind::kStatic) {
            // A small synthetic table exercises label-dependent lengths.
            table.vocab_size = vocab;
            table.delta_max = delta;
            Rng trng(s ^ 0xabcdULL);
            for (int a = 0; a < vocab; ++a) {
              double mu = trng.uniform(1.0, static_cast<double>(delta));
              double z = 0.0;
              for (int dt = 1; dt <= delta; ++dt) z += std::exp(-std::abs(mu - dt));
              table.mu.push_back(mu);
              table.log_z.push_back(std::log(z));
            }
          }

          SearchConfig cfg;
          cfg.mode = SearchMode::kOracle;
          cfg.alpha = 1.0;
          cfg.gamma = 0;
          cfg.delta_max = delta;
          cfg.length_model = kind;
          DecodeResult oracle = oracle_search(m, enc, cfg, &table);

          cfg.mode = mode;
          cfg.beam_size = 1 << 28;  // saturating
          cfg.recombination = recomb;
          DecodeResult got = mode == SearchMode::kSimple ? simple_search(m, enc, cfg)
                                                         : segmental_search(m, enc, cfg, &table);
          ++stats.total;
          bool ok = got.labels == oracle.labels && got.boundaries == oracle.boundaries &&
                    scores_close(got.score, oracle.score);
          if (ok) {
            ++stats.matches;
          } else if (stats.first_mismatch.empty()) {
            std::ostringstream os;
            os << "T=" << t << " vocab=" << vocab << " delta=" << delta << " seed=" << seed;
            stats.first_mismatch = os.str();
          }
        }
  return stats;
}

void push(std::vector<VerifyCheck>& checks, const std::string& name, bool pass,
          const std::string& detail) {
  checks.push_back({name, pass, detail});
}

}  // namespace

std::vector<VerifyCheck> run_verification_suite(std::uint64_t seed, const std::string& scratch_dir) {
  std::vector<VerifyCheck> checks;
  char buf[256];

  // -- gradient checks ----------------------------------------------------
  {
    Model m = tiny_model(3, LengthModelKind::kNeural, /*ctx_dependency=*/true, seed);
    Utterance u = tiny_utterance(m, 6, seed);
    auto loss_fn = [&]() { return sequence_loss(m, u, /*with_length=*/true).total; };
    double err = max_grad_rel_error(m, loss_fn, 1e-5);
    std::snprintf(buf, sizeof(buf), "max rel err %.3e (tol 1e-4)", err);
    push(checks, "grad.full_segmental_loss", err < 1e-4, buf);
  }
  {
    Model m = tiny_model(3, LengthModelKind::kNone, /*ctx_dependency=*/true, seed + 1);
    ModelConfig cfg = m.cfg;
    cfg.window_mode = WindowMode::kGlobal;
    cfg.vocab_size += 1;
    cfg.eos_id = cfg.vocab_size - 1;
    Rng rng = SeedStreams(seed + 1).stream("init");
    Model g = build_model(cfg, rng);
    Utterance u = tiny_utterance(g, 5, seed + 1);
    auto loss_fn = [&]() { return sequence_loss(g, u, false).total; };
    double err = max_grad_rel_error(g, loss_fn, 1e-5);
    std::snprintf(buf, sizeof(buf), "max rel err %.3e (tol 1e-4)", err);
    push(checks, "grad.global_loss", err < 1e-4, buf);
  }

  // -- normalization identities --------------------------------------------
  {
    Model m = tiny_model(3, LengthModelKind::kNeural, true, seed + 2);
    std::vector<double> x = random_features(7, m.cfg.input_dim, seed + 2);
    EncodedSequence enc = encode_raw(m, FeatureView{x.data(), 7, m.cfg.input_dim});
    DecoderState st = initial_dec_state_raw(m);
    DecoderState adv;
    dec_advance_raw(m, st, adv);
    std::vector<double> ctx, w;
    double worst = 0.0;
    for (int lo = 1; lo <= enc.T; ++lo)
      for (int hi = lo; hi <= enc.T; ++hi) {
        attend_raw(m, enc, adv.lstm_h, lo, hi, ctx, w);
        double sum = 0.0;
        for (double v : w) sum += v;
        worst = std::max(worst, std::abs(sum - 1.0));
      }
    std::snprintf(buf, sizeof(buf), "max |sum-1| = %.3e (tol 1e-12)", worst);
    push(checks, "norm.attention_weights", worst <= 1e-12, buf);

    std::vector<double> probs;
    readout_raw(m, adv.lstm_h, ctx, probs);
    double sum = 0.0;
    for (double v : probs) sum += v;
    std::snprintf(buf, sizeof(buf), "|sum-1| = %.3e (tol 1e-12)", std::abs(sum - 1.0));
    push(checks, "norm.label_distribution", std::abs(sum - 1.0) <= 1e-12, buf);

    // telescoping: 1 - sum_t p(end at t) == prod_t (1-q_t)
    std::vector<int> labels{0, 1};
    Segmentation seg({3, enc.T}, enc.T);
    std::vector<double> q = length_q_sequence_raw(m, enc, labels, seg);
    double worst_tel = 0.0;
    for (int horizon = 1; horizon <= enc.T; ++horizon) {
      double mass = 0.0;
      for (int t = 1; t <= horizon; ++t) mass += std::exp(neural_segment_log_prob(q, 0, t));
      double prod = 1.0;
      for (int t = 1; t <= horizon; ++t) prod *= 1.0 - q[static_cast<std::size_t>(t) - 1];
      worst_tel = std::max(worst_tel, std::abs((1.0 - mass) - prod));
    }
    std::snprintf(buf, sizeof(buf), "max defect %.3e (tol 1e-10)", worst_tel);
    push(checks, "norm.neural_telescoping", worst_tel <= 1e-10, buf);
  }
  {
    std::vector<std::pair<std::vector<int>, std::vector<int>>> alignments{
        {{0, 1, 0}, {2, 4, 8}}, {{1, 2}, {3, 8}}, {{2, 0}, {5, 8}}};
    StaticLengthTable table = estimate_static_length(alignments, 3, 12);
    double worst = 0.0;
    for (int a = 0; a < 3; ++a) {
      double sum = 0.0;
      for (int dt = 1; dt <= table.delta_max; ++dt) sum += std::exp(table.log_prob(a, dt));
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    std::snprintf(buf, sizeof(buf), "max |sum-1| = %.3e (tol 1e-12)", worst);
    push(checks, "norm.static_length", worst <= 1e-12, buf);
  }

  // -- oracle equivalence (small grid; the acceptance suite runs the full one)
  {
    GridStats s = oracle_grid(LengthModelKind::kNone, SearchMode::kSegmental,
                              Recombination::kLabelHistory, {2, 4, 6}, {2, 3}, {2, 3}, 3);
    std::snprintf(buf, sizeof(buf), "%d/%d matched%s%s", s.matches, s.total,
                  s.first_mismatch.empty() ? "" : "; first mismatch ", s.first_mismatch.c_str());
    push(checks, "oracle.segmental_none", s.matches == s.total, buf);
  }
  {
    GridStats s = oracle_grid(LengthModelKind::kNeural, SearchMode::kSimple, Recombination::kOff,
                              {2, 4, 6}, {2, 3}, {2, 3}, 3);
    std::snprintf(buf, sizeof(buf), "%d/%d matched%s%s", s.matches, s.total,
                  s.first_mismatch.empty() ? "" : "; first mismatch ", s.first_mismatch.c_str());
    push(checks, "oracle.simple_neural", s.matches == s.total, buf);
  }

  // -- checkpoint integrity --------------------------------------------------
  {
    Model m = tiny_model(3, LengthModelKind::kNeural, true, seed + 3);
    make_dirs(scratch_dir);
    std::string path = scratch_dir + "/verify.ckpt";
    save_checkpoint(path, make_checkpoint(m, nullptr));
    Checkpoint loaded = load_checkpoint(path);
    Model m2 = model_from_checkpoint(loaded);
    bool same = true;
    for (std::size_t i = 0; i < m.params.size(); ++i)
      same = same && m.params[i].value->data == m2.params[i].value->data;
    push(checks, "ckpt.roundtrip", same, same ? "bit-exact" : "parameter mismatch after round-trip");

    // flip one payload byte; the loader must reject the file
    std::string bytes = read_file(path);
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x01);
    std::string corrupted = scratch_dir + "/verify_corrupt.ckpt";
    write_file(corrupted, bytes);
    bool rejected = false;
    std::string msg;
    try {
      load_checkpoint(corrupted);
    } catch (const Error& e) {
      rejected = true;
      msg = e.what();
    }
    bool mentions = msg.find("checksum") != std::string::npos;
    push(checks, "ckpt.corruption_detected", rejected && mentions,
         rejected ? "rejected with checksum error" : "corrupted file was accepted");
  }

  // -- determinism -------------------------------------------------------------
  {
    Model a = tiny_model(3, LengthModelKind::kNeural, true, seed + 4);
    Model b = tiny_model(3, LengthModelKind::kNeural, true, seed + 4);
    std::vector<double> x = random_features(6, a.cfg.input_dim, seed + 4);
    EncodedSequence ea = encode_raw(a, FeatureView{x.data(), 6, a.cfg.input_dim});
    EncodedSequence eb = encode_raw(b, FeatureView{x.data(), 6, b.cfg.input_dim});
    bool same = ea.h == eb.h && ea.h_proj == eb.h_proj;
    push(checks, "determinism.encode", same,
         same ? "bit-identical across runs" : "encoder output differs across identical runs");
  }

  return checks;
}

}  // namespace segatt
