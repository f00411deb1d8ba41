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

#include "segatt/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "segatt/checkpoint.hpp"
#include "segatt/length_model.hpp"
#include "segatt/util.hpp"

namespace segatt {

void TrainConfig::validate() const {
  if (epochs < 1) fail("train config: epochs must be >= 1");
  if (learning_rate <= 0.0) fail("train config: learning_rate must be positive");
  if (batch_size < 1) fail("train config: batch_size must be >= 1");
  if (clip_norm <= 0.0) fail("train config: clip_norm must be positive");
}

LossBreakdown sequence_loss(const Model& m, const Utterance& utt, bool with_length) {
  FeatureView view{utt.features.frames.data(), utt.features.t_input(), utt.features.input_dim};
  EncoderOutput enc = encode(m, view);
  AttentionContext att = prepare_attention(m, enc);

  LossBreakdown out;
  Tensor total;

  if (m.cfg.window_mode == WindowMode::kGlobal) {
    // Global attention ignores the boundaries; an EOS step closes the
    // sequence. No length model.
    TapeDecState state = initial_dec_state(m);
    int a_prev = m.cfg.bos_id();
    std::vector<int> steps = utt.labels;
    steps.push_back(m.cfg.eos_id);
    for (int a : steps) {
      LabelStepResult step = label_step(m, att, state, a_prev, 1, att.T);
      Tensor nll = affine(log_op(pick(step.probs, a)), -1.0, 0.0);
      total = total ? add(total, nll) : nll;
      state = step.state;
      a_prev = a;
    }
    out.total = total;
    out.label_ce = total->data[0];
    out.num_labels = static_cast<int>(steps.size());
    out.num_frames = att.T;
    return out;
  }

  if (utt.t_down() != enc.T)
    fail("sequence_loss: alignment length " + std::to_string(utt.t_down()) +
         " does not match encoder length " + std::to_string(enc.T) + " for " + utt.features.id);
  Segmentation seg(utt.boundaries, enc.T);

  SeqLogProb lp = seq_log_prob(m, att, utt.labels, seg);
  Tensor label_nll = affine(lp.total, -1.0, 0.0);
  out.label_ce = label_nll->data[0];
  out.num_labels = seg.num_segments();
  out.num_frames = enc.T;
  total = label_nll;

  if (with_length && m.cfg.length_model == LengthModelKind::kNeural) {
    // Framewise binary CE: target 1 at boundary frames, 0 elsewhere. This is
    // algebraically the same as summing -log p(t_s|...) over segments.
    std::vector<int> omega = encode_blank_alignment(utt.labels, seg, m.cfg.blank_id());
    TapeLengthState lstate = initial_length_state_tape(m);
    Tensor len_total;
    for (int t = 1; t <= enc.T; ++t) {
      int omega_prev = t == 1 ? m.cfg.blank_id() : omega[static_cast<std::size_t>(t) - 2];
      auto [q, next] = length_q_step(m, att, t, omega_prev, lstate);
      lstate = next;
      bool is_boundary = omega[static_cast<std::size_t>(t) - 1] != m.cfg.blank_id();
      Tensor nll = is_boundary ? affine(log_op(q), -1.0, 0.0)
                               : affine(log_op(affine(q, -1.0, 1.0)), -1.0, 0.0);
      len_total = len_total ? add(len_total, nll) : nll;
    }
    out.length_ce = len_total->data[0];
    total = add(total, len_total);
  }
  out.total = total;
  return out;
}

std::string format_metrics_line(const EpochMetrics& m) {
  std::ostringstream os;
  os << "epoch=" << m.epoch << " split=" << m.split << " loss=" << format_double(m.loss)
     << " label_loss=" << format_double(m.label_loss)
     << " length_loss=" << format_double(m.length_loss);
  return os.str();
}

namespace {

EpochMetrics eval_split(const Model& m, const std::vector<Utterance>& utts, bool with_length,
                        int epoch, const std::string& split) {
  NoGradGuard ng;
  double label_ce = 0.0, length_ce = 0.0;
  long labels = 0, frames = 0;
  for (const auto& u : utts) {
    LossBreakdown l = sequence_loss(m, u, with_length);
    label_ce += l.label_ce;
    length_ce += l.length_ce;
    labels += l.num_labels;
    frames += l.num_frames;
  }
  EpochMetrics em;
  em.epoch = epoch;
  em.split = split;
  em.label_loss = labels > 0 ? label_ce / static_cast<double>(labels) : 0.0;
  em.length_loss = frames > 0 ? length_ce / static_cast<double>(frames) : 0.0;
  em.loss = labels > 0 ? (label_ce + length_ce) / static_cast<double>(labels) : 0.0;
  return em;
}

std::string opt_state_path(const std::string& out_dir) { return out_dir + "/last.opt"; }

}  // namespace

// Training state is stored in the same checkpoint container: Adam moments
// as "opt.m.<param>" / "opt.v.<param>" tensors plus progress metadata.
static void save_opt_state(const std::string& path, const Model& m, const AdamState& opt,
                           int next_epoch, double best_dev) {
  Checkpoint ckpt;
  ckpt.cfg = m.cfg;
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    ckpt.tensors.emplace_back("opt.m." + m.params[i].name,
                              make_tensor(m.params[i].value->shape, opt.m[i]));
    ckpt.tensors.emplace_back("opt.v." + m.params[i].name,
                              make_tensor(m.params[i].value->shape, opt.v[i]));
  }
  std::ostringstream extra;
  extra << "{\"step\":" << opt.step << ",\"next_epoch\":" << next_epoch
        << ",\"best_dev_loss\":" << format_double(best_dev) << "}";
  ckpt.extra_json = extra.str();
  save_checkpoint(path, ckpt);
}

static bool load_opt_state(const std::string& path, const Model& m, AdamState& opt,
                           int& next_epoch, double& best_dev);

TrainResult train_model(Model& m, const Corpus& corpus, const TrainConfig& cfg,
                        const std::string& out_dir) {
  cfg.validate();
  make_dirs(out_dir);
  const std::vector<Utterance>& train_set = corpus.train;
  if (train_set.empty()) fail("train: corpus has no training sequences");
  bool with_length = cfg.length_loss && m.cfg.length_model == LengthModelKind::kNeural;

  // The static length table is estimated from the training alignments and
  // stored in every checkpoint, so any decode condition can use it later.
  StaticLengthTable static_table;
  if (m.cfg.window_mode == WindowMode::kSegmental) {
    std::vector<std::pair<std::vector<int>, std::vector<int>>> alignments;
    alignments.reserve(train_set.size());
    for (const auto& u : train_set) alignments.emplace_back(u.labels, u.boundaries);
    static_table = estimate_static_length(alignments, m.cfg.vocab_size, 20);
  }

  SeedStreams streams(cfg.seed);
  AdamState opt;
  opt.init(m.params);
  AdamConfig adam;
  adam.lr = cfg.learning_rate;

  TrainResult result;
  result.best_dev_loss = std::numeric_limits<double>::infinity();
  int start_epoch = 0;

  std::string last_path = out_dir + "/last.ckpt";
  std::string best_path = out_dir + "/best.ckpt";
  if (file_exists(last_path) && file_exists(opt_state_path(out_dir))) {
    Checkpoint ckpt = load_checkpoint(last_path);
    Model restored = model_from_checkpoint(ckpt);
    if (!(restored.cfg.compatible_for_import(m.cfg)))
      fail("train: existing checkpoint in " + out_dir + " does not match the model config");
    for (std::size_t i = 0; i < m.params.size(); ++i)
      m.params[i].value->data = restored.params[i].value->data;
    if (!load_opt_state(opt_state_path(out_dir), m, opt, start_epoch, result.best_dev_loss))
      fail("train: cannot restore optimizer state from " + opt_state_path(out_dir));
  }

  std::ofstream metrics_file(out_dir + "/metrics.txt", start_epoch == 0 ? std::ios::trunc : std::ios::app);
  if (!metrics_file) fail("train: cannot write metrics in " + out_dir);

  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = streams.stream("shuffle", static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double label_ce = 0.0, length_ce = 0.0;
    long labels = 0, frames = 0;
    for (std::size_t pos = 0; pos < order.size();) {
      std::size_t batch_end = std::min(order.size(), pos + static_cast<std::size_t>(cfg.batch_size));
      zero_grad(m.params);
      int batch_n = 0;
      for (; pos < batch_end; ++pos) {
        const Utterance& u = train_set[static_cast<std::size_t>(order[pos])];
        LossBreakdown l = sequence_loss(m, u, with_length);
        double value = l.total->data[0];
        if (!std::isfinite(value))
          fail("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
               ", sequence " + u.features.id);
        backward(l.total);
        label_ce += l.label_ce;
        length_ce += l.length_ce;
        labels += l.num_labels;
        frames += l.num_frames;
        ++batch_n;
      }
      if (batch_n > 1) {
        double inv = 1.0 / static_cast<double>(batch_n);
        for (auto& p : m.params)
          for (double& g : p.value->grad) g *= inv;
      }
      clip_grad_norm(m.params, cfg.clip_norm);
      adam_step(m.params, opt, adam);
    }

    EpochMetrics train_m;
    train_m.epoch = epoch;
    train_m.split = "train";
    train_m.label_loss = labels > 0 ? label_ce / static_cast<double>(labels) : 0.0;
    train_m.length_loss = frames > 0 ? length_ce / static_cast<double>(frames) : 0.0;
    train_m.loss = labels > 0 ? (label_ce + length_ce) / static_cast<double>(labels) : 0.0;
    result.metrics.push_back(train_m);
    metrics_file << format_metrics_line(train_m) << "\n";

    EpochMetrics dev_m = eval_split(m, corpus.dev, with_length, epoch, "dev");
    result.metrics.push_back(dev_m);
    metrics_file << format_metrics_line(dev_m) << "\n";
    metrics_file.flush();

    const StaticLengthTable* table_ptr =
        m.cfg.window_mode == WindowMode::kSegmental ? &static_table : nullptr;
    save_checkpoint(last_path, make_checkpoint(m, table_ptr,
                                               "{\"epoch\":" + std::to_string(epoch) + "}"));
    save_opt_state(opt_state_path(out_dir), m, opt, epoch + 1, result.best_dev_loss);
    double dev_ref = corpus.dev.empty() ? train_m.loss : dev_m.loss;
    if (dev_ref < result.best_dev_loss) {
      result.best_dev_loss = dev_ref;
      save_checkpoint(best_path, make_checkpoint(m, table_ptr,
                                                 "{\"epoch\":" + std::to_string(epoch) + "}"));
    }
  }
  result.best_checkpoint = best_path;
  result.last_checkpoint = last_path;
  if (!file_exists(best_path)) {
    const StaticLengthTable* table_ptr =
        m.cfg.window_mode == WindowMode::kSegmental ? &static_table : nullptr;
    save_checkpoint(best_path, make_checkpoint(m, table_ptr, "{}"));
  }
  return result;
}

static bool load_opt_state(const std::string& path, const Model& m, AdamState& opt,
                           int& next_epoch, double& best_dev) {
  Checkpoint ckpt = load_checkpoint(path);
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& [name, tensor] : ckpt.tensors) by_name[name] = &tensor;
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    auto mi = by_name.find("opt.m." + m.params[i].name);
    auto vi = by_name.find("opt.v." + m.params[i].name);
    if (mi == by_name.end() || vi == by_name.end()) return false;
    opt.m[i] = (*mi->second)->data;
    opt.v[i] = (*vi->second)->data;
  }
  if (ckpt.extra_json.empty()) return false;
  // extra is {"step":N,"next_epoch":N,"best_dev_loss":X}
  std::string extra = ckpt.extra_json;
  auto grab = [&extra](const std::string& key) -> std::string {
    auto pos = extra.find("\"" + key + "\":");
    if (pos == std::string::npos) return "";
    pos += key.size() + 3;
    auto end = extra.find_first_of(",}", pos);
    return extra.substr(pos, end - pos);
  };
  opt.step = std::stol(grab("step"));
  next_epoch = std::stoi(grab("next_epoch"));
  best_dev = std::stod(grab("best_dev_loss"));
  return true;
}

Model import_global(const Model& global, const ModelConfig& target_cfg, Rng& rng) {
  if (!global.cfg.compatible_for_import(target_cfg))
    fail("import_global: model configs are incompatible (only window_mode and the length model "
         "may differ)");
  Model m = build_model(target_cfg, rng);
  for (auto& p : m.params) {
    if (!global.has(p.name)) {
      if (p.name.rfind("len.", 0) != 0)
        fail("import_global: source model is missing parameter '" + p.name + "'");
      continue;  // fresh length model
    }
    const Tensor& src = global.p(p.name);
    if (src->shape != p.value->shape)
      fail("import_global: parameter '" + p.name + "' has shape " + shape_str(src->shape) +
           " in the source model but " + shape_str(p.value->shape) + " in the target");
    p.value->data = src->data;
  }
  return m;
}

}  // namespace segatt
