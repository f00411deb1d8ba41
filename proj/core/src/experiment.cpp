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

#include "segatt/experiment.hpp"

#include <cstdio>
#include <sstream>

#include "json_io.hpp"
#include "segatt/checkpoint.hpp"
#include "segatt/eval.hpp"
#include "segatt/util.hpp"
#include "segatt/verify.hpp"
#include "segatt/version.hpp"

namespace segatt {

namespace {

CorpusSpec corpus_section(const Json& j) {
  static const std::vector<std::string> keys = {
      "vocab_size", "input_dim",  "num_train",   "num_dev",     "num_eval",   "min_labels",
      "max_labels", "len_mean_lo", "len_mean_hi", "len_stddev",  "silence_prob",
      "sil_len_mean", "sil_len_stddev", "noise_level"};
  check_keys(j, keys, "corpus section");
  CorpusSpec spec;
  spec.vocab_size = require(j, "vocab_size", "corpus section").get<int>();
  spec.input_dim = require(j, "input_dim", "corpus section").get<int>();
  spec.num_train = require(j, "num_train", "corpus section").get<int>();
  spec.num_dev = require(j, "num_dev", "corpus section").get<int>();
  spec.num_eval = require(j, "num_eval", "corpus section").get<int>();
  spec.min_labels = j.value("min_labels", 2);
  spec.max_labels = j.value("max_labels", 6);
  spec.len_mean_lo = j.value("len_mean_lo", 2.0);
  spec.len_mean_hi = j.value("len_mean_hi", 5.0);
  spec.len_stddev = j.value("len_stddev", 1.0);
  spec.silence_prob = j.value("silence_prob", 0.0);
  spec.sil_len_mean = j.value("sil_len_mean", 4.0);
  spec.sil_len_stddev = j.value("sil_len_stddev", 2.0);
  spec.noise_level = j.value("noise_level", 0.0);
  return spec;
}

void model_section(const Json& j, ExperimentConfig& cfg) {
  static const std::vector<std::string> keys = {
      "enc_layers", "enc_dim", "pool_factors", "dec_dim", "att_dim", "readout_dim",
      "window_mode", "ctx_dependency", "length_model", "len_dim", "len_emb_dim", "use_eos"};
  check_keys(j, keys, "model section");
  ModelConfig& m = cfg.model;
  m.enc_layers = require(j, "enc_layers", "model section").get<int>();
  m.enc_dim = require(j, "enc_dim", "model section").get<int>();
  m.pool_factors = require(j, "pool_factors", "model section").get<std::vector<int>>();
  m.dec_dim = require(j, "dec_dim", "model section").get<int>();
  m.att_dim = require(j, "att_dim", "model section").get<int>();
  m.readout_dim = j.value("readout_dim", 0);
  m.window_mode = window_mode_from_string(require(j, "window_mode", "model section").get<std::string>());
  m.ctx_dependency = j.value("ctx_dependency", true);
  m.length_model = length_model_from_string(j.value("length_model", std::string("none")));
  m.len_dim = j.value("len_dim", 32);
  m.len_emb_dim = j.value("len_emb_dim", 16);
  cfg.use_eos = j.value("use_eos", m.window_mode == WindowMode::kGlobal);
}

void train_section(const Json& j, TrainConfig& t) {
  static const std::vector<std::string> keys = {"epochs", "learning_rate", "batch_size",
                                                "clip_norm", "length_loss"};
  check_keys(j, keys, "train section");
  t.epochs = j.value("epochs", 10);
  t.learning_rate = j.value("learning_rate", 1e-3);
  t.batch_size = j.value("batch_size", 8);
  t.clip_norm = j.value("clip_norm", 5.0);
  t.length_loss = j.value("length_loss", true);
}

void search_section(const Json& j, ExperimentConfig& cfg) {
  static const std::vector<std::string> keys = {"mode",      "beam_size",     "alpha", "gamma",
                                                "delta_max", "recombination", "length_model"};
  check_keys(j, keys, "search section");
  SearchConfig& s = cfg.search;
  s.mode = search_mode_from_string(j.value("mode", std::string("segmental")));
  s.beam_size = j.value("beam_size", 8);
  s.alpha = j.value("alpha", 1.0);
  s.gamma = j.value("gamma", 0);
  s.delta_max = j.value("delta_max", 20);
  s.recombination = recombination_from_string(j.value("recombination", std::string("label_history")));
  cfg.search_length_model = j.value("length_model", std::string("auto"));
  if (cfg.search_length_model != "auto")
    s.length_model = length_model_from_string(cfg.search_length_model);
}

Json effective_config_json(const ExperimentConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["silence_variant"] = to_string(cfg.silence_variant);
  if (cfg.has_corpus) {
    Json c;
    c["vocab_size"] = cfg.corpus.vocab_size;
    c["input_dim"] = cfg.corpus.input_dim;
    c["num_train"] = cfg.corpus.num_train;
    c["num_dev"] = cfg.corpus.num_dev;
    c["num_eval"] = cfg.corpus.num_eval;
    c["min_labels"] = cfg.corpus.min_labels;
    c["max_labels"] = cfg.corpus.max_labels;
    c["len_mean_lo"] = cfg.corpus.len_mean_lo;
    c["len_mean_hi"] = cfg.corpus.len_mean_hi;
    c["len_stddev"] = cfg.corpus.len_stddev;
    c["silence_prob"] = cfg.corpus.silence_prob;
    c["sil_len_mean"] = cfg.corpus.sil_len_mean;
    c["sil_len_stddev"] = cfg.corpus.sil_len_stddev;
    c["noise_level"] = cfg.corpus.noise_level;
    j["corpus"] = c;
  }
  if (cfg.has_model) {
    Json m = model_config_to_json(cfg.model);
    m["use_eos"] = cfg.use_eos;
    j["model"] = m;
  }
  Json t;
  t["epochs"] = cfg.train.epochs;
  t["learning_rate"] = cfg.train.learning_rate;
  t["batch_size"] = cfg.train.batch_size;
  t["clip_norm"] = cfg.train.clip_norm;
  t["length_loss"] = cfg.train.length_loss;
  j["train"] = t;
  Json s;
  s["mode"] = to_string(cfg.search.mode);
  s["beam_size"] = cfg.search.beam_size;
  s["alpha"] = cfg.search.alpha;
  s["gamma"] = cfg.search.gamma;
  s["delta_max"] = cfg.search.delta_max;
  s["recombination"] = to_string(cfg.search.recombination);
  s["length_model"] = cfg.search_length_model;
  j["search"] = s;
  return j;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    fail(std::string("config: invalid JSON: ") + e.what());
  }
  static const std::vector<std::string> keys = {"seed",  "out_dir", "silence_variant",
                                                "corpus", "model",  "train",
                                                "search"};
  check_keys(j, keys, "config");
  ExperimentConfig cfg;
  cfg.seed = require(j, "seed", "config").get<std::uint64_t>();
  cfg.out_dir = j.value("out_dir", std::string("run"));
  cfg.silence_variant = silence_variant_from_string(j.value("silence_variant", std::string("none")));
  if (j.contains("corpus")) {
    cfg.corpus = corpus_section(j.at("corpus"));
    cfg.has_corpus = true;
  }
  if (j.contains("model")) {
    model_section(j.at("model"), cfg);
    cfg.has_model = true;
  }
  if (j.contains("train")) train_section(j.at("train"), cfg.train);
  if (j.contains("search")) search_section(j.at("search"), cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_file(path));
}

ModelConfig resolve_model_config(const ExperimentConfig& cfg, const Corpus& corpus) {
  if (!cfg.has_model) fail("config: missing 'model' section");
  ModelConfig m = cfg.model;
  m.input_dim = corpus.spec.input_dim;
  m.silence_variant = corpus.variant;
  int content = corpus.spec.vocab_size;
  bool with_sil = corpus.silence_id >= 0;
  m.silence_id = with_sil ? content : -1;
  m.eos_id = cfg.use_eos ? content + (with_sil ? 1 : 0) : -1;
  m.vocab_size = content + (with_sil ? 1 : 0) + (cfg.use_eos ? 1 : 0);
  if (m.total_downsample() != corpus.spec.downsample_factor)
    fail("config: model pool factors give downsampling " + std::to_string(m.total_downsample()) +
         " but the dataset was generated at factor " +
         std::to_string(corpus.spec.downsample_factor));
  m.validate();
  return m;
}

std::string write_run_manifest(const std::string& out_dir, const std::string& command,
                               const ExperimentConfig& cfg, const std::string& args_json) {
  Json manifest;
  Json effective = effective_config_json(cfg);
  manifest["command"] = command;
  manifest["code_version"] = kVersion;
  manifest["seed"] = cfg.seed;
  manifest["effective_config"] = effective;
  manifest["args"] = args_json.empty() ? Json::object() : Json::parse(args_json);
  manifest["config_hash"] = hex64(fnv1a(effective.dump() + "|" + command + "|" + args_json));
  make_dirs(out_dir);
  std::string text = manifest.dump(2) + "\n";
  write_file(out_dir + "/run_manifest.json", text);
  return text;
}

int cmd_gen_data(const ExperimentConfig& cfg, const std::string& out_dir_override) {
  if (!cfg.has_corpus) fail("gen-data: config is missing the 'corpus' section");
  if (!cfg.has_model) fail("gen-data: config is missing the 'model' section (downsampling factor)");
  std::string out = out_dir_override.empty() ? cfg.out_dir + "/data" : out_dir_override;

  CorpusSpec spec = cfg.corpus;
  spec.seed = cfg.seed;
  spec.downsample_factor = cfg.model.total_downsample();
  Corpus corpus = generate(spec, cfg.silence_variant, cfg.search.delta_max);
  write_corpus(corpus, out);
  write_run_manifest(out, "gen-data", cfg, "{\"out\":\"" + out + "\"}");
  std::printf("gen-data: wrote %zu/%zu/%zu train/dev/eval sequences to %s\n", corpus.train.size(),
              corpus.dev.size(), corpus.eval.size(), out.c_str());
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& data_dir,
              const std::string& import_global_path, const std::string& out_dir_override) {
  Corpus corpus = read_corpus(data_dir);
  if (corpus.variant != cfg.silence_variant)
    fail("train: dataset was generated with silence variant '" + to_string(corpus.variant) +
         "' but the config says '" + to_string(cfg.silence_variant) + "'");
  ModelConfig mc = resolve_model_config(cfg, corpus);

  SeedStreams streams(cfg.seed);
  Model model;
  if (!import_global_path.empty()) {
    Checkpoint src = load_checkpoint(import_global_path);
    Model global = model_from_checkpoint(src);
    Rng rng = streams.stream("init");
    model = import_global(global, mc, rng);
  } else {
    Rng rng = streams.stream("init");
    model = build_model(mc, rng);
  }

  std::string out = out_dir_override.empty() ? cfg.out_dir : out_dir_override;
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  write_run_manifest(out, "train", cfg,
                     "{\"data\":\"" + data_dir + "\",\"import_global\":\"" + import_global_path +
                         "\"}");
  TrainResult result = train_model(model, corpus, tc, out);
  for (const auto& m : result.metrics)
    if (m.split == "dev") std::printf("%s\n", format_metrics_line(m).c_str());
  std::printf("train: best dev loss %s; checkpoints in %s\n",
              format_double(result.best_dev_loss).c_str(), out.c_str());
  return 0;
}

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += " ";
    s += std::to_string(v[i]);
  }
  return s;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += " ";
    s += format_double(v[i]);
  }
  return s;
}

}  // namespace

int cmd_decode(const ExperimentConfig& cfg, const DecodeOptions& opts) {
  Corpus corpus = read_corpus(opts.data_dir);
  Checkpoint ckpt = load_checkpoint(opts.ckpt_path);
  Model model = model_from_checkpoint(ckpt);
  StaticLengthTable table = static_table_from_checkpoint(ckpt);

  ExperimentConfig eff = cfg;
  if (eff.search_length_model == "auto") eff.search.length_model = model.cfg.length_model;
  if (eff.search.mode == SearchMode::kSimple &&
      eff.search.length_model != LengthModelKind::kNeural)
    fail("decode: simple search works only with the neural length model (use --mode segmental "
         "for none/static)");

  const std::vector<Utterance>& utts = corpus.split(opts.split);
  std::string out = opts.out_dir.empty() ? cfg.out_dir : opts.out_dir;
  make_dirs(out);

  std::ostringstream args;
  args << "{\"data\":\"" << opts.data_dir << "\",\"ckpt\":\"" << opts.ckpt_path
       << "\",\"split\":\"" << opts.split << "\",\"concat\":" << opts.concat
       << ",\"jobs\":" << opts.jobs << ",\"dump_scores\":" << (opts.dump_scores ? "true" : "false")
       << ",\"sweep\":[" << [&] {
            std::string s;
            for (std::size_t i = 0; i < opts.sweep_alphas.size(); ++i)
              s += (i ? "," : "") + format_double(opts.sweep_alphas[i]);
            return s;
          }()
       << "]}";
  write_run_manifest(out, "decode", eff, args.str());

  DecodeRun run;
  run.search = eff.search;
  run.jobs = opts.jobs;
  run.concat = opts.concat;

  if (!opts.sweep_alphas.empty()) {
    SweepResult s = sweep(model, utts, opts.sweep_alphas, run, &table, model.cfg.silence_id);
    write_file(out + "/sweep.txt", render_sweep(s));
    write_file(out + "/sweep.records", sweep_records(s));
    std::printf("%s", render_sweep(s).c_str());
    return 0;
  }

  std::vector<SequenceResult> results = decode_corpus(model, utts, run, &table);
  WerReport rep = corpus_wer(results, model.cfg.silence_id);

  std::ostringstream hyps;
  hyps << "# id score raw truth_score search_error labels boundaries";
  if (opts.dump_scores) hyps << " label_scores length_scores";
  hyps << "\n";
  for (const auto& r : results) {
    hyps << r.id << "\t" << format_double(r.hyp_score) << "\t" << format_double(r.hyp.raw_sum)
         << "\t" << format_double(r.truth_score) << "\t" << (r.search_error ? 1 : 0) << "\t"
         << join_ints(r.hyp.labels) << "\t" << join_ints(r.hyp.boundaries);
    if (opts.dump_scores)
      hyps << "\t" << join_doubles(r.hyp.label_scores) << "\t" << join_doubles(r.hyp.length_scores);
    hyps << "\n";
  }
  write_file(out + "/hyps.records", hyps.str());

  char line[256];
  std::snprintf(line, sizeof(line),
                "WER %.2f%%  (S=%ld D=%ld I=%ld, ref=%ld)  search errors %.2f%%  sequences %d\n",
                100.0 * rep.counts.wer(), rep.counts.sub, rep.counts.del, rep.counts.ins,
                rep.counts.ref_len, 100.0 * rep.search_error_fraction, rep.num_sequences);
  write_file(out + "/report.txt", line);
  std::ostringstream rec;
  rec << "wer sub=" << rep.counts.sub << " del=" << rep.counts.del << " ins=" << rep.counts.ins
      << " ref=" << rep.counts.ref_len << " wer=" << format_double(rep.counts.wer())
      << " se=" << format_double(rep.search_error_fraction) << " sequences=" << rep.num_sequences
      << "\n";
  write_file(out + "/report.records", rec.str());
  std::printf("%s", line);

  if (opts.dump_scores && model.cfg.window_mode == WindowMode::kSegmental) {
    std::vector<Utterance> work = concat_sequences(utts, opts.concat);
    std::ostringstream txt, records;
    for (std::size_t i = 0; i < work.size(); ++i) {
      const Utterance& u = work[i];
      FeatureView view{u.features.frames.data(), u.features.t_input(), u.features.input_dim};
      EncodedSequence enc = encode_raw(model, view);
      Segmentation ref_seg(u.boundaries, enc.T);
      ScoreBreakdown ref = score_sequence(model, enc, u.labels, ref_seg, run.search, &table);
      const SequenceResult& r = results[i];
      ScoreTable t = score_table(u.labels, ref.label_log_probs, r.hyp.labels, r.hyp.label_scores);
      txt << "== " << u.features.id << " ==\n" << render_score_table(t) << "\n";
      records << score_table_records(u.features.id, t);
    }
    write_file(out + "/scores.txt", txt.str());
    write_file(out + "/scores.records", records.str());
  }
  return 0;
}

int cmd_verify(std::uint64_t seed, const std::string& scratch_dir) {
  std::vector<VerifyCheck> checks = run_verification_suite(seed, scratch_dir);
  bool all = true;
  for (const auto& c : checks) {
    std::printf("[%s] %-28s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    all = all && c.pass;
  }
  std::printf("%s\n", all ? "verify: all checks passed" : "verify: FAILURES detected");
  return all ? 0 : 1;
}

}  // namespace segatt
