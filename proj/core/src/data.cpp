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

#include "segatt/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json_io.hpp"
#include "segatt/rng.hpp"
#include "segatt/util.hpp"
#include "segatt/version.hpp"

namespace segatt {

void CorpusSpec::validate() const {
  if (vocab_size < 2) fail("corpus spec: vocab_size must be >= 2");
  if (input_dim < 1) fail("corpus spec: input_dim must be >= 1");
  if (num_train < 0 || num_dev < 0 || num_eval < 0) fail("corpus spec: negative split size");
  if (min_labels < 1) fail("corpus spec: min_labels must be >= 1");
  if (max_labels < min_labels) fail("corpus spec: max_labels < min_labels");
  if (len_mean_lo < 1.0 || len_mean_hi < len_mean_lo)
    fail("corpus spec: segment length means must be >= 1 (zero-length segments)");
  if (len_stddev < 0.0) fail("corpus spec: len_stddev must be >= 0");
  if (silence_prob < 0.0 || silence_prob > 1.0) fail("corpus spec: silence_prob out of [0,1]");
  if (silence_prob > 0.0 && sil_len_mean < 1.0)
    fail("corpus spec: sil_len_mean must be >= 1 (zero-length segments)");
  if (noise_level < 0.0) fail("corpus spec: noise_level must be >= 0");
  if (downsample_factor < 1) fail("corpus spec: downsample_factor must be >= 1");
}

const std::vector<Utterance>& Corpus::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "dev") return dev;
  if (name == "eval") return eval;
  fail("unknown corpus split '" + name + "' (expected train|dev|eval)");
}

std::vector<double> label_prototypes(const CorpusSpec& spec) {
  std::vector<double> protos(static_cast<std::size_t>(spec.vocab_size) * spec.input_dim, 0.0);
  if (spec.vocab_size <= spec.input_dim) {
    for (int a = 0; a < spec.vocab_size; ++a)
      protos[static_cast<std::size_t>(a) * spec.input_dim + a] = 1.0;
    return protos;
  }
  Rng rng(SeedStreams(spec.seed).stream("corpus.prototypes").next_u64());
  // intentionally reuse the derived stream as the generator seed
  for (int a = 0; a < spec.vocab_size; ++a) {
    double norm2 = 0.0;
    double* row = protos.data() + static_cast<std::size_t>(a) * spec.input_dim;
    for (int i = 0; i < spec.input_dim; ++i) {
      row[i] = rng.normal();
      norm2 += row[i] * row[i];
    }
    double inv = 1.0 / std::sqrt(norm2);
    for (int i = 0; i < spec.input_dim; ++i) row[i] *= inv;
  }
  return protos;
}

namespace {

int sample_length(Rng& rng, double mean, double stddev) {
  int len = static_cast<int>(std::lround(rng.normal(mean, stddev)));
  return std::max(1, len);
}

Utterance generate_utterance(const CorpusSpec& spec, const std::vector<double>& protos,
                             const std::vector<double>& label_means, const std::string& id,
                             Rng& rng) {
  int num_labels = rng.uniform_int(spec.min_labels, spec.max_labels);
  int sil_id = spec.vocab_size;  // internal placeholder before variant handling

  // Segment plan at encoder-frame resolution: optional silence before each
  // label and after the last one.
  std::vector<int> seg_label;
  std::vector<int> seg_len;
  std::vector<unsigned char> seg_sil;
  auto maybe_silence = [&]() {
    if (spec.silence_prob > 0.0 && rng.uniform() < spec.silence_prob) {
      seg_label.push_back(sil_id);
      seg_len.push_back(sample_length(rng, spec.sil_len_mean, spec.sil_len_stddev));
      seg_sil.push_back(1);
    }
  };
  for (int s = 0; s < num_labels; ++s) {
    maybe_silence();
    int a = rng.uniform_int(0, spec.vocab_size - 1);
    seg_label.push_back(a);
    seg_len.push_back(sample_length(rng, label_means[static_cast<std::size_t>(a)], spec.len_stddev));
    seg_sil.push_back(0);
  }
  maybe_silence();

  Utterance utt;
  utt.features.id = id;
  utt.features.input_dim = spec.input_dim;
  utt.labels = seg_label;
  utt.is_silence = seg_sil;
  int t = 0;
  for (std::size_t s = 0; s < seg_label.size(); ++s) {
    t += seg_len[s];
    utt.boundaries.push_back(t);
  }

  utt.features.frames.reserve(static_cast<std::size_t>(t) * spec.downsample_factor * spec.input_dim);
  for (std::size_t s = 0; s < seg_label.size(); ++s) {
    const double* proto =
        seg_sil[s] ? nullptr : protos.data() + static_cast<std::size_t>(seg_label[s]) * spec.input_dim;
    int raw_frames = seg_len[s] * spec.downsample_factor;
    for (int f = 0; f < raw_frames; ++f) {
      for (int i = 0; i < spec.input_dim; ++i) {
        double base = proto ? proto[i] : 0.0;
        double noise = spec.noise_level > 0.0 ? spec.noise_level * rng.normal() : 0.0;
        if (seg_sil[s]) noise *= 0.25;  // near-zero-energy silence
        utt.features.frames.push_back(base + noise);
      }
    }
  }
  return utt;
}

}  // namespace

Utterance apply_silence_variant(const Utterance& raw, SilenceVariant variant, int delta_max,
                                int silence_id) {
  Utterance out;
  out.features = raw.features;
  std::size_t n = raw.labels.size();
  if (raw.boundaries.size() != n || raw.is_silence.size() != n)
    fail("apply_silence_variant: inconsistent utterance");

  if (variant == SilenceVariant::kNone) {
    // Silence frames merge into the following label's segment; trailing
    // silence merges into the last label.
    int pending = 0;
    int t = 0;
    int prev = 0;
    for (std::size_t s = 0; s < n; ++s) {
      int len = raw.boundaries[s] - prev;
      prev = raw.boundaries[s];
      if (raw.is_silence[s]) {
        pending += len;
        continue;
      }
      t += pending + len;
      pending = 0;
      out.labels.push_back(raw.labels[s]);
      out.boundaries.push_back(t);
      out.is_silence.push_back(0);
    }
    if (out.labels.empty())
      fail("apply_silence_variant: variant 'none' cannot represent an all-silence utterance");
    if (pending > 0) out.boundaries.back() += pending;  // trailing silence
    return out;
  }

  if (variant == SilenceVariant::kSplit && delta_max < 1)
    fail("apply_silence_variant: split variant needs delta_max >= 1");

  int prev = 0;
  for (std::size_t s = 0; s < n; ++s) {
    int len = raw.boundaries[s] - prev;
    int start = prev;
    prev = raw.boundaries[s];
    if (!raw.is_silence[s]) {
      out.labels.push_back(raw.labels[s]);
      out.boundaries.push_back(start + len);
      out.is_silence.push_back(0);
      continue;
    }
    if (variant == SilenceVariant::kNoSplit || len <= delta_max) {
      out.labels.push_back(silence_id);
      out.boundaries.push_back(start + len);
      out.is_silence.push_back(1);
    } else {
      int remaining = len;
      int t = start;
      while (remaining > 0) {
        int chunk = std::min(delta_max, remaining);
        t += chunk;
        remaining -= chunk;
        out.labels.push_back(silence_id);
        out.boundaries.push_back(t);
        out.is_silence.push_back(1);
      }
    }
  }
  return out;
}

Corpus generate(const CorpusSpec& spec, SilenceVariant variant, int delta_max) {
  spec.validate();
  Corpus corpus;
  corpus.spec = spec;
  corpus.variant = variant;
  corpus.silence_id = variant == SilenceVariant::kNone ? -1 : spec.vocab_size;

  std::vector<double> protos = label_prototypes(spec);
  SeedStreams streams(spec.seed);

  Rng means_rng = streams.stream("corpus.means");
  std::vector<double> label_means(static_cast<std::size_t>(spec.vocab_size));
  for (auto& m : label_means) m = means_rng.uniform(spec.len_mean_lo, spec.len_mean_hi);

  struct SplitPlan {
    const char* name;
    int count;
    std::vector<Utterance>* out;
  };
  SplitPlan plans[] = {{"train", spec.num_train, &corpus.train},
                       {"dev", spec.num_dev, &corpus.dev},
                       {"eval", spec.num_eval, &corpus.eval}};
  for (auto& plan : plans) {
    Rng rng = streams.stream(std::string("corpus.") + plan.name);
    for (int i = 0; i < plan.count; ++i) {
      char id[64];
      std::snprintf(id, sizeof(id), "%s_%06d", plan.name, i);
      Utterance raw = generate_utterance(spec, protos, label_means, id, rng);
      plan.out->push_back(apply_silence_variant(raw, variant, delta_max, spec.vocab_size));
    }
  }
  return corpus;
}

std::vector<Utterance> concat_sequences(const std::vector<Utterance>& utts, int c) {
  if (c < 1) fail("concat_sequences: C must be >= 1");
  if (c == 1) return utts;
  std::vector<Utterance> out;
  for (std::size_t i = 0; i < utts.size(); i += static_cast<std::size_t>(c)) {
    std::size_t end = std::min(utts.size(), i + static_cast<std::size_t>(c));
    Utterance merged = utts[i];
    for (std::size_t j = i + 1; j < end; ++j) {
      const Utterance& u = utts[j];
      if (u.features.input_dim != merged.features.input_dim)
        fail("concat_sequences: feature dim mismatch");
      merged.features.id += "+" + u.features.id;
      merged.features.frames.insert(merged.features.frames.end(), u.features.frames.begin(),
                                    u.features.frames.end());
      int offset = merged.boundaries.back();
      merged.labels.insert(merged.labels.end(), u.labels.begin(), u.labels.end());
      merged.is_silence.insert(merged.is_silence.end(), u.is_silence.begin(), u.is_silence.end());
      for (int b : u.boundaries) merged.boundaries.push_back(offset + b);
    }
    out.push_back(std::move(merged));
  }
  return out;
}

// --- dataset files -------------------------------------------------------------

namespace {

Json corpus_spec_to_json(const CorpusSpec& spec) {
  Json j;
  j["vocab_size"] = spec.vocab_size;
  j["input_dim"] = spec.input_dim;
  j["num_train"] = spec.num_train;
  j["num_dev"] = spec.num_dev;
  j["num_eval"] = spec.num_eval;
  j["min_labels"] = spec.min_labels;
  j["max_labels"] = spec.max_labels;
  j["len_mean_lo"] = spec.len_mean_lo;
  j["len_mean_hi"] = spec.len_mean_hi;
  j["len_stddev"] = spec.len_stddev;
  j["silence_prob"] = spec.silence_prob;
  j["sil_len_mean"] = spec.sil_len_mean;
  j["sil_len_stddev"] = spec.sil_len_stddev;
  j["noise_level"] = spec.noise_level;
  j["downsample_factor"] = spec.downsample_factor;
  j["seed"] = spec.seed;
  return j;
}

CorpusSpec corpus_spec_from_json(const Json& j) {
  static const std::vector<std::string> keys = {
      "vocab_size",   "input_dim",      "num_train",  "num_dev",     "num_eval",
      "min_labels",   "max_labels",     "len_mean_lo", "len_mean_hi", "len_stddev",
      "silence_prob", "sil_len_mean",   "sil_len_stddev", "noise_level",
      "downsample_factor", "seed"};
  check_keys(j, keys, "corpus spec");
  CorpusSpec spec;
  spec.vocab_size = require(j, "vocab_size", "corpus spec").get<int>();
  spec.input_dim = require(j, "input_dim", "corpus spec").get<int>();
  spec.num_train = j.value("num_train", 0);
  spec.num_dev = j.value("num_dev", 0);
  spec.num_eval = j.value("num_eval", 0);
  spec.min_labels = j.value("min_labels", 2);
  spec.max_labels = j.value("max_labels", 6);
  spec.len_mean_lo = j.value("len_mean_lo", 2.0);
  spec.len_mean_hi = j.value("len_mean_hi", 5.0);
  spec.len_stddev = j.value("len_stddev", 1.0);
  spec.silence_prob = j.value("silence_prob", 0.0);
  spec.sil_len_mean = j.value("sil_len_mean", 4.0);
  spec.sil_len_stddev = j.value("sil_len_stddev", 2.0);
  spec.noise_level = j.value("noise_level", 0.0);
  spec.downsample_factor = j.value("downsample_factor", 6);
  spec.seed = require(j, "seed", "corpus spec").get<std::uint64_t>();
  return spec;
}

void write_split(const std::vector<Utterance>& utts, const std::string& dir) {
  make_dirs(dir);
  std::ofstream bin(dir + "/features.bin", std::ios::binary | std::ios::trunc);
  std::ofstream idx(dir + "/features.idx", std::ios::trunc);
  std::ofstream lab(dir + "/labels.txt", std::ios::trunc);
  if (!bin || !idx || !lab) fail("cannot write split files in " + dir);
  std::uint64_t offset = 0;
  for (const auto& u : utts) {
    bin.write(reinterpret_cast<const char*>(u.features.frames.data()),
              static_cast<std::streamsize>(u.features.frames.size() * sizeof(double)));
    idx << u.features.id << " " << u.features.t_input() << " " << offset << "\n";
    offset += u.features.frames.size() * sizeof(double);

    lab << u.features.id << "\t";
    for (std::size_t i = 0; i < u.labels.size(); ++i) lab << (i ? " " : "") << u.labels[i];
    lab << "\t";
    for (std::size_t i = 0; i < u.boundaries.size(); ++i) lab << (i ? " " : "") << u.boundaries[i];
    lab << "\n";
  }
}

std::vector<Utterance> read_split(const std::string& dir, int input_dim, int silence_id) {
  std::vector<Utterance> utts;
  std::ifstream idx(dir + "/features.idx");
  std::ifstream lab(dir + "/labels.txt");
  std::ifstream bin(dir + "/features.bin", std::ios::binary);
  if (!idx || !lab || !bin) fail("cannot read split files in " + dir);

  std::string idx_line, lab_line;
  while (std::getline(idx, idx_line)) {
    if (idx_line.empty()) continue;
    if (!std::getline(lab, lab_line)) fail("dataset " + dir + ": labels.txt shorter than index");
    auto idx_tok = split_ws(idx_line);
    if (idx_tok.size() != 3) fail("dataset " + dir + ": malformed index line '" + idx_line + "'");
    Utterance u;
    u.features.id = idx_tok[0];
    int t_input = std::stoi(idx_tok[1]);
    std::uint64_t offset = std::stoull(idx_tok[2]);
    u.features.input_dim = input_dim;
    u.features.frames.resize(static_cast<std::size_t>(t_input) * input_dim);
    bin.seekg(static_cast<std::streamoff>(offset));
    bin.read(reinterpret_cast<char*>(u.features.frames.data()),
             static_cast<std::streamsize>(u.features.frames.size() * sizeof(double)));
    if (!bin) fail("dataset " + dir + ": truncated features for " + u.features.id);

    auto fields = split_on(lab_line, '\t');
    if (fields.size() != 3 || fields[0] != u.features.id)
      fail("dataset " + dir + ": labels line does not match index for " + u.features.id);
    for (const auto& tok : split_ws(fields[1])) u.labels.push_back(std::stoi(tok));
    for (const auto& tok : split_ws(fields[2])) u.boundaries.push_back(std::stoi(tok));
    if (u.labels.size() != u.boundaries.size())
      fail("dataset " + dir + ": label/boundary count mismatch for " + u.features.id);
    Segmentation check(u.boundaries, u.t_down());  // validates monotonicity
    (void)check;
    for (int a : u.labels) u.is_silence.push_back(a == silence_id ? 1 : 0);
    utts.push_back(std::move(u));
  }
  return utts;
}

}  // namespace

void write_corpus(const Corpus& corpus, const std::string& dir) {
  make_dirs(dir);
  Json manifest;
  manifest["format"] = kDatasetFormatVersion;
  manifest["tool_version"] = kVersion;
  manifest["corpus"] = corpus_spec_to_json(corpus.spec);
  manifest["silence_variant"] = to_string(corpus.variant);
  manifest["silence_id"] = corpus.silence_id;
  manifest["counts"] = {{"train", corpus.train.size()},
                        {"dev", corpus.dev.size()},
                        {"eval", corpus.eval.size()}};
  manifest["spec_hash"] = hex64(fnv1a(corpus_spec_to_json(corpus.spec).dump() + "|" +
                                      to_string(corpus.variant)));
  write_file(dir + "/manifest.json", manifest.dump(2) + "\n");
  write_split(corpus.train, dir + "/train");
  write_split(corpus.dev, dir + "/dev");
  write_split(corpus.eval, dir + "/eval");
}

Corpus read_corpus(const std::string& dir) {
  Json manifest = Json::parse(read_file(dir + "/manifest.json"));
  if (manifest.value("format", -1) != kDatasetFormatVersion)
    fail("dataset " + dir + ": unsupported format version");
  Corpus corpus;
  corpus.spec = corpus_spec_from_json(manifest.at("corpus"));
  corpus.variant = silence_variant_from_string(manifest.at("silence_variant").get<std::string>());
  corpus.silence_id = manifest.value("silence_id", -1);
  corpus.train = read_split(dir + "/train", corpus.spec.input_dim, corpus.silence_id);
  corpus.dev = read_split(dir + "/dev", corpus.spec.input_dim, corpus.silence_id);
  corpus.eval = read_split(dir + "/eval", corpus.spec.input_dim, corpus.silence_id);
  return corpus;
}

}  // namespace segatt
