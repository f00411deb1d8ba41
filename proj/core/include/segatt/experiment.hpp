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

// Experiment driver: config files, run manifests and the four commands
// behind the CLI (gen-data, train, decode, verify). Config files are JSON
// with sections {corpus, model, train, search}; unknown keys are hard
// errors. Flags override config keys; every command writes a run manifest
// with the effective config and its hash, so runs are reproducible
// bit-exactly from the manifest alone.

#include <cstdint>
#include <string>
#include <vector>

#include "segatt/data.hpp"
#include "segatt/model.hpp"
#include "segatt/search.hpp"
#include "segatt/train.hpp"

namespace segatt {

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string out_dir;
  SilenceVariant silence_variant = SilenceVariant::kNone;

  CorpusSpec corpus;
  bool has_corpus = false;

  // Model prototype; vocab size and special ids are resolved against the
  // dataset (content vocab + optional silence + optional EOS).
  ModelConfig model;
  bool use_eos = false;
  bool has_model = false;

  TrainConfig train;
  SearchConfig search;
  std::string search_length_model = "auto";  // auto = the checkpoint's kind
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// Fills input_dim, vocab_size, silence_id and eos_id from the dataset.
ModelConfig resolve_model_config(const ExperimentConfig& cfg, const Corpus& corpus);

// Effective-config JSON (resolved values, command arguments) and its hash;
// written to <out_dir>/run_manifest.json by every command.
std::string write_run_manifest(const std::string& out_dir, const std::string& command,
                               const ExperimentConfig& cfg, const std::string& args_json);

struct DecodeOptions {
  std::string data_dir;
  std::string ckpt_path;
  std::string split = "dev";
  std::string out_dir;  // empty: use cfg.out_dir
  int concat = 1;
  int jobs = 1;
  bool dump_scores = false;
  std::vector<double> sweep_alphas;  // non-empty switches to sweep mode
};

int cmd_gen_data(const ExperimentConfig& cfg, const std::string& out_dir_override);
int cmd_train(const ExperimentConfig& cfg, const std::string& data_dir,
              const std::string& import_global_path, const std::string& out_dir_override);
int cmd_decode(const ExperimentConfig& cfg, const DecodeOptions& opts);
int cmd_verify(std::uint64_t seed, const std::string& scratch_dir);

}  // namespace segatt
