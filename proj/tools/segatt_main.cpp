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

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "segatt/experiment.hpp"
#include "segatt/util.hpp"
#include "segatt/version.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  bool has_seed = false;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
  auto* c = cmd->add_option("--config", args.config_path, "experiment config file (JSON)");
  if (config_required) c->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides config out_dir)");
  cmd->add_option("--seed", args.seed, "master seed (overrides config seed)")
      ->each([&args](const std::string&) { args.has_seed = true; });
}

segatt::ExperimentConfig load_config(const CommonArgs& args) {
  segatt::ExperimentConfig cfg = segatt::load_experiment_config(args.config_path);
  if (args.has_seed) cfg.seed = args.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"segatt: segmental-attention sequence recognition toolkit"};
  app.set_version_flag("--version", segatt::kVersion);
  app.require_subcommand(1);

  // gen-data
  CommonArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  add_common(gen, gen_args, /*config_required=*/true);

  // train
  CommonArgs train_args;
  std::string train_data, import_global_path;
  CLI::App* train = app.add_subcommand("train", "train a model on a dataset");
  add_common(train, train_args, true);
  train->add_option("--data", train_data, "dataset directory (from gen-data)")->required();
  train->add_option("--import-global", import_global_path,
                    "initialize from a trained global-attention checkpoint");

  // decode
  CommonArgs dec_args;
  segatt::DecodeOptions dec;
  std::string mode_str, silence_str, length_model_str, recomb_str, sweep_str;
  double alpha = 0.0;
  int gamma = -1, beam = 0, delta_max = 0;
  CLI::App* decode = app.add_subcommand("decode", "decode a dataset split with a checkpoint");
  add_common(decode, dec_args, true);
  decode->add_option("--data", dec.data_dir, "dataset directory")->required();
  decode->add_option("--ckpt", dec.ckpt_path, "model checkpoint")->required();
  decode->add_option("--split", dec.split, "dataset split (train|dev|eval)");
  decode->add_option("--mode", mode_str, "search mode (simple|segmental|oracle)");
  decode->add_option("--alpha", alpha, "length model scale");
  decode->add_option("--gamma", gamma, "length normalization (0|1)");
  decode->add_option("--beam", beam, "beam size");
  decode->add_option("--delta-max", delta_max, "maximum segment length");
  decode->add_option("--length-model", length_model_str,
                     "length model for scoring (auto|none|static|neural)");
  decode->add_option("--recombination", recomb_str, "recombination (off|label_history)");
  decode->add_option("--silence", silence_str, "expected silence variant (none|no_split|split)");
  decode->add_option("--concat", dec.concat, "concatenate C consecutive sequences");
  decode->add_option("--jobs", dec.jobs, "parallel decode jobs");
  decode->add_flag("--dump-scores", dec.dump_scores, "dump per-label score analysis");
  decode->add_option("--sweep", sweep_str, "comma-separated alpha list; runs a scale sweep");

  // verify
  std::uint64_t verify_seed = 1;
  std::string verify_scratch = "verify_scratch";
  CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_option("--seed", verify_seed, "seed for randomized checks");
  verify->add_option("--scratch", verify_scratch, "scratch directory for checkpoint checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return segatt::cmd_gen_data(load_config(gen_args), gen_args.out_dir);
    }
    if (train->parsed()) {
      return segatt::cmd_train(load_config(train_args), train_data, import_global_path,
                               train_args.out_dir);
    }
    if (decode->parsed()) {
      segatt::ExperimentConfig cfg = load_config(dec_args);
      if (!mode_str.empty()) cfg.search.mode = segatt::search_mode_from_string(mode_str);
      if (decode->count("--alpha") > 0) cfg.search.alpha = alpha;
      if (gamma >= 0) cfg.search.gamma = gamma;
      if (beam > 0) cfg.search.beam_size = beam;
      if (delta_max > 0) cfg.search.delta_max = delta_max;
      if (!recomb_str.empty())
        cfg.search.recombination = segatt::recombination_from_string(recomb_str);
      if (!length_model_str.empty()) {
        cfg.search_length_model = length_model_str;
        if (length_model_str != "auto")
          cfg.search.length_model = segatt::length_model_from_string(length_model_str);
      }
      if (!silence_str.empty())
        cfg.silence_variant = segatt::silence_variant_from_string(silence_str);
      if (!sweep_str.empty()) {
        for (const auto& tok : segatt::split_on(sweep_str, ','))
          if (!tok.empty()) dec.sweep_alphas.push_back(std::stod(tok));
      }
      dec.out_dir = dec_args.out_dir;
      return segatt::cmd_decode(cfg, dec);
    }
    if (verify->parsed()) {
      return segatt::cmd_verify(verify_seed, verify_scratch);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
