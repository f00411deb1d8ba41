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

#include "json_io.hpp"

#include <algorithm>

namespace segatt {

void check_keys(const Json& obj, const std::vector<std::string>& known, const std::string& where) {
  if (!obj.is_object()) fail(where + ": expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      fail(where + ": unknown key '" + it.key() + "'");
  }
}

Json require(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) fail(where + ": missing required key '" + key + "'");
  return obj.at(key);
}

Json model_config_to_json(const ModelConfig& cfg) {
  Json j;
  j["input_dim"] = cfg.input_dim;
  j["enc_layers"] = cfg.enc_layers;
  j["enc_dim"] = cfg.enc_dim;
  j["pool_factors"] = cfg.pool_factors;
  j["dec_dim"] = cfg.dec_dim;
  j["att_dim"] = cfg.att_dim;
  j["readout_dim"] = cfg.readout_dim;
  j["vocab_size"] = cfg.vocab_size;
  j["window_mode"] = to_string(cfg.window_mode);
  j["ctx_dependency"] = cfg.ctx_dependency;
  j["silence_variant"] = to_string(cfg.silence_variant);
  j["length_model"] = to_string(cfg.length_model);
  j["len_dim"] = cfg.len_dim;
  j["len_emb_dim"] = cfg.len_emb_dim;
  j["silence_id"] = cfg.silence_id;
  j["eos_id"] = cfg.eos_id;
  return j;
}

ModelConfig model_config_from_json(const Json& j) {
  static const std::vector<std::string> keys = {
      "input_dim", "enc_layers", "enc_dim", "pool_factors", "dec_dim", "att_dim",
      "readout_dim", "vocab_size", "window_mode", "ctx_dependency", "silence_variant",
      "length_model", "len_dim", "len_emb_dim", "silence_id", "eos_id"};
  check_keys(j, keys, "model config");
  ModelConfig cfg;
  cfg.input_dim = require(j, "input_dim", "model config").get<int>();
  cfg.enc_layers = require(j, "enc_layers", "model config").get<int>();
  cfg.enc_dim = require(j, "enc_dim", "model config").get<int>();
  cfg.pool_factors = require(j, "pool_factors", "model config").get<std::vector<int>>();
  cfg.dec_dim = require(j, "dec_dim", "model config").get<int>();
  cfg.att_dim = require(j, "att_dim", "model config").get<int>();
  cfg.readout_dim = j.value("readout_dim", 0);
  cfg.vocab_size = require(j, "vocab_size", "model config").get<int>();
  cfg.window_mode = window_mode_from_string(require(j, "window_mode", "model config").get<std::string>());
  cfg.ctx_dependency = require(j, "ctx_dependency", "model config").get<bool>();
  cfg.silence_variant =
      silence_variant_from_string(j.value("silence_variant", std::string("none")));
  cfg.length_model = length_model_from_string(j.value("length_model", std::string("none")));
  cfg.len_dim = j.value("len_dim", 32);
  cfg.len_emb_dim = j.value("len_emb_dim", 16);
  cfg.silence_id = j.value("silence_id", -1);
  cfg.eos_id = j.value("eos_id", -1);
  return cfg;
}

}  // namespace segatt
