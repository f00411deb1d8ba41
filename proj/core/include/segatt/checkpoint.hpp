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

// Checkpoint container: a versioned text header, the model configuration as
// JSON, then each tensor as (name, shape, raw little-endian 64-bit floats),
// closed by an FNV-1a checksum line. Round-trips are bit-exact; loading
// verifies the checksum and rejects corrupted files.
//
// Reserved tensor-name prefixes inside the container:
//   "static."  static length model arrays (mu, log_z)
//   "opt."     optimizer state (Adam moments), used by training-state files

#include <string>
#include <utility>
#include <vector>

#include "segatt/length_model.hpp"
#include "segatt/model.hpp"

namespace segatt {

struct Checkpoint {
  ModelConfig cfg;
  std::vector<std::pair<std::string, Tensor>> tensors;
  int static_delta_max = 0;    // 0 when no static table is stored
  std::string extra_json;      // free-form metadata ("" if none)
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint make_checkpoint(const Model& m, const StaticLengthTable* static_table,
                           const std::string& extra_json = "");

// Rebuilds the model from a loaded container. Errors on missing or
// unexpected parameter names or shape mismatches.
Model model_from_checkpoint(const Checkpoint& ckpt);

// Extracts the static length table; returns an empty table if absent.
StaticLengthTable static_table_from_checkpoint(const Checkpoint& ckpt);

}  // namespace segatt
