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

// Internal JSON (de)serialization helpers. Not installed; public headers
// stay free of the vendored json dependency.

#include <json.hpp>

#include "segatt/model.hpp"
#include "segatt/util.hpp"

namespace segatt {

using Json = nlohmann::json;

// Rejects unknown keys so config typos fail hard instead of being ignored.
void check_keys(const Json& obj, const std::vector<std::string>& known, const std::string& where);

Json require(const Json& obj, const std::string& key, const std::string& where);

Json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const Json& j);

}  // namespace segatt
