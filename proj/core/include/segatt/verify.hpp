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

// Self-contained invariant suite behind `segatt verify`: finite-difference
// gradient checks, normalization identities, beam-vs-oracle equivalences and
// checkpoint integrity. Each check prints one verdict line; the command
// exits non-zero if any check fails.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "segatt/model.hpp"

namespace segatt {

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<VerifyCheck> run_verification_suite(std::uint64_t seed, const std::string& scratch_dir);

// Central finite differences through a scalar loss for every trainable
// parameter value; returns the maximum relative error against the tape
// gradients. `loss_fn` must rebuild the graph on every call.
double max_grad_rel_error(Model& m, const std::function<Tensor()>& loss_fn, double eps);

// Tiny-instance helpers shared by the verification suite, the tests and the
// oracle-equivalence grids.
ModelConfig tiny_model_config(int vocab, LengthModelKind kind, bool ctx_dependency);
Model tiny_model(int vocab, LengthModelKind kind, bool ctx_dependency, std::uint64_t seed);
std::vector<double> random_features(int t_input, int dim, std::uint64_t seed);

}  // namespace segatt
