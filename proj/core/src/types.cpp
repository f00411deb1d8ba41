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

#include "segatt/types.hpp"

#include "segatt/util.hpp"

namespace segatt {

std::string to_string(WindowMode m) {
  return m == WindowMode::kGlobal ? "global" : "segmental";
}

std::string to_string(SilenceVariant v) {
  switch (v) {
    case SilenceVariant::kNone: return "none";
    case SilenceVariant::kNoSplit: return "no_split";
    case SilenceVariant::kSplit: return "split";
  }
  return "?";
}

std::string to_string(LengthModelKind k) {
  switch (k) {
    case LengthModelKind::kNone: return "none";
    case LengthModelKind::kStatic: return "static";
    case LengthModelKind::kNeural: return "neural";
  }
  return "?";
}

std::string to_string(SearchMode m) {
  switch (m) {
    case SearchMode::kSimple: return "simple";
    case SearchMode::kSegmental: return "segmental";
    case SearchMode::kOracle: return "oracle";
  }
  return "?";
}

WindowMode window_mode_from_string(const std::string& s) {
  if (s == "global") return WindowMode::kGlobal;
  if (s == "segmental") return WindowMode::kSegmental;
  fail("unknown window mode: '" + s + "' (expected global|segmental)");
}

SilenceVariant silence_variant_from_string(const std::string& s) {
  if (s == "none") return SilenceVariant::kNone;
  if (s == "no_split") return SilenceVariant::kNoSplit;
  if (s == "split") return SilenceVariant::kSplit;
  fail("unknown silence variant: '" + s + "' (expected none|no_split|split)");
}

LengthModelKind length_model_from_string(const std::string& s) {
  if (s == "none") return LengthModelKind::kNone;
  if (s == "static") return LengthModelKind::kStatic;
  if (s == "neural") return LengthModelKind::kNeural;
  fail("unknown length model: '" + s + "' (expected none|static|neural)");
}

SearchMode search_mode_from_string(const std::string& s) {
  if (s == "simple") return SearchMode::kSimple;
  if (s == "segmental") return SearchMode::kSegmental;
  if (s == "oracle") return SearchMode::kOracle;
  fail("unknown search mode: '" + s + "' (expected simple|segmental|oracle)");
}

Segmentation::Segmentation(std::vector<int> boundaries, int total_frames)
    : t_(std::move(boundaries)), total_(total_frames) {
  if (t_.empty()) fail("segmentation: no boundaries");
  if (total_ < 1) fail("segmentation: total frame count must be positive");
  int prev = 0;
  for (int b : t_) {
    if (b <= prev)
      fail("segmentation: boundaries must be strictly increasing, got " + std::to_string(b) +
           " after " + std::to_string(prev));
    prev = b;
  }
  if (t_.back() != total_)
    fail("segmentation: last boundary " + std::to_string(t_.back()) + " must equal T=" +
         std::to_string(total_));
}

}  // namespace segatt
