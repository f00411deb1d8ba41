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

#include <string>
#include <vector>

namespace segatt {

enum class WindowMode { kGlobal, kSegmental };
enum class SilenceVariant { kNone, kNoSplit, kSplit };
enum class LengthModelKind { kNone, kStatic, kNeural };
enum class SearchMode { kSimple, kSegmental, kOracle };

std::string to_string(WindowMode m);
std::string to_string(SilenceVariant v);
std::string to_string(LengthModelKind k);
std::string to_string(SearchMode m);

WindowMode window_mode_from_string(const std::string& s);
SilenceVariant silence_variant_from_string(const std::string& s);
LengthModelKind length_model_from_string(const std::string& s);
SearchMode search_mode_from_string(const std::string& s);

// Segment boundaries t_1..t_S at encoder-frame resolution, 1-based, with
// t_0 = 0 implicit and t_S = T. The constructor enforces strict
// monotonicity, so segments [t_{s-1}+1, t_s] tile [1, T] with no gap and
// no overlap by construction.
class Segmentation {
 public:
  Segmentation(std::vector<int> boundaries, int total_frames);

  const std::vector<int>& boundaries() const { return t_; }
  int num_segments() const { return static_cast<int>(t_.size()); }
  int total_frames() const { return total_; }

  // Segment s (0-based) covers 1-based frames [start_frame(s), end_frame(s)].
  int start_frame(int s) const { return (s == 0 ? 0 : t_[static_cast<std::size_t>(s) - 1]) + 1; }
  int end_frame(int s) const { return t_[static_cast<std::size_t>(s)]; }
  int length(int s) const { return end_frame(s) - start_frame(s) + 1; }

 private:
  std::vector<int> t_;
  int total_;
};

}  // namespace segatt
