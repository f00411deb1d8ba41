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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace segatt {

// Error raised for malformed configs, bad shapes, invalid windows etc.
// All library errors derive from std::runtime_error so callers can catch
// one base type at the CLI boundary.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] void fail(const std::string& msg);

// FNV-1a, used for config hashes and checkpoint checksums.
std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ull);

std::string hex64(std::uint64_t v);

std::vector<std::string> split_ws(const std::string& line);
std::vector<std::string> split_on(const std::string& line, char sep);

// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
bool file_exists(const std::string& path);
void make_dirs(const std::string& path);

std::string shape_str(const std::vector<int>& shape);

}  // namespace segatt
