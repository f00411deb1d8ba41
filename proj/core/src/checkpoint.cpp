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

#include "segatt/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <sstream>

#include "json_io.hpp"
#include "segatt/util.hpp"
#include "segatt/version.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format stores raw little-endian doubles");

namespace segatt {

namespace {
constexpr const char* kMagic = "SEGATT_CKPT";
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  Json j;
  j["format"] = kCheckpointFormatVersion;
  j["tool_version"] = kVersion;
  j["model"] = model_config_to_json(ckpt.cfg);
  j["static_delta_max"] = ckpt.static_delta_max;
  j["extra"] = ckpt.extra_json.empty() ? Json(nullptr) : Json::parse(ckpt.extra_json);
  std::string header = j.dump();

  std::ostringstream out;
  out << kMagic << " " << kCheckpointFormatVersion << "\n";
  out << header.size() << "\n" << header << "\n";
  out << "PARAMS " << ckpt.tensors.size() << "\n";
  for (const auto& [name, tensor] : ckpt.tensors) {
    out << name << " " << tensor->shape.size();
    for (int d : tensor->shape) out << " " << d;
    out << "\n";
    out.write(reinterpret_cast<const char*>(tensor->data.data()),
              static_cast<std::streamsize>(tensor->data.size() * sizeof(double)));
    out << "\n";
  }
  std::string payload = out.str();
  std::uint64_t checksum = fnv1a(payload.data(), payload.size());
  payload += "CHECKSUM " + hex64(checksum) + "\n";
  write_file(path, payload);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::string raw = read_file(path);

  // Split off and verify the checksum trailer first.
  auto tail = raw.rfind("CHECKSUM ");
  if (tail == std::string::npos || raw.size() < tail + 9 + 16 + 1)
    fail("checkpoint " + path + ": missing checksum trailer");
  std::string stored = raw.substr(tail + 9, 16);
  std::string payload = raw.substr(0, tail);
  std::string computed = hex64(fnv1a(payload.data(), payload.size()));
  if (stored != computed)
    fail("checkpoint " + path + ": checksum mismatch (stored " + stored + ", computed " +
         computed + "); file is corrupted");

  std::istringstream in(payload);
  std::string magic;
  int format = 0;
  in >> magic >> format;
  if (magic != kMagic) fail("checkpoint " + path + ": bad magic '" + magic + "'");
  if (format != kCheckpointFormatVersion)
    fail("checkpoint " + path + ": unsupported format version " + std::to_string(format));
  in.ignore();  // newline

  std::size_t header_len = 0;
  in >> header_len;
  in.ignore();
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  in.ignore();
  Json j = Json::parse(header);

  Checkpoint ckpt;
  ckpt.cfg = model_config_from_json(j.at("model"));
  ckpt.static_delta_max = j.value("static_delta_max", 0);
  if (j.contains("extra") && !j.at("extra").is_null()) ckpt.extra_json = j.at("extra").dump();

  std::string tag;
  std::size_t count = 0;
  in >> tag >> count;
  if (tag != "PARAMS") fail("checkpoint " + path + ": expected PARAMS section");
  in.ignore();
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    int rank = 0;
    in >> name >> rank;
    std::vector<int> shape(static_cast<std::size_t>(rank));
    std::size_t n = 1;
    for (int& d : shape) {
      in >> d;
      n *= static_cast<std::size_t>(d);
    }
    in.ignore();
    std::vector<double> data(n);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * sizeof(double)));
    in.ignore();
    if (!in) fail("checkpoint " + path + ": truncated tensor '" + name + "'");
    ckpt.tensors.emplace_back(name, make_tensor(std::move(shape), std::move(data)));
  }
  return ckpt;
}

Checkpoint make_checkpoint(const Model& m, const StaticLengthTable* static_table,
                           const std::string& extra_json) {
  Checkpoint ckpt;
  ckpt.cfg = m.cfg;
  ckpt.extra_json = extra_json;
  for (const auto& p : m.params) ckpt.tensors.emplace_back(p.name, p.value);
  if (static_table && !static_table->empty()) {
    ckpt.static_delta_max = static_table->delta_max;
    ckpt.tensors.emplace_back(
        "static.mu", make_tensor({static_table->vocab_size}, static_table->mu));
    ckpt.tensors.emplace_back(
        "static.log_z", make_tensor({static_table->vocab_size}, static_table->log_z));
  }
  return ckpt;
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  Rng dummy(0);
  Model m = build_model(ckpt.cfg, dummy);
  std::size_t matched = 0;
  for (const auto& [name, tensor] : ckpt.tensors) {
    if (name.rfind("static.", 0) == 0 || name.rfind("opt.", 0) == 0) continue;
    auto it = m.index.find(name);
    if (it == m.index.end()) fail("checkpoint: unexpected parameter '" + name + "'");
    Parameter& p = m.params[static_cast<std::size_t>(it->second)];
    if (p.value->shape != tensor->shape)
      fail("checkpoint: parameter '" + name + "' has shape " + shape_str(tensor->shape) +
           ", model expects " + shape_str(p.value->shape));
    p.value->data = tensor->data;
    ++matched;
  }
  if (matched != m.params.size())
    fail("checkpoint: " + std::to_string(m.params.size() - matched) + " model parameters missing");
  return m;
}

StaticLengthTable static_table_from_checkpoint(const Checkpoint& ckpt) {
  StaticLengthTable table;
  if (ckpt.static_delta_max == 0) return table;
  const Tensor* mu = nullptr;
  const Tensor* lz = nullptr;
  for (const auto& [name, tensor] : ckpt.tensors) {
    if (name == "static.mu") mu = &tensor;
    if (name == "static.log_z") lz = &tensor;
  }
  if (!mu || !lz) fail("checkpoint: static length table arrays missing");
  table.vocab_size = (*mu)->shape[0];
  table.delta_max = ckpt.static_delta_max;
  table.mu = (*mu)->data;
  table.log_z = (*lz)->data;
  return table;
}

}  // namespace segatt
