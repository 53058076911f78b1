/*
 * Copyright 2026 The quatkgc Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "quatkgc/checkpoint.h"

#include <bit>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "quatkgc/errors.h"

namespace quatkgc {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr const char* kMagic = "quatkgc-checkpoint";
// Longest header we are willing to read before giving up.
constexpr std::size_t kMaxHeader = 4096;

[[noreturn]] void version_mismatch(const std::string& detail) {
  throw CheckpointError("checkpoint version mismatch: " + detail);
}

std::map<std::string, std::string> parse_header(const std::string& line) {
  std::istringstream in(line);
  std::string magic;
  in >> magic;
  if (magic != kMagic) version_mismatch("not a quatkgc checkpoint");
  std::map<std::string, std::string> fields;
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) version_mismatch("bad header field " + token);
    fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return fields;
}

std::uint64_t parse_uint(const std::map<std::string, std::string>& fields,
                         const std::string& key) {
  auto it = fields.find(key);
  if (it == fields.end()) version_mismatch("header lacks " + key);
  try {
    std::size_t used = 0;
    const auto v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    version_mismatch("bad value for " + key);
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const ModelParams& params,
                      const CheckpointInfo& info) {
  out << kMagic << " version=" << kCheckpointVersion << " dim=" << params.dim()
      << " entities=" << params.num_entities()
      << " relations=" << params.num_relations()
      << " variant=" << to_string(info.variant.kind)
      << " norm=" << to_string(info.variant.norm) << " seed=" << info.seed
      << '\n';
  for (ParamTable t : kAllTables) {
    const auto& data = params.table(t);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
  }
  if (!out) throw CheckpointError("checkpoint write failed");
}

void save_checkpoint(const std::filesystem::path& path,
                     const ModelParams& params, const CheckpointInfo& info) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open " + tmp.string());
    write_checkpoint(out, params, info);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  char c = 0;
  while (in.get(c) && c != '\n') {
    line.push_back(c);
    if (line.size() > kMaxHeader) version_mismatch("header too long");
  }
  if (c != '\n') version_mismatch("missing header line");
  const auto fields = parse_header(line);
  if (parse_uint(fields, "version") != kCheckpointVersion) {
    version_mismatch("expected version " + std::to_string(kCheckpointVersion));
  }
  const auto dim = parse_uint(fields, "dim");
  const auto ne = parse_uint(fields, "entities");
  const auto nr = parse_uint(fields, "relations");
  Checkpoint ckpt;
  auto vit = fields.find("variant");
  auto nit = fields.find("norm");
  if (vit == fields.end() || nit == fields.end()) {
    version_mismatch("header lacks variant/norm");
  }
  const auto kind = parse_variant(vit->second);
  const auto norm = parse_norm(nit->second);
  if (!kind || !norm) version_mismatch("unknown variant or norm");
  ckpt.info.variant = {*kind, *norm};
  ckpt.info.seed = parse_uint(fields, "seed");
  if (dim == 0 || dim % ckpt.info.variant.width_divisor() != 0) {
    version_mismatch("dim does not fit variant");
  }

  ckpt.params = ModelParams(ne, nr, dim);
  for (ParamTable t : kAllTables) {
    auto& data = ckpt.params.table(t);
    const auto bytes = static_cast<std::streamsize>(data.size() * sizeof(float));
    in.read(reinterpret_cast<char*>(data.data()), bytes);
    if (in.gcount() != bytes) throw CheckpointError("checkpoint truncated");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CheckpointError("checkpoint has trailing bytes");
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace quatkgc
