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

// JSON form of TrainConfig and the manifest written into every run directory.
#ifndef QUATKGC_TOOLS_RUN_CONFIG_H_
#define QUATKGC_TOOLS_RUN_CONFIG_H_

#include <filesystem>
#include <string>

#include "json.hpp"
#include "quatkgc/config.h"
#include "quatkgc/evaluator.h"

namespace quatkgc::cli {

nlohmann::ordered_json config_to_json(const TrainConfig& config);

// Applies every key of `j` on top of `config`. Accepts either a bare config
// object or a full run manifest (its "config" member is used). A "preset"
// key names a benchmark whose published setting is applied first. Unknown
// keys or wrongly typed values throw ConfigError.
void apply_config_json(const nlohmann::json& j, TrainConfig& config);
TrainConfig load_config_file(const std::filesystem::path& path);

struct RunManifest {
  TrainConfig config;
  std::string command;
  std::filesystem::path dataset;
  std::filesystem::path output;
  std::string started_at;
  std::string finished_at;
  std::string version;
};

nlohmann::ordered_json manifest_to_json(const RunManifest& m);
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

nlohmann::ordered_json metrics_to_json(const EvalMetrics& m);
nlohmann::ordered_json metrics_to_json(const SplitMetrics& m);

// UTC, second resolution, e.g. 2026-01-31T12:00:00Z.
std::string utc_timestamp();

// Writes `text` to `path` through a temporary file and a rename.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace quatkgc::cli

#endif  // QUATKGC_TOOLS_RUN_CONFIG_H_
