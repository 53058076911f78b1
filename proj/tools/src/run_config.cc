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

#include "run_config.h"

#include <chrono>
#include <ctime>
#include <fstream>

#include "quatkgc/errors.h"

namespace quatkgc::cli {
namespace {

using nlohmann::json;

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("config key '" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

double get_real(const json& v, const std::string& key) {
  if (!v.is_number()) {
    throw ConfigError("config key '" + key + "' must be a number");
  }
  return v.get<double>();
}

}  // namespace

nlohmann::ordered_json config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["dim"] = c.dim;
  j["learning_rate"] = c.learning_rate;
  j["negatives"] = c.negatives;
  j["temperature"] = c.temperature;
  j["margin"] = c.margin;
  j["batch_size"] = c.batch_size;
  j["max_steps"] = c.max_steps;
  j["valid_every"] = c.valid_every;
  j["variant"] = std::string(to_string(c.variant.kind));
  j["norm"] = std::string(to_string(c.variant.norm));
  j["seed"] = c.seed;
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["adam_eps"] = c.adam_eps;
  j["threads"] = c.threads;
  return j;
}

void apply_config_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (j.contains("config") && j.contains("command")) {
    apply_config_json(j.at("config"), c);
    return;
  }
  if (j.contains("preset")) {
    const auto name = get_as<std::string>(j.at("preset"), "preset");
    const auto preset = preset_config(name);
    if (!preset) throw ConfigError("unknown preset '" + name + "'");
    c = *preset;
  }
  for (const auto& [key, v] : j.items()) {
    if (key == "preset") {
      continue;
    } else if (key == "dim" || key == "d") {
      c.dim = get_count(v, key);
    } else if (key == "learning_rate" || key == "lr" || key == "epsilon") {
      c.learning_rate = get_real(v, key);
    } else if (key == "negatives" || key == "n") {
      c.negatives = get_count(v, key);
    } else if (key == "temperature" || key == "alpha") {
      c.temperature = get_real(v, key);
    } else if (key == "margin" || key == "gamma") {
      c.margin = get_real(v, key);
    } else if (key == "batch_size") {
      c.batch_size = get_count(v, key);
    } else if (key == "max_steps") {
      c.max_steps = get_count(v, key);
    } else if (key == "valid_every") {
      c.valid_every = get_count(v, key);
    } else if (key == "variant") {
      const auto s = get_as<std::string>(v, key);
      const auto kind = parse_variant(s);
      if (!kind) throw ConfigError("unknown variant '" + s + "'");
      c.variant.kind = *kind;
    } else if (key == "norm") {
      const auto s = get_as<std::string>(v, key);
      const auto norm = parse_norm(s);
      if (!norm) throw ConfigError("unknown norm '" + s + "'");
      c.variant.norm = *norm;
    } else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError("config key 'seed' must be a non-negative integer");
      }
      c.seed = v.get<std::uint64_t>();
    } else if (key == "adam_beta1") {
      c.adam_beta1 = get_real(v, key);
    } else if (key == "adam_beta2") {
      c.adam_beta2 = get_real(v, key);
    } else if (key == "adam_eps") {
      c.adam_eps = get_real(v, key);
    } else if (key == "threads") {
      c.threads = get_count(v, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

TrainConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  TrainConfig c;
  apply_config_json(j, c);
  return c;
}

nlohmann::ordered_json manifest_to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["version"] = m.version;
  j["dataset"] = m.dataset.string();
  j["output"] = m.output.string();
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["config"] = config_to_json(m.config);
  nlohmann::ordered_json h;
  h["d"] = m.config.dim;
  h["epsilon"] = m.config.learning_rate;
  h["n"] = m.config.negatives;
  h["alpha"] = m.config.temperature;
  h["gamma"] = m.config.margin;
  j["hyperparameters"] = h;
  return j;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  write_text_file(path, manifest_to_json(m).dump(2) + "\n");
}

nlohmann::ordered_json metrics_to_json(const EvalMetrics& m) {
  nlohmann::ordered_json j;
  j["mr"] = m.mr;
  j["mrr"] = m.mrr;
  j["hits1"] = m.hits1;
  j["hits3"] = m.hits3;
  j["hits10"] = m.hits10;
  j["count"] = m.count;
  return j;
}

nlohmann::ordered_json metrics_to_json(const SplitMetrics& m) {
  nlohmann::ordered_json j;
  j["head"] = metrics_to_json(m.head);
  j["tail"] = metrics_to_json(m.tail);
  j["both"] = metrics_to_json(m.both);
  return j;
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace quatkgc::cli
