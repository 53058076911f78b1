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

#include "quatkgc/config.h"

#include <cctype>
#include <cmath>
#include <string>

#include "quatkgc/errors.h"

namespace quatkgc {

std::string_view to_string(VariantKind kind) {
  switch (kind) {
    case VariantKind::kHadamardRaw:
      return "hadamard-raw";
    case VariantKind::kHadamardNormalized:
      return "hadamard-norm";
    case VariantKind::kHamiltonRaw:
      return "hamilton-raw";
    case VariantKind::kHamiltonNormalized:
      return "hamilton-norm";
  }
  return "unknown";
}

std::optional<VariantKind> parse_variant(std::string_view name) {
  for (VariantKind kind : kAllVariants) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(NormKind norm) {
  return norm == NormKind::kL1 ? "l1" : "l2";
}

std::optional<NormKind> parse_norm(std::string_view name) {
  if (name == "l1") return NormKind::kL1;
  if (name == "l2") return NormKind::kL2;
  return std::nullopt;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (dim == 0) fail("dim must be > 0");
  if (dim % variant.width_divisor() != 0) {
    fail("dim " + std::to_string(dim) + " is not divisible by " +
         std::to_string(variant.width_divisor()) + " as required by " +
         std::string(to_string(variant.kind)));
  }
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) {
    fail("lr must be > 0");
  }
  if (negatives < 1) fail("neg must be >= 1");
  if (!(temperature >= 0) || !std::isfinite(temperature)) {
    fail("alpha must be >= 0");
  }
  if (!(margin > 0) || !std::isfinite(margin)) fail("gamma must be > 0");
  if (batch_size < 1) fail("batch must be >= 1");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1)) fail("adam_beta1 must be in [0, 1)");
  if (!(adam_beta2 >= 0 && adam_beta2 < 1)) fail("adam_beta2 must be in [0, 1)");
  if (!(adam_eps > 0)) fail("adam_eps must be > 0");
  if (threads < 1) fail("threads must be >= 1");
}

namespace {

constexpr BenchmarkPreset kPresets[] = {
    {"YAGO3-10", 1000, 5e-4, 256, 0.5, 30},
    {"DB100K", 1000, 1e-4, 128, 0.5, 20},
    {"FB15K", 1500, 1e-4, 256, 1.0, 26},
    {"WN18", 1000, 1e-3, 128, 0.5, 10},
    {"FB15K-237", 1000, 1e-3, 128, 0.5, 20},
    {"WN18RR", 1000, 1e-3, 128, 0.5, 12},
};

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::span<const BenchmarkPreset> benchmark_presets() { return kPresets; }

std::optional<TrainConfig> preset_config(std::string_view benchmark) {
  for (const auto& p : kPresets) {
    if (!iequals(p.name, benchmark)) continue;
    TrainConfig c;
    c.dim = p.dim;
    c.learning_rate = p.learning_rate;
    c.negatives = p.negatives;
    c.temperature = p.temperature;
    c.margin = p.margin;
    return c;
  }
  return std::nullopt;
}

}  // namespace quatkgc
