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

#ifndef QUATKGC_CONFIG_H_
#define QUATKGC_CONFIG_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace quatkgc {

// The four scoring functions of the ablation. Hadamard variants work on d/2
// complex coordinates, Hamilton variants on d/4 quaternion coordinates.
// "Normalized" variants project the rotation rows to unit modulus at every
// forward pass.
enum class VariantKind {
  kHadamardRaw,
  kHadamardNormalized,
  kHamiltonRaw,
  kHamiltonNormalized,
};

enum class NormKind { kL1, kL2 };

struct ScoreVariant {
  VariantKind kind = VariantKind::kHamiltonNormalized;
  NormKind norm = NormKind::kL1;

  bool is_hamilton() const {
    return kind == VariantKind::kHamiltonRaw ||
           kind == VariantKind::kHamiltonNormalized;
  }
  bool is_normalized() const {
    return kind == VariantKind::kHamiltonNormalized ||
           kind == VariantKind::kHadamardNormalized;
  }
  // The embedding width must be a multiple of this.
  std::size_t width_divisor() const { return is_hamilton() ? 4 : 2; }

  friend bool operator==(const ScoreVariant&, const ScoreVariant&) = default;
};

inline constexpr VariantKind kAllVariants[] = {
    VariantKind::kHadamardRaw, VariantKind::kHadamardNormalized,
    VariantKind::kHamiltonRaw, VariantKind::kHamiltonNormalized};

// "hadamard-raw" | "hadamard-norm" | "hamilton-raw" | "hamilton-norm"
std::string_view to_string(VariantKind kind);
std::optional<VariantKind> parse_variant(std::string_view name);
// "l1" | "l2"
std::string_view to_string(NormKind norm);
std::optional<NormKind> parse_norm(std::string_view name);

struct TrainConfig {
  std::size_t dim = 1000;
  double learning_rate = 1e-3;
  std::size_t negatives = 128;
  double temperature = 0.5;  // self-adversarial alpha
  double margin = 12.0;      // gamma
  std::size_t batch_size = 512;
  std::size_t max_steps = 100000;
  std::size_t valid_every = 5000;
  ScoreVariant variant;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t threads = 1;

  // Throws ConfigError naming the first offending field.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Published best settings per benchmark (d, learning rate, negatives,
// temperature, margin); the remaining fields keep their defaults.
struct BenchmarkPreset {
  std::string_view name;
  std::size_t dim;
  double learning_rate;
  std::size_t negatives;
  double temperature;
  double margin;
};

std::span<const BenchmarkPreset> benchmark_presets();
std::optional<TrainConfig> preset_config(std::string_view benchmark);

}  // namespace quatkgc

#endif  // QUATKGC_CONFIG_H_
