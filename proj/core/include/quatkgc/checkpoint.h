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

// Checkpoint file: one text header line
//
//   quatkgc-checkpoint version=1 dim=D entities=E relations=R
//       variant=hamilton-norm norm=l1 seed=S
//
// (single line, '\n' terminated) followed by raw little-endian float32 data
// for the entity, translation, head-rotation and tail-rotation tables, each
// row-major. Loading reproduces the saved tables bit for bit.

#ifndef QUATKGC_CHECKPOINT_H_
#define QUATKGC_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "quatkgc/config.h"
#include "quatkgc/model.h"

namespace quatkgc {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointInfo {
  ScoreVariant variant;
  std::uint64_t seed = 0;
  friend bool operator==(const CheckpointInfo&, const CheckpointInfo&) = default;
};

struct Checkpoint {
  ModelParams params;
  CheckpointInfo info;
};

void write_checkpoint(std::ostream& out, const ModelParams& params,
                      const CheckpointInfo& info);
void save_checkpoint(const std::filesystem::path& path,
                     const ModelParams& params, const CheckpointInfo& info);

// Throws CheckpointError ("checkpoint version mismatch" for an unreadable or
// foreign header, "checkpoint truncated" for short payloads).
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace quatkgc

#endif  // QUATKGC_CHECKPOINT_H_
