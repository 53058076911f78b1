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

// Learnable parameters and the translation-with-rotation distance
//
//   d_r(h, t) = || h (x) rot(r_H) + r - t (x) rot(r_T) ||
//
// where (x) is the Hamilton product (or the complex product for the Hadamard
// variants) and rot() is unit normalization for the normalized variants and
// the identity otherwise. Scores are negated distances.
//
// Everything is templated on the scalar type: training runs in float,
// gradient checks in double. Definitions live in model.cc with explicit
// instantiations for both.

#ifndef QUATKGC_MODEL_H_
#define QUATKGC_MODEL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "quatkgc/config.h"
#include "quatkgc/kg_data.h"

namespace quatkgc {

enum class ParamTable : int {
  kEntity = 0,
  kRelTrans = 1,
  kRelRotHead = 2,
  kRelRotTail = 3,
};
inline constexpr std::size_t kNumTables = 4;
inline constexpr ParamTable kAllTables[] = {
    ParamTable::kEntity, ParamTable::kRelTrans, ParamTable::kRelRotHead,
    ParamTable::kRelRotTail};

// Guard added to the L2 root in the backward pass.
inline constexpr double kL2GradEps = 1e-12;

template <typename Real>
class BasicModelParams {
 public:
  BasicModelParams() = default;
  BasicModelParams(std::size_t num_entities, std::size_t num_relations,
                   std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t num_entities() const { return num_entities_; }
  std::size_t num_relations() const { return num_relations_; }
  std::size_t rows(ParamTable t) const {
    return t == ParamTable::kEntity ? num_entities_ : num_relations_;
  }

  std::vector<Real>& table(ParamTable t) { return tables_[index(t)]; }
  const std::vector<Real>& table(ParamTable t) const {
    return tables_[index(t)];
  }

  // Row accessors; ids are range-checked.
  std::span<Real> row(ParamTable t, std::int32_t id);
  std::span<const Real> row(ParamTable t, std::int32_t id) const;

  std::span<const Real> entity(EntityId e) const {
    return row(ParamTable::kEntity, e);
  }
  std::span<const Real> rel_trans(RelationId r) const {
    return row(ParamTable::kRelTrans, r);
  }
  std::span<const Real> rel_rot_head(RelationId r) const {
    return row(ParamTable::kRelRotHead, r);
  }
  std::span<const Real> rel_rot_tail(RelationId r) const {
    return row(ParamTable::kRelRotTail, r);
  }

  bool all_finite() const;

  template <typename Other>
  BasicModelParams<Other> cast() const {
    BasicModelParams<Other> out(num_entities_, num_relations_, dim_);
    for (ParamTable t : kAllTables) {
      const auto& src = table(t);
      auto& dst = out.table(t);
      for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = static_cast<Other>(src[i]);
      }
    }
    return out;
  }

  friend bool operator==(const BasicModelParams&,
                         const BasicModelParams&) = default;

 private:
  static std::size_t index(ParamTable t) { return static_cast<std::size_t>(t); }

  std::size_t num_entities_ = 0;
  std::size_t num_relations_ = 0;
  std::size_t dim_ = 0;
  std::array<std::vector<Real>, kNumTables> tables_;
};

using ModelParams = BasicModelParams<float>;

// Gradient rows keyed by row id, in first-touch order.
template <typename Real>
class SparseRows {
 public:
  explicit SparseRows(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  // Adds `grad` into the row for `id`, creating a zero row first if needed.
  void add(std::int32_t id, std::span<const Real> grad);
  // nullptr-like empty span when the row was never touched.
  std::span<const Real> find(std::int32_t id) const;

  const std::vector<std::int32_t>& ids() const { return ids_; }
  std::span<const Real> row_at(std::size_t slot) const {
    return {values_.data() + slot * dim_, dim_};
  }
  std::span<Real> row_at(std::size_t slot) {
    return {values_.data() + slot * dim_, dim_};
  }

  void clear();

 private:
  std::size_t dim_;
  std::vector<std::int32_t> ids_;
  std::vector<Real> values_;
  std::unordered_map<std::int32_t, std::size_t> slot_;
};

template <typename Real>
struct SparseGrads {
  explicit SparseGrads(std::size_t dim = 0)
      : tables{SparseRows<Real>(dim), SparseRows<Real>(dim),
               SparseRows<Real>(dim), SparseRows<Real>(dim)} {}

  SparseRows<Real>& operator[](ParamTable t) {
    return tables[static_cast<std::size_t>(t)];
  }
  const SparseRows<Real>& operator[](ParamTable t) const {
    return tables[static_cast<std::size_t>(t)];
  }
  bool empty() const {
    for (const auto& t : tables) {
      if (!t.empty()) return false;
    }
    return true;
  }
  // Accumulates every row of `other` into this.
  void merge(const SparseGrads& other);

  std::array<SparseRows<Real>, kNumTables> tables;
};

// Entries uniform in [-(gamma + 2) / d, (gamma + 2) / d], drawn table by table
// (entity, translation, head rotation, tail rotation) from one seeded stream.
// Throws ConfigError when `config.dim` does not fit `config.variant`.
ModelParams init_params(std::size_t num_entities, std::size_t num_relations,
                        const TrainConfig& config, std::uint64_t seed);

template <typename Real>
struct BasicScoreBatch {
  std::vector<Triple> triples;
  std::vector<Real> scores;
};
using ScoreBatch = BasicScoreBatch<float>;

// Throws ContractViolation on out-of-range ids or a width that does not fit
// the variant.
template <typename Real>
std::vector<Real> distance(const BasicModelParams<Real>& params,
                           std::span<const Triple> batch,
                           const ScoreVariant& variant);

template <typename Real>
Real distance_one(const BasicModelParams<Real>& params, const Triple& triple,
                  const ScoreVariant& variant);

// f_r(h, t) = -d_r(h, t).
template <typename Real>
BasicScoreBatch<Real> score(const BasicModelParams<Real>& params,
                            std::span<const Triple> batch,
                            const ScoreVariant& variant);

// Gradients of sum_i upstream[i] * d_r(batch[i]) with respect to every touched
// parameter row (note: with respect to the distance, not the score). The L1
// subgradient uses sign(0) = 0. Results are added into `grads`.
template <typename Real>
void distance_backward(const BasicModelParams<Real>& params,
                       std::span<const Triple> batch,
                       const ScoreVariant& variant,
                       std::span<const Real> upstream,
                       SparseGrads<Real>& grads);

// Same contract for d(sum upstream[i] * score_i); equals distance_backward
// with a negated upstream.
template <typename Real>
SparseGrads<Real> score_backward(const BasicModelParams<Real>& params,
                                 std::span<const Triple> batch,
                                 const ScoreVariant& variant,
                                 std::span<const Real> upstream);

// Building blocks for all-candidate scoring.

enum class Side { kHead, kTail };

// The rotation row actually applied on `side` of relation `rel`: the stored
// row, normalized per coordinate for normalized variants.
template <typename Real>
void effective_rotation(const BasicModelParams<Real>& params, RelationId rel,
                        Side side, const ScoreVariant& variant,
                        std::span<Real> out);

// out = entity (x) rotation, using the variant's product.
template <typename Real>
void rotate(std::span<const Real> entity, std::span<const Real> rotation,
            const ScoreVariant& variant, std::span<Real> out);

// ||lhs - rhs|| under `norm`, accumulated in index order.
template <typename Real>
Real difference_norm(std::span<const Real> lhs, std::span<const Real> rhs,
                     NormKind norm);

}  // namespace quatkgc

#endif  // QUATKGC_MODEL_H_
