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

#include "quatkgc/model.h"

#include <cmath>
#include <random>
#include <string>

#include "quatkgc/errors.h"
#include "quatkgc/quat_algebra.h"

namespace quatkgc {

template <typename Real>
BasicModelParams<Real>::BasicModelParams(std::size_t num_entities,
                                         std::size_t num_relations,
                                         std::size_t dim)
    : num_entities_(num_entities), num_relations_(num_relations), dim_(dim) {
  for (ParamTable t : kAllTables) tables_[index(t)].assign(rows(t) * dim, Real{0});
}

template <typename Real>
std::span<Real> BasicModelParams<Real>::row(ParamTable t, std::int32_t id) {
  if (id < 0 || static_cast<std::size_t>(id) >= rows(t)) {
    throw ContractViolation("row id " + std::to_string(id) + " out of range");
  }
  return {tables_[index(t)].data() + static_cast<std::size_t>(id) * dim_, dim_};
}

template <typename Real>
std::span<const Real> BasicModelParams<Real>::row(ParamTable t,
                                                  std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= rows(t)) {
    throw ContractViolation("row id " + std::to_string(id) + " out of range");
  }
  return {tables_[index(t)].data() + static_cast<std::size_t>(id) * dim_, dim_};
}

template <typename Real>
bool BasicModelParams<Real>::all_finite() const {
  for (const auto& t : tables_) {
    for (Real x : t) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

template <typename Real>
void SparseRows<Real>::add(std::int32_t id, std::span<const Real> grad) {
  if (grad.size() != dim_) throw ContractViolation("SparseRows::add: width");
  auto [it, inserted] = slot_.try_emplace(id, ids_.size());
  if (inserted) {
    ids_.push_back(id);
    values_.resize(values_.size() + dim_, Real{0});
  }
  Real* dst = values_.data() + it->second * dim_;
  for (std::size_t k = 0; k < dim_; ++k) dst[k] += grad[k];
}

template <typename Real>
std::span<const Real> SparseRows<Real>::find(std::int32_t id) const {
  if (auto it = slot_.find(id); it != slot_.end()) return row_at(it->second);
  return {};
}

template <typename Real>
void SparseRows<Real>::clear() {
  ids_.clear();
  values_.clear();
  slot_.clear();
}

template <typename Real>
void SparseGrads<Real>::merge(const SparseGrads& other) {
  for (std::size_t t = 0; t < kNumTables; ++t) {
    const auto& src = other.tables[t];
    for (std::size_t s = 0; s < src.size(); ++s) {
      tables[t].add(src.ids()[s], src.row_at(s));
    }
  }
}

ModelParams init_params(std::size_t num_entities, std::size_t num_relations,
                        const TrainConfig& config, std::uint64_t seed) {
  if (config.dim == 0 || config.dim % config.variant.width_divisor() != 0) {
    throw ConfigError("dim " + std::to_string(config.dim) +
                      " is not divisible by " +
                      std::to_string(config.variant.width_divisor()) +
                      " as required by " +
                      std::string(to_string(config.variant.kind)));
  }
  ModelParams params(num_entities, num_relations, config.dim);
  const float range =
      static_cast<float>((config.margin + 2.0) / static_cast<double>(config.dim));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-range, range);
  for (ParamTable t : kAllTables) {
    for (float& x : params.table(t)) x = dist(rng);
  }
  return params;
}

namespace {

template <typename Real>
void check_width(std::size_t dim, const ScoreVariant& variant) {
  if (dim == 0 || dim % variant.width_divisor() != 0) {
    throw ContractViolation("embedding width " + std::to_string(dim) +
                            " does not fit " +
                            std::string(to_string(variant.kind)));
  }
}

template <typename Real>
void product(std::span<const Real> x, std::span<const Real> y,
             const ScoreVariant& variant, std::span<Real> out) {
  if (variant.is_hamilton()) {
    hamilton_product<Real>(as_quats(x), as_quats(y), as_quats(out));
  } else {
    complex_product<Real>(as_complex(x), as_complex(y), as_complex(out));
  }
}

template <typename Real>
void product_backward(std::span<const Real> x, std::span<const Real> y,
                      std::span<const Real> upstream,
                      const ScoreVariant& variant, std::span<Real> grad_x,
                      std::span<Real> grad_y) {
  if (variant.is_hamilton()) {
    hamilton_product_backward<Real>(as_quats(x), as_quats(y),
                                    as_quats(upstream), as_quats(grad_x),
                                    as_quats(grad_y));
  } else {
    complex_product_backward<Real>(as_complex(x), as_complex(y),
                                   as_complex(upstream), as_complex(grad_x),
                                   as_complex(grad_y));
  }
}

template <typename Real>
void normalize_rows(std::span<const Real> raw, const ScoreVariant& variant,
                    std::span<Real> out) {
  const Real eps = static_cast<Real>(kNormalizeEps);
  if (variant.is_hamilton()) {
    normalize<Real>(as_quats(raw), eps, as_quats(out));
  } else {
    complex_normalize<Real>(as_complex(raw), eps, as_complex(out));
  }
}

template <typename Real>
void normalize_rows_backward(std::span<const Real> raw,
                             std::span<const Real> upstream,
                             const ScoreVariant& variant,
                             std::span<Real> grad) {
  const Real eps = static_cast<Real>(kNormalizeEps);
  if (variant.is_hamilton()) {
    normalize_backward<Real>(as_quats(raw), eps, as_quats(upstream),
                             as_quats(grad));
  } else {
    complex_normalize_backward<Real>(as_complex(raw), eps, as_complex(upstream),
                                     as_complex(grad));
  }
}

// Scratch for one triple: rotations, rotated entities and the residual.
template <typename Real>
struct Workspace {
  explicit Workspace(std::size_t d)
      : rot_h(d), rot_t(d), lhs(d), rhs(d), g_resid(d), g_h(d), g_t(d),
        g_rot_h(d), g_rot_t(d), g_raw_h(d), g_raw_t(d) {}
  std::vector<Real> rot_h, rot_t, lhs, rhs;
  std::vector<Real> g_resid, g_h, g_t, g_rot_h, g_rot_t, g_raw_h, g_raw_t;
};

// Fills ws.rot_h, ws.rot_t, ws.lhs = h (x) rot_h + r, ws.rhs = t (x) rot_t.
template <typename Real>
void forward_terms(const BasicModelParams<Real>& params, const Triple& tr,
                   const ScoreVariant& variant, Workspace<Real>& ws) {
  effective_rotation<Real>(params, tr.relation, Side::kHead, variant, ws.rot_h);
  effective_rotation<Real>(params, tr.relation, Side::kTail, variant, ws.rot_t);
  rotate<Real>(params.entity(tr.head), ws.rot_h, variant, ws.lhs);
  const auto r = params.rel_trans(tr.relation);
  for (std::size_t k = 0; k < ws.lhs.size(); ++k) ws.lhs[k] += r[k];
  rotate<Real>(params.entity(tr.tail), ws.rot_t, variant, ws.rhs);
}

template <typename Real>
Real sign_of(Real x) {
  return x > Real{0} ? Real{1} : (x < Real{0} ? Real{-1} : Real{0});
}

}  // namespace

template <typename Real>
void effective_rotation(const BasicModelParams<Real>& params, RelationId rel,
                        Side side, const ScoreVariant& variant,
                        std::span<Real> out) {
  const auto raw = side == Side::kHead ? params.rel_rot_head(rel)
                                       : params.rel_rot_tail(rel);
  if (out.size() != raw.size()) {
    throw ContractViolation("effective_rotation: output width");
  }
  if (variant.is_normalized()) {
    normalize_rows<Real>(raw, variant, out);
  } else {
    std::copy(raw.begin(), raw.end(), out.begin());
  }
}

template <typename Real>
void rotate(std::span<const Real> entity, std::span<const Real> rotation,
            const ScoreVariant& variant, std::span<Real> out) {
  product<Real>(entity, rotation, variant, out);
}

template <typename Real>
Real difference_norm(std::span<const Real> lhs, std::span<const Real> rhs,
                     NormKind norm) {
  if (lhs.size() != rhs.size()) {
    throw ContractViolation("difference_norm: width mismatch");
  }
  Real acc{0};
  if (norm == NormKind::kL1) {
    for (std::size_t k = 0; k < lhs.size(); ++k) acc += std::abs(lhs[k] - rhs[k]);
    return acc;
  }
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    const Real v = lhs[k] - rhs[k];
    acc += v * v;
  }
  return std::sqrt(acc);
}

template <typename Real>
Real distance_one(const BasicModelParams<Real>& params, const Triple& triple,
                  const ScoreVariant& variant) {
  check_width<Real>(params.dim(), variant);
  Workspace<Real> ws(params.dim());
  forward_terms(params, triple, variant, ws);
  return difference_norm<Real>(ws.lhs, ws.rhs, variant.norm);
}

template <typename Real>
std::vector<Real> distance(const BasicModelParams<Real>& params,
                           std::span<const Triple> batch,
                           const ScoreVariant& variant) {
  check_width<Real>(params.dim(), variant);
  Workspace<Real> ws(params.dim());
  std::vector<Real> out;
  out.reserve(batch.size());
  for (const Triple& tr : batch) {
    forward_terms(params, tr, variant, ws);
    out.push_back(difference_norm<Real>(ws.lhs, ws.rhs, variant.norm));
  }
  return out;
}

template <typename Real>
BasicScoreBatch<Real> score(const BasicModelParams<Real>& params,
                            std::span<const Triple> batch,
                            const ScoreVariant& variant) {
  BasicScoreBatch<Real> out;
  out.triples.assign(batch.begin(), batch.end());
  out.scores = distance(params, batch, variant);
  for (Real& s : out.scores) s = -s;
  return out;
}

template <typename Real>
void distance_backward(const BasicModelParams<Real>& params,
                       std::span<const Triple> batch,
                       const ScoreVariant& variant,
                       std::span<const Real> upstream,
                       SparseGrads<Real>& grads) {
  if (upstream.size() != batch.size()) {
    throw ContractViolation("distance_backward: upstream length");
  }
  check_width<Real>(params.dim(), variant);
  const std::size_t d = params.dim();
  Workspace<Real> ws(d);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Real g = upstream[i];
    if (g == Real{0}) continue;
    const Triple& tr = batch[i];
    forward_terms(params, tr, variant, ws);

    // Residual v = lhs - rhs; dD/dv is sign(v) for L1, v / ||v|| for L2.
    if (variant.norm == NormKind::kL1) {
      for (std::size_t k = 0; k < d; ++k) {
        ws.g_resid[k] = g * sign_of(ws.lhs[k] - ws.rhs[k]);
      }
    } else {
      Real sq{0};
      for (std::size_t k = 0; k < d; ++k) {
        const Real v = ws.lhs[k] - ws.rhs[k];
        sq += v * v;
      }
      const Real scale = g / (std::sqrt(sq) + static_cast<Real>(kL2GradEps));
      for (std::size_t k = 0; k < d; ++k) {
        ws.g_resid[k] = scale * (ws.lhs[k] - ws.rhs[k]);
      }
    }

    std::fill(ws.g_h.begin(), ws.g_h.end(), Real{0});
    std::fill(ws.g_t.begin(), ws.g_t.end(), Real{0});
    std::fill(ws.g_rot_h.begin(), ws.g_rot_h.end(), Real{0});
    std::fill(ws.g_rot_t.begin(), ws.g_rot_t.end(), Real{0});
    product_backward<Real>(params.entity(tr.head), ws.rot_h, ws.g_resid,
                           variant, ws.g_h, ws.g_rot_h);
    // rhs enters with a minus sign.
    for (Real& x : ws.g_resid) x = -x;
    product_backward<Real>(params.entity(tr.tail), ws.rot_t, ws.g_resid,
                           variant, ws.g_t, ws.g_rot_t);
    for (Real& x : ws.g_resid) x = -x;

    grads[ParamTable::kEntity].add(tr.head, ws.g_h);
    grads[ParamTable::kEntity].add(tr.tail, ws.g_t);
    grads[ParamTable::kRelTrans].add(tr.relation, ws.g_resid);
    if (variant.is_normalized()) {
      std::fill(ws.g_raw_h.begin(), ws.g_raw_h.end(), Real{0});
      std::fill(ws.g_raw_t.begin(), ws.g_raw_t.end(), Real{0});
      normalize_rows_backward<Real>(params.rel_rot_head(tr.relation),
                                    ws.g_rot_h, variant, ws.g_raw_h);
      normalize_rows_backward<Real>(params.rel_rot_tail(tr.relation),
                                    ws.g_rot_t, variant, ws.g_raw_t);
      grads[ParamTable::kRelRotHead].add(tr.relation, ws.g_raw_h);
      grads[ParamTable::kRelRotTail].add(tr.relation, ws.g_raw_t);
    } else {
      grads[ParamTable::kRelRotHead].add(tr.relation, ws.g_rot_h);
      grads[ParamTable::kRelRotTail].add(tr.relation, ws.g_rot_t);
    }
  }
}

template <typename Real>
SparseGrads<Real> score_backward(const BasicModelParams<Real>& params,
                                 std::span<const Triple> batch,
                                 const ScoreVariant& variant,
                                 std::span<const Real> upstream) {
  std::vector<Real> negated(upstream.begin(), upstream.end());
  for (Real& x : negated) x = -x;
  SparseGrads<Real> grads(params.dim());
  distance_backward<Real>(params, batch, variant, negated, grads);
  return grads;
}

#define QUATKGC_INSTANTIATE_MODEL(Real)                                        \
  template class BasicModelParams<Real>;                                      \
  template class SparseRows<Real>;                                            \
  template struct SparseGrads<Real>;                                          \
  template std::vector<Real> distance<Real>(const BasicModelParams<Real>&,    \
                                            std::span<const Triple>,          \
                                            const ScoreVariant&);             \
  template Real distance_one<Real>(const BasicModelParams<Real>&,             \
                                   const Triple&, const ScoreVariant&);       \
  template BasicScoreBatch<Real> score<Real>(const BasicModelParams<Real>&,   \
                                             std::span<const Triple>,         \
                                             const ScoreVariant&);            \
  template void distance_backward<Real>(                                      \
      const BasicModelParams<Real>&, std::span<const Triple>,                 \
      const ScoreVariant&, std::span<const Real>, SparseGrads<Real>&);        \
  template SparseGrads<Real> score_backward<Real>(                            \
      const BasicModelParams<Real>&, std::span<const Triple>,                 \
      const ScoreVariant&, std::span<const Real>);                            \
  template void effective_rotation<Real>(const BasicModelParams<Real>&,       \
                                         RelationId, Side,                    \
                                         const ScoreVariant&,                 \
                                         std::span<Real>);                    \
  template void rotate<Real>(std::span<const Real>, std::span<const Real>,    \
                             const ScoreVariant&, std::span<Real>);           \
  template Real difference_norm<Real>(std::span<const Real>,                  \
                                      std::span<const Real>, NormKind);

QUATKGC_INSTANTIATE_MODEL(float)
QUATKGC_INSTANTIATE_MODEL(double)

#undef QUATKGC_INSTANTIATE_MODEL

}  // namespace quatkgc
