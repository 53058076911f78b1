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

// Negative triple generation and self-adversarial weighting.

#ifndef QUATKGC_SAMPLER_H_
#define QUATKGC_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "quatkgc/kg_data.h"
#include "quatkgc/model.h"

namespace quatkgc {

using Rng = std::mt19937_64;

// Rejection attempts per negative before a uniform draw is accepted as is.
inline constexpr std::size_t kMaxRejections = 1000;

struct NegativeBatch {
  std::vector<Triple> positives;
  // positives.size() * per_positive entries; row i holds the negatives of
  // positives[i].
  std::vector<Triple> negatives;
  std::size_t per_positive = 0;
  // Every positive of one batch is corrupted on the same side.
  Side side = Side::kTail;
  // Negatives accepted after kMaxRejections failed draws; these may be true
  // triples.
  std::size_t fallbacks = 0;

  std::span<const Triple> negatives_of(std::size_t i) const {
    return std::span<const Triple>(negatives).subspan(i * per_positive,
                                                      per_positive);
  }
};

// Replaces the `side` entity of every positive with `n` ids drawn uniformly
// from [0, num_entities), rejecting draws that form a triple of
// `train_filter`. Throws ContractViolation when n == 0 or there are no
// entities.
NegativeBatch sample_negatives(std::span<const Triple> batch, std::size_t n,
                               Side side, std::size_t num_entities,
                               const FilterIndex& train_filter, Rng& rng);

// Alternates head- and tail-corruption batches, starting with heads.
class NegativeSampler {
 public:
  NegativeSampler(std::size_t num_entities, const FilterIndex& train_filter,
                  std::uint64_t seed);

  NegativeBatch next(std::span<const Triple> batch, std::size_t n);

  std::size_t total_fallbacks() const { return total_fallbacks_; }

 private:
  std::size_t num_entities_;
  const FilterIndex* filter_;
  Rng rng_;
  Side next_side_ = Side::kHead;
  std::size_t total_fallbacks_ = 0;
};

// p_i = exp(alpha f_i) / sum_j exp(alpha f_j) over one positive's negative
// scores, evaluated with max subtraction. The result is a constant for
// backpropagation. Throws ContractViolation on an empty input or alpha < 0.
template <typename Real>
std::vector<double> self_adversarial_weights(std::span<const Real> neg_scores,
                                             double alpha);

}  // namespace quatkgc

#endif  // QUATKGC_SAMPLER_H_
