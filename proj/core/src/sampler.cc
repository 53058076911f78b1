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

#include "quatkgc/sampler.h"

#include <algorithm>
#include <cmath>

#include "quatkgc/errors.h"

namespace quatkgc {

NegativeBatch sample_negatives(std::span<const Triple> batch, std::size_t n,
                               Side side, std::size_t num_entities,
                               const FilterIndex& train_filter, Rng& rng) {
  if (n == 0) throw ContractViolation("sample_negatives: n must be >= 1");
  if (num_entities == 0) {
    throw ContractViolation("sample_negatives: empty entity pool");
  }
  NegativeBatch out;
  out.positives.assign(batch.begin(), batch.end());
  out.per_positive = n;
  out.side = side;
  out.negatives.reserve(batch.size() * n);
  std::uniform_int_distribution<EntityId> pick(
      0, static_cast<EntityId>(num_entities - 1));

  for (const Triple& pos : batch) {
    const auto known = side == Side::kTail
                           ? train_filter.true_tails(pos.head, pos.relation)
                           : train_filter.true_heads(pos.relation, pos.tail);
    for (std::size_t j = 0; j < n; ++j) {
      EntityId candidate = pick(rng);
      std::size_t attempts = 1;
      while (std::binary_search(known.begin(), known.end(), candidate)) {
        if (attempts == kMaxRejections) {
          ++out.fallbacks;
          break;
        }
        candidate = pick(rng);
        ++attempts;
      }
      Triple neg = pos;
      (side == Side::kTail ? neg.tail : neg.head) = candidate;
      out.negatives.push_back(neg);
    }
  }
  return out;
}

NegativeSampler::NegativeSampler(std::size_t num_entities,
                                 const FilterIndex& train_filter,
                                 std::uint64_t seed)
    : num_entities_(num_entities), filter_(&train_filter), rng_(seed) {}

NegativeBatch NegativeSampler::next(std::span<const Triple> batch,
                                    std::size_t n) {
  NegativeBatch out =
      sample_negatives(batch, n, next_side_, num_entities_, *filter_, rng_);
  next_side_ = next_side_ == Side::kHead ? Side::kTail : Side::kHead;
  total_fallbacks_ += out.fallbacks;
  return out;
}

template <typename Real>
std::vector<double> self_adversarial_weights(std::span<const Real> neg_scores,
                                             double alpha) {
  if (neg_scores.empty()) {
    throw ContractViolation("self_adversarial_weights: no negatives");
  }
  if (!(alpha >= 0)) {
    throw ContractViolation("self_adversarial_weights: alpha must be >= 0");
  }
  double max_logit = -INFINITY;
  for (Real s : neg_scores) {
    max_logit = std::max(max_logit, alpha * static_cast<double>(s));
  }
  std::vector<double> w(neg_scores.size());
  double total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(alpha * static_cast<double>(neg_scores[i]) - max_logit);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

template std::vector<double> self_adversarial_weights<float>(
    std::span<const float>, double);
template std::vector<double> self_adversarial_weights<double>(
    std::span<const double>, double);

}  // namespace quatkgc
