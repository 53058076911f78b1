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

#include "quatkgc/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <thread>

#include "quatkgc/errors.h"
#include "quatkgc/evaluator.h"
#include "quatkgc/sampler.h"

namespace quatkgc {

double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename Real>
LossResult margin_loss(std::span<const Real> pos_distances,
                       std::span<const Real> neg_distances,
                       std::span<const double> weights, std::size_t n,
                       double gamma) {
  const std::size_t batch = pos_distances.size();
  if (n == 0 || neg_distances.size() != batch * n ||
      weights.size() != batch * n) {
    throw ContractViolation("margin_loss: expected n negatives per positive");
  }
  LossResult out;
  out.grad_pos.resize(batch);
  out.grad_neg.resize(batch * n);
  if (batch == 0) return out;
  const double scale = 1.0 / static_cast<double>(batch);
  double total = 0;
  for (std::size_t i = 0; i < batch; ++i) {
    const double dp = static_cast<double>(pos_distances[i]);
    double term = softplus(dp - gamma);
    out.grad_pos[i] = sigmoid(dp - gamma) * scale;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = i * n + j;
      const double dn = static_cast<double>(neg_distances[k]);
      term += weights[k] * softplus(gamma - dn);
      out.grad_neg[k] = -weights[k] * sigmoid(gamma - dn) * scale;
    }
    total += term;
  }
  out.total = total * scale;
  return out;
}

template LossResult margin_loss<float>(std::span<const float>,
                                       std::span<const float>,
                                       std::span<const double>, std::size_t,
                                       double);
template LossResult margin_loss<double>(std::span<const double>,
                                        std::span<const double>,
                                        std::span<const double>, std::size_t,
                                        double);

OptimizerState::OptimizerState(const ModelParams& params) {
  for (ParamTable t : kAllTables) {
    m_[idx(t)].assign(params.table(t).size(), 0.0f);
    v_[idx(t)].assign(params.table(t).size(), 0.0f);
    steps_[idx(t)].assign(params.rows(t), 0);
  }
}

void adam_step(ModelParams& params, const SparseGrads<float>& grads,
               OptimizerState& state, const TrainConfig& config) {
  static const char* kTableNames[] = {"entity", "rel_trans", "rel_rot_head",
                                      "rel_rot_tail"};
  const std::size_t d = params.dim();
  for (ParamTable t : kAllTables) {
    const auto& rows = grads[t];
    if (rows.dim() != d && !rows.empty()) {
      throw ContractViolation("adam_step: gradient width mismatch");
    }
    if (state.row_steps(t).size() != params.rows(t)) {
      throw ContractViolation("adam_step: optimizer state shape mismatch");
    }
    for (std::size_t s = 0; s < rows.size(); ++s) {
      const auto id = rows.ids()[s];
      if (id < 0 || static_cast<std::size_t>(id) >= params.rows(t)) {
        throw ContractViolation("adam_step: gradient row out of range");
      }
      for (float g : rows.row_at(s)) {
        if (!std::isfinite(g)) {
          throw NonFiniteError(std::string("non-finite gradient in table ") +
                               kTableNames[static_cast<int>(t)] + " row " +
                               std::to_string(id));
        }
      }
    }
  }

  const float lr = static_cast<float>(config.learning_rate);
  const float b1 = static_cast<float>(config.adam_beta1);
  const float b2 = static_cast<float>(config.adam_beta2);
  const float eps = static_cast<float>(config.adam_eps);
  for (ParamTable t : kAllTables) {
    const auto& rows = grads[t];
    auto& m = state.first_moment(t);
    auto& v = state.second_moment(t);
    auto& steps = state.row_steps(t);
    auto& p = params.table(t);
    for (std::size_t s = 0; s < rows.size(); ++s) {
      const auto id = static_cast<std::size_t>(rows.ids()[s]);
      const auto g = rows.row_at(s);
      const auto step = static_cast<double>(++steps[id]);
      const float c1 = static_cast<float>(1.0 - std::pow(config.adam_beta1, step));
      const float c2 = static_cast<float>(1.0 - std::pow(config.adam_beta2, step));
      const std::size_t base = id * d;
      for (std::size_t k = 0; k < d; ++k) {
        float& mk = m[base + k];
        float& vk = v[base + k];
        mk = b1 * mk + (1.0f - b1) * g[k];
        vk = b2 * vk + (1.0f - b2) * g[k] * g[k];
        p[base + k] -= lr * (mk / c1) / (std::sqrt(vk / c2) + eps);
      }
    }
  }
}

std::string format_log_line(const ValidationRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "step=%zu loss=%.6f valid_mrr=%.6f wall_s=%.3f",
                r.step, r.loss, r.valid_mrr, r.wall_seconds);
  return buf;
}

std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

namespace {

// Runs fn(begin, end, worker) over `threads` contiguous chunks of [0, n).
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t threads, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
  if (workers <= 1) {
    fn(std::size_t{0}, n, std::size_t{0});
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w * chunk < n; ++w) {
    pool.emplace_back(fn, w * chunk, std::min(n, (w + 1) * chunk), w);
  }
}

// Cycles through a reshuffled permutation of the training triples.
class BatchStream {
 public:
  BatchStream(std::span<const Triple> train, std::uint64_t seed)
      : train_(train), order_(train.size()), rng_(seed) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
  }

  void next(std::size_t size, std::vector<Triple>& out) {
    out.clear();
    for (std::size_t i = 0; i < size; ++i) {
      if (cursor_ == order_.size()) {
        std::shuffle(order_.begin(), order_.end(), rng_);
        cursor_ = 0;
      }
      out.push_back(train_[order_[cursor_++]]);
    }
  }

 private:
  std::span<const Triple> train_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  Rng rng_;
};

}  // namespace

template <typename Real>
double batch_loss_and_grads(const BasicModelParams<Real>& params,
                            std::span<const Triple> positives,
                            std::span<const Triple> negatives, std::size_t n,
                            const TrainConfig& config, SparseGrads<Real>& grads) {
  const std::size_t b = positives.size();
  if (n == 0 || negatives.size() != b * n) {
    throw ContractViolation("batch_loss_and_grads: expected n negatives per positive");
  }
  const std::size_t threads = config.threads;
  std::vector<Real> pos_d(b), neg_d(b * n);
  parallel_chunks(b, threads, [&](std::size_t lo, std::size_t hi, std::size_t) {
    const auto p = distance(params, positives.subspan(lo, hi - lo), config.variant);
    std::copy(p.begin(), p.end(), pos_d.begin() + lo);
    const auto q = distance(params, negatives.subspan(lo * n, (hi - lo) * n),
                            config.variant);
    std::copy(q.begin(), q.end(), neg_d.begin() + lo * n);
  });

  std::vector<double> weights(b * n);
  std::vector<Real> neg_scores(n);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < n; ++j) neg_scores[j] = -neg_d[i * n + j];
    const auto w = self_adversarial_weights<Real>(neg_scores, config.temperature);
    std::copy(w.begin(), w.end(), weights.begin() + i * n);
  }

  const LossResult loss =
      margin_loss<Real>(pos_d, neg_d, weights, n, config.margin);
  grads = SparseGrads<Real>(params.dim());
  if (!std::isfinite(loss.total)) return loss.total;

  const std::vector<Real> up_pos(loss.grad_pos.begin(), loss.grad_pos.end());
  const std::vector<Real> up_neg(loss.grad_neg.begin(), loss.grad_neg.end());
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, b));
  std::vector<SparseGrads<Real>> partial(workers, SparseGrads<Real>(params.dim()));
  parallel_chunks(b, threads, [&](std::size_t lo, std::size_t hi, std::size_t w) {
    distance_backward<Real>(params, positives.subspan(lo, hi - lo),
                            config.variant,
                            std::span<const Real>(up_pos).subspan(lo, hi - lo),
                            partial[w]);
    distance_backward<Real>(
        params, negatives.subspan(lo * n, (hi - lo) * n), config.variant,
        std::span<const Real>(up_neg).subspan(lo * n, (hi - lo) * n),
        partial[w]);
  });
  for (std::size_t w = 1; w < partial.size(); ++w) partial[0].merge(partial[w]);
  grads = std::move(partial[0]);
  return loss.total;
}

template double batch_loss_and_grads<float>(const ModelParams&,
                                            std::span<const Triple>,
                                            std::span<const Triple>, std::size_t,
                                            const TrainConfig&,
                                            SparseGrads<float>&);
template double batch_loss_and_grads<double>(const BasicModelParams<double>&,
                                             std::span<const Triple>,
                                             std::span<const Triple>,
                                             std::size_t, const TrainConfig&,
                                             SparseGrads<double>&);

TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const TrainOptions& options) {
  config.validate();
  const std::size_t ne = dataset.vocab.num_entities();
  const std::size_t nr = dataset.vocab.num_relations();

  TrainResult result;
  result.final_params =
      init_params(ne, nr, config, derive_seed(config.seed, SeedStream::kInit));
  result.best_params = result.final_params;
  if (config.max_steps == 0) return result;
  if (dataset.triples.train.empty()) {
    throw ConfigError("training split is empty");
  }

  ModelParams& params = result.final_params;
  OptimizerState state(params);
  const FilterIndex train_filter = FilterIndex::build(dataset.triples.train);
  NegativeSampler sampler(ne, train_filter,
                          derive_seed(config.seed, SeedStream::kSampler));
  BatchStream batches(dataset.triples.train,
                      derive_seed(config.seed, SeedStream::kShuffle));
  const std::size_t n = config.negatives;
  const std::size_t threads = config.threads;
  const std::size_t valid_every =
      config.valid_every == 0 ? config.max_steps : config.valid_every;
  const auto start = std::chrono::steady_clock::now();

  std::vector<Triple> batch;
  SparseGrads<float> grads(params.dim());
  double window_loss = 0;
  std::size_t window_steps = 0;
  result.step_losses.reserve(config.max_steps);

  auto validate_now = [&](std::size_t step) {
    ValidationRecord rec;
    rec.step = step;
    rec.loss = window_steps ? window_loss / static_cast<double>(window_steps) : 0;
    window_loss = 0;
    window_steps = 0;
    if (!dataset.triples.valid.empty()) {
      EvalOptions eo;
      eo.threads = threads;
      rec.valid_mrr = evaluate_split(params, dataset.triples.valid,
                                     dataset.filter, config.variant, eo)
                          .both.mrr;
    }
    rec.wall_seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    result.log.push_back(rec);
    if (options.on_validation) options.on_validation(rec);
    if (rec.valid_mrr > result.best_valid_mrr || result.best_step == 0) {
      result.best_valid_mrr = rec.valid_mrr;
      result.best_step = step;
      result.best_params = params;
      if (options.on_best) options.on_best(params, step);
    }
  };

  for (std::size_t step = 1; step <= config.max_steps; ++step) {
    batches.next(config.batch_size, batch);
    const NegativeBatch neg = sampler.next(batch, n);
    const double loss = batch_loss_and_grads<float>(params, batch, neg.negatives,
                                                    n, config, grads);
    if (!std::isfinite(loss)) {
      result.aborted = true;
      result.abort_reason = "non-finite loss at step " + std::to_string(step);
      break;
    }

    try {
      adam_step(params, grads, state, config);
    } catch (const NonFiniteError& e) {
      result.aborted = true;
      result.abort_reason =
          "step " + std::to_string(step) + ": " + std::string(e.what());
      break;
    }

    result.step_losses.push_back(static_cast<float>(loss));
    result.steps_run = step;
    window_loss += loss;
    ++window_steps;
    if (step % valid_every == 0 || step == config.max_steps) validate_now(step);
  }

  if (result.aborted && result.best_step == 0) result.best_params = params;
  result.sampler_fallbacks = sampler.total_fallbacks();
  return result;
}

}  // namespace quatkgc
