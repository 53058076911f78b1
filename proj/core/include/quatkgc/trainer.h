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

// Self-adversarial margin loss, sparse Adam and the training loop.

#ifndef QUATKGC_TRAINER_H_
#define QUATKGC_TRAINER_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "quatkgc/config.h"
#include "quatkgc/kg_data.h"
#include "quatkgc/model.h"

namespace quatkgc {

struct LossResult {
  double total = 0;  // mean over positives
  std::vector<double> grad_pos;  // dL/d(distance) per positive
  std::vector<double> grad_neg;  // dL/d(distance) per negative, row-major
};

// Per positive i with negatives j:
//   softplus(d_i - gamma) + sum_j p_ij softplus(gamma - d'_ij),
// i.e. -log sigmoid(gamma - d_i) - sum_j p_ij log sigmoid(d'_ij - gamma),
// averaged over positives. `neg_distances` and `weights` hold
// pos_distances.size() * n entries. Weights are treated as constants.
template <typename Real>
LossResult margin_loss(std::span<const Real> pos_distances,
                       std::span<const Real> neg_distances,
                       std::span<const double> weights, std::size_t n,
                       double gamma);

// Loss of one minibatch (the mean above) and, in `grads`, its gradient with
// respect to every touched parameter row. `negatives` holds n corruptions per
// positive, grouped by positive. Weights come from the current negative
// scores at config.temperature and are held constant. `grads` is left empty
// when the loss is not finite.
template <typename Real>
double batch_loss_and_grads(const BasicModelParams<Real>& params,
                            std::span<const Triple> positives,
                            std::span<const Triple> negatives, std::size_t n,
                            const TrainConfig& config, SparseGrads<Real>& grads);

double softplus(double x);
double sigmoid(double x);

// Adam moments for every parameter table plus one step counter per row, so
// that bias correction tracks how often each row has actually been updated.
class OptimizerState {
 public:
  OptimizerState() = default;
  explicit OptimizerState(const ModelParams& params);

  std::vector<float>& first_moment(ParamTable t) { return m_[idx(t)]; }
  std::vector<float>& second_moment(ParamTable t) { return v_[idx(t)]; }
  const std::vector<float>& first_moment(ParamTable t) const { return m_[idx(t)]; }
  const std::vector<float>& second_moment(ParamTable t) const { return v_[idx(t)]; }
  std::vector<std::uint64_t>& row_steps(ParamTable t) { return steps_[idx(t)]; }
  const std::vector<std::uint64_t>& row_steps(ParamTable t) const {
    return steps_[idx(t)];
  }

 private:
  static std::size_t idx(ParamTable t) { return static_cast<std::size_t>(t); }
  std::array<std::vector<float>, kNumTables> m_, v_;
  std::array<std::vector<std::uint64_t>, kNumTables> steps_;
};

// Updates only the rows present in `grads`. Throws NonFiniteError, leaving
// params and state untouched, if any gradient entry is not finite.
void adam_step(ModelParams& params, const SparseGrads<float>& grads,
               OptimizerState& state, const TrainConfig& config);

struct ValidationRecord {
  std::size_t step = 0;
  double loss = 0;  // mean training loss since the previous record
  double valid_mrr = 0;
  double wall_seconds = 0;
};

// "step=... loss=... valid_mrr=... wall_s=..."
std::string format_log_line(const ValidationRecord& r);

struct TrainOptions {
  // Called after each validation point.
  std::function<void(const ValidationRecord&)> on_validation;
  // Called whenever a new best validation MRR is reached.
  std::function<void(const ModelParams&, std::size_t step)> on_best;
};

struct TrainResult {
  ModelParams final_params;
  ModelParams best_params;
  std::size_t best_step = 0;
  double best_valid_mrr = -1;
  std::size_t steps_run = 0;
  std::vector<ValidationRecord> log;
  std::vector<float> step_losses;
  std::size_t sampler_fallbacks = 0;
  bool aborted = false;
  std::string abort_reason;
};

// One derived seed per independent random stream of a run.
enum class SeedStream : std::uint32_t { kInit = 0, kSampler = 1, kShuffle = 2 };
std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream);

// Runs config.max_steps minibatch steps. Every config.valid_every steps (and
// after the last step) filtered MRR on the validation split selects the best
// parameters. A non-finite loss or gradient stops training early with
// `aborted` set; the parameters from before the failing step are kept.
TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const TrainOptions& options = {});

}  // namespace quatkgc

#endif  // QUATKGC_TRAINER_H_
