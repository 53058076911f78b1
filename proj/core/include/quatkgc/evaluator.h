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

// Link-prediction ranking over all entities and MR / MRR / Hits@N
// aggregation.
//
// Rank convention: 1 + (#candidates scored strictly better than the target)
// + (#other candidates tied with it) / 2. In filtered mode every candidate
// that forms a known triple, other than the target, is dropped first.

#ifndef QUATKGC_EVALUATOR_H_
#define QUATKGC_EVALUATOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "quatkgc/config.h"
#include "quatkgc/kg_data.h"
#include "quatkgc/model.h"

namespace quatkgc {

enum class FilterMode { kFiltered, kRaw };

struct EvalOptions {
  FilterMode mode = FilterMode::kFiltered;
  std::size_t threads = 1;
};

struct EvalMetrics {
  double mr = 0;
  double mrr = 0;
  double hits1 = 0;
  double hits3 = 0;
  double hits10 = 0;
  std::size_t count = 0;
  friend bool operator==(const EvalMetrics&, const EvalMetrics&) = default;
};

struct SplitMetrics {
  EvalMetrics head;  // predicting (?, r, t)
  EvalMetrics tail;  // predicting (h, r, ?)
  EvalMetrics both;  // head and tail rank lists pooled
  friend bool operator==(const SplitMetrics&, const SplitMetrics&) = default;
};

struct SplitRanks {
  std::vector<double> head, tail;  // one entry per evaluated triple
};

EvalMetrics metrics_from_ranks(std::span<const double> ranks);

// `scores` holds one value per candidate entity, higher is better. Entries of
// `excluded` other than `target` do not compete. `excluded` must be sorted.
template <typename Real>
double rank_from_scores(std::span<const Real> scores, EntityId target,
                        std::span<const EntityId> excluded);

// Distances from one query to every entity, via a per-relation table of
// rotated entity embeddings so that each query costs one pass over |E| rows.
template <typename Real>
class CandidateScorer {
 public:
  CandidateScorer(const BasicModelParams<Real>& params,
                  const ScoreVariant& variant);

  // Prepares the table for queries on `rel` predicting `side`.
  void prepare(RelationId rel, Side side);

  // Distances d_r for every substitution of the `side` slot of `query`.
  // `query.relation` must match the prepared relation.
  void distances(const Triple& query, std::span<Real> out) const;

 private:
  const BasicModelParams<Real>* params_;
  ScoreVariant variant_;
  RelationId rel_ = -1;
  Side side_ = Side::kTail;
  std::vector<Real> rot_head_, rot_tail_;
  std::vector<Real> table_;
};

template <typename Real>
double rank_one(const BasicModelParams<Real>& params, const Triple& triple,
                Side side, const FilterIndex& filter,
                const ScoreVariant& variant,
                FilterMode mode = FilterMode::kFiltered);

template <typename Real>
SplitRanks rank_split(const BasicModelParams<Real>& params,
                      std::span<const Triple> split, const FilterIndex& filter,
                      const ScoreVariant& variant,
                      const EvalOptions& options = {});

template <typename Real>
SplitMetrics evaluate_split(const BasicModelParams<Real>& params,
                            std::span<const Triple> split,
                            const FilterIndex& filter,
                            const ScoreVariant& variant,
                            const EvalOptions& options = {});

// "side=<head|tail|both> mr=... mrr=... hits1=... hits3=... hits10=... n=..."
// one line per side.
std::string format_metrics_record(const SplitMetrics& m);
// Aligned table with a header row.
std::string format_metrics_table(const SplitMetrics& m);

}  // namespace quatkgc

#endif  // QUATKGC_EVALUATOR_H_
