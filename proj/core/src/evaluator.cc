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

#include "quatkgc/evaluator.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include "quatkgc/errors.h"

namespace quatkgc {

EvalMetrics metrics_from_ranks(std::span<const double> ranks) {
  EvalMetrics m;
  m.count = ranks.size();
  if (ranks.empty()) return m;
  for (double r : ranks) {
    m.mr += r;
    m.mrr += 1.0 / r;
    m.hits1 += r <= 1.0 ? 1 : 0;
    m.hits3 += r <= 3.0 ? 1 : 0;
    m.hits10 += r <= 10.0 ? 1 : 0;
  }
  const double n = static_cast<double>(ranks.size());
  m.mr /= n;
  m.mrr /= n;
  m.hits1 /= n;
  m.hits3 /= n;
  m.hits10 /= n;
  return m;
}

template <typename Real>
double rank_from_scores(std::span<const Real> scores, EntityId target,
                        std::span<const EntityId> excluded) {
  if (target < 0 || static_cast<std::size_t>(target) >= scores.size()) {
    throw ContractViolation("rank_from_scores: target out of range");
  }
  const Real s = scores[target];
  std::size_t better = 0, ties = 0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    if (scores[c] > s) {
      ++better;
    } else if (scores[c] == s) {
      ++ties;
    }
  }
  --ties;  // the target itself
  for (EntityId c : excluded) {
    if (c == target) continue;
    if (scores[c] > s) {
      --better;
    } else if (scores[c] == s) {
      --ties;
    }
  }
  return 1.0 + static_cast<double>(better) + static_cast<double>(ties) / 2.0;
}

template <typename Real>
CandidateScorer<Real>::CandidateScorer(const BasicModelParams<Real>& params,
                                       const ScoreVariant& variant)
    : params_(&params),
      variant_(variant),
      rot_head_(params.dim()),
      rot_tail_(params.dim()),
      table_(params.num_entities() * params.dim()) {
  if (params.dim() == 0 || params.dim() % variant.width_divisor() != 0) {
    throw ContractViolation("CandidateScorer: width does not fit variant");
  }
}

template <typename Real>
void CandidateScorer<Real>::prepare(RelationId rel, Side side) {
  const std::size_t d = params_->dim();
  effective_rotation<Real>(*params_, rel, Side::kHead, variant_, rot_head_);
  effective_rotation<Real>(*params_, rel, Side::kTail, variant_, rot_tail_);
  const auto r = params_->rel_trans(rel);
  for (std::size_t e = 0; e < params_->num_entities(); ++e) {
    std::span<Real> dst(table_.data() + e * d, d);
    const auto ent = params_->entity(static_cast<EntityId>(e));
    if (side == Side::kHead) {
      rotate<Real>(ent, rot_head_, variant_, dst);
      for (std::size_t k = 0; k < d; ++k) dst[k] += r[k];
    } else {
      rotate<Real>(ent, rot_tail_, variant_, dst);
    }
  }
  rel_ = rel;
  side_ = side;
}

template <typename Real>
void CandidateScorer<Real>::distances(const Triple& query,
                                      std::span<Real> out) const {
  if (query.relation != rel_) {
    throw ContractViolation("CandidateScorer: relation not prepared");
  }
  const std::size_t d = params_->dim();
  const std::size_t ne = params_->num_entities();
  if (out.size() != ne) throw ContractViolation("CandidateScorer: output size");
  std::vector<Real> fixed(d);
  if (side_ == Side::kTail) {
    // Candidates replace t: compare h (x) rot_h + r against each t' (x) rot_t.
    rotate<Real>(params_->entity(query.head), rot_head_, variant_, fixed);
    const auto r = params_->rel_trans(query.relation);
    for (std::size_t k = 0; k < d; ++k) fixed[k] += r[k];
    for (std::size_t e = 0; e < ne; ++e) {
      out[e] = difference_norm<Real>(
          fixed, std::span<const Real>(table_.data() + e * d, d), variant_.norm);
    }
  } else {
    rotate<Real>(params_->entity(query.tail), rot_tail_, variant_, fixed);
    for (std::size_t e = 0; e < ne; ++e) {
      out[e] = difference_norm<Real>(
          std::span<const Real>(table_.data() + e * d, d), fixed, variant_.norm);
    }
  }
}

namespace {

template <typename Real>
double rank_with_scorer(const CandidateScorer<Real>& scorer,
                        const Triple& triple, Side side,
                        const FilterIndex& filter, FilterMode mode,
                        std::vector<Real>& buffer) {
  scorer.distances(triple, buffer);
  for (Real& x : buffer) x = -x;
  std::span<const EntityId> excluded;
  if (mode == FilterMode::kFiltered) {
    excluded = side == Side::kTail
                   ? filter.true_tails(triple.head, triple.relation)
                   : filter.true_heads(triple.relation, triple.tail);
  }
  const EntityId target = side == Side::kTail ? triple.tail : triple.head;
  return rank_from_scores<Real>(buffer, target, excluded);
}

void check_ids(const Triple& t, std::size_t ne, std::size_t nr) {
  if (t.head < 0 || static_cast<std::size_t>(t.head) >= ne || t.tail < 0 ||
      static_cast<std::size_t>(t.tail) >= ne || t.relation < 0 ||
      static_cast<std::size_t>(t.relation) >= nr) {
    throw ContractViolation("evaluated triple has out-of-range ids");
  }
}

}  // namespace

template <typename Real>
double rank_one(const BasicModelParams<Real>& params, const Triple& triple,
                Side side, const FilterIndex& filter,
                const ScoreVariant& variant, FilterMode mode) {
  check_ids(triple, params.num_entities(), params.num_relations());
  CandidateScorer<Real> scorer(params, variant);
  scorer.prepare(triple.relation, side);
  std::vector<Real> buffer(params.num_entities());
  return rank_with_scorer(scorer, triple, side, filter, mode, buffer);
}

template <typename Real>
SplitRanks rank_split(const BasicModelParams<Real>& params,
                      std::span<const Triple> split, const FilterIndex& filter,
                      const ScoreVariant& variant,
                      const EvalOptions& options) {
  SplitRanks ranks;
  ranks.head.assign(split.size(), 0.0);
  ranks.tail.assign(split.size(), 0.0);
  if (split.empty()) return ranks;
  for (const Triple& t : split) {
    check_ids(t, params.num_entities(), params.num_relations());
  }

  std::map<RelationId, std::vector<std::size_t>> by_relation;
  for (std::size_t i = 0; i < split.size(); ++i) {
    by_relation[split[i].relation].push_back(i);
  }

  const std::size_t workers = std::max<std::size_t>(1, options.threads);
  CandidateScorer<Real> scorer(params, variant);
  for (const auto& [rel, members] : by_relation) {
    for (Side side : {Side::kHead, Side::kTail}) {
      scorer.prepare(rel, side);
      auto& out = side == Side::kHead ? ranks.head : ranks.tail;
      auto work = [&](std::size_t begin, std::size_t end) {
        std::vector<Real> buffer(params.num_entities());
        for (std::size_t j = begin; j < end; ++j) {
          const std::size_t i = members[j];
          out[i] = rank_with_scorer(scorer, split[i], side, filter,
                                    options.mode, buffer);
        }
      };
      const std::size_t n = members.size();
      if (workers == 1 || n < 2 * workers) {
        work(0, n);
        continue;
      }
      std::vector<std::jthread> pool;
      const std::size_t chunk = (n + workers - 1) / workers;
      for (std::size_t begin = 0; begin < n; begin += chunk) {
        pool.emplace_back(work, begin, std::min(n, begin + chunk));
      }
    }
  }
  return ranks;
}

template <typename Real>
SplitMetrics evaluate_split(const BasicModelParams<Real>& params,
                            std::span<const Triple> split,
                            const FilterIndex& filter,
                            const ScoreVariant& variant,
                            const EvalOptions& options) {
  const SplitRanks ranks = rank_split(params, split, filter, variant, options);
  SplitMetrics m;
  m.head = metrics_from_ranks(ranks.head);
  m.tail = metrics_from_ranks(ranks.tail);
  std::vector<double> both;
  both.reserve(ranks.head.size() * 2);
  both.insert(both.end(), ranks.head.begin(), ranks.head.end());
  both.insert(both.end(), ranks.tail.begin(), ranks.tail.end());
  m.both = metrics_from_ranks(both);
  return m;
}

namespace {

const char* side_name(int i) {
  static const char* names[] = {"head", "tail", "both"};
  return names[i];
}

}  // namespace

std::string format_metrics_record(const SplitMetrics& m) {
  const EvalMetrics* rows[] = {&m.head, &m.tail, &m.both};
  std::ostringstream out;
  char buf[256];
  for (int i = 0; i < 3; ++i) {
    const EvalMetrics& e = *rows[i];
    std::snprintf(buf, sizeof(buf),
                  "side=%s mr=%.6f mrr=%.6f hits1=%.6f hits3=%.6f "
                  "hits10=%.6f n=%zu\n",
                  side_name(i), e.mr, e.mrr, e.hits1, e.hits3, e.hits10,
                  e.count);
    out << buf;
  }
  return out.str();
}

std::string format_metrics_table(const SplitMetrics& m) {
  const EvalMetrics* rows[] = {&m.head, &m.tail, &m.both};
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-6s %10s %8s %8s %8s %8s\n", "side", "MR",
                "MRR", "Hits@1", "Hits@3", "Hits@10");
  out << buf;
  for (int i = 0; i < 3; ++i) {
    const EvalMetrics& e = *rows[i];
    std::snprintf(buf, sizeof(buf), "%-6s %10.2f %8.4f %8.4f %8.4f %8.4f\n",
                  side_name(i), e.mr, e.mrr, e.hits1, e.hits3, e.hits10);
    out << buf;
  }
  return out.str();
}

#define QUATKGC_INSTANTIATE_EVAL(Real)                                        \
  template double rank_from_scores<Real>(std::span<const Real>, EntityId,    \
                                         std::span<const EntityId>);         \
  template class CandidateScorer<Real>;                                      \
  template double rank_one<Real>(const BasicModelParams<Real>&,              \
                                 const Triple&, Side, const FilterIndex&,    \
                                 const ScoreVariant&, FilterMode);           \
  template SplitRanks rank_split<Real>(                                      \
      const BasicModelParams<Real>&, std::span<const Triple>,                \
      const FilterIndex&, const ScoreVariant&, const EvalOptions&);          \
  template SplitMetrics evaluate_split<Real>(                                \
      const BasicModelParams<Real>&, std::span<const Triple>,                \
      const FilterIndex&, const ScoreVariant&, const EvalOptions&);

QUATKGC_INSTANTIATE_EVAL(float)
QUATKGC_INSTANTIATE_EVAL(double)

#undef QUATKGC_INSTANTIATE_EVAL

}  // namespace quatkgc
