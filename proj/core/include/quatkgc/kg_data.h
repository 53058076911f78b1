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

// Triple ingestion, vocabularies, split storage and the filter index used by
// filtered ranking and negative sampling.

#ifndef QUATKGC_KG_DATA_H_
#define QUATKGC_KG_DATA_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "quatkgc/errors.h"

namespace quatkgc {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct RawTriple {
  std::string head, relation, tail;
  friend bool operator==(const RawTriple&, const RawTriple&) = default;
};

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;
  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Dense name <-> id maps for entities and relations.
class Vocab {
 public:
  // Returns the id for `name`, assigning the next free id on first sight.
  EntityId intern_entity(std::string_view name);
  RelationId intern_relation(std::string_view name);

  std::optional<EntityId> entity_id(std::string_view name) const;
  std::optional<RelationId> relation_id(std::string_view name) const;

  const std::string& entity_name(EntityId id) const;
  const std::string& relation_name(RelationId id) const;

  std::size_t num_entities() const { return entity_names_.size(); }
  std::size_t num_relations() const { return relation_names_.size(); }
  const std::vector<std::string>& entity_names() const { return entity_names_; }
  const std::vector<std::string>& relation_names() const {
    return relation_names_;
  }

  Triple encode(const RawTriple& raw) const;
  RawTriple decode(const Triple& t) const;

  // "id<TAB>name" per line, ids ascending from 0.
  void write_dicts(const std::filesystem::path& entities_path,
                   const std::filesystem::path& relations_path) const;
  static Vocab read_dicts(const std::filesystem::path& entities_path,
                          const std::filesystem::path& relations_path);

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.entity_names_ == b.entity_names_ &&
           a.relation_names_ == b.relation_names_;
  }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  using NameMap =
      std::unordered_map<std::string, std::int32_t, StringHash, std::equal_to<>>;

  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  NameMap entity_ids_;
  NameMap relation_ids_;
};

struct TripleStore {
  std::vector<Triple> train, valid, test;
};

// (head, relation) -> true tails and (relation, tail) -> true heads. Sets are
// stored as sorted unique id vectors.
class FilterIndex {
 public:
  FilterIndex() = default;
  static FilterIndex build(std::span<const std::span<const Triple>> splits);
  static FilterIndex build(std::span<const Triple> triples);

  std::span<const EntityId> true_tails(EntityId head, RelationId rel) const;
  std::span<const EntityId> true_heads(RelationId rel, EntityId tail) const;
  bool contains(const Triple& t) const;

  std::size_t num_pairs() const { return tails_.size() + heads_.size(); }

 private:
  static std::uint64_t key(std::int32_t x, std::int32_t y) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
           static_cast<std::uint32_t>(y);
  }
  std::unordered_map<std::uint64_t, std::vector<EntityId>> tails_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> heads_;
};

struct Dataset {
  Vocab vocab;
  TripleStore triples;
  FilterIndex filter;  // over train + valid + test
};

// Reads one split. Each nonempty line is head<TAB>relation<TAB>tail; a
// trailing '\r' is stripped.
std::vector<RawTriple> load_split(const std::filesystem::path& path);
std::vector<RawTriple> parse_split(std::istream& in, const std::string& label);

// Ids are assigned in first-appearance order scanning train, valid, test.
Dataset build_dataset(const std::vector<RawTriple>& train,
                      const std::vector<RawTriple>& valid,
                      const std::vector<RawTriple>& test);

inline constexpr const char* kTrainFile = "train.txt";
inline constexpr const char* kValidFile = "valid.txt";
inline constexpr const char* kTestFile = "test.txt";
inline constexpr const char* kEntitiesDict = "entities.dict";
inline constexpr const char* kRelationsDict = "relations.dict";
inline constexpr const char* kTripleCache = "triples.bin";

// Loads train.txt / valid.txt / test.txt from `dir`, or the preprocessed
// dicts + triples.bin when all three are present.
Dataset load_dataset_dir(const std::filesystem::path& dir);
Dataset load_dataset_tsv(const std::filesystem::path& dir);

// Binary cache: magic "QKGTRIP1", three little-endian uint64 split sizes,
// then int32 (head, relation, tail) records for train, valid, test.
void write_triple_cache(const std::filesystem::path& path,
                        const TripleStore& store);
TripleStore read_triple_cache(const std::filesystem::path& path);

struct DatasetStats {
  std::size_t entities = 0, relations = 0, train = 0, valid = 0, test = 0;
  // Triples present in more than one split.
  std::size_t cross_split_duplicates = 0;
};

DatasetStats compute_stats(const Dataset& ds);

// Published sizes of the standard benchmarks, rounded to thousands.
struct ReferenceStats {
  std::string_view name;
  std::size_t entities, relations, train, valid, test;
};

std::span<const ReferenceStats> reference_stats();
std::optional<ReferenceStats> find_reference_stats(std::string_view name);

// Human-readable mismatches between measured and reference sizes; each count
// must lie within `tolerance` of the rounded reference value (relation counts
// must match exactly).
std::vector<std::string> check_reference_stats(const DatasetStats& stats,
                                               const ReferenceStats& ref,
                                               std::size_t tolerance = 1500);

}  // namespace quatkgc

#endif  // QUATKGC_KG_DATA_H_
