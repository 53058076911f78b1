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

#include "quatkgc/kg_data.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "quatkgc/errors.h"

namespace quatkgc {
namespace {

std::int32_t intern(std::string_view name, std::vector<std::string>& names,
                    auto& ids) {
  if (auto it = ids.find(name); it != ids.end()) return it->second;
  const auto id = static_cast<std::int32_t>(names.size());
  names.emplace_back(name);
  ids.emplace(names.back(), id);
  return id;
}

void write_dict(const std::filesystem::path& path,
                const std::vector<std::string>& names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << i << '\t' << names[i] << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string> read_dict(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> names;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string(), lineno, "expected id<TAB>name");
    }
    std::size_t id = 0;
    try {
      id = std::stoul(line.substr(0, tab));
    } catch (const std::exception&) {
      throw ParseError(path.string(), lineno, "bad id");
    }
    if (id != names.size()) {
      throw ParseError(path.string(), lineno, "ids must ascend densely from 0");
    }
    names.push_back(line.substr(tab + 1));
  }
  return names;
}

void sort_unique(std::vector<EntityId>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

template <typename U>
void put_le(std::ostream& out, U value) {
  static_assert(std::endian::native == std::endian::little,
                "cache I/O assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(&value), sizeof(U));
}

template <typename U>
U get_le(std::istream& in) {
  U value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(U));
  return value;
}

constexpr std::array<char, 8> kCacheMagic = {'Q', 'K', 'G', 'T',
                                             'R', 'I', 'P', '1'};

}  // namespace

EntityId Vocab::intern_entity(std::string_view name) {
  return intern(name, entity_names_, entity_ids_);
}

RelationId Vocab::intern_relation(std::string_view name) {
  return intern(name, relation_names_, relation_ids_);
}

std::optional<EntityId> Vocab::entity_id(std::string_view name) const {
  if (auto it = entity_ids_.find(name); it != entity_ids_.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::optional<RelationId> Vocab::relation_id(std::string_view name) const {
  if (auto it = relation_ids_.find(name); it != relation_ids_.end()) {
    return it->second;
  }
  return std::nullopt;
}

const std::string& Vocab::entity_name(EntityId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= entity_names_.size()) {
    throw ContractViolation("entity id out of range: " + std::to_string(id));
  }
  return entity_names_[id];
}

const std::string& Vocab::relation_name(RelationId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= relation_names_.size()) {
    throw ContractViolation("relation id out of range: " + std::to_string(id));
  }
  return relation_names_[id];
}

Triple Vocab::encode(const RawTriple& raw) const {
  const auto h = entity_id(raw.head);
  const auto r = relation_id(raw.relation);
  const auto t = entity_id(raw.tail);
  if (!h || !r || !t) {
    throw ContractViolation("unknown name in triple (" + raw.head + ", " +
                            raw.relation + ", " + raw.tail + ")");
  }
  return {*h, *r, *t};
}

RawTriple Vocab::decode(const Triple& t) const {
  return {entity_name(t.head), relation_name(t.relation), entity_name(t.tail)};
}

void Vocab::write_dicts(const std::filesystem::path& entities_path,
                        const std::filesystem::path& relations_path) const {
  write_dict(entities_path, entity_names_);
  write_dict(relations_path, relation_names_);
}

Vocab Vocab::read_dicts(const std::filesystem::path& entities_path,
                        const std::filesystem::path& relations_path) {
  Vocab v;
  for (const auto& name : read_dict(entities_path)) {
    if (v.intern_entity(name) + 1 != static_cast<EntityId>(v.num_entities())) {
      throw ParseError(entities_path.string(), 0, "duplicate name " + name);
    }
  }
  for (const auto& name : read_dict(relations_path)) {
    if (v.intern_relation(name) + 1 !=
        static_cast<RelationId>(v.num_relations())) {
      throw ParseError(relations_path.string(), 0, "duplicate name " + name);
    }
  }
  return v;
}

FilterIndex FilterIndex::build(std::span<const Triple> triples) {
  const std::span<const Triple> one[] = {triples};
  return build(std::span<const std::span<const Triple>>(one));
}

FilterIndex FilterIndex::build(
    std::span<const std::span<const Triple>> splits) {
  FilterIndex index;
  for (const auto& split : splits) {
    for (const Triple& t : split) {
      index.tails_[key(t.head, t.relation)].push_back(t.tail);
      index.heads_[key(t.relation, t.tail)].push_back(t.head);
    }
  }
  for (auto& [k, v] : index.tails_) sort_unique(v);
  for (auto& [k, v] : index.heads_) sort_unique(v);
  return index;
}

std::span<const EntityId> FilterIndex::true_tails(EntityId head,
                                                  RelationId rel) const {
  if (auto it = tails_.find(key(head, rel)); it != tails_.end()) {
    return it->second;
  }
  return {};
}

std::span<const EntityId> FilterIndex::true_heads(RelationId rel,
                                                  EntityId tail) const {
  if (auto it = heads_.find(key(rel, tail)); it != heads_.end()) {
    return it->second;
  }
  return {};
}

bool FilterIndex::contains(const Triple& t) const {
  const auto tails = true_tails(t.head, t.relation);
  return std::binary_search(tails.begin(), tails.end(), t.tail);
}

std::vector<RawTriple> parse_split(std::istream& in, const std::string& label) {
  std::vector<RawTriple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw ParseError(label, lineno,
                       "expected 3 tab-separated fields head<TAB>relation<TAB>tail");
    }
    RawTriple raw{line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1),
                  line.substr(t2 + 1)};
    if (raw.head.empty() || raw.relation.empty() || raw.tail.empty()) {
      throw ParseError(label, lineno, "empty field");
    }
    out.push_back(std::move(raw));
  }
  return out;
}

std::vector<RawTriple> load_split(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_split(in, path.string());
}

Dataset build_dataset(const std::vector<RawTriple>& train,
                      const std::vector<RawTriple>& valid,
                      const std::vector<RawTriple>& test) {
  Dataset ds;
  auto encode_all = [&ds](const std::vector<RawTriple>& raws,
                          std::vector<Triple>& out) {
    out.reserve(raws.size());
    for (const RawTriple& raw : raws) {
      const EntityId h = ds.vocab.intern_entity(raw.head);
      const RelationId r = ds.vocab.intern_relation(raw.relation);
      const EntityId t = ds.vocab.intern_entity(raw.tail);
      out.push_back({h, r, t});
    }
  };
  encode_all(train, ds.triples.train);
  encode_all(valid, ds.triples.valid);
  encode_all(test, ds.triples.test);
  const std::span<const Triple> splits[] = {
      ds.triples.train, ds.triples.valid, ds.triples.test};
  ds.filter = FilterIndex::build(std::span<const std::span<const Triple>>(splits));
  return ds;
}

Dataset load_dataset_tsv(const std::filesystem::path& dir) {
  for (const char* name : {kTrainFile, kValidFile, kTestFile}) {
    if (!std::filesystem::exists(dir / name)) {
      throw IoError(std::string("missing ") + name + " in " + dir.string());
    }
  }
  return build_dataset(load_split(dir / kTrainFile), load_split(dir / kValidFile),
                       load_split(dir / kTestFile));
}

Dataset load_dataset_dir(const std::filesystem::path& dir) {
  const auto ents = dir / kEntitiesDict;
  const auto rels = dir / kRelationsDict;
  const auto cache = dir / kTripleCache;
  if (!std::filesystem::exists(ents) || !std::filesystem::exists(rels) ||
      !std::filesystem::exists(cache)) {
    return load_dataset_tsv(dir);
  }
  Dataset ds;
  ds.vocab = Vocab::read_dicts(ents, rels);
  ds.triples = read_triple_cache(cache);
  const auto ne = static_cast<EntityId>(ds.vocab.num_entities());
  const auto nr = static_cast<RelationId>(ds.vocab.num_relations());
  for (const auto* split :
       {&ds.triples.train, &ds.triples.valid, &ds.triples.test}) {
    for (const Triple& t : *split) {
      if (t.head < 0 || t.head >= ne || t.tail < 0 || t.tail >= ne ||
          t.relation < 0 || t.relation >= nr) {
        throw IoError(cache.string() + ": id out of vocabulary range");
      }
    }
  }
  const std::span<const Triple> splits[] = {
      ds.triples.train, ds.triples.valid, ds.triples.test};
  ds.filter = FilterIndex::build(std::span<const std::span<const Triple>>(splits));
  return ds;
}

void write_triple_cache(const std::filesystem::path& path,
                        const TripleStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kCacheMagic.data(), kCacheMagic.size());
  for (const auto* split : {&store.train, &store.valid, &store.test}) {
    put_le<std::uint64_t>(out, split->size());
  }
  for (const auto* split : {&store.train, &store.valid, &store.test}) {
    for (const Triple& t : *split) {
      put_le<std::int32_t>(out, t.head);
      put_le<std::int32_t>(out, t.relation);
      put_le<std::int32_t>(out, t.tail);
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

TripleStore read_triple_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kCacheMagic) {
    throw IoError(path.string() + ": not a triple cache");
  }
  const auto file_size = std::filesystem::file_size(path);
  std::uint64_t sizes[3];
  for (auto& s : sizes) s = get_le<std::uint64_t>(in);
  if (!in || 32 + 12 * (sizes[0] + sizes[1] + sizes[2]) != file_size) {
    throw IoError(path.string() + ": truncated or corrupt triple cache");
  }
  TripleStore store;
  std::vector<Triple>* splits[] = {&store.train, &store.valid, &store.test};
  for (int s = 0; s < 3; ++s) {
    splits[s]->resize(sizes[s]);
    for (Triple& t : *splits[s]) {
      t.head = get_le<std::int32_t>(in);
      t.relation = get_le<std::int32_t>(in);
      t.tail = get_le<std::int32_t>(in);
    }
  }
  if (!in) throw IoError(path.string() + ": read failed");
  return store;
}

DatasetStats compute_stats(const Dataset& ds) {
  DatasetStats s;
  s.entities = ds.vocab.num_entities();
  s.relations = ds.vocab.num_relations();
  s.train = ds.triples.train.size();
  s.valid = ds.triples.valid.size();
  s.test = ds.triples.test.size();
  const std::set<Triple> train(ds.triples.train.begin(), ds.triples.train.end());
  const std::set<Triple> valid(ds.triples.valid.begin(), ds.triples.valid.end());
  const std::set<Triple> test(ds.triples.test.begin(), ds.triples.test.end());
  for (const Triple& t : valid) s.cross_split_duplicates += train.count(t);
  for (const Triple& t : test) {
    s.cross_split_duplicates += train.count(t) + valid.count(t);
  }
  return s;
}

namespace {

// Zero marks a value that is not checked. FB15K's published relation and test
// counts disagree with the public files (1,345 relations, 59,071 test
// triples), so only its entity/train/valid sizes are compared.
constexpr ReferenceStats kReferenceStats[] = {
    {"YAGO3-10", 123000, 37, 1079000, 5000, 5000},
    {"DB100K", 100000, 470, 597000, 50000, 50000},
    {"FB15K", 15000, 0, 483000, 50000, 0},
    {"WN18", 41000, 18, 141000, 5000, 5000},
    {"FB15K-237", 15000, 237, 272000, 18000, 20000},
    {"WN18RR", 41000, 11, 87000, 3000, 3000},
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::span<const ReferenceStats> reference_stats() { return kReferenceStats; }

std::optional<ReferenceStats> find_reference_stats(std::string_view name) {
  const std::string key = upper(name);
  for (const auto& ref : kReferenceStats) {
    if (upper(ref.name) == key) return ref;
  }
  return std::nullopt;
}

std::vector<std::string> check_reference_stats(const DatasetStats& stats,
                                               const ReferenceStats& ref,
                                               std::size_t tolerance) {
  std::vector<std::string> problems;
  auto near = [&](const char* what, std::size_t got, std::size_t want) {
    if (want == 0) return;
    const std::size_t diff = got > want ? got - want : want - got;
    if (diff > tolerance) {
      problems.push_back(std::string(what) + ": " + std::to_string(got) +
                         " vs reference ~" + std::to_string(want));
    }
  };
  near("entities", stats.entities, ref.entities);
  if (ref.relations != 0 && stats.relations != ref.relations) {
    problems.push_back("relations: " + std::to_string(stats.relations) +
                       " vs reference " + std::to_string(ref.relations));
  }
  near("train", stats.train, ref.train);
  near("valid", stats.valid, ref.valid);
  near("test", stats.test, ref.test);
  return problems;
}

}  // namespace quatkgc
