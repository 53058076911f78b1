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

#include "cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "quatkgc/checkpoint.h"
#include "quatkgc/errors.h"
#include "quatkgc/evaluator.h"
#include "quatkgc/kg_data.h"
#include "quatkgc/trainer.h"
#include "run_config.h"

#ifndef QUATKGC_VERSION
#define QUATKGC_VERSION "unknown"
#endif

namespace quatkgc::cli {
namespace fs = std::filesystem;
namespace {

// Thrown for problems that are the caller's fault but are only detectable
// after parsing (missing dataset root, bad variant list).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::optional<std::size_t> dim, neg, batch, max_steps, valid_every, threads;
  std::optional<double> lr, alpha, gamma;
  std::optional<std::string> variant, norm, preset;
  std::optional<std::uint64_t> seed;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--preset", o.preset, "Start from a published benchmark setting");
  cmd->add_option("--dim", o.dim, "Embedding width d");
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_option("--neg", o.neg, "Negatives per positive");
  cmd->add_option("--alpha", o.alpha, "Self-adversarial temperature");
  cmd->add_option("--gamma", o.gamma, "Margin");
  cmd->add_option("--variant", o.variant,
                  "hadamard-raw|hadamard-norm|hamilton-raw|hamilton-norm");
  cmd->add_option("--norm", o.norm, "l1|l2");
  cmd->add_option("--batch", o.batch, "Positives per minibatch");
  cmd->add_option("--max-steps", o.max_steps, "Training steps");
  cmd->add_option("--valid-every", o.valid_every, "Steps between validations");
  cmd->add_option("--seed", o.seed, "Seed for every random stream");
}

TrainConfig resolve_config(const std::optional<std::string>& config_file,
                           const Overrides& o,
                           const std::optional<std::size_t>& threads) {
  TrainConfig c;
  if (o.preset) {
    const auto p = preset_config(*o.preset);
    if (!p) throw ConfigError("unknown preset '" + *o.preset + "'");
    c = *p;
  }
  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) throw IoError("cannot open config " + *config_file);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(*config_file + ": " + e.what());
    }
    apply_config_json(j, c);
  }
  if (o.dim) c.dim = *o.dim;
  if (o.lr) c.learning_rate = *o.lr;
  if (o.neg) c.negatives = *o.neg;
  if (o.alpha) c.temperature = *o.alpha;
  if (o.gamma) c.margin = *o.gamma;
  if (o.batch) c.batch_size = *o.batch;
  if (o.max_steps) c.max_steps = *o.max_steps;
  if (o.valid_every) c.valid_every = *o.valid_every;
  if (o.seed) c.seed = *o.seed;
  if (threads) c.threads = *threads;
  if (o.variant) {
    const auto k = parse_variant(*o.variant);
    if (!k) throw ConfigError("unknown variant '" + *o.variant + "'");
    c.variant.kind = *k;
  }
  if (o.norm) {
    const auto n = parse_norm(*o.norm);
    if (!n) throw ConfigError("unknown norm '" + *o.norm + "'");
    c.variant.norm = *n;
  }
  c.validate();
  return c;
}

// --data wins; a relative --data that does not exist locally is looked up
// under $QUATKGC_DATA; with no --data the root itself is used.
fs::path resolve_data(const std::optional<std::string>& data) {
  const char* root = std::getenv("QUATKGC_DATA");
  if (data) {
    const fs::path p(*data);
    if (!fs::exists(p) && p.is_relative() && root && *root) {
      const fs::path alt = fs::path(root) / p;
      if (fs::exists(alt)) return alt;
    }
    return p;
  }
  if (root && *root) return fs::path(root);
  throw UsageError("no dataset given: pass --data or set QUATKGC_DATA");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string stats_table(const std::string& name, const DatasetStats& s) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "dataset" << std::right << std::setw(10)
     << "entities" << std::setw(11) << "relations" << std::setw(10) << "train"
     << std::setw(9) << "valid" << std::setw(9) << "test" << "\n";
  os << std::left << std::setw(12) << name << std::right << std::setw(10)
     << s.entities << std::setw(11) << s.relations << std::setw(10) << s.train
     << std::setw(9) << s.valid << std::setw(9) << s.test << "\n";
  return os.str();
}

std::string dataset_name(const fs::path& dir) {
  const auto p = dir.lexically_normal();
  const auto name = (p.has_filename() ? p.filename() : p.parent_path().filename())
                        .string();
  return name.empty() ? "dataset" : name;
}

int cmd_preprocess(const std::optional<std::string>& data,
                   const std::optional<std::string>& out_dir, std::ostream& out,
                   std::ostream& err) {
  const fs::path dir = resolve_data(data);
  const Dataset ds = load_dataset_tsv(dir);
  const fs::path dest = out_dir ? fs::path(*out_dir) : dir;
  ensure_dir(dest);
  ds.vocab.write_dicts(dest / kEntitiesDict, dest / kRelationsDict);
  write_triple_cache(dest / kTripleCache, ds.triples);

  const auto stats = compute_stats(ds);
  const auto name = dataset_name(dir);
  out << stats_table(name, stats);
  if (stats.cross_split_duplicates > 0) {
    out << "note: " << stats.cross_split_duplicates
        << " triples appear in more than one split\n";
  }
  if (const auto ref = find_reference_stats(name)) {
    const auto issues = check_reference_stats(stats, *ref);
    if (issues.empty()) {
      out << "reference sizes: ok\n";
    } else {
      for (const auto& issue : issues) err << "warning: " << issue << "\n";
    }
  }
  out << "wrote " << (dest / kEntitiesDict).string() << ", "
      << (dest / kRelationsDict).string() << ", "
      << (dest / kTripleCache).string() << "\n";
  return kExitOk;
}

struct TrainedRun {
  TrainResult result;
  fs::path dir;
};

TrainedRun train_into(const Dataset& ds, const TrainConfig& config,
                      const fs::path& data_dir, const fs::path& run_dir,
                      const std::string& command, std::ostream& out,
                      std::ostream& err) {
  ensure_dir(run_dir);
  RunManifest manifest;
  manifest.config = config;
  manifest.command = command;
  manifest.dataset = fs::absolute(data_dir);
  manifest.output = fs::absolute(run_dir);
  manifest.started_at = utc_timestamp();
  manifest.version = QUATKGC_VERSION;
  write_manifest(run_dir / "manifest.json", manifest);

  std::ofstream log(run_dir / "train.log", std::ios::trunc);
  if (!log) throw IoError("cannot write " + (run_dir / "train.log").string());
  TrainOptions opt;
  opt.on_validation = [&](const ValidationRecord& r) {
    const auto line = format_log_line(r);
    log << line << "\n" << std::flush;
    out << line << "\n" << std::flush;
  };
  TrainedRun run{train(ds, config, opt), run_dir};
  const CheckpointInfo info{config.variant, config.seed};
  save_checkpoint(run_dir / "final.ckpt", run.result.final_params, info);
  save_checkpoint(run_dir / "best.ckpt", run.result.best_params, info);
  if (run.result.sampler_fallbacks > 0) {
    err << "note: " << run.result.sampler_fallbacks
        << " negatives fell back to unfiltered draws\n";
  }
  manifest.finished_at = utc_timestamp();
  write_manifest(run_dir / "manifest.json", manifest);
  return run;
}

std::string command_line(const std::vector<std::string>& args) {
  std::string s;
  for (const auto& a : args) {
    if (!s.empty()) s += ' ';
    s += a;
  }
  return s;
}

int cmd_train(const std::vector<std::string>& args,
              const std::optional<std::string>& data, const std::string& out_dir,
              const TrainConfig& config, std::ostream& out, std::ostream& err) {
  const fs::path dir = resolve_data(data);
  const Dataset ds = load_dataset_dir(dir);
  const auto run = train_into(ds, config, dir, out_dir, command_line(args), out, err);
  out << "best valid_mrr=" << run.result.best_valid_mrr
      << " at step=" << run.result.best_step << "\n";
  if (run.result.aborted) {
    err << "training stopped early: " << run.result.abort_reason << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

const std::vector<Triple>& pick_split(const Dataset& ds, const std::string& split) {
  if (split == "test") return ds.triples.test;
  if (split == "valid") return ds.triples.valid;
  if (split == "train") return ds.triples.train;
  throw UsageError("unknown split '" + split + "' (expected test, valid or train)");
}

void write_metrics(const fs::path& path, const std::string& split,
                   const fs::path& checkpoint, const ScoreVariant& variant,
                   FilterMode mode, const SplitMetrics& m) {
  nlohmann::ordered_json j;
  j["split"] = split;
  j["checkpoint"] = fs::absolute(checkpoint).string();
  j["variant"] = std::string(to_string(variant.kind));
  j["norm"] = std::string(to_string(variant.norm));
  j["filter"] = mode == FilterMode::kRaw ? "raw" : "filtered";
  j["metrics"] = metrics_to_json(m);
  write_text_file(path, j.dump(2) + "\n");
}

int cmd_evaluate(const std::optional<std::string>& data,
                 const std::string& checkpoint_path, const std::string& split,
                 const std::optional<std::string>& out_dir, std::size_t threads,
                 bool raw, std::ostream& out, std::ostream& err) {
  const fs::path dir = resolve_data(data);
  const Dataset ds = load_dataset_dir(dir);
  const auto& triples = pick_split(ds, split);
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  if (ckpt.params.num_entities() != ds.vocab.num_entities() ||
      ckpt.params.num_relations() != ds.vocab.num_relations()) {
    err << "error: vocabulary size mismatch: checkpoint has "
        << ckpt.params.num_entities() << " entities and "
        << ckpt.params.num_relations() << " relations, dataset has "
        << ds.vocab.num_entities() << " and " << ds.vocab.num_relations() << "\n";
    return kExitDataError;
  }
  EvalOptions opt;
  opt.threads = threads;
  opt.mode = raw ? FilterMode::kRaw : FilterMode::kFiltered;
  const auto m = evaluate_split(ckpt.params, triples, ds.filter,
                                ckpt.info.variant, opt);
  out << format_metrics_table(m);
  const fs::path dest =
      out_dir ? fs::path(*out_dir) : fs::path(checkpoint_path).parent_path();
  if (!dest.empty()) ensure_dir(dest);
  write_metrics(dest / ("metrics_" + split + (raw ? "_raw" : "") + ".json"),
                split, checkpoint_path, ckpt.info.variant, opt.mode, m);
  return kExitOk;
}

std::vector<VariantKind> parse_variant_list(const std::string& list) {
  std::vector<VariantKind> kinds;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto k = parse_variant(item);
    if (!k) throw UsageError("unknown variant '" + item + "'");
    kinds.push_back(*k);
  }
  if (kinds.empty()) throw UsageError("empty variant list");
  return kinds;
}

int cmd_ablate(const std::vector<std::string>& args,
               const std::optional<std::string>& data, const std::string& out_dir,
               const TrainConfig& base, const std::optional<std::string>& variants,
               std::ostream& out, std::ostream& err) {
  const auto kinds = variants
                         ? parse_variant_list(*variants)
                         : std::vector<VariantKind>(std::begin(kAllVariants),
                                                    std::end(kAllVariants));
  const fs::path dir = resolve_data(data);
  const Dataset ds = load_dataset_dir(dir);
  ensure_dir(out_dir);

  struct Row {
    VariantKind kind;
    SplitMetrics metrics;
    bool aborted;
  };
  std::vector<Row> rows;
  for (VariantKind kind : kinds) {
    TrainConfig config = base;
    config.variant.kind = kind;
    config.validate();
    const fs::path run_dir = fs::path(out_dir) / std::string(to_string(kind));
    out << "== " << to_string(kind) << "\n";
    const auto run =
        train_into(ds, config, dir, run_dir, command_line(args), out, err);
    // Same path as a standalone evaluate: reload the saved best checkpoint.
    const Checkpoint ckpt = load_checkpoint(run_dir / "best.ckpt");
    EvalOptions opt;
    opt.threads = config.threads;
    const auto m = evaluate_split(ckpt.params, ds.triples.test, ds.filter,
                                  ckpt.info.variant, opt);
    write_metrics(run_dir / "metrics_test.json", "test", run_dir / "best.ckpt",
                  ckpt.info.variant, FilterMode::kFiltered, m);
    rows.push_back({kind, m, run.result.aborted});
  }

  std::ostringstream table;
  table << std::left << std::setw(16) << "variant" << std::right
        << std::setw(10) << "MRR" << std::setw(10) << "Hits@1" << std::setw(10)
        << "Hits@3" << std::setw(10) << "Hits@10" << std::setw(12) << "MR" << "\n";
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  table << std::fixed;
  for (const auto& r : rows) {
    const auto& b = r.metrics.both;
    table << std::left << std::setw(16) << to_string(r.kind) << std::right
          << std::setprecision(4) << std::setw(10) << b.mrr << std::setw(10)
          << b.hits1 << std::setw(10) << b.hits3 << std::setw(10) << b.hits10
          << std::setprecision(1) << std::setw(12) << b.mr
          << (r.aborted ? "  (stopped early)" : "") << "\n";
    nlohmann::ordered_json j;
    j["variant"] = std::string(to_string(r.kind));
    j["aborted"] = r.aborted;
    j["metrics"] = metrics_to_json(r.metrics);
    summary.push_back(j);
  }
  out << table.str();
  write_text_file(fs::path(out_dir) / "ablation.json", summary.dump(2) + "\n");
  for (const auto& r : rows) {
    if (r.aborted) return kExitDataError;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Quaternion translation-rotation knowledge graph embeddings",
               "quatkgc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QUATKGC_VERSION);

  std::optional<std::string> data, config_file, out_opt, variants;
  std::string out_dir, checkpoint, split = "test";
  std::optional<std::size_t> threads;
  Overrides o;

  auto* pre = app.add_subcommand("preprocess", "Build vocab files and the binary triple cache");
  pre->add_option("--data", data, "Dataset directory with train/valid/test.txt");
  pre->add_option("--out", out_opt, "Output directory (default: the dataset directory)");

  auto* tr = app.add_subcommand("train", "Train one model");
  tr->add_option("--data", data, "Dataset directory");
  tr->add_option("--out", out_dir, "Run directory")->required();
  tr->add_option("--config", config_file, "JSON config or run manifest");
  tr->add_option("--threads", threads, "Worker threads (1 is deterministic)");
  add_override_flags(tr, o);

  auto* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  ev->add_option("--data", data, "Dataset directory");
  ev->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  ev->add_option("--split", split, "test|valid|train");
  ev->add_option("--out", out_opt, "Directory for the metrics file");
  ev->add_option("--threads", threads, "Worker threads");
  bool raw = false;
  ev->add_flag("--raw", raw, "Rank against every entity without filtering");

  auto* ab = app.add_subcommand("ablate", "Train and evaluate every score variant");
  ab->add_option("--data", data, "Dataset directory");
  ab->add_option("--out", out_dir, "Directory holding one run per variant")->required();
  ab->add_option("--config", config_file, "JSON config or run manifest");
  ab->add_option("--threads", threads, "Worker threads (1 is deterministic)");
  ab->add_option("--variants", variants, "Comma-separated variant list");
  add_override_flags(ab, o);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (pre->parsed()) return cmd_preprocess(data, out_opt, out, err);
    if (ev->parsed()) {
      return cmd_evaluate(data, checkpoint, split, out_opt, threads.value_or(1),
                          raw, out, err);
    }
    const TrainConfig config = resolve_config(config_file, o, threads);
    if (tr->parsed()) return cmd_train(args, data, out_dir, config, out, err);
    return cmd_ablate(args, data, out_dir, config, variants, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
}

}  // namespace quatkgc::cli
