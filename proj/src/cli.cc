// Copyright 2026 The Commitgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commitgen/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "commitgen/beam_search.h"
#include "commitgen/bpe.h"
#include "commitgen/checkpoint.h"
#include "commitgen/corpus.h"
#include "commitgen/diff.h"
#include "commitgen/errors.h"
#include "commitgen/evaluate.h"
#include "commitgen/miner.h"
#include "commitgen/model.h"
#include "commitgen/subprocess.h"
#include "commitgen/trainer.h"
#include "json.hpp"

namespace commitgen {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<std::string> ReadRepoList(const std::string& path) {
  std::istringstream in(ReadFile(path));
  std::vector<std::string> repos;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    repos.push_back(line.substr(first, last - first + 1));
  }
  return repos;
}

// Flags shared by the commands that build or train a model.
struct ModelFlags {
  ModelConfig model;
  bool full_scale = false;
  std::vector<CLI::Option*> shape_options;

  void Add(CLI::App* app) {
    shape_options = {
        app->add_option("--encoder-layers", model.encoder_layers, "Encoder layers")
            ->capture_default_str(),
        app->add_option("--decoder-layers", model.decoder_layers, "Decoder layers")
            ->capture_default_str(),
        app->add_option("--hidden", model.hidden_dim, "Hidden size")->capture_default_str(),
        app->add_option("--heads", model.heads, "Attention heads")->capture_default_str(),
        app->add_option("--ffn", model.ffn_dim, "Feed-forward inner size")
            ->capture_default_str(),
    };
    app->add_option("--max-source-len", model.max_source_len, "Source length limit")
        ->capture_default_str();
    app->add_option("--max-target-len", model.max_target_len, "Target length limit")
        ->capture_default_str();
    app->add_option("--dropout", model.dropout, "Dropout rate")->capture_default_str();
    app->add_flag("--full-scale", full_scale,
                  "12 encoder / 3 decoder layers, hidden 768, 12 heads, ffn 3072 (explicit "
                  "shape flags still win)");
  }

  ModelConfig Resolve(const Vocabulary& vocab) const {
    ModelConfig c = model;
    const ModelConfig full = ModelConfig::FullScale(vocab);
    if (full_scale) {
      if (shape_options[0]->count() == 0) c.encoder_layers = full.encoder_layers;
      if (shape_options[1]->count() == 0) c.decoder_layers = full.decoder_layers;
      if (shape_options[2]->count() == 0) c.hidden_dim = full.hidden_dim;
      if (shape_options[3]->count() == 0) c.heads = full.heads;
      if (shape_options[4]->count() == 0) c.ffn_dim = full.ffn_dim;
    }
    c.vocab_size = vocab.size();
    c.specials = vocab.specials();
    c.vocab_fingerprint = vocab.Fingerprint();
    try {
      c.Validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

struct TrainFlags {
  TrainConfig train;
  double grad_clip = 0;

  void Add(CLI::App* app) {
    app->add_option("--lr", train.learning_rate, "Learning rate")->capture_default_str();
    app->add_option("--batch-size", train.batch_size, "Minibatch size")->capture_default_str();
    app->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
    app->add_option("--weight-decay", train.adam.weight_decay, "Decoupled weight decay")
        ->capture_default_str();
    app->add_option("--warmup", train.warmup_steps, "Linear warmup steps")
        ->capture_default_str();
    app->add_option("--grad-clip", grad_clip, "Global gradient-norm clip (0 = off)")
        ->capture_default_str();
  }

  TrainConfig Resolve(std::uint64_t seed) const {
    TrainConfig c = train;
    c.seed = seed;
    if (grad_clip > 0) c.grad_clip = grad_clip;
    try {
      c.Validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

struct DecodeFlags {
  DecodeConfig decode;

  void Add(CLI::App* app) {
    app->add_option("--beam-size", decode.beam_size, "Beam width")->capture_default_str();
    app->add_option("--max-len", decode.max_target_len, "Longest message, counting <s>")
        ->capture_default_str();
    app->add_option("--length-penalty", decode.length_penalty, "Length penalty exponent")
        ->capture_default_str();
  }

  DecodeConfig Resolve() const {
    try {
      decode.Validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return decode;
  }
};

EncodingMode ModeFromFlag(const std::string& name) {
  try {
    return ParseEncodingMode(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

CLI::Option* AddModeOption(CLI::App* app, std::string* mode) {
  return app->add_option("--mode", *mode, "Source encoding")
      ->check(CLI::IsMember({"changed_lines", "all_modification"}))
      ->capture_default_str();
}

struct LoadedModel {
  Vocabulary vocab;
  Checkpoint checkpoint;
};

LoadedModel LoadModel(const std::string& vocab_prefix, const std::string& checkpoint_path) {
  LoadedModel m{Vocabulary::Load(vocab_prefix), LoadCheckpoint(checkpoint_path)};
  if (m.checkpoint.config.vocab_fingerprint != m.vocab.Fingerprint() ||
      m.checkpoint.config.vocab_size != m.vocab.size()) {
    throw DataError("checkpoint " + checkpoint_path + " was not trained with vocabulary " +
                    vocab_prefix);
  }
  return m;
}

std::vector<std::string> VocabTexts(std::span<const CorpusEntry> entries) {
  std::vector<std::string> texts;
  for (const CorpusEntry& e : entries) {
    for (const std::string& line : e.added) texts.push_back(line);
    for (const std::string& line : e.deleted) texts.push_back(line);
    texts.push_back(e.message);
  }
  return texts;
}

// Builds one pseudo-entry from a staged diff: the changed lines of every
// text file, in file order.
CorpusEntry EntryFromDiff(const std::string& diff_text) {
  if (diff_text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw DataError("empty diff");
  }
  std::vector<FileDiff> files;
  if (diff_text.rfind("@@", 0) == 0) {
    FileDiff single;
    single.hunks = ParseUnifiedDiff(diff_text);
    files.push_back(std::move(single));
  } else {
    files = ParseMultiFileDiff(diff_text);
  }
  CorpusEntry entry;
  bool any_text = false;
  bool language_set = false;
  for (const FileDiff& f : files) {
    if (f.binary) continue;
    if (f.hunks.empty()) continue;
    any_text = true;
    const ChangedLines changed = ExtractChangedLines(f.hunks);
    entry.added.insert(entry.added.end(), changed.added.begin(), changed.added.end());
    entry.deleted.insert(entry.deleted.end(), changed.deleted.begin(), changed.deleted.end());
    const std::vector<std::string> marked = ExtractAllModificationLines(f.hunks);
    entry.marked_lines.insert(entry.marked_lines.end(), marked.begin(), marked.end());
    if (!language_set) {
      if (auto lang = LanguageFromExtension(PathExtension(f.path()))) {
        entry.language = *lang;
        language_set = true;
      }
    }
  }
  if (!any_text) {
    bool all_binary = !files.empty() &&
                      std::all_of(files.begin(), files.end(), [](const FileDiff& f) { return f.binary; });
    throw DataError(all_binary ? "diff contains only binary files" : "diff has no changed lines");
  }
  entry.message = "-";
  return entry;
}

// Expands `--config file.json` into ordinary flags placed ahead of the
// command-line ones. Keys are flag names without dashes; a flag given on
// the command line wins over the file.
std::vector<std::string> ExpandConfig(CLI::App& app, const std::vector<std::string>& args) {
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  for (CLI::App* s : app.get_subcommands([](CLI::App*) { return true; })) {
    if (s->get_name() == args[0]) sub = s;
  }
  if (sub == nullptr) return args;
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(ReadFile(config_path));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file " + config_path + ": " + e.what());
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  if (!config.is_object()) throw UsageError("config file must hold a JSON object");

  auto given = [&](const std::string& flag) {
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  auto scalar = [](const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  std::vector<std::string> expanded = {args[0]};
  for (const auto& [key, value] : config.items()) {
    const std::string flag = "--" + key;
    if (key == "config" || sub->get_option_no_throw(flag) == nullptr) {
      throw UsageError("config file " + config_path + ": unknown option '" + key + "' for " +
                       args[0]);
    }
    if (given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) expanded.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& item : value) {
        expanded.push_back(flag);
        expanded.push_back(scalar(item));
      }
    } else if (!value.is_null()) {
      expanded.push_back(flag);
      expanded.push_back(scalar(value));
    }
  }
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Mine commit corpora, train commit-message models, generate messages.",
               "commitgen"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::uint64_t seed = kDefaultSeed;
  std::string config_path;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
    sub->add_option("--config", config_path,
                    "JSON file of flag values (keys without dashes); command-line flags win");
  };

  // mine
  CLI::App* mine = app.add_subcommand("mine", "Mine repositories into a corpus");
  MinerConfig miner;
  std::string repos_path, mine_out, mine_report, mine_vocab;
  std::vector<std::string> extensions, verbs;
  bool include_merges = false;
  mine->add_option("--repos", repos_path, "File with one repository (owner/name or path) per line")
      ->required();
  mine->add_option("--out", mine_out, "Corpus output (JSON lines)")->required();
  mine->add_option("--report", mine_report, "Also write the mining report here");
  mine->add_option("--max-commits-per-repo", miner.max_commits_per_repo,
                   "Qualifying commits kept per repository")->capture_default_str();
  mine->add_option("--max-files-changed", miner.max_files_changed,
                   "Largest accepted number of touched files")->capture_default_str();
  mine->add_option("--max-code-tokens", miner.max_code_tokens,
                   "Largest accepted added+deleted token count per file")->capture_default_str();
  mine->add_option("--extensions", extensions, "Allowed file extensions, e.g. .py");
  mine->add_option("--verbs", verbs, "Verb whitelist (lemmas)");
  mine->add_flag("--include-merges", include_merges, "Do not exclude merge commits");
  mine->add_option("--workers", miner.clone_workers, "Parallel repositories")
      ->capture_default_str();
  mine->add_option("--clone-dir", miner.clone_dir, "Where remote repositories are cloned");
  mine->add_option("--url-prefix", miner.clone_url_prefix, "Prefix for owner/name clones")
      ->capture_default_str();
  mine->add_option("--vocab", mine_vocab, "Count code tokens with this vocabulary prefix");
  common(mine);

  // stats
  CLI::App* stats = app.add_subcommand("stats", "Corpus statistics");
  std::string stats_corpus, stats_out, stats_vocab;
  stats->add_option("--corpus", stats_corpus, "Corpus file")->required();
  stats->add_option("--out", stats_out, "Write the statistics as JSON");
  stats->add_option("--vocab", stats_vocab, "Count code tokens with this vocabulary prefix");
  common(stats);

  // split
  CLI::App* split = app.add_subcommand("split", "Split a corpus into train/valid/test");
  SplitSpec split_spec;
  std::string split_corpus, split_dir;
  split->add_option("--corpus", split_corpus, "Corpus file")->required();
  split->add_option("--out-dir", split_dir, "Directory for train/valid/test.jsonl")->required();
  split->add_option("--train", split_spec.train_frac, "Train fraction")->capture_default_str();
  split->add_option("--valid", split_spec.valid_frac, "Validation fraction")
      ->capture_default_str();
  split->add_option("--test", split_spec.test_frac, "Test fraction")->capture_default_str();
  split->add_flag("--group-by-repo", split_spec.group_by_repo,
                  "Keep each repository inside one part");
  common(split);

  // train-vocab
  CLI::App* train_vocab = app.add_subcommand("train-vocab", "Train the BPE vocabulary");
  std::vector<std::string> vocab_corpora;
  std::string vocab_out;
  int vocab_size = 8192;
  train_vocab->add_option("--corpus", vocab_corpora, "Corpus file(s)")->required();
  train_vocab->add_option("--out", vocab_out, "Output prefix (.merges.txt, .vocab.txt)")
      ->required();
  train_vocab->add_option("--vocab-size", vocab_size, "Target vocabulary size")
      ->capture_default_str();
  common(train_vocab);

  // train
  CLI::App* train = app.add_subcommand("train", "Train a model");
  ModelFlags train_model;
  TrainFlags train_flags;
  std::string train_path, valid_path, train_vocab_prefix, train_out, train_metrics, train_init;
  std::string train_mode = "changed_lines";
  train->add_option("--train", train_path, "Training split")->required();
  train->add_option("--valid", valid_path, "Validation split")->required();
  train->add_option("--vocab", train_vocab_prefix, "Vocabulary prefix")->required();
  train->add_option("--out", train_out, "Checkpoint of the best-dev model")->required();
  train->add_option("--metrics", train_metrics, "Per-epoch metrics (JSON lines)");
  train->add_option("--init", train_init, "Start from this checkpoint instead of random");
  AddModeOption(train, &train_mode);
  train_model.Add(train);
  train_flags.Add(train);
  common(train);

  // generate
  CLI::App* generate = app.add_subcommand("generate", "Generate messages for a corpus");
  DecodeFlags generate_decode;
  std::string gen_corpus, gen_ckpt, gen_vocab, gen_out, gen_mode = "changed_lines";
  generate->add_option("--corpus", gen_corpus, "Corpus file")->required();
  generate->add_option("--checkpoint", gen_ckpt, "Model checkpoint")->required();
  generate->add_option("--vocab", gen_vocab, "Vocabulary prefix")->required();
  generate->add_option("--out", gen_out, "Write JSON lines here instead of stdout");
  AddModeOption(generate, &gen_mode);
  generate_decode.Add(generate);
  common(generate);

  // suggest
  CLI::App* suggest = app.add_subcommand("suggest", "Suggest a message for a staged diff");
  DecodeFlags suggest_decode;
  std::string sug_diff, sug_repo, sug_ckpt, sug_vocab;
  int beams = 0;
  auto* diff_opt = suggest->add_option("--diff", sug_diff, "Diff file (default: stdin)");
  suggest->add_option("--repo", sug_repo, "Use the staged changes of this repository")
      ->excludes(diff_opt);
  suggest->add_option("--checkpoint", sug_ckpt, "Model checkpoint")->required();
  suggest->add_option("--vocab", sug_vocab, "Vocabulary prefix")->required();
  suggest->add_option("--beams", beams, "Print this many scored candidates")
      ->check(CLI::PositiveNumber);
  suggest_decode.Add(suggest);
  common(suggest);

  // evaluate
  CLI::App* evaluate = app.add_subcommand("evaluate", "BLEU-4 and perplexity on a split");
  DecodeFlags eval_decode;
  std::string eval_corpus, eval_ckpt, eval_vocab, eval_out, eval_mode = "changed_lines";
  evaluate->add_option("--corpus", eval_corpus, "Corpus split")->required();
  evaluate->add_option("--checkpoint", eval_ckpt, "Model checkpoint")->required();
  evaluate->add_option("--vocab", eval_vocab, "Vocabulary prefix")->required();
  evaluate->add_option("--out", eval_out, "Report file (JSON)")->required();
  AddModeOption(evaluate, &eval_mode);
  eval_decode.Add(evaluate);
  common(evaluate);

  // ablations
  struct AblationFlags {
    ModelFlags model;
    TrainFlags train;
    DecodeFlags decode;
    std::string corpus, vocab, out;
    bool group_by_repo = false;
  };
  auto add_ablation = [&](CLI::App* sub, AblationFlags* f) {
    sub->add_option("--corpus", f->corpus, "Corpus; split 80/10/10 with --seed")->required();
    sub->add_option("--vocab", f->vocab, "Vocabulary prefix")->required();
    sub->add_option("--out", f->out, "Report file (JSON)");
    sub->add_flag("--group-by-repo", f->group_by_repo, "Split by repository");
    f->model.Add(sub);
    f->train.Add(sub);
    f->decode.Add(sub);
    common(sub);
  };
  CLI::App* ablate_input =
      app.add_subcommand("ablate-input", "Compare all-modification and changed-lines input");
  AblationFlags input_flags;
  std::string input_init_label = "Random", input_init_ckpt;
  add_ablation(ablate_input, &input_flags);
  ablate_input->add_option("--init-label", input_init_label, "Row label for the initial weight")
      ->capture_default_str();
  ablate_input->add_option("--init-checkpoint", input_init_ckpt,
                           "Initial weights (default: random)");

  CLI::App* ablate_init =
      app.add_subcommand("ablate-init", "Compare initial weights (random vs checkpoints)");
  AblationFlags init_flags;
  std::vector<std::string> init_specs;
  bool no_random = false;
  add_ablation(ablate_init, &init_flags);
  ablate_init->add_option("--init", init_specs, "LABEL=CHECKPOINT, repeatable");
  ablate_init->add_flag("--no-random", no_random, "Leave out the random-weight row");

  try {
    if (args.empty()) {
      err << app.help();
      return kExitUsage;
    }
    std::vector<std::string> argv = ExpandConfig(app, args);
    std::reverse(argv.begin(), argv.end());
    try {
      app.parse(argv);
    } catch (const CLI::CallForHelp&) {
      CLI::App* target = &app;
      for (CLI::App* s : app.get_subcommands()) target = s;
      out << target->help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "commitgen: " << e.what() << "\n";
      err << "Run with --help for usage.\n";
      return kExitUsage;
    }

    if (mine->parsed()) {
      miner.repo_list = ReadRepoList(repos_path);
      if (!extensions.empty()) miner.allowed_extensions = {extensions.begin(), extensions.end()};
      if (!verbs.empty()) miner.verb_whitelist = verbs;
      miner.exclude_merges = !include_merges;
      try {
        miner.Validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const Vocabulary counter_vocab = mine_vocab.empty() ? Vocabulary() : Vocabulary::Load(mine_vocab);
      const TokenCounter counter = [&](std::string_view s) { return counter_vocab.CountTokens(s); };
      const MiningResult result = Mine(miner, counter);
      std::vector<CorpusEntry> entries;
      for (const CommitRecord& record : result.accepted) {
        for (CorpusEntry& e : EntriesFromRecord(record)) entries.push_back(std::move(e));
      }
      WriteCorpus(entries, mine_out);
      const std::string report = ToJson(result.report).dump(2) + "\n";
      if (!mine_report.empty()) WriteFile(mine_report, report);
      out << report;
      if (!result.report.repos_failed.empty() &&
          result.report.repos_failed.size() == miner.repo_list.size()) {
        err << "commitgen: every repository failed\n";
        return kExitRuntime;
      }
      return kExitOk;
    }

    if (stats->parsed()) {
      const std::vector<CorpusEntry> entries = ReadCorpus(stats_corpus);
      TokenCounter counter;
      Vocabulary vocab;
      if (!stats_vocab.empty()) {
        vocab = Vocabulary::Load(stats_vocab);
        counter = [&](std::string_view s) { return vocab.CountTokens(s); };
      }
      const StatisticsReport report = ComputeStats(entries, counter);
      out << FormatStatsTable(report);
      if (!stats_out.empty()) WriteFile(stats_out, ToJson(report).dump(2) + "\n");
      return kExitOk;
    }

    if (split->parsed()) {
      split_spec.seed = seed;
      try {
        split_spec.Validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const std::vector<CorpusEntry> entries = ReadCorpus(split_corpus);
      const CorpusSplits parts = Split(entries, split_spec);
      std::filesystem::create_directories(split_dir);
      const std::filesystem::path dir(split_dir);
      WriteCorpus(parts.train, (dir / "train.jsonl").string());
      WriteCorpus(parts.valid, (dir / "valid.jsonl").string());
      WriteCorpus(parts.test, (dir / "test.jsonl").string());
      out << FormatSplitTable(parts.train, parts.valid, parts.test);
      return kExitOk;
    }

    if (train_vocab->parsed()) {
      std::vector<CorpusEntry> entries;
      for (const std::string& path : vocab_corpora) {
        std::vector<CorpusEntry> part = ReadCorpus(path);
        entries.insert(entries.end(), part.begin(), part.end());
      }
      if (vocab_size < kBaseVocabSize) {
        throw UsageError("--vocab-size must be at least " + std::to_string(kBaseVocabSize));
      }
      const Vocabulary vocab = Vocabulary::Train(VocabTexts(entries), vocab_size);
      vocab.Save(vocab_out);
      out << "vocabulary: " << vocab.size() << " tokens, " << vocab.merges().size()
          << " merges\n";
      return kExitOk;
    }

    if (train->parsed()) {
      const Vocabulary vocab = Vocabulary::Load(train_vocab_prefix);
      const ModelConfig config = train_model.Resolve(vocab);
      const TrainConfig tc = train_flags.Resolve(seed);
      const EncodingMode mode = ModeFromFlag(train_mode);
      const std::vector<CorpusEntry> train_entries = ReadCorpus(train_path);
      const std::vector<CorpusEntry> valid_entries = ReadCorpus(valid_path);
      if (train_entries.empty() || valid_entries.empty()) {
        throw DataError("train and valid splits must both be non-empty");
      }
      Parameters<float> init = train_init.empty() ? RandomParameters<float>(config, seed)
                                                  : LoadCheckpointFor(train_init, config);
      const auto train_set = BuildInputs(train_entries, vocab, mode, config);
      const auto valid_set = BuildInputs(valid_entries, vocab, mode, config);
      std::ofstream metrics_file;
      if (!train_metrics.empty()) {
        metrics_file.open(train_metrics, std::ios::trunc);
        if (!metrics_file) throw std::runtime_error("cannot open " + train_metrics);
      }
      std::ostream& metrics_out = train_metrics.empty() ? out : metrics_file;
      const TrainResult result =
          Train(std::move(init), config, train_set, valid_set, tc,
                [&](const EpochMetrics& m) { metrics_out << ToJson(m).dump() << "\n" << std::flush; });
      SaveCheckpoint(result.params, config, train_out);
      err << "best dev ppl " << result.best_dev_ppl << " at epoch " << result.best_epoch << "\n";
      return kExitOk;
    }

    if (generate->parsed()) {
      const LoadedModel m = LoadModel(gen_vocab, gen_ckpt);
      const DecodeConfig dc = generate_decode.Resolve();
      const EncodingMode mode = ModeFromFlag(gen_mode);
      std::ostringstream lines;
      for (const CorpusEntry& e : ReadCorpus(gen_corpus)) {
        const GeneratedMessage g =
            GenerateMessage(m.checkpoint.params, m.checkpoint.config, e, m.vocab, mode, dc);
        lines << nlohmann::json{{"id", e.id},
                                {"message", g.text},
                                {"score", g.score},
                                {"degenerate", g.degenerate}}
                     .dump()
              << "\n";
      }
      if (gen_out.empty()) {
        out << lines.str();
      } else {
        WriteFile(gen_out, lines.str());
      }
      return kExitOk;
    }

    if (suggest->parsed()) {
      std::string diff_text;
      if (!sug_repo.empty()) {
        const ProcessResult r = RunProcess(
            {"git", "-C", sug_repo, "diff", "--cached", "--no-color", "--no-ext-diff"});
        if (r.exit_code != 0) throw DataError("git diff --cached failed: " + r.err);
        diff_text = r.out;
      } else if (!sug_diff.empty()) {
        diff_text = ReadFile(sug_diff);
      } else {
        std::ostringstream buf;
        buf << in.rdbuf();
        diff_text = buf.str();
      }
      const CorpusEntry entry = EntryFromDiff(diff_text);
      const LoadedModel m = LoadModel(sug_vocab, sug_ckpt);
      DecodeConfig dc = suggest_decode.Resolve();
      if (beams > dc.beam_size) dc.beam_size = beams;
      const GeneratedMessage g = GenerateMessage(m.checkpoint.params, m.checkpoint.config, entry,
                                                 m.vocab, EncodingMode::kChangedLines, dc);
      if (beams > 0) {
        const auto n = std::min<std::size_t>(static_cast<std::size_t>(beams), g.candidates.size());
        char score[32];
        for (std::size_t i = 0; i < n; ++i) {
          std::snprintf(score, sizeof(score), "%.4f", g.candidates[i].second);
          out << score << "\t" << g.candidates[i].first << "\n";
        }
      } else {
        out << g.text << "\n";
      }
      return kExitOk;
    }

    if (evaluate->parsed()) {
      const LoadedModel m = LoadModel(eval_vocab, eval_ckpt);
      const DecodeConfig dc = eval_decode.Resolve();
      const EncodingMode mode = ModeFromFlag(eval_mode);
      const std::vector<CorpusEntry> entries = ReadCorpus(eval_corpus);
      if (entries.empty()) throw DataError("evaluation corpus is empty");
      const EvalReport report =
          Evaluate(m.checkpoint.params, m.checkpoint.config, m.vocab, entries, mode, dc);
      WriteFile(eval_out, ToJson(report).dump(2) + "\n");
      char line[128];
      std::snprintf(line, sizeof(line), "BLEU-4 %.2f  PPL %.2f  n=%zu\n", report.bleu4,
                    report.ppl, report.n_examples);
      out << line;
      return kExitOk;
    }

    auto prepare = [&](AblationFlags& f, Vocabulary* vocab, CorpusSplits* splits,
                       TrainingRecipe* recipe) {
      *vocab = Vocabulary::Load(f.vocab);
      recipe->model = f.model.Resolve(*vocab);
      recipe->train = f.train.Resolve(seed);
      recipe->decode = f.decode.Resolve();
      recipe->init_seed = seed;
      SplitSpec spec;
      spec.seed = seed;
      spec.group_by_repo = f.group_by_repo;
      *splits = Split(ReadCorpus(f.corpus), spec);
      if (splits->train.empty() || splits->valid.empty() || splits->test.empty()) {
        throw DataError("corpus too small: every split part needs at least one entry");
      }
    };
    auto report_rows = [&](const AblationFlags& f, const std::vector<AblationRow>& rows,
                           const std::string& table) {
      out << table;
      if (!f.out.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const AblationRow& r : rows) j.push_back(ToJson(r));
        WriteFile(f.out, nlohmann::json{{"rows", j}, {"table", table}}.dump(2) + "\n");
      }
    };

    if (ablate_input->parsed()) {
      Vocabulary vocab;
      CorpusSplits splits;
      TrainingRecipe recipe;
      prepare(input_flags, &vocab, &splits, &recipe);
      InitialWeights init{input_init_label, std::nullopt};
      if (!input_init_ckpt.empty()) init.checkpoint = input_init_ckpt;
      const auto rows = AblateInputMode(splits, vocab, recipe, init);
      report_rows(input_flags, rows, FormatInputModeTable(rows));
      return kExitOk;
    }

    if (ablate_init->parsed()) {
      std::vector<InitialWeights> inits;
      if (!no_random) inits.push_back({"Random", std::nullopt});
      for (const std::string& spec : init_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
          throw UsageError("--init expects LABEL=CHECKPOINT, got '" + spec + "'");
        }
        inits.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
      }
      if (inits.empty()) throw UsageError("nothing to compare: add --init or drop --no-random");
      Vocabulary vocab;
      CorpusSplits splits;
      TrainingRecipe recipe;
      prepare(init_flags, &vocab, &splits, &recipe);
      const auto rows = AblateInitWeight(splits, vocab, recipe, inits);
      report_rows(init_flags, rows, FormatInitWeightTable(rows));
      return kExitOk;
    }
    err << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "commitgen: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "commitgen: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "commitgen: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "commitgen: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int Run(int argc, const char* const* argv, std::istream& in, std::ostream& out,
        std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return Run(args, in, out, err);
}

}  // namespace commitgen
