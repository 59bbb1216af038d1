// charblock: causal character-block downsampling lab.
//
// Verbs: leak-test, oracle, train, translate, evaluate, bench. Every verb
// reads one JSON config (all sections optional, unknown keys rejected),
// applies flag overrides, and writes a resolved config + manifest next to
// its outputs.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "charblock/cli/run_config.hpp"
#include "charblock/metrics/metrics.hpp"
#include "charblock/seq2seq/checkpoint.hpp"

namespace cb = charblock;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

cb::RunConfig resolve_config(const CommonFlags& flags) {
  cb::RunConfig config =
      flags.config_path.empty() ? cb::default_run_config() : cb::load_run_config(flags.config_path);
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.seed_set) config.seed = flags.seed;
  return config;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON run configuration");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--seed", flags.seed, "seed override")->each([&](const std::string&) {
    flags.seed_set = true;
  });
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

// ---------------------------------------------------------------------------

int cmd_leak_test(const cb::RunConfig& config, bool grid_mode, int oracle_seeds) {
  cb::ProbeSpec spec = config.probe;
  std::vector<cb::GridCell> cells;
  if (grid_mode) {
    cells = cb::default_grid(config.grid.deltas, spec, config.downsampler.model_dim);
  } else {
    cells.push_back(cb::make_grid_cell(config.downsampler.delta, config.downsampler.variant,
                                       config.downsampler.pos_embedding, spec,
                                       config.downsampler.model_dim));
  }
  (void)oracle_seeds;
  cb::GridAudit audit = cb::audit_grid(cells, config.probe_hyper);
  const std::string tsv = cb::render_tsv(audit);
  const std::string md = cb::render_markdown(audit);
  cb::atomic_write(config.out_dir + "/leak_report.tsv", tsv);
  cb::atomic_write(config.out_dir + "/leak_report.md", md);
  cb::emit_resolved_config(config, {"leak_report.tsv", "leak_report.md"});
  std::cout << md;
  for (const auto& cell : audit.cells) {
    for (const auto& issue : cell.disagreements) {
      std::cerr << "DISAGREEMENT [" << cell.cell.label << "] " << issue << "\n";
    }
  }
  if (!audit.agreement()) {
    std::cerr << "leak-test: probe and reachability oracle disagree\n";
    return 1;
  }
  std::cout << "leak-test: probe and oracle agree on all "
            << audit.cells.size() << " cell(s)\n";
  return 0;
}

int cmd_oracle(const cb::RunConfig& config) {
  cb::ProbeSpec spec = config.probe;
  cb::GridCell cell =
      cb::make_grid_cell(config.downsampler.delta, config.downsampler.variant,
                         config.downsampler.pos_embedding, spec, config.downsampler.model_dim);
  cb::ReachabilitySet reach = cb::reachability_oracle(cell.config, cell.spec);
  const std::string tsv = cb::render_oracle_tsv(cell, reach);
  cb::atomic_write(config.out_dir + "/oracle.tsv", tsv);
  cb::emit_resolved_config(config, {"oracle.tsv"});
  std::cout << tsv;
  std::cout << "reachable positions (1-based):";
  for (const int p : reach.reachable_positions()) std::cout << ' ' << p;
  std::cout << "\n";
  return 0;
}

int cmd_train(const cb::RunConfig& config) {
  std::vector<cb::ParallelPair> train_pairs, val_pairs;
  if (!config.paths.src.empty()) {
    train_pairs = cb::load_parallel_corpus(config.paths.src, config.paths.tgt);
    if (!config.paths.val_src.empty()) {
      val_pairs = cb::load_parallel_corpus(config.paths.val_src, config.paths.val_tgt);
    } else {
      const size_t n_val = std::max<size_t>(1, train_pairs.size() / 20);
      val_pairs.assign(train_pairs.end() - n_val, train_pairs.end());
      train_pairs.resize(train_pairs.size() - n_val);
    }
  } else {
    const cb::TaskConfig& task = config.task;
    auto pairs = cb::gen_toy_pairs(task.task(), task.count, task.len_min, task.len_max,
                                   task.vocab, config.seed);
    cb::check(task.count > task.val_count, "task: count must exceed val_count");
    val_pairs.assign(pairs.end() - task.val_count, pairs.end());
    train_pairs.assign(pairs.begin(), pairs.end() - task.val_count);
  }

  cb::Seq2Seq<float> model(config.model, config.seed);
  cb::TrainResult result =
      cb::train_translation(model, train_pairs, val_pairs, config.train, config.seed);

  std::string log_tsv = "step\tloss\tlr\telapsed_ms\n";
  char buf[128];
  for (const auto& entry : result.log) {
    std::snprintf(buf, sizeof(buf), "%ld\t%.6f\t%.6e\t%.1f\n", entry.step, entry.loss,
                  entry.lr, entry.elapsed_ms);
    log_tsv += buf;
  }
  cb::atomic_write(config.out_dir + "/train_log.tsv", log_tsv);

  cb::Checkpoint ckpt;
  ckpt.config = config.model;
  ckpt.params = model.params();
  ckpt.step = result.steps;
  ckpt.val_history = result.val_history;
  const std::string ckpt_path = config.paths.checkpoint.empty()
                                    ? config.out_dir + "/checkpoint.bin"
                                    : config.paths.checkpoint;
  cb::save_checkpoint(ckpt, ckpt_path);
  cb::emit_resolved_config(config, {"train_log.tsv", ckpt_path});
  std::cout << "trained " << result.steps << " steps, best val loss "
            << result.best_val_loss << (result.early_stopped ? " (early stop)" : "")
            << "\ncheckpoint: " << ckpt_path << "\n";
  return 0;
}

int cmd_translate(const cb::RunConfig& config, int max_len) {
  cb::check(!config.paths.checkpoint.empty(), "translate: paths.checkpoint required");
  cb::check(!config.paths.source.empty(), "translate: paths.source required");
  cb::Checkpoint ckpt = cb::load_checkpoint(config.paths.checkpoint);
  cb::Seq2Seq<float> model(ckpt.config, ckpt.params);

  std::string out_text;
  int truncated = 0;
  for (const std::string& line : read_lines(config.paths.source)) {
    cb::ByteSequence src = cb::byte_encode(line);
    src.ids.push_back(cb::kEosId);
    auto result = model.generate(src, max_len);
    truncated += result.truncated ? 1 : 0;
    out_text += cb::byte_decode(result.out);
    out_text += '\n';
  }
  const std::string out_path = config.paths.output.empty()
                                   ? config.out_dir + "/hypotheses.txt"
                                   : config.paths.output;
  cb::atomic_write(out_path, out_text);
  cb::emit_resolved_config(config, {out_path});
  std::cout << "wrote " << out_path;
  if (truncated > 0) std::cout << " (" << truncated << " truncated at max_len)";
  std::cout << "\n";
  return 0;
}

int cmd_evaluate(const cb::RunConfig& config) {
  cb::check(!config.paths.hyp.empty() && !config.paths.ref.empty(),
            "evaluate: paths.hyp and paths.ref required");
  const auto hyps = read_lines(config.paths.hyp);
  const auto refs = read_lines(config.paths.ref);
  const cb::EvalResult bleu = cb::corpus_bleu(hyps, refs);
  const cb::EvalResult chars = cb::char_accuracy(hyps, refs);
  const cb::EvalResult seqs = cb::sequence_accuracy(hyps, refs);

  cb::Json out{{"bleu",
                {{"value", bleu.value},
                 {"precisions", bleu.precisions},
                 {"brevity_penalty", bleu.brevity_penalty},
                 {"support", bleu.support},
                 {"notes", bleu.notes}}},
               {"char_accuracy", {{"value", chars.value}, {"correct", chars.correct},
                                  {"total", chars.total}}},
               {"sequence_accuracy",
                {{"value", seqs.value}, {"correct", seqs.correct}, {"total", seqs.total}}}};
  cb::atomic_write(config.out_dir + "/eval.json", out.dump(2) + "\n");
  cb::emit_resolved_config(config, {"eval.json"});
  std::cout << "BLEU " << bleu.value << "  char_acc " << chars.value << "  seq_acc "
            << seqs.value << "\n";
  return 0;
}

int cmd_bench(const cb::RunConfig& config) {
  cb::BenchSetup setup = config.bench;
  setup.seed = config.seed == 0 ? setup.seed : config.seed;
  std::vector<cb::BenchRow> rows =
      cb::benchmark_step_time<float>(config.grid.deltas, setup, config.model.dims);
  const std::string tsv = cb::render_bench_tsv(rows);
  cb::atomic_write(config.out_dir + "/bench.tsv", tsv);
  cb::emit_resolved_config(config, {"bench.tsv"});
  std::cout << tsv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal character-block downsampling lab"};
  app.require_subcommand(1);

  CommonFlags flags;
  bool grid_mode = false;
  int oracle_seeds = 3;
  int max_len = 512;
  int delta_override = 0;
  std::string variant_override, pos_override;

  auto add_cell_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--delta", delta_override, "downsampling factor override");
    cmd->add_option("--variant", variant_override,
                    "non_causal|padding|removal|masking|lee");
    cmd->add_option("--pos-emb", pos_override, "sinusoidal|conv");
  };

  CLI::App* leak = app.add_subcommand("leak-test", "train + evaluate the leak probe");
  add_common(leak, flags);
  add_cell_overrides(leak);
  leak->add_flag("--grid", grid_mode, "run the full (delta x variant) audit grid");

  CLI::App* oracle = app.add_subcommand("oracle", "static reachability only");
  add_common(oracle, flags);
  add_cell_overrides(oracle);
  oracle->add_option("--oracle-seeds", oracle_seeds, "random parameter seeds");

  CLI::App* train = app.add_subcommand("train", "train a translation model");
  add_common(train, flags);

  CLI::App* translate = app.add_subcommand("translate", "greedy-decode a source file");
  add_common(translate, flags);
  translate->add_option("--max-len", max_len, "generation cap per sentence");

  CLI::App* evaluate = app.add_subcommand("evaluate", "BLEU + accuracy on two files");
  add_common(evaluate, flags);

  CLI::App* bench = app.add_subcommand("bench", "step/generation timing across deltas");
  add_common(bench, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    cb::RunConfig config = resolve_config(flags);
    // Per-cell overrides rebuild the downsampler with matching defaults.
    if (delta_override > 0 || !variant_override.empty() || !pos_override.empty()) {
      const int delta = delta_override > 0 ? delta_override : config.downsampler.delta;
      const cb::Variant variant = variant_override.empty()
                                      ? config.downsampler.variant
                                      : cb::variant_from_string(variant_override);
      const cb::PosKind pos = pos_override.empty() ? config.downsampler.pos_embedding
                                                   : cb::pos_kind_from_string(pos_override);
      config.downsampler =
          cb::decoder_config(delta, variant, pos, config.downsampler.model_dim);
    }
    config.probe.delta = config.downsampler.delta;
    config.probe.pad_multiplier = cb::context_pad_multiplier(config.downsampler.variant);
    if (config.probe.seed == 0) config.probe.seed = config.seed;

    if (leak->parsed()) return cmd_leak_test(config, grid_mode, oracle_seeds);
    if (oracle->parsed()) return cmd_oracle(config);
    if (train->parsed()) return cmd_train(config);
    if (translate->parsed()) return cmd_translate(config, max_len);
    if (evaluate->parsed()) return cmd_evaluate(config);
    if (bench->parsed()) return cmd_bench(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
