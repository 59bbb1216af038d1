#pragma once

// The single JSON run configuration shared by every CLI verb. Unknown keys
// are rejected; every run writes its resolved copy (plus content hash) next
// to its outputs so artifacts are self-describing.

#include "charblock/io/atomic_file.hpp"
#include "charblock/leakaudit/grid.hpp"
#include "charblock/seq2seq/bench.hpp"
#include "charblock/serialize.hpp"

namespace charblock {

struct TaskConfig {
  std::string kind = "copy";  // copy | reverse
  int count = 20000;
  int len_min = 4;
  int len_max = 32;
  int vocab = 32;
  int val_count = 128;
  int test_count = 128;

  ToyTask task() const {
    if (kind == "copy") return ToyTask::copy;
    if (kind == "reverse") return ToyTask::reverse;
    throw std::invalid_argument("task: unknown kind '" + kind + "'");
  }
};

struct PathsConfig {
  std::string src, tgt;          // training corpus
  std::string val_src, val_tgt;  // validation corpus
  std::string checkpoint;
  std::string source, output;  // translate input/output
  std::string hyp, ref;        // evaluate inputs
};

struct GridConfig {
  std::vector<int> deltas = {2, 3, 4};
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "runs/out";
  ProbeSpec probe;          // delta is taken from `downsampler`
  ProbeHyper probe_hyper;   // Appendix-A defaults
  DownsamplerConfig downsampler = decoder_config(2, Variant::non_causal,
                                                 PosKind::sinusoidal, 128);
  GridConfig grid;
  ModelConfig model;
  TrainHyper train;
  TaskConfig task;
  BenchSetup bench;
  PathsConfig paths;
};

inline Json to_json(const TaskConfig& t) {
  return Json{{"kind", t.kind},       {"count", t.count},
              {"len_min", t.len_min}, {"len_max", t.len_max},
              {"vocab", t.vocab},     {"val_count", t.val_count},
              {"test_count", t.test_count}};
}

inline TaskConfig task_from_json(const Json& j) {
  reject_unknown_keys(
      j, {"kind", "count", "len_min", "len_max", "vocab", "val_count", "test_count"},
      "task");
  TaskConfig t;
  t.kind = j.value("kind", t.kind);
  t.count = j.value("count", t.count);
  t.len_min = j.value("len_min", t.len_min);
  t.len_max = j.value("len_max", t.len_max);
  t.vocab = j.value("vocab", t.vocab);
  t.val_count = j.value("val_count", t.val_count);
  t.test_count = j.value("test_count", t.test_count);
  t.task();  // validates kind
  return t;
}

inline Json to_json(const PathsConfig& p) {
  return Json{{"src", p.src},           {"tgt", p.tgt},       {"val_src", p.val_src},
              {"val_tgt", p.val_tgt},   {"checkpoint", p.checkpoint},
              {"source", p.source},     {"output", p.output}, {"hyp", p.hyp},
              {"ref", p.ref}};
}

inline PathsConfig paths_from_json(const Json& j) {
  reject_unknown_keys(j,
                      {"src", "tgt", "val_src", "val_tgt", "checkpoint", "source",
                       "output", "hyp", "ref"},
                      "paths");
  PathsConfig p;
  p.src = j.value("src", "");
  p.tgt = j.value("tgt", "");
  p.val_src = j.value("val_src", "");
  p.val_tgt = j.value("val_tgt", "");
  p.checkpoint = j.value("checkpoint", "");
  p.source = j.value("source", "");
  p.output = j.value("output", "");
  p.hyp = j.value("hyp", "");
  p.ref = j.value("ref", "");
  return p;
}

inline Json to_json(const BenchSetup& b) {
  return Json{{"seq_len", b.seq_len},
              {"batch", b.batch},
              {"steps", b.steps},
              {"warmup", b.warmup},
              {"gen_sentences", b.gen_sentences},
              {"gen_len", b.gen_len},
              {"vocab", b.vocab},
              {"seed", b.seed}};
}

inline BenchSetup bench_from_json(const Json& j) {
  reject_unknown_keys(
      j, {"seq_len", "batch", "steps", "warmup", "gen_sentences", "gen_len", "vocab",
          "seed"},
      "bench");
  BenchSetup b;
  b.seq_len = j.value("seq_len", b.seq_len);
  b.batch = j.value("batch", b.batch);
  b.steps = j.value("steps", b.steps);
  b.warmup = j.value("warmup", b.warmup);
  b.gen_sentences = j.value("gen_sentences", b.gen_sentences);
  b.gen_len = j.value("gen_len", b.gen_len);
  b.vocab = j.value("vocab", b.vocab);
  b.seed = j.value("seed", b.seed);
  return b;
}

inline Json to_json(const GridConfig& g) { return Json{{"deltas", g.deltas}}; }

inline GridConfig grid_from_json(const Json& j) {
  reject_unknown_keys(j, {"deltas"}, "grid");
  GridConfig g;
  if (j.contains("deltas")) g.deltas = j.at("deltas").get<std::vector<int>>();
  check(!g.deltas.empty(), "grid: deltas must be non-empty");
  return g;
}

inline RunConfig default_run_config() {
  RunConfig c;
  c.model = desk_model(2, Variant::removal, PosKind::sinusoidal, DecoderHead::two_step);
  // Appendix-B translation defaults; desk runs override via config files.
  c.train.optimizer = OptimizerKind::adamw;
  c.train.learning_rate = 2e-4;
  c.train.warmup_steps = 4000;
  c.train.batch_size = 128;
  c.train.label_smoothing = 0.1;
  c.train.patience = 10;
  c.train.max_steps = 20000;
  c.train.eval_every = 200;
  return c;
}

inline Json to_json(const RunConfig& c) {
  return Json{{"seed", c.seed},
              {"out", c.out_dir},
              {"probe", to_json(c.probe)},
              {"probe_hyper", to_json(c.probe_hyper)},
              {"downsampler", to_json(c.downsampler)},
              {"grid", to_json(c.grid)},
              {"model", to_json(c.model)},
              {"train", to_json(c.train)},
              {"task", to_json(c.task)},
              {"bench", to_json(c.bench)},
              {"paths", to_json(c.paths)}};
}

inline RunConfig run_config_from_json(const Json& j) {
  reject_unknown_keys(j,
                      {"seed", "out", "probe", "probe_hyper", "downsampler", "grid",
                       "model", "train", "task", "bench", "paths"},
                      "config");
  RunConfig c = default_run_config();
  c.seed = j.value("seed", c.seed);
  c.out_dir = j.value("out", c.out_dir);
  if (j.contains("probe")) c.probe = probe_spec_from_json(j.at("probe"));
  if (j.contains("probe_hyper")) c.probe_hyper = probe_hyper_from_json(j.at("probe_hyper"));
  if (j.contains("downsampler")) {
    c.downsampler = downsampler_from_json(j.at("downsampler"), "downsampler");
  }
  if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));
  if (j.contains("model")) c.model = model_from_json(j.at("model"));
  if (j.contains("train")) c.train = train_hyper_from_json(j.at("train"));
  if (j.contains("task")) c.task = task_from_json(j.at("task"));
  if (j.contains("bench")) c.bench = bench_from_json(j.at("bench"));
  if (j.contains("paths")) c.paths = paths_from_json(j.at("paths"));
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  return run_config_from_json(Json::parse(read_file(path)));
}

// Writes <out>/resolved_config.json and a manifest recording its hash next
// to the outputs a command produces.
inline std::string emit_resolved_config(const RunConfig& config,
                                        const std::vector<std::string>& outputs) {
  const std::string resolved = to_json(config).dump(2) + "\n";
  const std::string hash = content_hash(resolved);
  atomic_write(config.out_dir + "/resolved_config.json", resolved);
  Json manifest{{"config_hash", hash}, {"outputs", outputs}};
  atomic_write(config.out_dir + "/run_manifest.json", manifest.dump(2) + "\n");
  return hash;
}

}  // namespace charblock
