#pragma once

// The trainable leak probe: downsampler + linear upsampler trained to predict
// random sequences from their BOS-padded shift. Above-chance accuracy at a
// target position evidences an information leak.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "charblock/bytedata.hpp"
#include "charblock/downsamplers/layers.hpp"
#include "charblock/leakaudit/report.hpp"
#include "charblock/numcore/loss.hpp"
#include "charblock/numcore/optimizer.hpp"

namespace charblock {

struct ProbeHyper {
  int steps = 5000;
  int batch = 32;
  double lr = 1e-4;
  int eval_batches = 100;
};

struct ProbeModel {
  DownsamplerConfig config;
  ProbeSpec spec;
  ParamStore<float> params;
  bool diverged = false;
  std::vector<double> losses;  // sampled every 250 steps
};

namespace detail {

constexpr int kIgnoreClass = -1;

// Flattened (batch * input_len) inputs and per-output-position classes; the
// trailing pad_len output rows of each sequence carry no target and are
// marked with kIgnoreClass.
inline void sample_probe_batch(const ProbeSpec& spec, int batch, std::mt19937_64& rng,
                               std::vector<int>& inputs, std::vector<int>& classes) {
  inputs.clear();
  classes.clear();
  for (int b = 0; b < batch; ++b) {
    auto [input, target] = make_probe_pair(spec, rng);
    inputs.insert(inputs.end(), input.ids.begin(), input.ids.end());
    for (const int id : target.ids) classes.push_back(id - kByteOffset);
    for (int i = 0; i < spec.pad_len(); ++i) classes.push_back(kIgnoreClass);
  }
}

template <typename Scalar>
Var<Scalar> probe_logits(TapeParams<Scalar>& params, const DownsamplerConfig& config,
                         const ProbeSpec& spec, const std::vector<int>& inputs) {
  const int input_len = spec.seq_len + spec.pad_len();
  Var<Scalar> blocks = downsample_tokens(params, config, "ds.", "emb", inputs, input_len);
  return upsample_linear(params, "ups.", blocks, config.delta, spec.probe_vocab);
}

}  // namespace detail

inline ProbeModel train_probe(const DownsamplerConfig& config, const ProbeSpec& spec,
                              const ProbeHyper& hyper = {}) {
  config.validate();
  spec.validate();
  check(spec.seq_len % config.delta == 0, "train_probe: seq_len must be divisible by delta");
  check(spec.delta == config.delta, "train_probe: spec and config deltas differ");

  ProbeModel model;
  model.config = config;
  model.spec = spec;

  Rng rng(spec.seed);
  model.params.add("emb", rng.normal<float>(kByteVocabSize, config.model_dim, 1.0));
  init_downsampler(model.params, config, "ds.", rng);
  init_upsample(model.params, "ups.", config.model_dim, config.delta, spec.probe_vocab, rng);

  TrainHyper opt;
  opt.optimizer = OptimizerKind::adam;
  opt.learning_rate = hyper.lr;
  opt.warmup_steps = 0;
  opt.batch_size = hyper.batch;

  std::mt19937_64 data_rng(rng.split(1).raw()());
  std::vector<int> inputs, classes;
  for (int step = 1; step <= hyper.steps; ++step) {
    detail::sample_probe_batch(spec, hyper.batch, data_rng, inputs, classes);
    Tape<float> tape;
    TapeParams<float> params(tape, model.params);
    Var<float> logits = detail::probe_logits(params, config, spec, inputs);
    Var<float> loss = smoothed_ce(logits, classes, 0.0, detail::kIgnoreClass);
    const double loss_value = loss.value()(0, 0);
    if (!std::isfinite(loss_value)) {
      model.diverged = true;
      break;
    }
    if (step % 250 == 1) model.losses.push_back(loss_value);
    tape.backward(loss);
    optimizer_step(model.params, params.collect_grads(), opt, step);
  }
  return model;
}

inline LeakReport eval_probe(const ProbeModel& model, int n_batches = 100) {
  check(!model.diverged, "eval_probe: probe training diverged");
  const ProbeSpec& spec = model.spec;
  const int L = spec.seq_len;
  const int batch = 32;

  std::mt19937_64 data_rng(Rng(spec.seed).split(2).raw()());
  std::vector<long> successes(L, 0);
  std::vector<int> inputs, classes;
  const int out_len = L + spec.pad_len();
  ParamStore<float>& store = const_cast<ParamStore<float>&>(model.params);
  for (int bi = 0; bi < n_batches; ++bi) {
    detail::sample_probe_batch(spec, batch, data_rng, inputs, classes);
    Tape<float> tape;
    TapeParams<float> params(tape, store, /*trainable=*/false);
    Var<float> logits = detail::probe_logits(params, model.config, spec, inputs);
    const MatF& lv = logits.value();
    for (int r = 0; r < lv.rows(); ++r) {
      const int pos = r % out_len;
      if (pos >= L) continue;  // trailing outputs carry no target
      int best = 0;
      lv.row(r).maxCoeff(&best);
      if (best == classes[r]) ++successes[pos];
    }
  }

  LeakReport report;
  report.label = to_string(model.config.variant) + "/" + to_string(model.config.pos_embedding);
  report.delta = model.config.delta;
  report.variant = model.config.variant;
  report.pos_kind = model.config.pos_embedding;
  report.pad_multiplier = spec.pad_multiplier;
  report.chance = 1.0 / spec.probe_vocab;
  report.seed = spec.seed;
  const long n = static_cast<long>(n_batches) * batch;
  for (int pos = 0; pos < L; ++pos) {
    PositionStat stat;
    stat.pos = pos + 1;
    stat.successes = successes[pos];
    stat.n = n;
    stat.accuracy = static_cast<double>(successes[pos]) / static_cast<double>(n);
    stat.p_value = binom_pvalue(successes[pos], n, report.chance);
    stat.verdict = verdict_from_p(stat.p_value);
    report.positions.push_back(stat);
  }
  return report;
}

}  // namespace charblock
