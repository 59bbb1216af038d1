#pragma once

// Wall-clock comparison across downsampling factors at fixed character
// length and dims: median optimizer-step time and median per-sentence
// generation time. Mirrors the paper's epoch-time table at desk scale; the
// two-step head is measured at every delta (and the direct head at delta=1)
// so the downsampling effect is separated from the decoding method.

#include <algorithm>
#include <chrono>

#include "charblock/seq2seq/train.hpp"

namespace charblock {

struct BenchSetup {
  int seq_len = 128;  // fixed character length
  int batch = 8;
  int steps = 20;
  int warmup = 3;
  int gen_sentences = 6;
  int gen_len = 64;
  int vocab = 32;
  std::uint64_t seed = 17;
};

struct BenchRow {
  std::string label;
  int delta = 1;
  DecoderHead head = DecoderHead::two_step;
  double ms_per_step = 0.0;
  double ms_per_generation = 0.0;
};

namespace detail {

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace detail

template <typename Scalar = float>
BenchRow bench_variant(const ModelConfig& config, const std::string& label,
                       const BenchSetup& setup) {
  BenchRow row;
  row.label = label;
  row.delta = config.decoder.delta;
  row.head = config.head;

  auto pairs = gen_toy_pairs(ToyTask::copy, setup.batch * (setup.steps + setup.warmup),
                             setup.seq_len - 1, setup.seq_len - 1, setup.vocab, setup.seed);
  auto batches = batch_pad(pairs, setup.batch, config.encoder.delta, config.decoder.delta);

  Seq2Seq<Scalar> model(config, setup.seed);
  TrainHyper hyper;
  hyper.learning_rate = 1e-4;
  hyper.batch_size = setup.batch;

  using Clock = std::chrono::steady_clock;
  std::vector<double> step_times;
  long step = 0;
  for (const Batch& batch : batches) {
    ++step;
    const auto t0 = Clock::now();
    Tape<Scalar> tape;
    TapeParams<Scalar> p(tape, model.params());
    Var<Scalar> loss = model.teacher_loss(p, batch, 0.1, true);
    tape.backward(loss);
    optimizer_step(model.params(), p.collect_grads(), hyper, step);
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    if (step > setup.warmup) step_times.push_back(ms);
  }
  row.ms_per_step = detail::median(step_times);

  std::vector<double> gen_times;
  auto gen_pairs = gen_toy_pairs(ToyTask::copy, setup.gen_sentences, setup.gen_len - 1,
                                 setup.gen_len - 1, setup.vocab, setup.seed + 1);
  for (const auto& pair : gen_pairs) {
    const auto t0 = Clock::now();
    model.generate(pair.src, setup.gen_len);
    gen_times.push_back(
        std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  row.ms_per_generation = detail::median(gen_times);
  return row;
}

// The paper-style sweep: char-level delta=1 under both heads, then
// downsampled two-step models at the requested deltas.
template <typename Scalar = float>
std::vector<BenchRow> benchmark_step_time(const std::vector<int>& deltas,
                                          const BenchSetup& setup,
                                          const ModelDims& dims = {}) {
  std::vector<BenchRow> rows;
  for (const DecoderHead head : {DecoderHead::direct, DecoderHead::two_step}) {
    ModelConfig config = desk_model(1, Variant::removal, PosKind::sinusoidal, head,
                                    dims.model_dim);
    config.dims = dims;
    rows.push_back(bench_variant<Scalar>(
        config, std::string("char/d1/") + to_string(head), setup));
  }
  for (const int delta : deltas) {
    if (delta == 1) continue;
    ModelConfig config = desk_model(delta, Variant::removal, PosKind::sinusoidal,
                                    DecoderHead::two_step, dims.model_dim);
    config.dims = dims;
    rows.push_back(bench_variant<Scalar>(
        config, "r-gbst/d" + std::to_string(delta) + "/two_step", setup));
  }
  return rows;
}

inline std::string render_bench_tsv(const std::vector<BenchRow>& rows) {
  std::string out = "label\tdelta\thead\tms_per_step\tms_per_generation\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s\t%d\t%s\t%.3f\t%.3f\n", r.label.c_str(), r.delta,
                  to_string(r.head).c_str(), r.ms_per_step, r.ms_per_generation);
    out += buf;
  }
  return out;
}

}  // namespace charblock
