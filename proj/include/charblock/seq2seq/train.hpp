#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "charblock/seq2seq/model.hpp"

namespace charblock {

struct TrainLogEntry {
  long step = 0;
  double loss = 0.0;
  double lr = 0.0;
  double elapsed_ms = 0.0;
};

struct TrainResult {
  long steps = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<double> val_history;
  std::vector<TrainLogEntry> log;
  bool early_stopped = false;
};

// Mean teacher-forced cross entropy (no smoothing) over a pair list.
template <typename Scalar>
double eval_loss(const Seq2Seq<Scalar>& model, const std::vector<ParallelPair>& pairs,
                 int batch_size) {
  check(!pairs.empty(), "eval_loss: empty pair list");
  double total = 0.0;
  long count = 0;
  auto& store = const_cast<Seq2Seq<Scalar>&>(model).params();
  for (const Batch& batch : batch_pad(pairs, batch_size, model.config().encoder.delta,
                                      model.config().decoder.delta)) {
    Tape<Scalar> tape;
    TapeParams<Scalar> p(tape, store, false);
    const double loss = model.teacher_loss(p, batch, 0.0).value()(0, 0);
    total += loss * batch.size();
    count += batch.size();
  }
  return total / count;
}

// Teacher-forced training with label smoothing, linear warmup, and early
// stopping on validation loss. Deterministic under (model init, seed).
template <typename Scalar>
TrainResult train_translation(Seq2Seq<Scalar>& model, const std::vector<ParallelPair>& train,
                              const std::vector<ParallelPair>& val, const TrainHyper& hyper,
                              std::uint64_t seed) {
  hyper.validate();
  check(!train.empty(), "train_translation: empty corpus");
  check(!val.empty(), "train_translation: empty validation split");

  Rng shuffle_rng = Rng(seed).split(11);
  Rng dropout_rng = Rng(seed).split(12);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     start)
        .count();
  };

  TrainResult result;
  ParamStore<Scalar> best_params = model.params();
  int evals_since_best = 0;
  long step = 0;
  bool stop = false;

  while (!stop) {
    // Fresh epoch: shuffled batch order.
    std::vector<ParallelPair> shuffled;
    shuffled.reserve(train.size());
    for (const int idx : shuffle_rng.permutation(static_cast<int>(train.size()))) {
      shuffled.push_back(train[idx]);
    }
    for (Batch& batch : batch_pad(shuffled, hyper.batch_size,
                                  model.config().encoder.delta,
                                  model.config().decoder.delta)) {
      ++step;
      Tape<Scalar> tape;
      TapeParams<Scalar> p(tape, model.params());
      Var<Scalar> loss = model.teacher_loss(p, batch, hyper.label_smoothing,
                                            /*training=*/true, &dropout_rng);
      const double loss_value = loss.value()(0, 0);
      if (!std::isfinite(loss_value)) {
        throw std::runtime_error("train_translation: non-finite loss at step " +
                                 std::to_string(step));
      }
      tape.backward(loss);
      optimizer_step(model.params(), p.collect_grads(), hyper, step);
      result.log.push_back(
          {step, loss_value, hyper.learning_rate * lr_schedule(step, hyper), elapsed_ms()});

      if (step % hyper.eval_every == 0 || step >= hyper.max_steps) {
        const double val_loss = eval_loss(model, val, hyper.batch_size);
        result.val_history.push_back(val_loss);
        if (val_loss < result.best_val_loss - 1e-6) {
          result.best_val_loss = val_loss;
          best_params = model.params();
          evals_since_best = 0;
        } else {
          ++evals_since_best;
          if (hyper.patience > 0 && evals_since_best >= hyper.patience) {
            result.early_stopped = true;
            stop = true;
          }
        }
      }
      if (step >= hyper.max_steps) stop = true;
      if (stop) break;
    }
  }
  result.steps = step;
  if (result.best_val_loss < std::numeric_limits<double>::infinity()) {
    model.params() = best_params;  // restore the best validation snapshot
  }
  return result;
}

struct OffsetAccuracy {
  double overall = 0.0;
  std::vector<double> per_offset;  // within-block offset 0..delta-1
  std::vector<long> correct_per_offset;
  std::vector<long> count_per_offset;
};

// Next-character accuracy under gold context, split by within-block offset.
template <typename Scalar>
OffsetAccuracy teacher_forced_accuracy(const Seq2Seq<Scalar>& model,
                                       const std::vector<ParallelPair>& pairs,
                                       int batch_size = 32) {
  check(!pairs.empty(), "teacher_forced_accuracy: empty pair list");
  const int delta = model.config().decoder.delta;
  OffsetAccuracy acc;
  acc.correct_per_offset.assign(delta, 0);
  acc.count_per_offset.assign(delta, 0);
  auto& store = const_cast<Seq2Seq<Scalar>&>(model).params();
  for (const Batch& batch : batch_pad(pairs, batch_size, model.config().encoder.delta,
                                      model.config().decoder.delta)) {
    Tape<Scalar> tape;
    TapeParams<Scalar> p(tape, store, false);
    auto fwd = model.teacher_forward(p, batch);
    const Mat<Scalar>& logits = fwd.logits.value();
    for (int r = 0; r < logits.rows(); ++r) {
      if (fwd.targets[r] == kPadId) continue;
      const int t = r % fwd.tgt_len;
      int best = 0;
      logits.row(r).maxCoeff(&best);
      acc.count_per_offset[t % delta] += 1;
      acc.correct_per_offset[t % delta] += best == fwd.targets[r] ? 1 : 0;
    }
  }
  long correct = 0, count = 0;
  for (int o = 0; o < delta; ++o) {
    correct += acc.correct_per_offset[o];
    count += acc.count_per_offset[o];
    acc.per_offset.push_back(acc.count_per_offset[o] == 0
                                 ? 0.0
                                 : static_cast<double>(acc.correct_per_offset[o]) /
                                       acc.count_per_offset[o]);
  }
  acc.overall = count == 0 ? 0.0 : static_cast<double>(correct) / count;
  return acc;
}

}  // namespace charblock
