#pragma once

#include <vector>

#include "charblock/numcore/tape.hpp"

namespace charblock {

// Label-smoothed cross entropy against (1-s)*onehot + s/V uniform, averaged
// over rows whose target is not ignore_id. Returns a 1x1 scalar node.
template <typename Scalar>
Var<Scalar> smoothed_ce(Var<Scalar> logits, const std::vector<int>& targets,
                        double smoothing, int ignore_id = 0) {
  auto& t = *logits.tape;
  const int R = logits.rows(), V = logits.cols();
  check(static_cast<int>(targets.size()) == R, "smoothed_ce: one target per row");
  check(smoothing >= 0 && smoothing < 1, "smoothed_ce: smoothing in [0,1)");

  std::vector<char> valid(R, 0);
  int n_valid = 0;
  for (int r = 0; r < R; ++r) {
    if (targets[r] == ignore_id) continue;
    check(targets[r] >= 0 && targets[r] < V, "smoothed_ce: target id out of range");
    valid[r] = 1;
    ++n_valid;
  }
  check(n_valid > 0, "smoothed_ce: no valid target positions");

  const Scalar s = Scalar(smoothing);
  Mat<Scalar> probs(R, V);  // kept for backward
  Acc<Scalar> total = 0;
  for (int r = 0; r < R; ++r) {
    if (!valid[r]) {
      probs.row(r).setZero();
      continue;
    }
    const auto row = logits.value().row(r);
    const Scalar mx = row.maxCoeff();
    Eigen::Array<Scalar, 1, Eigen::Dynamic> e = (row.array() - mx).exp();
    const Scalar z = e.sum();
    probs.row(r) = (e / z).matrix();
    const Scalar log_z = std::log(z) + mx;
    // -sum_v q_v log p_v = logZ - (1-s)*x_t - (s/V)*sum_v x_v
    total += Acc<Scalar>(log_z) - Acc<Scalar>(1 - s) * Acc<Scalar>(row(targets[r])) -
             Acc<Scalar>(s) / V * Acc<Scalar>(row.sum());
  }
  Mat<Scalar> y(1, 1);
  y(0, 0) = Scalar(total / n_valid);

  auto out = t.push(std::move(y), t.needs_grad(logits.id));
  t.set_backward(out.id, [il = logits.id, io = out.id, probs, targets, valid, n_valid,
                          s, V](Tape<Scalar>& tp) {
    const Scalar go = tp.grad(io)(0, 0) / Scalar(n_valid);
    Mat<Scalar> dx = Mat<Scalar>::Zero(probs.rows(), probs.cols());
    for (int r = 0; r < probs.rows(); ++r) {
      if (!valid[r]) continue;
      dx.row(r) = (probs.row(r).array() - s / V).matrix() * go;
      dx(r, targets[r]) -= (1 - s) * go;
    }
    tp.accum(il, dx);
  });
  return out;
}

}  // namespace charblock
