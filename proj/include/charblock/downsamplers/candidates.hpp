#pragma once

// Character n-gram candidate representations. Windows are non-overlapping
// and anchored at position 0: position i belongs to [floor(i/n)*n, +n).
// A trailing partial window averages over its true size.

#include <vector>

#include "charblock/numcore/tape.hpp"

namespace charblock {

// C_n[i] = mean of E over position i's window.
template <typename Scalar>
Var<Scalar> ngram_candidates(Var<Scalar> E, int n, int seq_len) {
  auto& t = *E.tape;
  check(n >= 1, "ngram_candidates: order must be >= 1");
  detail::check_seq(E.rows(), seq_len, "ngram_candidates");
  if (n == 1) return E;  // identity case
  const int B = E.rows() / seq_len, cols = E.cols();

  Mat<Scalar> y(E.rows(), cols);
  for (int b = 0; b < B; ++b) {
    for (int s = 0; s < seq_len; s += n) {
      const int w = std::min(n, seq_len - s);
      const auto window = E.value().middleRows(b * seq_len + s, w);
      y.middleRows(b * seq_len + s, w) =
          window.template cast<Acc<Scalar>>().colwise().mean().template cast<Scalar>()
              .replicate(w, 1);
    }
  }
  auto out = t.push(std::move(y), t.needs_grad(E.id));
  t.set_backward(out.id, [ie = E.id, io = out.id, n, seq_len, B, cols](Tape<Scalar>& tp) {
    const Mat<Scalar>& g = tp.grad(io);
    Mat<Scalar> dx(g.rows(), cols);
    for (int b = 0; b < B; ++b) {
      for (int s = 0; s < seq_len; s += n) {
        const int w = std::min(n, seq_len - s);
        dx.middleRows(b * seq_len + s, w) =
            (g.middleRows(b * seq_len + s, w).colwise().sum() / Scalar(w)).replicate(w, 1);
      }
    }
    tp.accum(ie, dx);
  });
  return out;
}

// Causality-masked candidates: windows fully inside one delta-block keep the
// plain mean; straddling windows are split causally, so position i averages
// window members up to and including i. Block-initial straddled positions
// therefore duplicate the unigram value.
template <typename Scalar>
Var<Scalar> masked_ngram_candidates(Var<Scalar> E, int n, int delta, int seq_len) {
  auto& t = *E.tape;
  check(n >= 1, "masked_ngram_candidates: order must be >= 1");
  check(delta >= 1, "masked_ngram_candidates: delta must be >= 1");
  detail::check_seq(E.rows(), seq_len, "masked_ngram_candidates");
  if (n == 1) return E;
  const int B = E.rows() / seq_len, cols = E.cols();

  auto straddles = [delta](int s, int e) { return s / delta != (e - 1) / delta; };

  Mat<Scalar> y(E.rows(), cols);
  for (int b = 0; b < B; ++b) {
    for (int s = 0; s < seq_len; s += n) {
      const int w = std::min(n, seq_len - s);
      const int base = b * seq_len + s;
      if (!straddles(s, s + w)) {
        y.middleRows(base, w) = E.value()
                                    .middleRows(base, w)
                                    .template cast<Acc<Scalar>>()
                                    .colwise()
                                    .mean()
                                    .template cast<Scalar>()
                                    .replicate(w, 1);
        continue;
      }
      Eigen::Matrix<Acc<Scalar>, 1, Eigen::Dynamic> run =
          Eigen::Matrix<Acc<Scalar>, 1, Eigen::Dynamic>::Zero(cols);
      for (int j = 0; j < w; ++j) {
        run += E.value().row(base + j).template cast<Acc<Scalar>>();
        y.row(base + j) = (run / Acc<Scalar>(j + 1)).template cast<Scalar>();
      }
    }
  }
  auto out = t.push(std::move(y), t.needs_grad(E.id));
  t.set_backward(out.id, [ie = E.id, io = out.id, n, delta, seq_len, B, cols,
                          straddles](Tape<Scalar>& tp) {
    const Mat<Scalar>& g = tp.grad(io);
    Mat<Scalar> dx(g.rows(), cols);
    for (int b = 0; b < B; ++b) {
      for (int s = 0; s < seq_len; s += n) {
        const int w = std::min(n, seq_len - s);
        const int base = b * seq_len + s;
        if (!straddles(s, s + w)) {
          dx.middleRows(base, w) =
              (g.middleRows(base, w).colwise().sum() / Scalar(w)).replicate(w, 1);
          continue;
        }
        // dE[j] = sum_{i >= j} dC[i] / (i+1)  (indices window-relative)
        Eigen::Matrix<Scalar, 1, Eigen::Dynamic> suffix =
            Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(cols);
        for (int j = w - 1; j >= 0; --j) {
          suffix += g.row(base + j) / Scalar(j + 1);
          dx.row(base + j) = suffix;
        }
      }
    }
    tp.accum(ie, dx);
  });
  return out;
}

// X[i] = sum_n p[i,n] * C_n[i]. p is L x N mixing weights (rows sum to 1
// after softmax), candidates are N matrices of shape L x d.
template <typename Scalar>
Var<Scalar> mix_candidates(Var<Scalar> p, const std::vector<Var<Scalar>>& candidates) {
  check(!candidates.empty(), "mix_candidates: no candidates");
  auto& t = *p.tape;
  const int N = static_cast<int>(candidates.size());
  check(p.cols() == N, "mix_candidates: p cols must equal candidate count");
  const int rows = candidates[0].rows(), cols = candidates[0].cols();
  check(p.rows() == rows, "mix_candidates: row mismatch");
  bool ng = t.needs_grad(p.id);
  std::vector<int> cand_ids;
  for (const auto& c : candidates) {
    check(c.tape == &t && c.rows() == rows && c.cols() == cols, "mix_candidates: shape");
    ng = ng || t.needs_grad(c.id);
    cand_ids.push_back(c.id);
  }
  Mat<Scalar> y = Mat<Scalar>::Zero(rows, cols);
  for (int k = 0; k < N; ++k) {
    y.array() += candidates[k].value().array().colwise() * p.value().col(k).array();
  }
  auto out = t.push(std::move(y), ng);
  t.set_backward(out.id, [ip = p.id, cand_ids, io = out.id, N](Tape<Scalar>& tp) {
    const Mat<Scalar>& g = tp.grad(io);
    for (int k = 0; k < N; ++k) {
      tp.accum(cand_ids[k], (g.array().colwise() * tp.value(ip).col(k).array()).matrix());
    }
    if (tp.needs_grad(ip)) {
      Mat<Scalar> dp(g.rows(), N);
      for (int k = 0; k < N; ++k) {
        dp.col(k) = g.cwiseProduct(tp.value(cand_ids[k])).rowwise().sum();
      }
      tp.accum(ip, dp);
    }
  });
  return out;
}

}  // namespace charblock
