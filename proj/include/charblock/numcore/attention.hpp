#pragma once

// Fused scaled dot-product attention over B stacked sequences with optional
// block-causal masking and key padding. Multi-head: the feature dim is split
// into `heads` contiguous column slices.

#include <vector>

#include "charblock/numcore/tape.hpp"

namespace charblock {

template <typename Scalar>
Var<Scalar> attention(Var<Scalar> q, Var<Scalar> k, Var<Scalar> v, int heads,
                      int len_q, int len_k, bool causal,
                      const std::vector<char>* key_pad = nullptr) {
  auto& t = *q.tape;
  check(k.tape == &t && v.tape == &t, "attention: vars must share a tape");
  const int d = q.cols();
  check(k.cols() == d && v.cols() == d, "attention: q/k/v widths must match");
  check(heads >= 1 && d % heads == 0, "attention: heads must divide dim");
  detail::check_seq(q.rows(), len_q, "attention(q)");
  detail::check_seq(k.rows(), len_k, "attention(k)");
  const int B = q.rows() / len_q;
  check(k.rows() == static_cast<long>(B) * len_k && v.rows() == k.rows(),
        "attention: batch mismatch");
  if (key_pad) {
    check(static_cast<int>(key_pad->size()) == B * len_k, "attention: key_pad size");
  }
  const int dh = d / heads;
  const Scalar scl = Scalar(1) / std::sqrt(Scalar(dh));
  constexpr Scalar ninf = -std::numeric_limits<Scalar>::infinity();

  Mat<Scalar> y(q.rows(), d);
  std::vector<Mat<Scalar>> attn;  // per (b, h), kept for backward
  attn.reserve(static_cast<size_t>(B) * heads);
  for (int b = 0; b < B; ++b) {
    for (int h = 0; h < heads; ++h) {
      const auto qb = q.value().block(b * len_q, h * dh, len_q, dh);
      const auto kb = k.value().block(b * len_k, h * dh, len_k, dh);
      const auto vb = v.value().block(b * len_k, h * dh, len_k, dh);
      Mat<Scalar> scores = qb * kb.transpose() * scl;
      if (causal) {
        check(len_q == len_k, "attention: causal requires len_q == len_k");
        for (int i = 0; i < len_q; ++i)
          for (int j = i + 1; j < len_k; ++j) scores(i, j) = ninf;
      }
      if (key_pad) {
        for (int j = 0; j < len_k; ++j) {
          if ((*key_pad)[b * len_k + j]) scores.col(j).setConstant(ninf);
        }
      }
      Mat<Scalar> p = softmax_rows_value(scores);
      y.block(b * len_q, h * dh, len_q, dh) = p * vb;
      attn.push_back(std::move(p));
    }
  }

  const bool ng = t.needs_grad(q.id) || t.needs_grad(k.id) || t.needs_grad(v.id);
  auto out = t.push(std::move(y), ng);
  t.set_backward(out.id, [iq = q.id, ik = k.id, iv = v.id, io = out.id, heads, len_q,
                          len_k, B, dh, scl, attn](Tape<Scalar>& tp) {
    const Mat<Scalar>& g = tp.grad(io);
    Mat<Scalar> dq = Mat<Scalar>::Zero(tp.value(iq).rows(), tp.value(iq).cols());
    Mat<Scalar> dk = Mat<Scalar>::Zero(tp.value(ik).rows(), tp.value(ik).cols());
    Mat<Scalar> dv = Mat<Scalar>::Zero(tp.value(iv).rows(), tp.value(iv).cols());
    for (int b = 0; b < B; ++b) {
      for (int h = 0; h < heads; ++h) {
        const Mat<Scalar>& p = attn[static_cast<size_t>(b) * heads + h];
        const auto qb = tp.value(iq).block(b * len_q, h * dh, len_q, dh);
        const auto kb = tp.value(ik).block(b * len_k, h * dh, len_k, dh);
        const auto vb = tp.value(iv).block(b * len_k, h * dh, len_k, dh);
        const auto go = g.block(b * len_q, h * dh, len_q, dh);
        dv.block(b * len_k, h * dh, len_k, dh).noalias() += p.transpose() * go;
        Mat<Scalar> dp = go * vb.transpose();
        Mat<Scalar> ds(len_q, len_k);
        for (int i = 0; i < len_q; ++i) {
          const Scalar dot = dp.row(i).dot(p.row(i));
          ds.row(i) = (p.row(i).array() * (dp.row(i).array() - dot)).matrix();
        }
        dq.block(b * len_q, h * dh, len_q, dh).noalias() += ds * kb * scl;
        dk.block(b * len_k, h * dh, len_k, dh).noalias() += ds.transpose() * qb * scl;
      }
    }
    tp.accum(iq, dq);
    tp.accum(ik, dk);
    tp.accum(iv, dv);
  });
  return out;
}

}  // namespace charblock
