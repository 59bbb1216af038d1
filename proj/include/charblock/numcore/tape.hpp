#pragma once

// Reverse-mode autodiff on dense Eigen matrices. A Tape owns the graph built
// by one forward pass; ops are free functions returning lightweight Var
// handles. Sequence-structured ops (pooling, convolution, attention,
// candidates) treat a (B*L) x d matrix as B stacked length-L sequences.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "charblock/numcore/matrix.hpp"

namespace charblock {

template <typename Scalar>
class Tape;

template <typename Scalar>
struct Var {
  Tape<Scalar>* tape = nullptr;
  int id = -1;

  const Mat<Scalar>& value() const { return tape->value(id); }
  const Mat<Scalar>& grad() const { return tape->grad(id); }
  int rows() const { return static_cast<int>(value().rows()); }
  int cols() const { return static_cast<int>(value().cols()); }
};

template <typename Scalar>
class Tape {
 public:
  using M = Mat<Scalar>;
  using V = Var<Scalar>;

  struct Node {
    M value;
    M grad;  // empty until backward touches this node
    std::function<void(Tape&)> backward;
    bool needs_grad = false;
  };

  V leaf(M value, bool needs_grad = false) { return push(std::move(value), needs_grad); }
  V constant(M value) { return leaf(std::move(value), false); }

  const M& value(int id) const { return nodes_[id].value; }
  const M& grad(int id) const { return nodes_[id].grad; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  int size() const { return static_cast<int>(nodes_.size()); }

  V push(M value, bool needs_grad) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    return V{this, static_cast<int>(nodes_.size()) - 1};
  }

  void set_backward(int id, std::function<void(Tape&)> bw) {
    if (nodes_[id].needs_grad) nodes_[id].backward = std::move(bw);
  }

  // Seeds d(root)/d(root) = 1 and runs the chain rule in reverse creation
  // order. root must be scalar (1x1).
  void backward(V root) {
    check(root.tape == this, "backward: var from another tape");
    const Node& r = nodes_[root.id];
    check(r.value.rows() == 1 && r.value.cols() == 1, "backward: root must be scalar");
    check(r.needs_grad, "backward: root does not depend on any parameter");
    nodes_[root.id].grad = M::Ones(1, 1);
    for (int i = root.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.needs_grad && n.grad.size() != 0 && n.backward) n.backward(*this);
    }
  }

  template <typename Expr>
  void accum(int id, const Expr& g) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) n.grad = M::Zero(n.value.rows(), n.value.cols());
    n.grad += g;
  }

 private:
  std::vector<Node> nodes_;
};

namespace detail {

template <typename Scalar>
Tape<Scalar>& same_tape(Var<Scalar> a, Var<Scalar> b) {
  check(a.tape != nullptr && a.tape == b.tape, "op: vars must share a tape");
  return *a.tape;
}

inline void check_seq(long rows, int seq_len, const char* what) {
  check(seq_len >= 1 && rows % seq_len == 0,
        std::string(what) + ": rows not a multiple of seq_len");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// elementwise and linear ops

template <typename Scalar>
Var<Scalar> add(Var<Scalar> a, Var<Scalar> b) {
  auto& t = detail::same_tape(a, b);
  check(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
  auto out = t.push(a.value() + b.value(), t.needs_grad(a.id) || t.needs_grad(b.id));
  t.set_backward(out.id, [ia = a.id, ib = b.id, io = out.id](Tape<Scalar>& tp) {
    tp.accum(ia, tp.grad(io));
    tp.accum(ib, tp.grad(io));
  });
  return out;
}

template <typename Scalar>
Var<Scalar> operator+(Var<Scalar> a, Var<Scalar> b) {
  return add(a, b);
}

// Adds a 1 x C bias row to every row of a.
template <typename Scalar>
Var<Scalar> add_bias(Var<Scalar> a, Var<Scalar> bias) {
  auto& t = detail::same_tape(a, bias);
  check(bias.rows() == 1 && bias.cols() == a.cols(), "add_bias: bias must be 1 x cols(a)");
  Mat<Scalar> y = a.value().rowwise() + bias.value().row(0);
  auto out = t.push(std::move(y), t.needs_grad(a.id) || t.needs_grad(bias.id));
  t.set_backward(out.id, [ia = a.id, ib = bias.id, io = out.id](Tape<Scalar>& tp) {
    tp.accum(ia, tp.grad(io));
    tp.accum(ib, tp.grad(io).colwise().sum());
  });
  return out;
}

template <typename Scalar>
Var<Scalar> mul(Var<Scalar> a, Var<Scalar> b) {
  auto& t = detail::same_tape(a, b);
  check(a.rows() == b.rows() && a.cols() == b.cols(), "mul: shape mismatch");
  auto out = t.push(a.value().cwiseProduct(b.value()),
                    t.needs_grad(a.id) || t.needs_grad(b.id));
  t.set_backward(out.id, [ia = a.id, ib = b.id, io = out.id](Tape<Scalar>& tp) {
    tp.accum(ia, tp.grad(io).cwiseProduct(tp.value(ib)));
    tp.accum(ib, tp.grad(io).cwiseProduct(tp.value(ia)));
  });
  return out;
}

template <typename Scalar>
Var<Scalar> operator*(Var<Scalar> a, Var<Scalar> b) {
  return mul(a, b);
}

template <typename Scalar>
Var<Scalar> scale(Var<Scalar> a, Scalar c) {
  auto& t = *a.tape;
  auto out = t.push(a.value() * c, t.needs_grad(a.id));
  t.set_backward(out.id, [ia = a.id, io = out.id, c](Tape<Scalar>& tp) {
    tp.accum(ia, tp.grad(io) * c);
  });
  return out;
}

template <typename Scalar>
Var<Scalar> matmul(Var<Scalar> a, Var<Scalar> b) {
  auto& t = detail::same_tape(a, b);
  check(a.cols() == b.rows(), "matmul: inner dims differ");
  auto out = t.push(a.value() * b.value(), t.needs_grad(a.id) || t.needs_grad(b.id));
  t.set_backward(out.id, [ia = a.id, ib = b.id, io = out.id](Tape<Scalar>& tp) {
    tp.accum(ia, tp.grad(io) * tp.value(ib).transpose());
    tp.accum(ib, tp.value(ia).transpose() * tp.grad(io));
  });
  return out;
}

// a * b^T, used for tied output projections.
template <typename Scalar>
Var<Scalar> matmul_bt(Var<Scalar> a, Var<Scalar> b) {
  auto& t = detail::same_tape(a, b);
  check(a.cols() == b.cols(), "matmul_bt: inner dims differ");
  auto out = t.push(a.value() * b.value().transpose(),
                    t.needs_grad(a.id) || t.needs_grad(b.id));
  t.set_backward(out.id, [ia = a.id, ib = b.id, io = out.id](Tape<Scalar>& tp) {
    tp.accum(ia, tp.grad(io) * tp.value(ib));
    tp.accum(ib, tp.grad(io).transpose() * tp.value(ia));
  });
  return out;
}

template <typename Scalar>
Var<Scalar> tanh(Var<Scalar> a) {
  auto& t = *a.tape;
  auto out = t.push(a.value().array().tanh().matrix(), t.needs_grad(a.id));
  t.set_backward(out.id, [ia = a.id, io = out.id](Tape<Scalar>& tp) {
    const auto& y = tp.value(io).array();
    tp.accum(ia, (tp.grad(io).array() * (Scalar(1) - y.square())).matrix());
  });
  return out;
}

template <typename Scalar>
Var<Scalar> sigmoid(Var<Scalar> a) {
  auto& t = *a.tape;
  Mat<Scalar> y = (Scalar(1) / (Scalar(1) + (-a.value().array()).exp())).matrix();
  auto out = t.push(std::move(y), t.needs_grad(a.id));
  t.set_backward(out.id, [ia = a.id, io = out.id](Tape<Scalar>& tp) {
    const auto& y2 = tp.value(io).array();
    tp.accum(ia, (tp.grad(io).array() * y2 * (Scalar(1) - y2)).matrix());
  });
  return out;
}

template <typename Scalar>
Var<Scalar> relu(Var<Scalar> a) {
  auto& t = *a.tape;
  auto out = t.push(a.value().cwiseMax(Scalar(0)), t.needs_grad(a.id));
  t.set_backward(out.id, [ia = a.id, io = out.id](Tape<Scalar>& tp) {
    const auto mask = (tp.value(ia).array() > Scalar(0)).template cast<Scalar>();
    tp.accum(ia, (tp.grad(io).array() * mask).matrix());
  });
  return out;
}

// ---------------------------------------------------------------------------
// softmax / masking

template <typename Scalar>
Mat<Scalar> softmax_rows_value(const Mat<Scalar>& x) {
  Mat<Scalar> y(x.rows(), x.cols());
  for (int r = 0; r < x.rows(); ++r) {
    const Scalar mx = x.row(r).maxCoeff();
    Eigen::Array<Scalar, 1, Eigen::Dynamic> e = (x.row(r).array() - mx).exp();
    y.row(r) = (e / e.sum()).matrix();
  }
  return y;
}

template <typename Scalar>
Var<Scalar> softmax_rows(Var<Scalar> a) {
  auto& t = *a.tape;
  auto out = t.push(softmax_rows_value(a.value()), t.needs_grad(a.id));
  t.set_backward(out.id, [ia = a.id, io = out.id](Tape<Scalar>& tp) {
    const Mat<Scalar>& y = tp.value(io);
    const Mat<Scalar>& g = tp.grad(io);
    Mat<Scalar> dx(y.rows(), y.cols());
    for (int r = 0; r < y.rows(); ++r) {
      const Scalar dot = g.row(r).dot(y.row(r));
      dx.row(r) = (y.row(r).array() * (g.row(r).array() - dot)).matrix();
    }
    tp.accum(ia, dx);
  });
  return out;
}

using MaskMat = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Replaces entries where mask is true with `fill`; gradient is zero there.
// With fill = -inf followed by softmax_rows, masked entries get exactly 0.
template <typename Scalar>
Var<Scalar> masked_fill(Var<Scalar> a, const MaskMat& mask, Scalar fill) {
  auto& t = *a.tape;
  check(mask.rows() == a.rows() && mask.cols() == a.cols(), "masked_fill: mask shape");
  Mat<Scalar> y = mask.array().select(Mat<Scalar>::Constant(a.rows(), a.cols(), fill),
                                      a.value());
  auto out = t.push(std::move(y), t.needs_grad(a.id));
  t.set_backward(out.id, [ia = a.id, io = out.id, mask](Tape<Scalar>& tp) {
    const Mat<Scalar> zero = Mat<Scalar>::Zero(mask.rows(), mask.cols());
    tp.accum(ia, mask.array().select(zero, tp.grad(io)));
  });
  return out;
}

// ---------------------------------------------------------------------------
// pooling

// Non-overlapping mean over `window` consecutive rows (block pooling).
// Requires window | seq_len so windows never straddle sequences.
template <typename Scalar>
Var<Scalar> mean_pool_rows(Var<Scalar> a, int window, int seq_len) {
  auto& t = *a.tape;
  detail::check_seq(a.rows(), seq_len, "mean_pool_rows");
  check(window >= 1 && seq_len % window == 0, "mean_pool_rows: window must divide seq_len");
  const int rows = a.rows(), cols = a.cols();
  const int out_rows = rows / window;
  Mat<Scalar> y(out_rows, cols);
  for (int r = 0; r < out_rows; ++r) {
    y.row(r) = a.value()
                   .middleRows(r * window, window)
                   .template cast<Acc<Scalar>>()
                   .colwise()
                   .mean()
                   .template cast<Scalar>();
  }
  auto out = t.push(std::move(y), t.needs_grad(a.id));
  t.set_backward(out.id, [ia = a.id, io = out.id, window, rows, cols](Tape<Scalar>& tp) {
    const Mat<Scalar>& g = tp.grad(io);
    Mat<Scalar> dx(rows, cols);
    const Scalar inv = Scalar(1) / Scalar(window);
    for (int r = 0; r < g.rows(); ++r) {
      dx.middleRows(r * window, window) = (g.row(r) * inv).replicate(window, 1);
    }
    tp.accum(ia, dx);
  });
  return out;
}

// Non-overlapping max over `window` consecutive rows, per column.
template <typename Scalar>
Var<Scalar> max_pool_rows(Var<Scalar> a, int window, int seq_len) {
  auto& t = *a.tape;
  detail::check_seq(a.rows(), seq_len, "max_pool_rows");
  check(window >= 1 && seq_len % window == 0, "max_pool_rows: window must divide seq_len");
  const int out_rows = a.rows() / window;
  const int cols = a.cols();
  Mat<Scalar> y(out_rows, cols);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> argmax(out_rows, cols);
  for (int r = 0; r < out_rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      int best = r * window;
      Scalar bv = a.value()(best, c);
      for (int k = 1; k < window; ++k) {
        const Scalar v = a.value()(r * window + k, c);
        if (v > bv) {
          bv = v;
          best = r * window + k;
        }
      }
      y(r, c) = bv;
      argmax(r, c) = best;
    }
  }
  auto out = t.push(std::move(y), t.needs_grad(a.id));
  t.set_backward(out.id,
                 [ia = a.id, io = out.id, argmax, rows = a.rows(), cols](Tape<Scalar>& tp) {
                   const Mat<Scalar>& g = tp.grad(io);
                   Mat<Scalar> dx = Mat<Scalar>::Zero(rows, cols);
                   for (int r = 0; r < g.rows(); ++r)
                     for (int c = 0; c < cols; ++c) dx(argmax(r, c), c) += g(r, c);
                   tp.accum(ia, dx);
                 });
  return out;
}

// ---------------------------------------------------------------------------
// gathers / reshapes

// out.row(r) = a.row(rows[r]); duplicates accumulate on backward.
template <typename Scalar>
Var<Scalar> gather_rows(Var<Scalar> a, std::vector<int> rows) {
  auto& t = *a.tape;
  const int n = static_cast<int>(rows.size());
  Mat<Scalar> y(n, a.cols());
  for (int r = 0; r < n; ++r) {
    check(rows[r] >= 0 && rows[r] < a.rows(), "gather_rows: index out of range");
    y.row(r) = a.value().row(rows[r]);
  }
  auto out = t.push(std::move(y), t.needs_grad(a.id));
  t.set_backward(out.id, [ia = a.id, io = out.id, rows = std::move(rows),
                          arows = a.rows(), cols = a.cols()](Tape<Scalar>& tp) {
    const Mat<Scalar>& g = tp.grad(io);
    Mat<Scalar> dx = Mat<Scalar>::Zero(arows, cols);
    for (int r = 0; r < g.rows(); ++r) dx.row(rows[r]) += g.row(r);
    tp.accum(ia, dx);
  });
  return out;
}

// Token embedding lookup: gather on an id list.
template <typename Scalar>
Var<Scalar> embedding(Var<Scalar> table, const std::vector<int>& ids) {
  for (const int id : ids) {
    check(id >= 0 && id < table.rows(), "embedding: id out of range");
  }
  return gather_rows(table, ids);
}

template <typename Scalar>
Var<Scalar> concat_cols(const std::vector<Var<Scalar>>& parts) {
  check(!parts.empty(), "concat_cols: empty");
  auto& t = *parts[0].tape;
  const int rows = parts[0].rows();
  int cols = 0;
  bool ng = false;
  for (const auto& p : parts) {
    check(p.tape == &t, "concat_cols: vars must share a tape");
    check(p.rows() == rows, "concat_cols: row mismatch");
    cols += p.cols();
    ng = ng || t.needs_grad(p.id);
  }
  Mat<Scalar> y(rows, cols);
  std::vector<int> ids, offs, widths;
  int off = 0;
  for (const auto& p : parts) {
    y.middleCols(off, p.cols()) = p.value();
    ids.push_back(p.id);
    offs.push_back(off);
    widths.push_back(p.cols());
    off += p.cols();
  }
  auto out = t.push(std::move(y), ng);
  t.set_backward(out.id, [ids, offs, widths, io = out.id](Tape<Scalar>& tp) {
    const Mat<Scalar>& g = tp.grad(io);
    for (size_t i = 0; i < ids.size(); ++i) {
      tp.accum(ids[i], g.middleCols(offs[i], widths[i]));
    }
  });
  return out;
}

template <typename Scalar>
Var<Scalar> slice_cols(Var<Scalar> a, int start, int n) {
  auto& t = *a.tape;
  check(start >= 0 && n >= 0 && start + n <= a.cols(), "slice_cols: range");
  Mat<Scalar> y = a.value().middleCols(start, n);
  auto out = t.push(std::move(y), t.needs_grad(a.id));
  t.set_backward(out.id, [ia = a.id, io = out.id, start, n, arows = a.rows(),
                          acols = a.cols()](Tape<Scalar>& tp) {
    Mat<Scalar> dx = Mat<Scalar>::Zero(arows, acols);
    dx.middleCols(start, n) = tp.grad(io);
    tp.accum(ia, dx);
  });
  return out;
}

// m x (f*c) -> (m*f) x c; row r, column block j becomes row r*f + j.
template <typename Scalar>
Var<Scalar> split_cols_to_rows(Var<Scalar> a, int factor) {
  auto& t = *a.tape;
  check(factor >= 1 && a.cols() % factor == 0, "split_cols_to_rows: factor must divide cols");
  const int c = a.cols() / factor;
  Mat<Scalar> y(a.rows() * factor, c);
  for (int r = 0; r < a.rows(); ++r)
    for (int j = 0; j < factor; ++j) y.row(r * factor + j) = a.value().row(r).segment(j * c, c);
  auto out = t.push(std::move(y), t.needs_grad(a.id));
  t.set_backward(out.id, [ia = a.id, io = out.id, factor, c, arows = a.rows()](Tape<Scalar>& tp) {
    const Mat<Scalar>& g = tp.grad(io);
    Mat<Scalar> dx(arows, factor * c);
    for (int r = 0; r < arows; ++r)
      for (int j = 0; j < factor; ++j) dx.row(r).segment(j * c, c) = g.row(r * factor + j);
    tp.accum(ia, dx);
  });
  return out;
}

// steps[t] is B x c; result is (B*T) x c with row b*T + t = steps[t].row(b).
template <typename Scalar>
Var<Scalar> stack_rows_interleaved(const std::vector<Var<Scalar>>& steps) {
  check(!steps.empty(), "stack_rows_interleaved: empty");
  auto& t = *steps[0].tape;
  const int B = steps[0].rows(), c = steps[0].cols();
  const int T = static_cast<int>(steps.size());
  bool ng = false;
  std::vector<int> ids;
  for (const auto& s : steps) {
    check(s.tape == &t && s.rows() == B && s.cols() == c, "stack_rows_interleaved: shape");
    ng = ng || t.needs_grad(s.id);
    ids.push_back(s.id);
  }
  Mat<Scalar> y(B * T, c);
  for (int ts = 0; ts < T; ++ts)
    for (int b = 0; b < B; ++b) y.row(b * T + ts) = steps[ts].value().row(b);
  auto out = t.push(std::move(y), ng);
  t.set_backward(out.id, [ids, io = out.id, B, T](Tape<Scalar>& tp) {
    const Mat<Scalar>& g = tp.grad(io);
    for (int ts = 0; ts < T; ++ts) {
      Mat<Scalar> gs(B, g.cols());
      for (int b = 0; b < B; ++b) gs.row(b) = g.row(b * T + ts);
      tp.accum(ids[ts], gs);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// convolutions

enum class ConvPad { causal, centered };

// Full 1-D convolution over rows within each sequence. Weight is laid out as
// (k*Cin) x Cout with tap u in rows [u*Cin, (u+1)*Cin). causal: out[i] uses
// inputs [i-k+1, i]; centered: k odd, out[i] uses [i-(k-1)/2, i+(k-1)/2].
// Positions outside a sequence contribute zero.
template <typename Scalar>
Var<Scalar> conv1d(Var<Scalar> x, Var<Scalar> w, int k, ConvPad pad, int seq_len) {
  auto& t = detail::same_tape(x, w);
  detail::check_seq(x.rows(), seq_len, "conv1d");
  check(k >= 1, "conv1d: width must be >= 1");
  check(w.rows() == k * x.cols(), "conv1d: weight rows must be k*Cin");
  check(pad == ConvPad::causal || k % 2 == 1, "conv1d: centered width must be odd");
  const int B = x.rows() / seq_len, Cin = x.cols(), Cout = w.cols();
  const int half = (k - 1) / 2;

  auto tap_offset = [pad, half](int u) { return pad == ConvPad::causal ? -u : u - half; };
  // shifted(u): rows aligned so that shifted.row(i) = x.row(i + off) within
  // each sequence, zero outside.
  auto make_shifted = [B, seq_len](const Mat<Scalar>& src, int off) {
    Mat<Scalar> sh = Mat<Scalar>::Zero(src.rows(), src.cols());
    const int lo = std::max(0, -off);
    const int n = seq_len - std::abs(off);
    if (n > 0) {
      for (int b = 0; b < B; ++b) {
        sh.middleRows(b * seq_len + lo, n) = src.middleRows(b * seq_len + lo + off, n);
      }
    }
    return sh;
  };

  Mat<Scalar> y = Mat<Scalar>::Zero(x.rows(), Cout);
  for (int u = 0; u < k; ++u) {
    y.noalias() += make_shifted(x.value(), tap_offset(u)) * w.value().middleRows(u * Cin, Cin);
  }
  auto out = t.push(std::move(y), t.needs_grad(x.id) || t.needs_grad(w.id));
  t.set_backward(out.id, [ix = x.id, iw = w.id, io = out.id, k, Cin, B, seq_len,
                          tap_offset, make_shifted](Tape<Scalar>& tp) {
    const Mat<Scalar>& g = tp.grad(io);
    for (int u = 0; u < k; ++u) {
      const int off = tap_offset(u);
      if (tp.needs_grad(iw)) {
        // dW_u = shifted(x, off)^T * g
        Mat<Scalar> dw = Mat<Scalar>::Zero(k * Cin, g.cols());
        dw.middleRows(u * Cin, Cin) = make_shifted(tp.value(ix), off).transpose() * g;
        tp.accum(iw, dw);
      }
      if (tp.needs_grad(ix)) {
        // dX rows i+off += g.row(i) * W_u^T  (shift g by -off)
        Mat<Scalar> gx = g * tp.value(iw).middleRows(u * Cin, Cin).transpose();
        tp.accum(ix, make_shifted(gx, -off));
      }
    }
  });
  return out;
}

// Depthwise centered convolution: kernel is k x C, out[i,c] =
// sum_u x[i+u-(k-1)/2, c] * kernel(u, c). Used as the GBST positional signal.
template <typename Scalar>
Var<Scalar> depthwise_conv1d(Var<Scalar> x, Var<Scalar> kernel, int seq_len) {
  auto& t = detail::same_tape(x, kernel);
  detail::check_seq(x.rows(), seq_len, "depthwise_conv1d");
  const int k = kernel.rows();
  check(k % 2 == 1, "depthwise_conv1d: width must be odd");
  check(kernel.cols() == x.cols(), "depthwise_conv1d: kernel cols must match x");
  const int B = x.rows() / seq_len, half = (k - 1) / 2;

  auto make_shifted = [B, seq_len](const Mat<Scalar>& src, int off) {
    Mat<Scalar> sh = Mat<Scalar>::Zero(src.rows(), src.cols());
    const int lo = std::max(0, -off);
    const int n = seq_len - std::abs(off);
    if (n > 0) {
      for (int b = 0; b < B; ++b) {
        sh.middleRows(b * seq_len + lo, n) = src.middleRows(b * seq_len + lo + off, n);
      }
    }
    return sh;
  };

  Mat<Scalar> y = Mat<Scalar>::Zero(x.rows(), x.cols());
  for (int u = 0; u < k; ++u) {
    y.array() += make_shifted(x.value(), u - half).array().rowwise() *
                 kernel.value().row(u).array();
  }
  auto out = t.push(std::move(y), t.needs_grad(x.id) || t.needs_grad(kernel.id));
  t.set_backward(out.id, [ix = x.id, ik = kernel.id, io = out.id, k, half,
                          make_shifted](Tape<Scalar>& tp) {
    const Mat<Scalar>& g = tp.grad(io);
    for (int u = 0; u < k; ++u) {
      const int off = u - half;
      if (tp.needs_grad(ik)) {
        Mat<Scalar> prod = make_shifted(tp.value(ix), off).cwiseProduct(g);
        Mat<Scalar> dk = Mat<Scalar>::Zero(k, g.cols());
        dk.row(u) = prod.colwise().sum();
        tp.accum(ik, dk);
      }
      if (tp.needs_grad(ix)) {
        Mat<Scalar> gx = g.array().rowwise() * tp.value(ik).row(u).array();
        tp.accum(ix, make_shifted(gx, -off));
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// normalization

template <typename Scalar>
Var<Scalar> layer_norm(Var<Scalar> x, Var<Scalar> gain, Var<Scalar> bias,
                       Scalar eps = Scalar(1e-5)) {
  auto& t = *x.tape;
  check(gain.rows() == 1 && gain.cols() == x.cols(), "layer_norm: gain shape");
  check(bias.rows() == 1 && bias.cols() == x.cols(), "layer_norm: bias shape");
  const int R = x.rows(), C = x.cols();
  Mat<Scalar> xhat(R, C);
  Mat<Scalar> inv_std(R, 1);
  for (int r = 0; r < R; ++r) {
    const Scalar mu = x.value().row(r).mean();
    const Scalar var = (x.value().row(r).array() - mu).square().mean();
    const Scalar is = Scalar(1) / std::sqrt(var + eps);
    inv_std(r, 0) = is;
    xhat.row(r) = ((x.value().row(r).array() - mu) * is).matrix();
  }
  Mat<Scalar> y = (xhat.array().rowwise() * gain.value().row(0).array()).rowwise() +
                  bias.value().row(0).array();
  auto out = t.push(std::move(y),
                    t.needs_grad(x.id) || t.needs_grad(gain.id) || t.needs_grad(bias.id));
  t.set_backward(out.id, [ix = x.id, ig = gain.id, ib = bias.id, io = out.id, xhat,
                          inv_std](Tape<Scalar>& tp) {
    const Mat<Scalar>& g = tp.grad(io);
    tp.accum(ib, g.colwise().sum());
    tp.accum(ig, g.cwiseProduct(xhat).colwise().sum());
    if (tp.needs_grad(ix)) {
      const int R = g.rows(), C = g.cols();
      Mat<Scalar> dx(R, C);
      for (int r = 0; r < R; ++r) {
        Eigen::Array<Scalar, 1, Eigen::Dynamic> dxhat =
            g.row(r).array() * tp.value(ig).row(0).array();
        const Scalar m1 = dxhat.mean();
        const Scalar m2 = (dxhat * xhat.row(r).array()).mean();
        dx.row(r) =
            ((dxhat - m1 - xhat.row(r).array() * m2) * inv_std(r, 0)).matrix();
      }
      tp.accum(ix, dx);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// dropout

template <typename Scalar>
Var<Scalar> dropout(Var<Scalar> a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  check(rate < 1.0, "dropout: rate must be < 1");
  auto& t = *a.tape;
  const Scalar keep = Scalar(1.0 - rate);
  Mat<Scalar> mask(a.rows(), a.cols());
  for (int c = 0; c < a.cols(); ++c)
    for (int r = 0; r < a.rows(); ++r)
      mask(r, c) = rng.uniform() < rate ? Scalar(0) : Scalar(1) / keep;
  auto out = t.push(a.value().cwiseProduct(mask), t.needs_grad(a.id));
  t.set_backward(out.id, [ia = a.id, io = out.id, mask](Tape<Scalar>& tp) {
    tp.accum(ia, tp.grad(io).cwiseProduct(mask));
  });
  return out;
}

// ---------------------------------------------------------------------------
// scalar reductions

// sum(a .* w) -> 1x1; the standard scalarizer for gradient checks.
template <typename Scalar>
Var<Scalar> weighted_sum(Var<Scalar> a, const Mat<Scalar>& w) {
  auto& t = *a.tape;
  check(w.rows() == a.rows() && w.cols() == a.cols(), "weighted_sum: shape");
  Mat<Scalar> y(1, 1);
  y(0, 0) = a.value().cwiseProduct(w).sum();
  auto out = t.push(std::move(y), t.needs_grad(a.id));
  t.set_backward(out.id, [ia = a.id, io = out.id, w](Tape<Scalar>& tp) {
    tp.accum(ia, w * tp.grad(io)(0, 0));
  });
  return out;
}

template <typename Scalar>
Var<Scalar> sum_all(Var<Scalar> a) {
  return weighted_sum(a, Mat<Scalar>(Mat<Scalar>::Ones(a.rows(), a.cols())));
}

}  // namespace charblock
