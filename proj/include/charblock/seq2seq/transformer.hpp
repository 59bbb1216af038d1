#pragma once

// Pre-LN transformer encoder/decoder stacks over block sequences.

#include <string>
#include <vector>

#include "charblock/numcore/attention.hpp"
#include "charblock/numcore/param_store.hpp"

namespace charblock {

template <typename Scalar>
void init_linear(ParamStore<Scalar>& store, const std::string& name, int in, int out,
                 Rng& rng) {
  store.add(name + ".w", rng.xavier<Scalar>(in, out));
  store.add(name + ".b", Mat<Scalar>::Zero(1, out));
}

template <typename Scalar>
Var<Scalar> linear(TapeParams<Scalar>& p, const std::string& name, Var<Scalar> x) {
  return add_bias(matmul(x, p[name + ".w"]), p[name + ".b"]);
}

template <typename Scalar>
void init_layer_norm(ParamStore<Scalar>& store, const std::string& name, int dim) {
  store.add(name + ".g", Mat<Scalar>::Ones(1, dim));
  store.add(name + ".b", Mat<Scalar>::Zero(1, dim));
}

template <typename Scalar>
Var<Scalar> norm(TapeParams<Scalar>& p, const std::string& name, Var<Scalar> x) {
  return layer_norm(x, p[name + ".g"], p[name + ".b"]);
}

template <typename Scalar>
void init_mha(ParamStore<Scalar>& store, const std::string& name, int dim, Rng& rng) {
  init_linear(store, name + ".q", dim, dim, rng);
  // No key bias: a constant key shift cancels in the row softmax.
  store.add(name + ".k.w", rng.xavier<Scalar>(dim, dim));
  init_linear(store, name + ".v", dim, dim, rng);
  init_linear(store, name + ".o", dim, dim, rng);
}

template <typename Scalar>
Var<Scalar> mha(TapeParams<Scalar>& p, const std::string& name, Var<Scalar> x_q,
                Var<Scalar> x_kv, int heads, int len_q, int len_k, bool causal,
                const std::vector<char>* key_pad) {
  Var<Scalar> q = linear(p, name + ".q", x_q);
  Var<Scalar> k = matmul(x_kv, p[name + ".k.w"]);
  Var<Scalar> v = linear(p, name + ".v", x_kv);
  Var<Scalar> o = attention(q, k, v, heads, len_q, len_k, causal, key_pad);
  return linear(p, name + ".o", o);
}

template <typename Scalar>
void init_ffn(ParamStore<Scalar>& store, const std::string& name, int dim, int hidden,
              Rng& rng) {
  init_linear(store, name + ".in", dim, hidden, rng);
  init_linear(store, name + ".out", hidden, dim, rng);
}

template <typename Scalar>
Var<Scalar> ffn(TapeParams<Scalar>& p, const std::string& name, Var<Scalar> x) {
  return linear(p, name + ".out", relu(linear(p, name + ".in", x)));
}

struct StackContext {
  int heads = 4;
  double dropout = 0.0;
  bool training = false;
  Rng* dropout_rng = nullptr;
};

template <typename Scalar>
Var<Scalar> maybe_dropout(Var<Scalar> x, const StackContext& ctx) {
  if (!ctx.training || ctx.dropout <= 0.0 || ctx.dropout_rng == nullptr) return x;
  return dropout(x, ctx.dropout, *ctx.dropout_rng);
}

template <typename Scalar>
void init_encoder_layer(ParamStore<Scalar>& store, const std::string& name, int dim,
                        int ffn_dim, Rng& rng) {
  init_layer_norm<Scalar>(store, name + ".ln1", dim);
  init_mha(store, name + ".attn", dim, rng);
  init_layer_norm<Scalar>(store, name + ".ln2", dim);
  init_ffn(store, name + ".ffn", dim, ffn_dim, rng);
}

template <typename Scalar>
Var<Scalar> encoder_layer(TapeParams<Scalar>& p, const std::string& name, Var<Scalar> x,
                          int len, const std::vector<char>* pad, const StackContext& ctx) {
  Var<Scalar> h = norm(p, name + ".ln1", x);
  x = add(x, maybe_dropout(mha(p, name + ".attn", h, h, ctx.heads, len, len, false, pad), ctx));
  x = add(x, maybe_dropout(ffn(p, name + ".ffn", norm(p, name + ".ln2", x)), ctx));
  return x;
}

template <typename Scalar>
void init_decoder_layer(ParamStore<Scalar>& store, const std::string& name, int dim,
                        int ffn_dim, Rng& rng) {
  init_layer_norm<Scalar>(store, name + ".ln1", dim);
  init_mha(store, name + ".self", dim, rng);
  init_layer_norm<Scalar>(store, name + ".ln2", dim);
  init_mha(store, name + ".cross", dim, rng);
  init_layer_norm<Scalar>(store, name + ".ln3", dim);
  init_ffn(store, name + ".ffn", dim, ffn_dim, rng);
}

// Block-level causal self-attention, then cross-attention to the encoder
// memory, then the feed-forward, all pre-norm with residuals.
template <typename Scalar>
Var<Scalar> decoder_layer(TapeParams<Scalar>& p, const std::string& name, Var<Scalar> x,
                          int len, const std::vector<char>* self_pad, Var<Scalar> memory,
                          int mem_len, const std::vector<char>* mem_pad,
                          const StackContext& ctx) {
  Var<Scalar> h = norm(p, name + ".ln1", x);
  x = add(x, maybe_dropout(
                 mha(p, name + ".self", h, h, ctx.heads, len, len, true, self_pad), ctx));
  x = add(x, maybe_dropout(mha(p, name + ".cross", norm(p, name + ".ln2", x), memory,
                               ctx.heads, len, mem_len, false, mem_pad),
                           ctx));
  x = add(x, maybe_dropout(ffn(p, name + ".ffn", norm(p, name + ".ln3", x)), ctx));
  return x;
}

}  // namespace charblock
