#pragma once

// The downsampler zoo: GBST (with its causality patches) and the causal
// convolution + max-pool downsampler, plus the linear block upsampler.
// All layers map a (B*L) x d embedding matrix to (B*L/delta) x d blocks.

#include <string>
#include <vector>

#include "charblock/downsamplers/candidates.hpp"
#include "charblock/downsamplers/config.hpp"
#include "charblock/downsamplers/positional.hpp"
#include "charblock/numcore/param_store.hpp"

namespace charblock {

template <typename Scalar>
void init_downsampler(ParamStore<Scalar>& store, const DownsamplerConfig& config,
                      const std::string& prefix, Rng& rng) {
  config.validate();
  const int d = config.model_dim;
  if (config.variant == Variant::lee) {
    const int width_count = static_cast<int>(config.lee_kernel_widths.size());
    const int out = d / width_count;
    for (const int k : config.lee_kernel_widths) {
      store.add(prefix + "conv" + std::to_string(k) + "_w", rng.xavier<Scalar>(k * d, out));
      store.add(prefix + "conv" + std::to_string(k) + "_b", Mat<Scalar>::Zero(1, out));
    }
    return;
  }
  store.add(prefix + "score_w", rng.xavier<Scalar>(d, 1));
  if (config.pos_embedding == PosKind::conv) {
    const int k = config.effective_conv_kernel();
    store.add(prefix + "pos_conv", rng.normal<Scalar>(k, d, 1.0 / std::sqrt(double(k))));
  }
}

// GBST on an embedded sequence:
//   1. add the sinusoidal table (sinusoidal configs only)
//   2. candidate means per kept order (masked means for the masking variant)
//   3. score each candidate with the shared vector, softmax across orders
//   4. mix candidates with the softmax weights
//   5. conv configs add the positional conv signal to the mix
//   6. block mean pooling with window delta
template <typename Scalar>
Var<Scalar> gbst_core(TapeParams<Scalar>& params, const DownsamplerConfig& config,
                      const std::string& prefix, Var<Scalar> E, int seq_len) {
  check(seq_len % config.delta == 0, "gbst_core: length must be divisible by delta");
  Var<Scalar> x = E;
  if (config.pos_embedding == PosKind::sinusoidal) {
    x = add_sinusoidal(x, seq_len);
  }

  std::vector<Var<Scalar>> cands;
  std::vector<Var<Scalar>> scores;
  for (const int n : config.orders) {
    Var<Scalar> c = config.variant == Variant::masking
                        ? masked_ngram_candidates(x, n, config.delta, seq_len)
                        : ngram_candidates(x, n, seq_len);
    cands.push_back(c);
    scores.push_back(matmul(c, params[prefix + "score_w"]));
  }
  Var<Scalar> p = softmax_rows(concat_cols(scores));
  Var<Scalar> mixed = mix_candidates(p, cands);

  if (config.pos_embedding == PosKind::conv) {
    mixed = add(mixed, depthwise_conv1d(E, params[prefix + "pos_conv"], seq_len));
  }
  return mean_pool_rows(mixed, config.delta, seq_len);
}

// Causal convolutions with the configured widths, channels concatenated to
// model_dim, relu, then max pooling with window and stride delta.
template <typename Scalar>
Var<Scalar> lee_core(TapeParams<Scalar>& params, const DownsamplerConfig& config,
                     const std::string& prefix, Var<Scalar> E, int seq_len) {
  check(seq_len % config.delta == 0, "lee_core: length must be divisible by delta");
  Var<Scalar> x = add_sinusoidal(E, seq_len);
  std::vector<Var<Scalar>> features;
  for (const int k : config.lee_kernel_widths) {
    const std::string name = prefix + "conv" + std::to_string(k);
    Var<Scalar> c = conv1d(x, params[name + "_w"], k, ConvPad::causal, seq_len);
    features.push_back(add_bias(c, params[name + "_b"]));
  }
  Var<Scalar> h = relu(concat_cols(features));
  return max_pool_rows(h, config.delta, seq_len);
}

template <typename Scalar>
Var<Scalar> downsample_core(TapeParams<Scalar>& params, const DownsamplerConfig& config,
                            const std::string& prefix, Var<Scalar> E, int seq_len) {
  if (config.variant == Variant::lee) return lee_core(params, config, prefix, E, seq_len);
  return gbst_core(params, config, prefix, E, seq_len);
}

// Token-level entry: embed then downsample. `tokens` is a flattened B*L id
// list over the embedding table named `emb_name`.
template <typename Scalar>
Var<Scalar> downsample_tokens(TapeParams<Scalar>& params, const DownsamplerConfig& config,
                              const std::string& prefix, const std::string& emb_name,
                              const std::vector<int>& tokens, int seq_len) {
  Var<Scalar> E = embedding(params[emb_name], tokens);
  return downsample_core(params, config, prefix, E, seq_len);
}

template <typename Scalar>
void init_upsample(ParamStore<Scalar>& store, const std::string& prefix, int model_dim,
                   int delta, int out_vocab, Rng& rng) {
  store.add(prefix + "w", rng.xavier<Scalar>(model_dim, delta * out_vocab));
  store.add(prefix + "b", Mat<Scalar>::Zero(1, delta * out_vocab));
}

// One affine map d -> delta*V per block, reshaped so block b predicts target
// positions [b*delta, (b+1)*delta). Returns (B*m*delta) x V logits.
template <typename Scalar>
Var<Scalar> upsample_linear(TapeParams<Scalar>& params, const std::string& prefix,
                            Var<Scalar> blocks, int delta, int out_vocab) {
  check(delta >= 1 && out_vocab >= 1, "upsample_linear: bad shape");
  Var<Scalar> flat = add_bias(matmul(blocks, params[prefix + "w"]), params[prefix + "b"]);
  return split_cols_to_rows(flat, delta);
}

}  // namespace charblock
