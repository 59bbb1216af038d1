#pragma once

// Desk-scale encoder-decoder: embeddings -> downsampler -> transformer stack
// on both sides, with either a direct per-block output head (delta=1) or the
// two-step recurrent head that emits characters from block hidden states.

#include <string>
#include <vector>

#include "charblock/bytedata.hpp"
#include "charblock/downsamplers/layers.hpp"
#include "charblock/numcore/loss.hpp"
#include "charblock/numcore/optimizer.hpp"
#include "charblock/seq2seq/config.hpp"
#include "charblock/seq2seq/transformer.hpp"

namespace charblock {

template <typename Scalar>
struct LstmState {
  Mat<Scalar> h;
  Mat<Scalar> c;

  static LstmState zero(int batch, int dim) {
    return {Mat<Scalar>::Zero(batch, dim), Mat<Scalar>::Zero(batch, dim)};
  }
};

template <typename Scalar>
class Seq2Seq {
 public:
  using M = Mat<Scalar>;

  explicit Seq2Seq(const ModelConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    Rng rng(seed);
    const int d = config_.dims.model_dim;
    store_.add("enc.emb", rng.normal<Scalar>(config_.vocab_size, d, 1.0));
    store_.add("dec.emb", rng.normal<Scalar>(config_.vocab_size, d, 1.0));
    init_downsampler(store_, config_.encoder, "enc.ds.", rng);
    init_downsampler(store_, config_.decoder, "dec.ds.", rng);
    for (int l = 0; l < config_.dims.layers; ++l) {
      init_encoder_layer(store_, "enc.l" + std::to_string(l), d, config_.dims.ffn_dim, rng);
      init_decoder_layer(store_, "dec.l" + std::to_string(l), d, config_.dims.ffn_dim, rng);
    }
    init_layer_norm<Scalar>(store_, "enc.norm_out", d);
    init_layer_norm<Scalar>(store_, "dec.norm_out", d);
    if (config_.head == DecoderHead::two_step) {
      // Gate order i,f,g,o; forget bias starts at 1.
      store_.add("head.lstm.wx", rng.xavier<Scalar>(2 * d, 4 * d));
      store_.add("head.lstm.wh", rng.xavier<Scalar>(d, 4 * d));
      M bias = M::Zero(1, 4 * d);
      bias.middleCols(d, d).setOnes();
      store_.add("head.lstm.b", bias);
    }
    if (!config_.tie_embeddings) {
      init_linear(store_, "head.out", d, config_.vocab_size, rng);
    } else {
      store_.add("head.out_b", M::Zero(1, config_.vocab_size));
    }
  }

  Seq2Seq(const ModelConfig& config, ParamStore<Scalar> params)
      : config_(config), store_(std::move(params)) {
    config_.validate();
  }

  const ModelConfig& config() const { return config_; }
  ParamStore<Scalar>& params() { return store_; }
  const ParamStore<Scalar>& params() const { return store_; }

  // ---------------------------------------------------------------------
  // teacher-forced forward

  struct TeacherForward {
    Var<Scalar> logits;        // (B * Lt) x V, row b*Lt + t predicts target t
    std::vector<int> targets;  // flattened gold ids (PAD at padding)
    int batch = 0;
    int tgt_len = 0;
  };

  TeacherForward teacher_forward(TapeParams<Scalar>& p, const Batch& batch,
                                 bool training = false, Rng* dropout_rng = nullptr) const {
    StackContext ctx{config_.dims.heads, config_.dims.dropout, training, dropout_rng};
    const int B = batch.size();
    const int Ls = batch.src_len(), Lt = batch.tgt_len();
    check(B >= 1, "teacher_forward: empty batch");
    check(Ls % config_.encoder.delta == 0, "teacher_forward: src not padded to delta");
    check(Lt % config_.decoder.delta == 0, "teacher_forward: tgt not padded to delta");

    std::vector<int> src_flat;
    src_flat.reserve(B * Ls);
    for (const auto& row : batch.src) src_flat.insert(src_flat.end(), row.begin(), row.end());
    const int me = Ls / config_.encoder.delta;
    std::vector<char> enc_pad = block_pad_mask(batch.src_pad_mask, config_.encoder.delta);
    Var<Scalar> memory = encode(p, src_flat, Ls, me, &enc_pad, ctx);

    const int md = Lt / config_.decoder.delta;
    std::vector<int> ctx_flat, prev_flat, tgt_flat;
    ctx_flat.reserve(B * Lt);
    prev_flat.reserve(B * Lt);
    tgt_flat.reserve(B * Lt);
    for (const auto& row : batch.tgt) {
      const std::vector<int> shifted =
          causal_context(row, config_.decoder.delta, config_.decoder.variant);
      ctx_flat.insert(ctx_flat.end(), shifted.begin(), shifted.end());
      prev_flat.push_back(kBosId);
      for (size_t i = 0; i + 1 < row.size(); ++i) prev_flat.push_back(row[i]);
      tgt_flat.insert(tgt_flat.end(), row.begin(), row.end());
    }
    std::vector<char> dec_pad = context_block_pad_mask(batch.tgt_pad_mask);
    Var<Scalar> hidden = decode(p, ctx_flat, Lt, md, &dec_pad, memory, me, &enc_pad, ctx);

    TeacherForward out;
    out.batch = B;
    out.tgt_len = Lt;
    out.targets = std::move(tgt_flat);
    out.logits = head_logits(p, hidden, prev_flat, B, Lt);
    return out;
  }

  Var<Scalar> teacher_loss(TapeParams<Scalar>& p, const Batch& batch, double smoothing,
                           bool training = false, Rng* dropout_rng = nullptr) const {
    TeacherForward fwd = teacher_forward(p, batch, training, dropout_rng);
    return smoothed_ce(fwd.logits, fwd.targets, smoothing, kPadId);
  }

  // ---------------------------------------------------------------------
  // generation

  struct GenResult {
    ByteSequence out;
    bool truncated = false;
  };

  // Block-synchronous greedy decoding: run the decoder stack on the emitted
  // context, then let the head produce the next delta characters one at a
  // time, feeding each back. With forced_feedback set, the gold character is
  // fed back instead of the argmax (logits still recorded via logit_sink);
  // used to cross-check the teacher-forced and free-running code paths.
  GenResult generate(const ByteSequence& src, int max_len,
                     const std::vector<int>* forced_feedback = nullptr,
                     std::vector<Mat<Scalar>>* logit_sink = nullptr) const {
    StackContext ctx{config_.dims.heads, 0.0, false, nullptr};
    const int delta = config_.decoder.delta;
    const int d = config_.dims.model_dim;

    // Encode once.
    std::vector<ParallelPair> single(1);
    single[0].src = src;
    single[0].tgt.ids = {kEosId};
    Batch eb = batch_pad(single, 1, config_.encoder.delta, delta)[0];
    const int Ls = eb.src_len();
    const int me = Ls / config_.encoder.delta;
    std::vector<char> enc_pad = block_pad_mask(eb.src_pad_mask, config_.encoder.delta);

    M memory;
    {
      Tape<Scalar> tape;
      TapeParams<Scalar> p(tape, store_, false);
      memory = encode(p, eb.src[0], Ls, me, &enc_pad, ctx).value();
    }

    GenResult result;
    if (max_len <= 0) {
      result.truncated = true;
      return result;
    }
    std::vector<int> emitted;
    LstmState<Scalar> state = LstmState<Scalar>::zero(1, d);
    int prev_char = kBosId;

    for (int block = 0;; ++block) {
      const int ctx_len = (block + 1) * delta;
      std::vector<int> context =
          causal_context(padded_to(emitted, ctx_len), delta, config_.decoder.variant);
      Tape<Scalar> tape;
      TapeParams<Scalar> p(tape, store_, false);
      Var<Scalar> mem = tape.constant(memory);
      Var<Scalar> hidden =
          decode(p, context, ctx_len, block + 1, nullptr, mem, me, &enc_pad, ctx);
      const M block_hidden = hidden.value().row(block);

      for (int j = 0; j < delta; ++j) {
        const int t = block * delta + j;
        M logits = config_.head == DecoderHead::two_step
                       ? two_step_logits(block_hidden, prev_char, state)
                       : direct_logits(block_hidden);
        if (logit_sink) logit_sink->push_back(logits);
        int next = 0;
        logits.row(0).maxCoeff(&next);
        if (forced_feedback) {
          next = t < static_cast<int>(forced_feedback->size()) ? (*forced_feedback)[t]
                                                               : kEosId;
        }
        if (next == kEosId) return result;  // mid-block tail is discarded
        result.out.ids.push_back(next);
        emitted.push_back(next);
        prev_char = next;
        if (static_cast<int>(result.out.ids.size()) >= max_len) {
          result.truncated = true;
          return result;
        }
      }
    }
  }

  // ---------------------------------------------------------------------
  // submodules

  Var<Scalar> encode(TapeParams<Scalar>& p, const std::vector<int>& src_flat, int Ls,
                     int me, const std::vector<char>* enc_pad,
                     const StackContext& ctx) const {
    Var<Scalar> E = embedding(p["enc.emb"], src_flat);
    Var<Scalar> blocks = downsample_core(p, config_.encoder, "enc.ds.", E, Ls);
    Var<Scalar> x = add_sinusoidal(blocks, me);  // block-level positions
    for (int l = 0; l < config_.dims.layers; ++l) {
      x = encoder_layer(p, "enc.l" + std::to_string(l), x, me, enc_pad, ctx);
    }
    return norm(p, "enc.norm_out", x);
  }

  Var<Scalar> decode(TapeParams<Scalar>& p, const std::vector<int>& ctx_flat, int Lt,
                     int md, const std::vector<char>* dec_pad, Var<Scalar> memory, int me,
                     const std::vector<char>* enc_pad, const StackContext& ctx) const {
    Var<Scalar> E = embedding(p["dec.emb"], ctx_flat);
    Var<Scalar> blocks = downsample_core(p, config_.decoder, "dec.ds.", E, Lt);
    Var<Scalar> x = add_sinusoidal(blocks, md);
    for (int l = 0; l < config_.dims.layers; ++l) {
      x = decoder_layer(p, "dec.l" + std::to_string(l), x, md, dec_pad, memory, me,
                        enc_pad, ctx);
    }
    return norm(p, "dec.norm_out", x);
  }

  // Head over a teacher-forced batch. Block hidden states are broadcast to
  // their delta character slots; the two-step head additionally consumes the
  // previous character embedding and carries LSTM state across blocks
  // (reset at sequence start only).
  Var<Scalar> head_logits(TapeParams<Scalar>& p, Var<Scalar> hidden,
                          const std::vector<int>& prev_flat, int B, int Lt) const {
    const int delta = config_.decoder.delta;
    const int md = Lt / delta;
    if (config_.head == DecoderHead::direct) {
      check(delta == 1, "direct head requires delta == 1");
      return out_proj(p, hidden);
    }
    const int d = config_.dims.model_dim;
    Var<Scalar> prev_emb_all = embedding(p["dec.emb"], prev_flat);  // (B*Lt) x d
    Var<Scalar> h = p.tape().constant(Mat<Scalar>::Zero(B, d));
    Var<Scalar> c = p.tape().constant(Mat<Scalar>::Zero(B, d));
    std::vector<Var<Scalar>> step_states;
    step_states.reserve(Lt);
    for (int t = 0; t < Lt; ++t) {
      std::vector<int> block_rows(B), char_rows(B);
      for (int b = 0; b < B; ++b) {
        block_rows[b] = b * md + t / delta;
        char_rows[b] = b * Lt + t;
      }
      Var<Scalar> block_h = gather_rows(hidden, block_rows);
      Var<Scalar> prev_emb = gather_rows(prev_emb_all, char_rows);
      lstm_cell(p, concat_cols<Scalar>({block_h, prev_emb}), h, c);
      step_states.push_back(h);
    }
    return out_proj(p, stack_rows_interleaved(step_states));
  }

 private:
  static std::vector<int> padded_to(const std::vector<int>& ids, int len) {
    std::vector<int> out(ids.begin(), ids.end());
    out.resize(len, kPadId);
    return out;
  }

  // Marks blocks whose characters are all PAD.
  static std::vector<char> block_pad_mask(const std::vector<std::vector<bool>>& pad_mask,
                                          int delta) {
    std::vector<char> out;
    for (const auto& row : pad_mask) {
      for (size_t start = 0; start < row.size(); start += delta) {
        char all_pad = 1;
        for (int j = 0; j < delta; ++j) {
          if (!row[start + j]) all_pad = 0;
        }
        out.push_back(all_pad);
      }
    }
    return out;
  }

  // Context blocks shift right by pad_multiplier blocks, so context block m
  // is all-PAD exactly when target block m - shift was.
  std::vector<char> context_block_pad_mask(
      const std::vector<std::vector<bool>>& tgt_pad) const {
    const int delta = config_.decoder.delta;
    const int shift = context_pad_multiplier(config_.decoder.variant);
    std::vector<char> tgt_blocks = block_pad_mask(tgt_pad, delta);
    const int md = static_cast<int>(tgt_pad.empty() ? 0 : tgt_pad[0].size()) / delta;
    std::vector<char> out(tgt_blocks.size(), 0);
    const int B = static_cast<int>(tgt_pad.size());
    for (int b = 0; b < B; ++b) {
      for (int m = 0; m < md; ++m) {
        out[b * md + m] = m >= shift ? tgt_blocks[b * md + m - shift] : 0;
      }
    }
    return out;
  }

  Var<Scalar> out_proj(TapeParams<Scalar>& p, Var<Scalar> x) const {
    if (config_.tie_embeddings) {
      return add_bias(matmul_bt(x, p["dec.emb"]), p["head.out_b"]);
    }
    return linear(p, "head.out", x);
  }

  // One LSTM step over the batch; h and c are replaced with the new state.
  void lstm_cell(TapeParams<Scalar>& p, Var<Scalar> x, Var<Scalar>& h,
                 Var<Scalar>& c) const {
    const int d = config_.dims.model_dim;
    Var<Scalar> gates =
        add_bias(add(matmul(x, p["head.lstm.wx"]), matmul(h, p["head.lstm.wh"])),
                 p["head.lstm.b"]);
    Var<Scalar> i = sigmoid(slice_cols(gates, 0, d));
    Var<Scalar> f = sigmoid(slice_cols(gates, d, d));
    Var<Scalar> g = tanh(slice_cols(gates, 2 * d, d));
    Var<Scalar> o = sigmoid(slice_cols(gates, 3 * d, d));
    c = add(mul(f, c), mul(i, g));
    h = mul(o, tanh(c));
  }

  M two_step_logits(const M& block_hidden, int prev_char, LstmState<Scalar>& state) const {
    const int d = config_.dims.model_dim;
    M x(1, 2 * d);
    x.leftCols(d) = block_hidden;
    x.rightCols(d) = store_.at("dec.emb").row(prev_char);
    Tape<Scalar> tape;
    TapeParams<Scalar> p(tape, store_, false);
    Var<Scalar> xv = tape.constant(x);
    Var<Scalar> h = tape.constant(state.h);
    Var<Scalar> c = tape.constant(state.c);
    lstm_cell(p, xv, h, c);
    state.h = h.value();
    state.c = c.value();
    return out_proj(p, h).value();
  }

  M direct_logits(const M& block_hidden) const {
    Tape<Scalar> tape;
    TapeParams<Scalar> p(tape, store_, false);
    return out_proj(p, tape.constant(block_hidden)).value();
  }

  ModelConfig config_;
  mutable ParamStore<Scalar> store_;
};

}  // namespace charblock
