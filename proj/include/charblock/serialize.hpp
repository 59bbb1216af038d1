#pragma once

// JSON (de)serialization for configs. Unknown keys are rejected everywhere so
// config typos fail loudly.

#include <json.hpp>

#include "charblock/bytedata.hpp"
#include "charblock/leakaudit/probe.hpp"
#include "charblock/numcore/optimizer.hpp"
#include "charblock/seq2seq/config.hpp"

namespace charblock {

using Json = nlohmann::json;

inline void reject_unknown_keys(const Json& j, const std::vector<std::string>& allowed,
                                const std::string& where) {
  check(j.is_object(), where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// DownsamplerConfig

inline Json to_json(const DownsamplerConfig& c) {
  return Json{{"delta", c.delta},
              {"orders", c.orders},
              {"variant", to_string(c.variant)},
              {"pos_embedding", to_string(c.pos_embedding)},
              {"model_dim", c.model_dim},
              {"conv_kernel", c.conv_kernel},
              {"lee_kernel_widths", c.lee_kernel_widths}};
}

inline DownsamplerConfig downsampler_from_json(const Json& j, const std::string& where) {
  reject_unknown_keys(j, {"delta", "orders", "variant", "pos_embedding", "model_dim",
                          "conv_kernel", "lee_kernel_widths"},
                      where);
  DownsamplerConfig c;
  c.delta = j.value("delta", c.delta);
  c.variant = variant_from_string(j.value("variant", to_string(c.variant)));
  c.pos_embedding = pos_kind_from_string(j.value("pos_embedding", to_string(c.pos_embedding)));
  c.model_dim = j.value("model_dim", c.model_dim);
  c.conv_kernel = j.value("conv_kernel", c.conv_kernel);
  if (j.contains("lee_kernel_widths")) {
    c.lee_kernel_widths = j.at("lee_kernel_widths").get<std::vector<int>>();
  }
  if (j.contains("orders") && !j.at("orders").empty()) {
    c.orders = j.at("orders").get<std::vector<int>>();
  } else {
    c.orders = kept_orders(c.delta, c.variant);
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// ModelConfig

inline Json to_json(const ModelConfig& c) {
  return Json{{"layers", c.dims.layers},
              {"model_dim", c.dims.model_dim},
              {"heads", c.dims.heads},
              {"ffn_dim", c.dims.ffn_dim},
              {"dropout", c.dims.dropout},
              {"head", to_string(c.head)},
              {"tie_embeddings", c.tie_embeddings},
              {"allow_non_causal_decoder", c.allow_non_causal_decoder},
              {"vocab_size", c.vocab_size},
              {"encoder", to_json(c.encoder)},
              {"decoder", to_json(c.decoder)}};
}

inline ModelConfig model_from_json(const Json& j, const std::string& where = "model") {
  reject_unknown_keys(j,
                      {"layers", "model_dim", "heads", "ffn_dim", "dropout", "head",
                       "tie_embeddings", "allow_non_causal_decoder", "vocab_size",
                       "encoder", "decoder"},
                      where);
  ModelConfig c;
  c.dims.layers = j.value("layers", c.dims.layers);
  c.dims.model_dim = j.value("model_dim", c.dims.model_dim);
  c.dims.heads = j.value("heads", c.dims.heads);
  c.dims.ffn_dim = j.value("ffn_dim", c.dims.ffn_dim);
  c.dims.dropout = j.value("dropout", c.dims.dropout);
  c.head = head_from_string(j.value("head", to_string(c.head)));
  c.tie_embeddings = j.value("tie_embeddings", c.tie_embeddings);
  c.allow_non_causal_decoder = j.value("allow_non_causal_decoder", c.allow_non_causal_decoder);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  if (j.contains("encoder")) {
    c.encoder = downsampler_from_json(j.at("encoder"), where + ".encoder");
  } else {
    c.encoder = encoder_config(1, Variant::non_causal, PosKind::sinusoidal, c.dims.model_dim);
  }
  if (j.contains("decoder")) {
    c.decoder = downsampler_from_json(j.at("decoder"), where + ".decoder");
  } else {
    c.decoder = decoder_config(1, Variant::removal, PosKind::sinusoidal, c.dims.model_dim);
  }
  c.encoder.model_dim = c.dims.model_dim;
  c.decoder.model_dim = c.dims.model_dim;
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// TrainHyper / ProbeSpec / ProbeHyper

inline Json to_json(const TrainHyper& h) {
  return Json{{"optimizer", h.optimizer == OptimizerKind::adamw ? "adamw" : "adam"},
              {"lr", h.learning_rate},
              {"warmup_steps", h.warmup_steps},
              {"batch_size", h.batch_size},
              {"label_smoothing", h.label_smoothing},
              {"weight_decay", h.weight_decay},
              {"max_steps", h.max_steps},
              {"patience", h.patience},
              {"eval_every", h.eval_every}};
}

inline TrainHyper train_hyper_from_json(const Json& j, const std::string& where = "train") {
  reject_unknown_keys(j,
                      {"optimizer", "lr", "warmup_steps", "batch_size", "label_smoothing",
                       "weight_decay", "max_steps", "patience", "eval_every"},
                      where);
  TrainHyper h;
  const std::string opt = j.value("optimizer", "adam");
  if (opt == "adam") {
    h.optimizer = OptimizerKind::adam;
  } else if (opt == "adamw") {
    h.optimizer = OptimizerKind::adamw;
  } else {
    throw std::invalid_argument(where + ": unknown optimizer '" + opt + "'");
  }
  h.learning_rate = j.value("lr", h.learning_rate);
  h.warmup_steps = j.value("warmup_steps", h.warmup_steps);
  h.batch_size = j.value("batch_size", h.batch_size);
  h.label_smoothing = j.value("label_smoothing", h.label_smoothing);
  h.weight_decay = j.value("weight_decay", h.weight_decay);
  h.max_steps = j.value("max_steps", h.max_steps);
  h.patience = j.value("patience", h.patience);
  h.eval_every = j.value("eval_every", h.eval_every);
  h.validate();
  return h;
}

inline Json to_json(const ProbeSpec& s) {
  return Json{{"seq_len", s.seq_len},
              {"vocab", s.probe_vocab},
              {"delta", s.delta},
              {"pad_multiplier", s.pad_multiplier},
              {"seed", s.seed}};
}

inline ProbeSpec probe_spec_from_json(const Json& j, const std::string& where = "probe") {
  reject_unknown_keys(j, {"seq_len", "vocab", "delta", "pad_multiplier", "seed"}, where);
  ProbeSpec s;
  s.seq_len = j.value("seq_len", s.seq_len);
  s.probe_vocab = j.value("vocab", s.probe_vocab);
  s.delta = j.value("delta", s.delta);
  s.pad_multiplier = j.value("pad_multiplier", s.pad_multiplier);
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

inline Json to_json(const ProbeHyper& h) {
  return Json{{"steps", h.steps},
              {"batch", h.batch},
              {"lr", h.lr},
              {"eval_batches", h.eval_batches}};
}

inline ProbeHyper probe_hyper_from_json(const Json& j,
                                        const std::string& where = "probe_hyper") {
  reject_unknown_keys(j, {"steps", "batch", "lr", "eval_batches"}, where);
  ProbeHyper h;
  h.steps = j.value("steps", h.steps);
  h.batch = j.value("batch", h.batch);
  h.lr = j.value("lr", h.lr);
  h.eval_batches = j.value("eval_batches", h.eval_batches);
  check(h.steps >= 1 && h.batch >= 1 && h.lr > 0 && h.eval_batches >= 1,
        where + ": invalid probe hyperparameters");
  return h;
}

}  // namespace charblock
