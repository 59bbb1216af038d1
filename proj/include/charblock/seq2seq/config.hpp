#pragma once

#include "charblock/bytedata.hpp"
#include "charblock/downsamplers/config.hpp"

namespace charblock {

enum class DecoderHead { direct, two_step };

inline std::string to_string(DecoderHead h) {
  return h == DecoderHead::direct ? "direct" : "two_step";
}

inline DecoderHead head_from_string(const std::string& s) {
  if (s == "direct") return DecoderHead::direct;
  if (s == "two_step") return DecoderHead::two_step;
  throw std::invalid_argument("unknown decoder head: " + s);
}

struct ModelDims {
  int layers = 2;  // per side
  int model_dim = 128;
  int heads = 4;
  int ffn_dim = 256;
  double dropout = 0.0;
};

struct ModelConfig {
  ModelDims dims;
  DownsamplerConfig encoder;
  DownsamplerConfig decoder;
  DecoderHead head = DecoderHead::two_step;
  bool tie_embeddings = false;
  // The cheat demonstration: a non-causal decoder downsampler is rejected
  // unless this is set.
  bool allow_non_causal_decoder = false;
  int vocab_size = kByteVocabSize;

  void validate() const {
    check(dims.layers >= 1 && dims.model_dim >= 1 && dims.ffn_dim >= 1,
          "ModelConfig: bad dims");
    check(dims.heads >= 1 && dims.model_dim % dims.heads == 0,
          "ModelConfig: heads must divide model_dim");
    check(dims.dropout >= 0 && dims.dropout < 1, "ModelConfig: dropout in [0,1)");
    check(vocab_size >= 4, "ModelConfig: vocab must cover the specials");
    check(encoder.model_dim == dims.model_dim && decoder.model_dim == dims.model_dim,
          "ModelConfig: downsampler dims must match model_dim");
    encoder.validate();
    decoder.validate();
    if (decoder.delta > 1) {
      check(head == DecoderHead::two_step,
            "ModelConfig: decoder delta > 1 requires the two_step head");
    }
    const bool causal_variant =
        decoder.variant == Variant::removal || decoder.variant == Variant::masking ||
        decoder.variant == Variant::padding || decoder.variant == Variant::lee;
    if (!causal_variant) {
      check(allow_non_causal_decoder,
            "ModelConfig: non-causal decoder downsampler requires the unsafe flag");
    }
  }
};

// Desk preset: 2+2 layers, width 128, 4 heads, ffn 256. Both sides share the
// same downsampling factor.
inline ModelConfig desk_model(int delta, Variant variant,
                              PosKind pos = PosKind::sinusoidal,
                              DecoderHead head = DecoderHead::two_step,
                              int model_dim = 128) {
  ModelConfig config;
  config.dims.model_dim = model_dim;
  config.encoder = encoder_config(delta, variant, pos, model_dim);
  config.decoder = decoder_config(delta, variant, pos, model_dim);
  config.head = delta > 1 ? DecoderHead::two_step : head;
  return config;
}

}  // namespace charblock
