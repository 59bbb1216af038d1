#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "charblock/numcore/matrix.hpp"

namespace charblock {

enum class Variant { non_causal, padding, removal, masking, lee };
enum class PosKind { conv, sinusoidal };

std::string to_string(Variant v);
std::string to_string(PosKind p);
Variant variant_from_string(const std::string& s);
PosKind pos_kind_from_string(const std::string& s);

// Decoder-side default n-gram orders: {1..min(4, delta)}. Encoders keep
// {1..4} regardless of delta.
inline std::vector<int> default_orders(int delta, bool decoder_role) {
  const int hi = decoder_role ? std::min(4, delta) : 4;
  std::vector<int> orders;
  for (int n = 1; n <= hi; ++n) orders.push_back(n);
  return orders;
}

// Removal keeps order n iff n divides delta, so windows never straddle
// block boundaries. Other variants keep all decoder defaults.
inline std::vector<int> kept_orders(int delta, Variant variant) {
  check(delta >= 1, "kept_orders: delta must be >= 1");
  std::vector<int> orders;
  for (const int n : default_orders(delta, /*decoder_role=*/true)) {
    if (variant != Variant::removal || delta % n == 0) orders.push_back(n);
  }
  return orders;
}

struct DownsamplerConfig {
  int delta = 1;
  std::vector<int> orders;  // kept n-gram orders, ascending (unused by lee)
  Variant variant = Variant::non_causal;
  PosKind pos_embedding = PosKind::sinusoidal;
  int model_dim = 64;
  int conv_kernel = 0;  // positional conv width; 0 means 2*delta-1
  std::vector<int> lee_kernel_widths = {1, 2, 3, 4};

  int effective_conv_kernel() const { return conv_kernel > 0 ? conv_kernel : 2 * delta - 1; }

  void validate() const {
    check(delta >= 1, "DownsamplerConfig: delta must be >= 1");
    check(model_dim >= 1, "DownsamplerConfig: model_dim must be >= 1");
    if (variant == Variant::lee) {
      check(pos_embedding == PosKind::sinusoidal, "DownsamplerConfig: lee uses sinusoidal positions");
      check(!lee_kernel_widths.empty(), "DownsamplerConfig: lee needs kernel widths");
      for (const int k : lee_kernel_widths) {
        check(k >= 1, "DownsamplerConfig: lee kernel widths must be >= 1");
      }
      check(model_dim % static_cast<int>(lee_kernel_widths.size()) == 0,
            "DownsamplerConfig: model_dim must split evenly across lee kernels");
      return;
    }
    check(!orders.empty(), "DownsamplerConfig: orders must be non-empty");
    check(std::is_sorted(orders.begin(), orders.end()), "DownsamplerConfig: orders ascending");
    for (size_t i = 0; i < orders.size(); ++i) {
      check(orders[i] >= 1, "DownsamplerConfig: orders must be >= 1");
      check(i == 0 || orders[i] != orders[i - 1], "DownsamplerConfig: orders must be unique");
    }
    if (variant == Variant::removal) {
      for (const int n : orders) {
        check(delta % n == 0, "DownsamplerConfig: removal keeps only orders dividing delta");
      }
    }
    if (variant == Variant::removal || variant == Variant::masking ||
        variant == Variant::padding) {
      check(pos_embedding == PosKind::sinusoidal,
            "DownsamplerConfig: causal patches require sinusoidal positions");
    }
    if (pos_embedding == PosKind::conv) {
      check(effective_conv_kernel() % 2 == 1, "DownsamplerConfig: conv kernel must be odd");
    }
  }
};

// Decoder-role config with default orders for the variant.
inline DownsamplerConfig decoder_config(int delta, Variant variant,
                                        PosKind pos = PosKind::sinusoidal,
                                        int model_dim = 64) {
  DownsamplerConfig c;
  c.delta = delta;
  c.variant = variant;
  c.pos_embedding = variant == Variant::lee ? PosKind::sinusoidal : pos;
  c.model_dim = model_dim;
  c.orders = kept_orders(delta, variant);
  c.validate();
  return c;
}

// Encoder-role config: full {1..4} orders (no causality requirement).
inline DownsamplerConfig encoder_config(int delta, Variant variant,
                                        PosKind pos = PosKind::sinusoidal,
                                        int model_dim = 64) {
  DownsamplerConfig c;
  c.delta = delta;
  c.variant = variant;
  c.pos_embedding = variant == Variant::lee ? PosKind::sinusoidal : pos;
  c.model_dim = model_dim;
  c.orders = variant == Variant::removal ? kept_orders(delta, variant)
                                         : default_orders(delta, /*decoder_role=*/false);
  c.validate();
  return c;
}

// Decoder context construction: left-pad BOS tokens (2*delta for the padding
// variant, delta otherwise) and truncate on the right to the original length.
inline int context_pad_multiplier(Variant variant) {
  return variant == Variant::padding ? 2 : 1;
}

std::vector<int> causal_context(const std::vector<int>& tokens, int delta, Variant variant);
std::vector<int> causal_context(const std::vector<int>& tokens, int pad_len);

}  // namespace charblock
